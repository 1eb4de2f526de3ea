//! Reproducing kernel of the Poisson wavelet transform of order `m`,
//!
//! `Π^m(a,x; b,y) = pref · (ab)^m/(a+b)^{2m} · g_{a+b}^{2m}(x·y)`,
//! `pref = 4^m Σ_n / Γ(2m)`,
//!
//! together with its series form
//! `(4^m/Γ(2m)) Σ_l (ab)^m l^{2m} e^{−(a+b)l} K_l^λ(x·y)` and scans of the
//! localization bounds used by the discretization argument.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::families::{
    int_pow, poisson_multipole, poisson_multipole_dtheta, sum_zonal, FamilyKind, Powers, SeriesOptions, Target,
    WaveletFamily,
};
use crate::special_fn::{gamma_ln, Dimension};
use crate::sphere::{geodesic_distance, SpherePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    dim: Dimension,
    m: u32,
    pref: f64,
}

impl KernelSpec {
    pub fn new(dim: Dimension, m: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::config("m", "kernel order must be ≥ 1"));
        }
        let pref = (m as f64 * 4f64.ln() - gamma_ln(2.0 * m as f64)?).exp() * dim.sigma_n();
        Ok(KernelSpec { dim, m, pref })
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    /// `4^m Σ_n / Γ(2m)`.
    pub fn pref(&self) -> f64 {
        self.pref
    }

    /// `pref · κ² · Σ_n · I_γ` for the matching Poisson family; equals 1.
    pub fn normalization(&self, family: &WaveletFamily) -> f64 {
        self.pref * family.kappa().powi(2) * self.dim.sigma_n() * family.admissibility_constant()
    }

    fn check(&self, a: f64, b: f64) -> Result<()> {
        for s in [a, b] {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Domain(format!("scales must be positive and finite, got {s}")));
            }
        }
        Ok(())
    }

    fn factor(&self, a: f64, b: f64) -> f64 {
        let c = a + b;
        self.pref * (a * b).powi(self.m as i32) / c.powi(2 * self.m as i32)
    }

    /// Closed form at geodesic angle `theta`.
    pub fn closed_at(&self, a: f64, b: f64, theta: f64) -> Result<f64> {
        self.check(a, b)?;
        Ok(self.factor(a, b) * poisson_multipole(self.dim, 2 * self.m, a + b, theta)?)
    }

    /// `∂_θ Π` at geodesic angle `theta`.
    pub fn gradient_at(&self, a: f64, b: f64, theta: f64) -> Result<f64> {
        self.check(a, b)?;
        Ok(self.factor(a, b) * poisson_multipole_dtheta(self.dim, 2 * self.m, a + b, theta)?)
    }

    fn series(&self, a: f64, b: f64, theta: f64, target: Target, opts: &SeriesOptions) -> Result<f64> {
        self.check(a, b)?;
        opts.check_scale(a + b)?;
        let m = self.m;
        let ab = (a * b).powi(m as i32);
        let mut powers = Powers::new((-(a + b)).exp());
        let v = sum_zonal(self.dim, theta, target, 1, opts, |l| {
            int_pow(l, 2 * m) * powers.next_power() * ab
        })?;
        Ok(self.pref / self.dim.sigma_n() * v.value)
    }

    /// Series form at geodesic angle `theta`.
    pub fn series_at(&self, a: f64, b: f64, theta: f64, opts: &SeriesOptions) -> Result<f64> {
        self.series(a, b, theta, Target::Value, opts)
    }

    /// Term-wise differentiated series.
    pub fn series_gradient_at(&self, a: f64, b: f64, theta: f64, opts: &SeriesOptions) -> Result<f64> {
        self.series(a, b, theta, Target::Gradient, opts)
    }
}

/// `Π^m(a,x; b,y)` from the closed form.
pub fn kernel_closed(spec: &KernelSpec, a: f64, x: &SpherePoint, b: f64, y: &SpherePoint) -> Result<f64> {
    spec.closed_at(a, b, geodesic_distance(x, y))
}

/// `Π^m(a,x; b,y)` from the series.
pub fn kernel_series(
    spec: &KernelSpec,
    a: f64,
    x: &SpherePoint,
    b: f64,
    y: &SpherePoint,
    opts: &SeriesOptions,
) -> Result<f64> {
    spec.series_at(a, b, geodesic_distance(x, y), opts)
}

/// Poisson family whose kernel this is.
pub fn family_kind(spec: &KernelSpec) -> FamilyKind {
    FamilyKind::Poisson { m: spec.m }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// `∠ ≤ ω(a + (2−ε̃)b)`, quotient `|Π|(a+b)^{3n+2ε}/(ab)^{n+ε}`.
    Near,
    /// `∠ > ω(a + ε̃b)`, quotient `|Π|∠^{3n+2ε}/(ab)^{n+ε}`.
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    /// `|Π|`.
    Kernel,
    /// `(a+b)|∂_θ Π|`.
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelScanParams {
    pub omega: f64,
    pub epsilon: f64,
    pub eps_tilde: f64,
    /// Largest scale.
    pub b0: f64,
    /// Smallest scale.
    pub b_min: f64,
    pub scales_per_decade: usize,
    pub angles_per_decade: usize,
}

impl Default for KernelScanParams {
    fn default() -> Self {
        KernelScanParams {
            omega: 1.0,
            epsilon: 0.25,
            eps_tilde: 0.25,
            b0: 1.0,
            b_min: 1e-3,
            scales_per_decade: 6,
            angles_per_decade: 24,
        }
    }
}

impl KernelScanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(Error::config("omega", "must be positive"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        if !(self.eps_tilde > 0.0 && self.eps_tilde < 0.5) {
            return Err(Error::config(
                "eps_tilde",
                format!("must lie in (0, 1/2), got {}", self.eps_tilde),
            ));
        }
        if !(self.b_min > 0.0 && self.b0 > self.b_min && self.b0.is_finite()) {
            return Err(Error::config("b0", "need 0 < b_min < b0"));
        }
        if self.scales_per_decade == 0 || self.angles_per_decade == 0 {
            return Err(Error::config("density", "grid densities must be positive"));
        }
        Ok(())
    }

    fn refined(&self) -> Self {
        KernelScanParams {
            scales_per_decade: 2 * self.scales_per_decade,
            angles_per_decade: 2 * self.angles_per_decade,
            ..*self
        }
    }

    fn extended(&self) -> Self {
        KernelScanParams {
            b_min: 0.5 * self.b_min,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBound {
    pub region: Region,
    pub quantity: Quantity,
    /// Empirical constant: sup of the quotient on the scan grid.
    pub d_hat: f64,
    /// Relative change of `d_hat` when both grid densities double.
    pub stability: f64,
    /// `d_hat` with `b_min` halved, divided by `d_hat`.
    pub growth: f64,
    pub argmax_a: f64,
    pub argmax_b: f64,
    pub argmax_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelScanReport {
    pub n: u32,
    pub m: u32,
    pub params: KernelScanParams,
    pub bounds: Vec<KernelBound>,
}

fn geometric(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![hi];
    }
    let step = 10f64.ln() / per_decade as f64;
    let count = ((hi / lo).ln() / step - 1e-9).ceil() as usize;
    let mut out: Vec<f64> = (0..=count).map(|i| hi * (-(i as f64) * step).exp()).collect();
    if let Some(last) = out.last_mut() {
        *last = lo;
    }
    out.reverse();
    out
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    a: f64,
    b: f64,
    angle: f64,
}

fn better(x: Option<Best>, y: Option<Best>) -> Option<Best> {
    match (x, y) {
        (Some(p), Some(q)) => Some(if q.value > p.value { q } else { p }),
        (p, None) => p,
        (None, q) => q,
    }
}

/// Angles checked in a region for scales `(a, b)`.
fn angles(region: Region, p: &KernelScanParams, a: f64, b: f64) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    match region {
        Region::Near => {
            let top = (p.omega * (a + (2.0 - p.eps_tilde) * b)).min(pi);
            let mut v = vec![0.0];
            v.extend(geometric(1e-3 * (a + b), top, p.angles_per_decade));
            v
        }
        Region::Far => {
            let start = p.omega * (a + p.eps_tilde * b);
            if start >= pi {
                return Vec::new();
            }
            geometric(start, pi, p.angles_per_decade)
                .into_iter()
                .filter(|&t| t > start)
                .collect()
        }
    }
}

fn scan_sup(spec: &KernelSpec, region: Region, quantity: Quantity, p: &KernelScanParams) -> Result<Option<Best>> {
    let n = spec.dim.n() as f64;
    let scales = geometric(p.b_min, p.b0, p.scales_per_decade);
    let pairs: Vec<(f64, f64)> = scales
        .iter()
        .flat_map(|&a| scales.iter().map(move |&b| (a, b)))
        .collect();
    let per_pair = exec::map_slice(&pairs, |&(a, b)| -> Result<Option<Best>> {
        let c = a + b;
        let denom = (a * b).powf(n + p.epsilon);
        let mut best = None;
        for angle in angles(region, p, a, b) {
            let raw = match quantity {
                Quantity::Kernel => spec.closed_at(a, b, angle)?.abs(),
                Quantity::Gradient => c * spec.gradient_at(a, b, angle)?.abs(),
            };
            let weight = match region {
                Region::Near => c,
                Region::Far => angle,
            };
            let value = raw * weight.powf(3.0 * n + 2.0 * p.epsilon) / denom;
            best = better(best, Some(Best { value, a, b, angle }));
        }
        Ok(best)
    });
    let mut best = None;
    for item in per_pair {
        best = better(best, item?);
    }
    Ok(best)
}

/// Empirical constants `𝔡̂` for both regions and both quantities.
pub fn kernel_localization_scan(spec: &KernelSpec, params: &KernelScanParams) -> Result<KernelScanReport> {
    params.validate()?;
    let mut bounds = Vec::new();
    for region in [Region::Near, Region::Far] {
        for quantity in [Quantity::Kernel, Quantity::Gradient] {
            let base = scan_sup(spec, region, quantity, params)?;
            let refined = scan_sup(spec, region, quantity, &params.refined())?;
            let extended = scan_sup(spec, region, quantity, &params.extended())?;
            let Some(base) = base else { continue };
            let refined = refined.map_or(base.value, |r| r.value);
            let extended = extended.map_or(base.value, |r| r.value);
            bounds.push(KernelBound {
                region,
                quantity,
                d_hat: base.value,
                stability: (refined - base.value).abs() / refined,
                growth: extended / base.value,
                argmax_a: base.a,
                argmax_b: base.b,
                argmax_angle: base.angle,
            });
        }
    }
    Ok(KernelScanReport {
        n: spec.dim.n(),
        m: spec.m,
        params: *params,
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::make_family;
    use approx::assert_relative_eq;

    fn spec(n: u32, m: u32) -> KernelSpec {
        KernelSpec::new(Dimension::new(n).unwrap(), m).unwrap()
    }

    #[test]
    fn normalization_is_one() {
        for m in 1..=6 {
            let s = spec(2, m);
            let f = make_family(FamilyKind::Poisson { m }, s.dim()).unwrap();
            assert_relative_eq!(s.normalization(&f), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn symmetric_and_diagonal() {
        let s = spec(2, 2);
        let d = s.dim();
        let x = SpherePoint::north(d);
        let y = SpherePoint::at_angle(d, 0.7);
        let k1 = kernel_closed(&s, 0.3, &x, 0.6, &y).unwrap();
        let k2 = kernel_closed(&s, 0.6, &y, 0.3, &x).unwrap();
        assert_relative_eq!(k1, k2, max_relative = 1e-15);
        let a: f64 = 0.5;
        let diag = kernel_closed(&s, a, &x, a, &x).unwrap();
        let expected = s.pref() * 4f64.powi(-2) * poisson_multipole(d, 4, 2.0 * a, 0.0).unwrap();
        assert_relative_eq!(diag, expected, max_relative = 1e-14);
        assert!(diag > 0.0);
    }

    #[test]
    fn closed_matches_series() {
        let s = spec(2, 2);
        let d = s.dim();
        let x = SpherePoint::north(d);
        let y = SpherePoint::at_angle(d, 1.0);
        let opts = SeriesOptions::default();
        let c = kernel_closed(&s, 0.5, &x, 0.5, &y).unwrap();
        let r = kernel_series(&s, 0.5, &x, 0.5, &y, &opts).unwrap();
        assert_relative_eq!(c, r, max_relative = 1e-8);
        let g = s.gradient_at(0.3, 0.4, 0.9).unwrap();
        let gs = s.series_gradient_at(0.3, 0.4, 0.9, &opts).unwrap();
        assert_relative_eq!(g, gs, max_relative = 1e-8);
    }

    #[test]
    fn cauchy_schwarz() {
        let s = spec(3, 2);
        for &(a, b) in &[(0.05, 0.05), (0.05, 0.4), (0.3, 1.0)] {
            let bound = (s.closed_at(a, a, 0.0).unwrap() * s.closed_at(b, b, 0.0).unwrap()).sqrt();
            for i in 0..200 {
                let v = s.closed_at(a, b, i as f64 * 0.0157).unwrap();
                assert!(v.abs() <= bound * (1.0 + 1e-12), "a={a} b={b} i={i}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KernelSpec::new(Dimension::new(2).unwrap(), 0).is_err());
        let p = KernelScanParams {
            eps_tilde: 0.6,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(Error::Config { field, .. }) if field == "eps_tilde"));
        assert!(spec(2, 1).closed_at(0.0, 0.1, 0.2).is_err());
        assert!(spec(2, 1)
            .series_at(1e-4, 1e-4, 0.2, &SeriesOptions::default())
            .is_err());
    }
}
