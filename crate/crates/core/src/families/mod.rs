//! Wavelet families given by a spectral profile: the scale-`a` kernel has
//! Gegenbauer coefficients `κ ((l+λ)/λ) γ(a τ(l))`, i.e.
//! `g_a(cos θ) = κ Σ_l γ(a τ(l)) K_l^λ(cos θ)`.
//!
//! Every API takes the family's own scale variable. For Mexican needlets
//! that variable is `s = a²` (see [`WaveletFamily::scale_from_a`]).

mod admissibility;
mod closed;
mod localization;
mod oracle;
mod series;

pub use admissibility::{admissibility_integral, gamma_tv, TotalVariation};
pub use closed::{poisson_multipole, poisson_multipole_dtheta};
pub use localization::{
    localization_rows, localization_scan, write_scan_csv, LocalizationReport, LocalizationSpec, ScanQuantity, ScanRow,
};
pub use oracle::poisson_multipole_oracle;
pub use series::{SeriesOptions, SeriesValue, A_MIN, L_CAP};

pub(crate) use series::{int_pow, sum_zonal, Powers, Target};

use std::fmt;

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::special_fn::{gamma_ln, Dimension};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `γ(t) = t^m e^{−t}`, `τ(l) = l`, `κ = 1/Σ_n`.
    Poisson { m: u32 },
    /// `γ(t) = t^ν e^{−t}`, `τ(l) = l`, `κ = 1/Σ_n`.
    PoissonFractional { nu: f64 },
    /// `γ(t) = √(2t) e^{−t}`, `τ(l) = l`, `κ = 1`.
    AbelPoisson,
    /// `γ(t) = √(2t) e^{−t}`, `τ(l) = l(l+2λ)`, `κ = 1`.
    GaussWeierstrass,
    /// `γ(s) = s^r e^{−s}`, `τ(l) = l(l+2λ)`, `κ = 1/Σ_n`.
    MexicanNeedlet { r: u32 },
}

impl FamilyKind {
    /// Parses a family name with an optional order (`m`, `ν` or `r`).
    pub fn from_name(name: &str, order: Option<f64>) -> Result<Self> {
        let need =
            |what: &str| order.ok_or_else(|| Error::config("m", format!("family `{name}` needs an order {what}")));
        let integer = |v: f64, field: &str| {
            if v.fract() != 0.0 || !(1.0..=1e6).contains(&v) {
                Err(Error::config(field, format!("order must be an integer ≥ 1, got {v}")))
            } else {
                Ok(v as u32)
            }
        };
        match name {
            "poisson" => {
                let m = need("m")?;
                if m.fract() == 0.0 {
                    Ok(FamilyKind::Poisson { m: integer(m, "m")? })
                } else {
                    Ok(FamilyKind::PoissonFractional { nu: m })
                }
            }
            "poisson_fractional" => Ok(FamilyKind::PoissonFractional { nu: need("ν")? }),
            "abel_poisson" => Ok(FamilyKind::AbelPoisson),
            "gauss_weierstrass" => Ok(FamilyKind::GaussWeierstrass),
            "mexican_needlet" => Ok(FamilyKind::MexicanNeedlet {
                r: integer(need("r")?, "m")?,
            }),
            other => Err(Error::config("family", format!("unknown family `{other}`"))),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::Poisson { m } => write!(f, "poisson({m})"),
            FamilyKind::PoissonFractional { nu } => write!(f, "poisson_fractional({nu})"),
            FamilyKind::AbelPoisson => f.write_str("abel_poisson"),
            FamilyKind::GaussWeierstrass => f.write_str("gauss_weierstrass"),
            FamilyKind::MexicanNeedlet { r } => write!(f, "mexican_needlet({r})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletFamily {
    kind: FamilyKind,
    dim: Dimension,
    kappa: f64,
}

pub fn make_family(kind: FamilyKind, dim: Dimension) -> Result<WaveletFamily> {
    match kind {
        FamilyKind::Poisson { m } if m < 1 => return Err(Error::config("m", "Poisson order must be ≥ 1")),
        FamilyKind::PoissonFractional { nu } if !(nu > 0.0) || !nu.is_finite() => {
            return Err(Error::config(
                "m",
                format!("fractional order must be positive, got {nu}"),
            ))
        }
        FamilyKind::MexicanNeedlet { r } if r < 1 => return Err(Error::config("m", "needlet order must be ≥ 1")),
        _ => {}
    }
    let kappa = match kind {
        FamilyKind::AbelPoisson | FamilyKind::GaussWeierstrass => 1.0,
        _ => 1.0 / dim.sigma_n(),
    };
    Ok(WaveletFamily { kind, dim, kappa })
}

impl WaveletFamily {
    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn id(&self) -> String {
        self.kind.to_string()
    }

    /// The exponent of `t` in the profile: `m`, `ν`, `r`, or `1/2`.
    pub fn order(&self) -> f64 {
        match self.kind {
            FamilyKind::Poisson { m } => m as f64,
            FamilyKind::PoissonFractional { nu } => nu,
            FamilyKind::AbelPoisson | FamilyKind::GaussWeierstrass => 0.5,
            FamilyKind::MexicanNeedlet { r } => r as f64,
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `ln γ(t)` for `t > 0`.
    pub fn profile_ln(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match self.kind {
            FamilyKind::AbelPoisson | FamilyKind::GaussWeierstrass => 0.5 * (2.0 * t).ln() - t,
            _ => self.order() * t.ln() - t,
        }
    }

    /// `γ(t)`.
    pub fn profile(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            self.profile_ln(t).exp()
        }
    }

    /// `τ(l)`.
    pub fn spectral(&self, l: u64) -> f64 {
        let l = l as f64;
        match self.kind {
            FamilyKind::GaussWeierstrass | FamilyKind::MexicanNeedlet { .. } => l * (l + 2.0 * self.dim.lambda()),
            _ => l,
        }
    }

    /// Family scale variable for a geometric scale `a` (`a²` for needlets).
    pub fn scale_from_a(&self, a: f64) -> f64 {
        match self.kind {
            FamilyKind::MexicanNeedlet { .. } => a * a,
            _ => a,
        }
    }

    /// `γ(a τ(l))`.
    pub fn spectral_weight(&self, a: f64, l: u64) -> f64 {
        self.profile(a * self.spectral(l))
    }

    /// Gegenbauer coefficient `κ ((l+λ)/λ) γ(a τ(l))` of the scale-`a` kernel.
    pub fn coefficient(&self, a: f64, l: u64) -> f64 {
        let lambda = self.dim.lambda();
        self.kappa * (l as f64 + lambda) / lambda * self.spectral_weight(a, l)
    }

    /// True when `γ(0) = 0`, so the `l = 0` component vanishes.
    pub fn zero_mean(&self) -> bool {
        self.profile(0.0) == 0.0
    }

    pub fn l_min(&self) -> u64 {
        if self.zero_mean() {
            1
        } else {
            0
        }
    }

    /// `I_γ = ∫₀^∞ γ(t)² dt/t` in closed form.
    pub fn admissibility_constant(&self) -> f64 {
        match self.kind {
            FamilyKind::AbelPoisson | FamilyKind::GaussWeierstrass => 1.0,
            _ => {
                let p = self.order();
                (gamma_ln(2.0 * p).expect("positive order") - p * 4f64.ln()).exp()
            }
        }
    }

    /// `C = (κ² I_γ)^{−1}`.
    pub fn frame_constant(&self) -> f64 {
        1.0 / (self.kappa * self.kappa * self.admissibility_constant())
    }

    /// Series weights without `κ`, in double-double, for `l = 0, 1, …`.
    fn weights(&self, a: f64) -> impl FnMut(u64) -> TwoFloat + '_ {
        let r = (-a).exp();
        let mut powers = Powers::new(r);
        move |l| {
            let tail = powers.next_power();
            match self.kind {
                FamilyKind::Poisson { m } => int_pow(l, m) * tail * a.powi(m as i32),
                FamilyKind::PoissonFractional { nu } => tail * (a * l as f64).powf(nu),
                FamilyKind::AbelPoisson => tail * (2.0 * a * l as f64).sqrt(),
                _ => TwoFloat::from(self.spectral_weight(a, l)),
            }
        }
    }

    /// `g_a(cos θ)` from the truncated series.
    pub fn eval_zonal(&self, a: f64, theta: f64, opts: &SeriesOptions) -> Result<SeriesValue> {
        opts.check_scale(a)?;
        let v = sum_zonal(self.dim, theta, Target::Value, self.l_min(), opts, self.weights(a))?;
        Ok(SeriesValue {
            value: self.kappa * v.value,
            ..v
        })
    }

    /// `∂_θ g_a(cos θ)`, the modulus of the surface gradient up to sign.
    pub fn eval_gradient(&self, a: f64, theta: f64, opts: &SeriesOptions) -> Result<SeriesValue> {
        opts.check_scale(a)?;
        let v = sum_zonal(self.dim, theta, Target::Gradient, self.l_min(), opts, self.weights(a))?;
        Ok(SeriesValue {
            value: self.kappa * v.value,
            ..v
        })
    }
}

/// `(1/Σ_n)(1−r²)/(1−2r cos θ+r²)^{(n+1)/2}`, with the denominator written as
/// `(1−r)² + 4r sin²(θ/2)`.
pub fn poisson_kernel(dim: Dimension, r: f64, theta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("Poisson kernel needs 0 ≤ r < 1, got {r}")));
    }
    let half = (0.5 * theta).sin();
    let d = (1.0 - r) * (1.0 - r) + 4.0 * r * half * half;
    Ok((1.0 - r * r) / d.powf((dim.n() as f64 + 1.0) / 2.0) / dim.sigma_n())
}

/// `(1/Σ_n) Σ_l r^l K_l^λ(cos θ)`.
pub fn poisson_kernel_series(dim: Dimension, r: f64, theta: f64, opts: &SeriesOptions) -> Result<SeriesValue> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("Poisson kernel needs 0 ≤ r < 1, got {r}")));
    }
    let mut powers = Powers::new(r);
    let v = sum_zonal(dim, theta, Target::Value, 0, opts, |_| powers.next_power())?;
    Ok(SeriesValue {
        value: v.value / dim.sigma_n(),
        ..v
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::{gauss_jacobi, gegenbauer, gegenbauer_norm_sq};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn all_kinds() -> Vec<FamilyKind> {
        vec![
            FamilyKind::Poisson { m: 1 },
            FamilyKind::Poisson { m: 3 },
            FamilyKind::PoissonFractional { nu: 1.5 },
            FamilyKind::AbelPoisson,
            FamilyKind::GaussWeierstrass,
            FamilyKind::MexicanNeedlet { r: 2 },
        ]
    }

    #[test]
    fn profiles_and_spectral_maps() {
        let p1 = make_family(FamilyKind::Poisson { m: 1 }, dim(2)).unwrap();
        assert_relative_eq!(p1.profile(2.0), 2.0 * (-2.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(p1.profile(2.0), 0.270_670_566_473_225_4, max_relative = 1e-14);
        let ap = make_family(FamilyKind::AbelPoisson, dim(2)).unwrap();
        assert_eq!(ap.profile(0.0), 0.0);
        assert!(ap.zero_mean());
        assert_eq!(ap.kappa(), 1.0);
        let gw = make_family(FamilyKind::GaussWeierstrass, dim(2)).unwrap();
        assert_eq!(gw.spectral(3), 12.0);
        assert_relative_eq!(p1.kappa(), 1.0 / (4.0 * PI));
    }

    #[test]
    fn invalid_orders() {
        assert!(make_family(FamilyKind::Poisson { m: 0 }, dim(2)).is_err());
        assert!(make_family(FamilyKind::PoissonFractional { nu: -1.0 }, dim(2)).is_err());
        assert!(make_family(FamilyKind::MexicanNeedlet { r: 0 }, dim(2)).is_err());
        assert!(FamilyKind::from_name("poisson", None).is_err());
        assert!(FamilyKind::from_name("haar", Some(1.0)).is_err());
        assert_eq!(
            FamilyKind::from_name("poisson", Some(2.5)).unwrap(),
            FamilyKind::PoissonFractional { nu: 2.5 }
        );
    }

    #[test]
    fn admissibility_values() {
        let cases = [
            (FamilyKind::Poisson { m: 1 }, 0.25),
            (FamilyKind::Poisson { m: 2 }, 0.375),
            (FamilyKind::AbelPoisson, 1.0),
            (FamilyKind::GaussWeierstrass, 1.0),
        ];
        for (kind, expected) in cases {
            let f = make_family(kind, dim(2)).unwrap();
            assert_relative_eq!(admissibility_integral(&f).unwrap(), expected, max_relative = 1e-10);
            assert_relative_eq!(f.admissibility_constant(), expected, max_relative = 1e-14);
        }
        for kind in all_kinds() {
            let f = make_family(kind, dim(3)).unwrap();
            assert_relative_eq!(
                admissibility_integral(&f).unwrap(),
                f.admissibility_constant(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn total_variation() {
        let cases = [
            (FamilyKind::Poisson { m: 1 }, 2.0 * (-2.0f64).exp()),
            (FamilyKind::Poisson { m: 2 }, 2.0 * 16.0 * (-4.0f64).exp()),
            (FamilyKind::AbelPoisson, 2.0 * (-1.0f64).exp()),
        ];
        for (kind, expected) in cases {
            let tv = gamma_tv(&make_family(kind, dim(2)).unwrap()).unwrap();
            assert!(tv.finite);
            assert_relative_eq!(tv.value, expected, max_relative = 1e-9);
        }
        for kind in all_kinds() {
            assert!(gamma_tv(&make_family(kind, dim(2)).unwrap()).unwrap().finite);
        }
    }

    #[test]
    fn poisson_kernel_special_values() {
        let d = dim(3);
        assert_relative_eq!(poisson_kernel(d, 0.0, 1.0).unwrap(), 1.0 / d.sigma_n());
        let r: f64 = 0.6;
        assert_relative_eq!(
            poisson_kernel(d, r, 0.0).unwrap(),
            (1.0 + r) / (1.0 - r).powi(3) / d.sigma_n(),
            max_relative = 1e-14
        );
        assert!(poisson_kernel(d, 1.0, 0.0).is_err());
        let series = poisson_kernel_series(d, 0.9, 0.7, &SeriesOptions::default()).unwrap();
        assert_relative_eq!(series.value, poisson_kernel(d, 0.9, 0.7).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn series_agrees_with_closed_form_and_oracle() {
        let d = dim(2);
        let opts = SeriesOptions::default();
        for m in 1..=3 {
            let f = make_family(FamilyKind::Poisson { m }, d).unwrap();
            for (a, theta) in [(0.5, 0.8), (1.0, 0.0), (0.2, 3.0)] {
                let s = f.eval_zonal(a, theta, &opts).unwrap().value;
                let c = poisson_multipole(d, m, a, theta).unwrap();
                let o = poisson_multipole_oracle(d, m, a, theta).unwrap();
                assert_relative_eq!(s, c, max_relative = 1e-10);
                assert_relative_eq!(s, o, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn large_scale_is_first_degree_dominated() {
        let d = dim(2);
        let a = 20.0;
        for m in 1..=3 {
            let f = make_family(FamilyKind::Poisson { m }, d).unwrap();
            let v = f.eval_zonal(a, 0.0, &SeriesOptions::default()).unwrap().value;
            let lead = f.kappa() * a.powi(m as i32) * (-a).exp() * 3.0;
            assert!((v / lead - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn small_scales_are_rejected() {
        let f = make_family(FamilyKind::Poisson { m: 2 }, dim(2)).unwrap();
        assert!(f.eval_zonal(1e-4, 0.3, &SeriesOptions::default()).is_err());
        let capped = SeriesOptions {
            l_cap: 10,
            ..Default::default()
        };
        assert!(matches!(f.eval_zonal(0.01, 0.3, &capped), Err(Error::Numeric(_))));
    }

    #[test]
    fn zero_mean_families_integrate_to_zero() {
        for n in [2, 3] {
            let d = dim(n);
            let rule = gauss_jacobi(200, d.lambda()).unwrap();
            for kind in all_kinds() {
                let f = make_family(kind, d).unwrap();
                let a = f.scale_from_a(0.3);
                let opts = SeriesOptions::with_tol(1e-14);
                let mean = rule.integrate(|t| f.eval_zonal(a, t.acos(), &opts).unwrap().value);
                let scale = rule.integrate(|t| f.eval_zonal(a, t.acos(), &opts).unwrap().value.abs());
                assert!(mean.abs() < 1e-10 * scale, "{kind}: {mean} vs {scale}");
            }
        }
    }

    #[test]
    fn gegenbauer_coefficients_round_trip() {
        let d = dim(2);
        let lambda = d.lambda();
        let rule = gauss_jacobi(120, lambda).unwrap();
        for kind in all_kinds() {
            let f = make_family(kind, d).unwrap();
            let a = f.scale_from_a(0.4);
            let samples: Vec<f64> = rule
                .nodes
                .iter()
                .map(|t| {
                    f.eval_zonal(a, t.acos(), &SeriesOptions::with_tol(1e-15))
                        .unwrap()
                        .value
                })
                .collect();
            for l in 0..=20u64 {
                let proj: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .zip(&samples)
                    .map(|((t, w), g)| w * g * gegenbauer(l, lambda, *t).unwrap())
                    .sum();
                let coef = proj / gegenbauer_norm_sq(l, lambda).unwrap();
                let expected = f.coefficient(a, l);
                assert!(
                    (coef - expected).abs() <= 1e-8 * expected.abs().max(1e-4),
                    "{kind} l={l}: {coef} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn gradient_checks() {
        let d = dim(2);
        let opts = SeriesOptions::default();
        for kind in all_kinds() {
            let f = make_family(kind, d).unwrap();
            let a = f.scale_from_a(0.5);
            assert_eq!(f.eval_gradient(a, 0.0, &opts).unwrap().value, 0.0);
            let h = 1e-5;
            let fd = (f.eval_zonal(a, 1.0 + h, &opts).unwrap().value - f.eval_zonal(a, 1.0 - h, &opts).unwrap().value)
                / (2.0 * h);
            let g = f.eval_gradient(a, 1.0, &opts).unwrap().value;
            assert!((fd - g).abs() < 1e-6 * g.abs(), "{kind}: {fd} vs {g}");
        }
        // The Poisson wavelet decreases from its central peak, then turns.
        let f = make_family(FamilyKind::Poisson { m: 1 }, d).unwrap();
        let signs: Vec<f64> = (1..300)
            .map(|i| {
                f.eval_gradient(0.5, i as f64 * PI / 300.0, &opts)
                    .unwrap()
                    .value
                    .signum()
            })
            .collect();
        assert_eq!(signs[0], -1.0);
        assert!(signs.windows(2).any(|w| w[0] != w[1]));
    }
}
