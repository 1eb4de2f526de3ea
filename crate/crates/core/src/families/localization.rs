//! Scans of the scaled Poisson multipole `θ^e e^a a^n |g_a^m(cos aθ)|` over
//! `a ∈ [a_min, a_max]`, `θ ∈ [θ_min, π/a]`, and of the gradient variant with
//! `a^{n+1}` and `∂_θ`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{poisson_multipole, poisson_multipole_dtheta, FamilyKind, WaveletFamily};
use crate::error::{Error, Result};
use crate::exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanQuantity {
    Value,
    Gradient,
}

/// Geometric scan grid. Densities are points per decade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationSpec {
    pub a_min: f64,
    pub a_max: f64,
    pub a_per_decade: usize,
    pub theta_min: f64,
    pub theta_per_decade: usize,
}

impl Default for LocalizationSpec {
    fn default() -> Self {
        LocalizationSpec {
            a_min: 1e-2,
            a_max: 10.0,
            a_per_decade: 24,
            theta_min: 1e-2,
            theta_per_decade: 96,
        }
    }
}

impl LocalizationSpec {
    fn validate(&self) -> Result<()> {
        if !(self.a_min > 0.0 && self.a_max > self.a_min) {
            return Err(Error::config("a_min", "need 0 < a_min < a_max"));
        }
        if !(self.theta_min > 0.0) {
            return Err(Error::config("theta_min", "must be positive"));
        }
        if self.a_per_decade == 0 || self.theta_per_decade == 0 {
            return Err(Error::config("density", "grid densities must be positive"));
        }
        Ok(())
    }

    /// Same ranges with twice the density.
    pub fn refined(&self) -> Self {
        LocalizationSpec {
            a_per_decade: 2 * self.a_per_decade,
            theta_per_decade: 2 * self.theta_per_decade,
            ..*self
        }
    }

    /// Same densities with `a_min` halved, which doubles the largest `θ`.
    pub fn extended(&self) -> Self {
        LocalizationSpec {
            a_min: 0.5 * self.a_min,
            ..*self
        }
    }
}

/// Geometric points from `lo` to `hi` inclusive, anchored at `hi`.
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

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub a: f64,
    pub theta: f64,
    pub value: f64,
    pub scaled_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub family: String,
    pub quantity: ScanQuantity,
    pub exponent: f64,
    pub spec: LocalizationSpec,
    pub sup: f64,
    pub argmax_a: f64,
    pub argmax_theta: f64,
    /// Sup on the grid with doubled density.
    pub refined_sup: f64,
    /// `|refined_sup − sup| / refined_sup`.
    pub stability: f64,
    /// Sup with `a_min` halved.
    pub extended_sup: f64,
    /// `extended_sup / sup`.
    pub extension_growth: f64,
}

fn multipole_order(f: &WaveletFamily) -> Result<u32> {
    match f.kind() {
        FamilyKind::Poisson { m } => Ok(m),
        _ => Err(Error::config(
            "family",
            "localization scans need an integer-order Poisson family",
        )),
    }
}

fn rows_for_a(
    f: &WaveletFamily,
    m: u32,
    exponent: f64,
    quantity: ScanQuantity,
    spec: &LocalizationSpec,
    a: f64,
) -> Result<Vec<ScanRow>> {
    let dim = f.dim();
    let n = dim.n() as i32;
    let theta_max = std::f64::consts::PI / a;
    geometric(spec.theta_min.min(theta_max), theta_max, spec.theta_per_decade)
        .into_iter()
        .map(|theta| {
            let phi = (a * theta).min(std::f64::consts::PI);
            let (value, scale) = match quantity {
                ScanQuantity::Value => (poisson_multipole(dim, m, a, phi)?, a.powi(n)),
                ScanQuantity::Gradient => (poisson_multipole_dtheta(dim, m, a, phi)?, a.powi(n + 1)),
            };
            let scaled_value = theta.powf(exponent) * a.exp() * scale * value.abs();
            Ok(ScanRow {
                a,
                theta,
                value,
                scaled_value,
            })
        })
        .collect()
}

/// Every grid row, in `a`-major order.
pub fn localization_rows(
    f: &WaveletFamily,
    exponent: f64,
    quantity: ScanQuantity,
    spec: &LocalizationSpec,
) -> Result<Vec<ScanRow>> {
    spec.validate()?;
    let m = multipole_order(f)?;
    let a_grid = geometric(spec.a_min, spec.a_max, spec.a_per_decade);
    let per_a = exec::map_slice(&a_grid, |&a| rows_for_a(f, m, exponent, quantity, spec, a));
    let mut out = Vec::new();
    for rows in per_a {
        out.extend(rows?);
    }
    Ok(out)
}

fn sup_of(
    f: &WaveletFamily,
    m: u32,
    exponent: f64,
    quantity: ScanQuantity,
    spec: &LocalizationSpec,
) -> Result<ScanRow> {
    let a_grid = geometric(spec.a_min, spec.a_max, spec.a_per_decade);
    let per_a = exec::map_slice(&a_grid, |&a| {
        rows_for_a(f, m, exponent, quantity, spec, a).map(|rows| {
            rows.into_iter()
                .fold(None::<ScanRow>, |best, r| match best {
                    Some(b) if b.scaled_value >= r.scaled_value => Some(b),
                    _ => Some(r),
                })
                .expect("θ grid is nonempty")
        })
    });
    let mut best: Option<ScanRow> = None;
    for row in per_a {
        let row = row?;
        if best.is_none_or(|b| row.scaled_value > b.scaled_value) {
            best = Some(row);
        }
    }
    best.ok_or_else(|| Error::Numeric("empty scan grid".into()))
}

/// Sup of the scaled quantity with its refinement and extension companions.
pub fn localization_scan(
    f: &WaveletFamily,
    exponent: f64,
    quantity: ScanQuantity,
    spec: &LocalizationSpec,
) -> Result<LocalizationReport> {
    spec.validate()?;
    if !(exponent > 0.0) {
        return Err(Error::config("exponent", "must be positive"));
    }
    let m = multipole_order(f)?;
    let base = sup_of(f, m, exponent, quantity, spec)?;
    let refined = sup_of(f, m, exponent, quantity, &spec.refined())?;
    let extended = sup_of(f, m, exponent, quantity, &spec.extended())?;
    Ok(LocalizationReport {
        family: f.id(),
        quantity,
        exponent,
        spec: *spec,
        sup: base.scaled_value,
        argmax_a: base.a,
        argmax_theta: base.theta,
        refined_sup: refined.scaled_value,
        stability: (refined.scaled_value - base.scaled_value).abs() / refined.scaled_value,
        extended_sup: extended.scaled_value,
        extension_growth: extended.scaled_value / base.scaled_value,
    })
}

/// CSV with header `a,theta,value,scaled_value`.
pub fn write_scan_csv(rows: &[ScanRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "a,theta,value,scaled_value")?;
    for r in rows {
        writeln!(out, "{:e},{:e},{:e},{:e}", r.a, r.theta, r.value, r.scaled_value)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric(0.01, 10.0, 4);
        assert_eq!(g.first().copied(), Some(0.01));
        assert_eq!(g.last().copied(), Some(10.0));
        assert_eq!(g.len(), 13);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
