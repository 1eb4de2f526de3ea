//! Scale integrals of the profile on a logarithmic grid.

use serde::{Deserialize, Serialize};

use super::WaveletFamily;
use crate::error::{Error, Result};

/// Integrand `ln γ(e^u)²` below the peak by this much counts as negligible.
const NEGLIGIBLE: f64 = 80.0;
const U_LIMIT: f64 = 1e5;

/// Interval in `u = ln t` outside which `γ(e^u)²` is negligible.
fn support(f: &WaveletFamily) -> Result<(f64, f64, f64)> {
    let g = |u: f64| 2.0 * f.profile_ln(u.exp());
    // Coarse scan for the peak.
    let (mut peak_u, mut peak) = (0.0, f64::NEG_INFINITY);
    let mut u = -50.0;
    while u <= 50.0 {
        let v = g(u);
        if v > peak {
            peak = v;
            peak_u = u;
        }
        u += 0.01;
    }
    if !peak.is_finite() {
        return Err(Error::Numeric("profile vanishes on the scan range".into()));
    }
    let mut lo = peak_u - 1.0;
    let mut step = 1.0;
    while g(lo) > peak - NEGLIGIBLE {
        lo -= step;
        step *= 1.5;
        if lo < -U_LIMIT {
            return Err(Error::Numeric(
                "profile does not decay as t → 0; the integral diverges".into(),
            ));
        }
    }
    let mut hi = peak_u + 1.0;
    step = 1.0;
    while g(hi) > peak - NEGLIGIBLE {
        hi += step;
        step *= 1.5;
        if hi > U_LIMIT {
            return Err(Error::Numeric(
                "profile does not decay as t → ∞; the integral diverges".into(),
            ));
        }
    }
    Ok((lo, hi, peak_u))
}

fn trapezoid(g: &impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut acc = 0.5 * (g(lo) + g(hi));
    for i in 1..panels {
        acc += g(lo + i as f64 * h);
    }
    acc * h
}

/// `I_γ = ∫₀^∞ γ(t)² dt/t` by the trapezoid rule in `u = ln t`, halving the
/// step until two estimates agree to `1e−13`.
pub fn admissibility_integral(f: &WaveletFamily) -> Result<f64> {
    let (lo, hi, _) = support(f)?;
    let g = |u: f64| (2.0 * f.profile_ln(u.exp())).exp();
    let mut panels = 64usize;
    let mut prev = trapezoid(&g, lo, hi, panels);
    for _ in 0..16 {
        panels *= 2;
        let next = trapezoid(&g, lo, hi, panels);
        if (next - prev).abs() <= 1e-13 * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Numeric(
        "admissibility integral did not converge under refinement".into(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TotalVariation {
    pub value: f64,
    /// False when two resolutions disagree, which signals an unbounded variation.
    pub finite: bool,
}

fn golden_extremum(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, maximum: bool) -> f64 {
    let sign = if maximum { 1.0 } else { -1.0 };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let x1 = hi - ratio * (hi - lo);
        let x2 = lo + ratio * (hi - lo);
        if sign * g(x1) > sign * g(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    g(0.5 * (lo + hi))
}

fn variation_at(g: &impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let xs: Vec<f64> = (0..=panels).map(|i| lo + i as f64 * h).collect();
    let mut ys: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    // Replace sampled local extrema by their refined values.
    for i in 1..panels {
        let is_max = ys[i] >= ys[i - 1] && ys[i] >= ys[i + 1];
        let is_min = ys[i] <= ys[i - 1] && ys[i] <= ys[i + 1];
        if is_max != is_min {
            ys[i] = golden_extremum(g, xs[i - 1], xs[i + 1], is_max);
        }
    }
    ys.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
}

/// Total variation `∫₀^∞ |(γ²)′(t)| dt` from samples on a log grid.
pub fn gamma_tv(f: &WaveletFamily) -> Result<TotalVariation> {
    let (lo, hi, _) = support(f)?;
    let g = |u: f64| (2.0 * f.profile_ln(u.exp())).exp();
    let coarse = variation_at(&g, lo, hi, 20_000);
    let fine = variation_at(&g, lo, hi, 40_000);
    let finite = fine.is_finite() && (fine - coarse).abs() <= 1e-8 * fine.abs().max(f64::MIN_POSITIVE);
    Ok(TotalVariation { value: fine, finite })
}
