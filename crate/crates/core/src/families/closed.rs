//! Closed forms for the Poisson kernel and its multipoles.
//!
//! With `r = e^s` the Poisson kernel is
//! `p(s) = (1/Σ_n) A(s) D(s)^α`, `A = 1 − e^{2s}`,
//! `D = (1 − e^s)² + 4 e^s sin²(θ/2)`, `α = −(n+1)/2`,
//! and the multipole of order `m` at scale `a` is `a^m p^{(m)}(−a)`.
//! Derivatives in `s` are taken exactly by propagating truncated Taylor
//! series; the θ-derivative uses `∂_θ D = 2 e^s sin θ`.

use crate::error::{Error, Result};
use crate::special_fn::Dimension;

/// Taylor coefficients of `e^s` at `s0`, up to order `k`.
fn exp_series(s0: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    let mut c = s0.exp();
    for j in 0..=k {
        if j > 0 {
            c /= j as f64;
        }
        out.push(c);
    }
    out
}

/// Coefficients of `D(s)` at `s0` for `S = sin²(θ/2)`.
fn d_series(s0: f64, sin_half_sq: f64, k: usize) -> Vec<f64> {
    let r = s0.exp();
    let one_minus_r = -s0.exp_m1();
    let mut out = Vec::with_capacity(k + 1);
    out.push(one_minus_r * one_minus_r + 4.0 * r * sin_half_sq);
    let mut fact = 1.0;
    for j in 1..=k {
        fact *= j as f64;
        // r(4S − 2 + 2^j r) / j!, with 2^{j−1} r − 1 kept exact for j = 1.
        let inner = if j == 1 {
            s0.exp_m1()
        } else {
            2f64.powi(j as i32 - 1) * r - 1.0
        };
        out.push(r * (4.0 * sin_half_sq + 2.0 * inner) / fact);
    }
    out
}

/// Coefficients of `A(s) = 1 − e^{2s}`.
fn a_series(s0: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(-(2.0 * s0).exp_m1());
    let mut c = -(2.0 * s0).exp();
    for j in 1..=k {
        c *= 2.0 / j as f64;
        out.push(c);
    }
    out
}

/// Coefficients of `D^α` from those of `D` (`D_0 > 0`).
fn pow_series(d: &[f64], alpha: f64) -> Vec<f64> {
    let k = d.len() - 1;
    let mut f = Vec::with_capacity(k + 1);
    f.push(d[0].powf(alpha));
    for i in 1..=k {
        let mut acc = 0.0;
        for j in 1..=i {
            acc += (alpha * j as f64 - (i - j) as f64) * d[j] * f[i - j];
        }
        f.push(acc / (i as f64 * d[0]));
    }
    f
}

fn mul_series(x: &[f64], y: &[f64]) -> Vec<f64> {
    let k = x.len().min(y.len());
    (0..k).map(|i| (0..=i).map(|j| x[j] * y[i - j]).sum()).collect()
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|j| j as f64).product()
}

fn check(a: f64, theta: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("scale must be positive, got {a}")));
    }
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Domain(format!("θ must lie in [0, π], got {theta}")));
    }
    Ok(())
}

/// `g_a^m(cos θ) = (a ∂_s)^m p(e^s, θ)` at `s = −a`; `m = 0` is the Poisson kernel at `r = e^{−a}`.
pub fn poisson_multipole(dim: Dimension, m: u32, a: f64, theta: f64) -> Result<f64> {
    check(a, theta)?;
    let k = m as usize;
    let s0 = -a;
    let half = (0.5 * theta).sin();
    let alpha = -(dim.n() as f64 + 1.0) / 2.0;
    let d = d_series(s0, half * half, k);
    let p = mul_series(&a_series(s0, k), &pow_series(&d, alpha));
    Ok(a.powi(m as i32) * factorial(k) * p[k] / dim.sigma_n())
}

/// `∂_θ g_a^m(cos θ)`.
pub fn poisson_multipole_dtheta(dim: Dimension, m: u32, a: f64, theta: f64) -> Result<f64> {
    check(a, theta)?;
    let k = m as usize;
    let s0 = -a;
    let half = (0.5 * theta).sin();
    let alpha = -(dim.n() as f64 + 1.0) / 2.0;
    let d = d_series(s0, half * half, k);
    // ∂_θ p = (1/Σ) A · α D^{α−1} · 2 e^s sin θ.
    let inner = mul_series(&pow_series(&d, alpha - 1.0), &exp_series(s0, k));
    let p = mul_series(&a_series(s0, k), &inner);
    Ok(a.powi(m as i32) * factorial(k) * p[k] * 2.0 * alpha * theta.sin() / dim.sigma_n())
}
