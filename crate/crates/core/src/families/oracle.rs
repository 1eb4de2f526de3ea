//! Finite-difference oracle for Poisson multipoles, independent of the
//! series and Taylor paths.

use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::special_fn::Dimension;

/// Central 4th-order stencils for derivatives 1..=4 on offsets `−3..=3`.
const STENCILS: [([f64; 7], f64); 4] = [
    ([0.0, 1.0, -8.0, 0.0, 8.0, -1.0, 0.0], 12.0),
    ([0.0, -1.0, 16.0, -30.0, 16.0, -1.0, 0.0], 12.0),
    ([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0], 8.0),
    ([-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0], 6.0),
];

const STEP: f64 = 1e-2;

/// `1/x` to double-double accuracy (one Newton step from the f64 reciprocal).
fn recip(x: TwoFloat) -> TwoFloat {
    let y = 1.0 / x.hi();
    let y = TwoFloat::from(y);
    y + y * (TwoFloat::from(1.0) - x * y)
}

/// `√x` to double-double accuracy.
fn sqrt(x: TwoFloat) -> TwoFloat {
    let y = x.hi().sqrt();
    TwoFloat::from(y) + (x - TwoFloat::new_mul(y, y)) / (2.0 * y)
}

/// `Σ_n p(e^s, θ)` in double-double: the stencil differences cancel to many
/// digits, so the nodes need more than f64 accuracy.
fn kernel_dd(dim: Dimension, s: f64, sin_half_sq: f64) -> Result<TwoFloat> {
    if !(s < 0.0) {
        return Err(Error::Domain(format!("oracle node e^{s} leaves the unit ball")));
    }
    let r = TwoFloat::from(s).exp();
    let one = TwoFloat::from(1.0);
    let num = one - r * r;
    let gap = one - r;
    let d = gap * gap + r * (4.0 * sin_half_sq);
    // D^{−(n+1)/2} as D^{−k} or D^{−k}·D^{−1/2}.
    let twice = dim.n() + 1;
    let inv = recip(d);
    let mut pow = one;
    for _ in 0..twice / 2 {
        pow *= inv;
    }
    if twice % 2 == 1 {
        pow *= recip(sqrt(d));
    }
    Ok(num * pow)
}

fn derivative(f: &impl Fn(f64) -> Result<TwoFloat>, s0: f64, m: usize, h: f64) -> Result<f64> {
    let (weights, denom) = STENCILS[m - 1];
    let mut acc = TwoFloat::from(0.0);
    for (i, w) in weights.iter().enumerate() {
        if *w != 0.0 {
            acc += f(s0 + (i as f64 - 3.0) * h)? * *w;
        }
    }
    Ok(f64::from(acc) / (denom * h.powi(m as i32)))
}

/// `(a d/ds)^m p(e^s, θ)` at `s = −a` by central differences with one
/// Richardson step. Kernel values at the nodes are computed in
/// double-double. Orders above 4 are rejected. The step is `10⁻²`, reduced
/// to `a/4` for small scales so every node stays inside the ball.
pub fn poisson_multipole_oracle(dim: Dimension, m: u32, a: f64, theta: f64) -> Result<f64> {
    if m > 4 {
        return Err(Error::config(
            "m",
            "the finite-difference oracle supports orders up to 4",
        ));
    }
    if !(a > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {a}")));
    }
    let half = (0.5 * theta).sin();
    let f = |s: f64| kernel_dd(dim, s, half * half);
    if m == 0 {
        return Ok(f64::from(f(-a)?) / dim.sigma_n());
    }
    let m = m as usize;
    let h = STEP.min(a / 4.0);
    let coarse = derivative(&f, -a, m, h)?;
    let fine = derivative(&f, -a, m, 0.5 * h)?;
    Ok(a.powi(m as i32) * (16.0 * fine - coarse) / 15.0 / dim.sigma_n())
}
