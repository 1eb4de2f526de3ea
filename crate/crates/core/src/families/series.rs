//! Truncated zonal series `Σ_l w_l K_l^λ(cos θ)` in double-double arithmetic.
//!
//! Away from `θ = 0` these series cancel heavily (the sum of term moduli can
//! exceed the value by seven orders of magnitude), so the Gegenbauer
//! recurrence and the accumulation run in double-double. Truncation uses
//! `|K_l(t)| ≤ K_l(1)` and assumes the bounding terms are eventually
//! log-concave in `l`, which holds for every shipped profile.

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::special_fn::Dimension;

/// Truncation policy for zonal series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    /// Tail bound relative to the running sum.
    pub tol: f64,
    /// Smallest accepted scale.
    pub a_min: f64,
    /// Largest degree before giving up.
    pub l_cap: u64,
}

pub const A_MIN: f64 = 1e-3;
pub const L_CAP: u64 = 1_000_000;

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            tol: 1e-15,
            a_min: A_MIN,
            l_cap: L_CAP,
        }
    }
}

impl SeriesOptions {
    pub fn with_tol(tol: f64) -> Self {
        SeriesOptions {
            tol,
            ..Default::default()
        }
    }

    pub(crate) fn check_scale(&self, a: f64) -> Result<()> {
        if !(a >= self.a_min) || !a.is_finite() {
            return Err(Error::Domain(format!("scale {a} is below the minimum {}", self.a_min)));
        }
        Ok(())
    }
}

/// Series value and the last degree summed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub degree: u64,
}

/// Relative floor on the tail: below this the double-double sum cannot
/// resolve further terms anyway.
const RESOLUTION_FLOOR: f64 = 1e-30;

/// What the series evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Target {
    Value,
    /// `d/dθ` of the value.
    Gradient,
}

/// `cos θ` as a double-double, accurate near both poles.
fn cos_dd(theta: f64) -> TwoFloat {
    if theta <= std::f64::consts::FRAC_PI_2 {
        let s = (0.5 * theta).sin();
        TwoFloat::from(1.0) - TwoFloat::new_mul(s, s) * 2.0
    } else {
        let c = (0.5 * theta).cos();
        TwoFloat::new_mul(c, c) * 2.0 - 1.0
    }
}

/// Forward Gegenbauer recurrence in double-double.
struct Recurrence {
    lambda: f64,
    t: TwoFloat,
    l: u64,
    prev: TwoFloat,
    cur: TwoFloat,
}

impl Recurrence {
    fn new(lambda: f64, t: TwoFloat) -> Self {
        Recurrence {
            lambda,
            t,
            l: 0,
            prev: TwoFloat::from(0.0),
            cur: TwoFloat::from(1.0),
        }
    }

    /// Current `C_l`, then advance.
    fn step(&mut self) -> TwoFloat {
        let out = self.cur;
        let next_l = (self.l + 1) as f64;
        let next = if self.l == 0 {
            self.t * (2.0 * self.lambda)
        } else {
            let a = 2.0 * (next_l + self.lambda - 1.0);
            let b = next_l + 2.0 * self.lambda - 2.0;
            (self.t * self.cur * a - self.prev * b) / next_l
        };
        self.prev = self.cur;
        self.cur = next;
        self.l += 1;
        out
    }
}

/// `Σ_{l ≥ l_min} w_l K_l^λ(cos θ)` (or its θ-derivative). `weight` is called
/// once per degree in increasing order starting at 0.
pub(crate) fn sum_zonal(
    dim: Dimension,
    theta: f64,
    target: Target,
    l_min: u64,
    opts: &SeriesOptions,
    mut weight: impl FnMut(u64) -> TwoFloat,
) -> Result<SeriesValue> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Domain(format!("θ must lie in [0, π], got {theta}")));
    }
    let lambda = dim.lambda();
    let t = cos_dd(theta);
    let sin = theta.sin();
    // Value: K_l = ((l+λ)/λ) C_l^λ. Gradient: dK_l/dθ = −((l+λ)/λ) 2λ sin θ C_{l−1}^{λ+1}.
    let (mut rec, mut rec_one) = match target {
        Target::Value => (Recurrence::new(lambda, t), Recurrence::new(lambda, TwoFloat::from(1.0))),
        Target::Gradient => (
            Recurrence::new(lambda + 1.0, t),
            Recurrence::new(lambda + 1.0, TwoFloat::from(1.0)),
        ),
    };
    let grad_factor = -2.0 * lambda * sin;
    let mut sum = TwoFloat::from(0.0);
    let mut abs_sum = 0.0f64;
    let mut prev_bound = 0.0f64;
    let mut l = 0u64;
    loop {
        if l > opts.l_cap {
            return Err(Error::Numeric(format!(
                "series did not reach tolerance {} within {} terms",
                opts.tol, opts.l_cap
            )));
        }
        let w = weight(l);
        let factor = (l as f64 + lambda) / lambda;
        let (poly, poly_one) = match target {
            Target::Value => (rec.step(), f64::from(rec_one.step())),
            Target::Gradient if l == 0 => (TwoFloat::from(0.0), 0.0),
            Target::Gradient => (rec.step(), f64::from(rec_one.step())),
        };
        let bound = if l >= l_min {
            let term = w * poly * factor;
            sum += term;
            let b = f64::from(w).abs() * poly_one * factor;
            abs_sum += b;
            b
        } else {
            0.0
        };
        if l > l_min && prev_bound > 0.0 {
            let ratio = bound / prev_bound;
            if ratio < 1.0 {
                let tail = bound * ratio / (1.0 - ratio);
                let scale = match target {
                    Target::Value => 1.0,
                    Target::Gradient => grad_factor.abs(),
                };
                let value = f64::from(sum).abs();
                if tail <= opts.tol * value || tail <= RESOLUTION_FLOOR * abs_sum || tail * scale == 0.0 {
                    let value = match target {
                        Target::Value => f64::from(sum),
                        Target::Gradient => f64::from(sum) * grad_factor,
                    };
                    return Ok(SeriesValue { value, degree: l });
                }
            }
        }
        prev_bound = bound;
        l += 1;
    }
}

/// Running `r^l` in double-double.
pub(crate) struct Powers {
    base: f64,
    cur: TwoFloat,
}

impl Powers {
    pub(crate) fn new(base: f64) -> Self {
        Powers {
            base,
            cur: TwoFloat::from(1.0),
        }
    }

    /// `base^l` for consecutive calls `l = 0, 1, 2, …`.
    pub(crate) fn next_power(&mut self) -> TwoFloat {
        let out = self.cur;
        self.cur *= self.base;
        out
    }
}

/// `l^m` exactly rounded to double-double.
pub(crate) fn int_pow(l: u64, m: u32) -> TwoFloat {
    let x = l as f64;
    let mut acc = TwoFloat::from(1.0);
    for _ in 0..m {
        acc *= x;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::zonal_kernel;

    #[test]
    fn cos_dd_matches_cos() {
        for theta in [0.0, 1e-6, 0.4, 1.5, 2.0, 3.1, std::f64::consts::PI] {
            assert!((f64::from(cos_dd(theta)) - theta.cos()).abs() < 2e-16);
        }
    }

    #[test]
    fn finite_weights_reproduce_kernels() {
        let dim = Dimension::new(3).unwrap();
        let v = sum_zonal(dim, 0.7, Target::Value, 0, &SeriesOptions::default(), |l| {
            TwoFloat::from(if l == 4 { 1.0 } else { 0.0 })
        })
        .unwrap();
        assert!((v.value - zonal_kernel(4, dim, 0.7f64.cos()).unwrap()).abs() < 1e-12);
        assert_eq!(v.degree, 5);
    }

    #[test]
    fn geometric_weights_stop_early() {
        let dim = Dimension::new(2).unwrap();
        let mut p = Powers::new(0.5);
        let v = sum_zonal(dim, 0.0, Target::Value, 0, &SeriesOptions::default(), |_| {
            p.next_power()
        })
        .unwrap();
        // Σ 0.5^l (2l+1) = (1+r)/(1−r)² = 6.
        assert!((v.value - 6.0).abs() < 1e-14);
        assert!(v.degree < 100);
    }

    #[test]
    fn int_pow_is_exact_for_small_values() {
        assert_eq!(f64::from(int_pow(7, 3)), 343.0);
        assert_eq!(f64::from(int_pow(0, 0)), 1.0);
    }
}
