//! Special functions on S^n: log-Gamma, Gegenbauer polynomials, zonal
//! reproducing kernels, surface measure and harmonic-space dimensions.
//!
//! Gegenbauer values come from the forward three-term recurrence in double
//! precision. It is stable on [-1, 1]; the tests exercise degrees up to
//! 10^4 at λ ∈ {1/2, 1, 3/2}.

mod quadrature;

pub use quadrature::{gauss_jacobi, QuadratureRule};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sphere dimension `n ≥ 2` together with `λ = (n−1)/2` and `Σ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension {
    n: u32,
    lambda: f64,
    sigma_n: f64,
}

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::config(
                "n",
                format!("sphere dimension must be at least 2 (got {n}); λ = 0 is degenerate"),
            ));
        }
        let lambda = (n as f64 - 1.0) / 2.0;
        let sigma_n = (2.0f64.ln() + (lambda + 1.0) * PI.ln() - gamma_ln(lambda + 1.0)?).exp();
        Ok(Dimension { n, lambda, sigma_n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Gegenbauer index `λ = (n−1)/2`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Total surface measure `Σ_n = 2π^{λ+1}/Γ(λ+1)`.
    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    /// Ambient dimension `n + 1`.
    pub fn ambient(&self) -> usize {
        self.n as usize + 1
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        Dimension::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.n
    }
}

/// `ln Γ(x)` for `x > 0` (Lanczos approximation).
pub fn gamma_ln(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_ln requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "Gegenbauer index must be positive, got {lambda}"
        )));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain(format!(
            "Gegenbauer argument must lie in [-1, 1], got {t}"
        )));
    }
    Ok(())
}

/// Successive values `C_0^λ(t), C_1^λ(t), …` from the three-term recurrence.
#[derive(Debug, Clone)]
pub struct GegenbauerSeq {
    lambda: f64,
    t: f64,
    l: u64,
    prev: f64,
    cur: f64,
}

impl GegenbauerSeq {
    /// No argument checks; callers validate `λ` and `t`.
    pub fn new(lambda: f64, t: f64) -> Self {
        GegenbauerSeq {
            lambda,
            t,
            l: 0,
            prev: 0.0,
            cur: 1.0,
        }
    }
}

impl Iterator for GegenbauerSeq {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.cur;
        let l = (self.l + 1) as f64;
        let next = if self.l == 0 {
            2.0 * self.lambda * self.t
        } else {
            (2.0 * (l + self.lambda - 1.0) * self.t * self.cur - (l + 2.0 * self.lambda - 2.0) * self.prev) / l
        };
        self.prev = self.cur;
        self.cur = next;
        self.l += 1;
        Some(out)
    }
}

/// `C_l^λ(t)`.
pub fn gegenbauer(l: u64, lambda: f64, t: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_t(t)?;
    Ok(GegenbauerSeq::new(lambda, t).nth(l as usize).unwrap_or(0.0))
}

/// `d/dθ C_l^λ(cos θ) = −2λ sin θ · C_{l−1}^{λ+1}(cos θ)`.
pub fn gegenbauer_dtheta(l: u64, lambda: f64, theta: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("θ must lie in [0, π], got {theta}")));
    }
    if l == 0 {
        return Ok(0.0);
    }
    let c = gegenbauer(l - 1, lambda + 1.0, theta.cos().clamp(-1.0, 1.0))?;
    Ok(-2.0 * lambda * theta.sin() * c)
}

/// Zonal reproducing kernel of `H_l`: `K_l^λ(t) = ((l+λ)/λ) C_l^λ(t)`.
pub fn zonal_kernel(l: u64, dim: Dimension, t: f64) -> Result<f64> {
    let lambda = dim.lambda();
    Ok((l as f64 + lambda) / lambda * gegenbauer(l, lambda, t)?)
}

/// All `K_l^λ(t)` for `l = 0..=lmax`.
pub fn zonal_kernels(lmax: usize, dim: Dimension, t: f64) -> Vec<f64> {
    let lambda = dim.lambda();
    GegenbauerSeq::new(lambda, t.clamp(-1.0, 1.0))
        .take(lmax + 1)
        .enumerate()
        .map(|(l, c)| (l as f64 + lambda) / lambda * c)
        .collect()
}

/// `∫_{−1}^{1} C_l^λ(t)² (1−t²)^{λ−1/2} dt = π 2^{1−2λ} Γ(l+2λ) / (l! (l+λ) Γ(λ)²)`.
pub fn gegenbauer_norm_sq(l: u64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let l = l as f64;
    let ln = PI.ln() + (1.0 - 2.0 * lambda) * 2f64.ln() + gamma_ln(l + 2.0 * lambda)?
        - gamma_ln(l + 1.0)?
        - (l + lambda).ln()
        - 2.0 * gamma_ln(lambda)?;
    Ok(ln.exp())
}

pub fn surface_measure(dim: Dimension) -> f64 {
    dim.sigma_n()
}

/// Dimension `N(n, l)` of the space of degree-`l` harmonics on `S^n`.
///
/// Uses `N = (n+2l−1)/(n−1) · binom(n+l−2, l)` in checked integer arithmetic
/// and reports overflow of `u64`.
pub fn harmonic_dim(dim: Dimension, l: u64) -> Result<u64> {
    let n = dim.n() as u128;
    let l = l as u128;
    if l == 0 {
        return Ok(1);
    }
    let overflow = || Error::Numeric(format!("N({}, {l}) overflows u64", dim.n()));
    // binom(n + l - 2, n - 2), built up so every intermediate is an integer.
    let k = n - 2;
    let mut binom: u128 = 1;
    for i in 1..=k {
        binom = binom.checked_mul(l + i).ok_or_else(overflow)? / i;
    }
    let num = binom.checked_mul(n + 2 * l - 1).ok_or_else(overflow)?;
    let value = num / (n - 1);
    u64::try_from(value).map_err(|_| overflow())
}

/// `N(n, l)` evaluated in log space, for degrees past the integer range.
pub fn harmonic_dim_f64(dim: Dimension, l: u64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let n = dim.n() as f64;
    let l = l as f64;
    let ln = (n + 2.0 * l - 1.0).ln() + statrs::function::gamma::ln_gamma(n + l - 1.0)
        - statrs::function::gamma::ln_gamma(n)
        - statrs::function::gamma::ln_gamma(l + 1.0);
    ln.exp().round()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn gamma_ln_values() {
        assert!(gamma_ln(2.0).unwrap().abs() < 1e-15);
        // ln √π
        assert_relative_eq!(gamma_ln(0.5).unwrap(), 0.572_364_942_924_700_1, max_relative = 1e-13);
        let ratio = (gamma_ln(4.0).unwrap() - 2.0 * 4.0f64.ln()).exp();
        assert_relative_eq!(ratio, 0.375, max_relative = 1e-14);
        assert!(gamma_ln(0.0).is_err());
        assert!(gamma_ln(-1.5).is_err());
    }

    #[test]
    fn dimension_rejects_circle() {
        assert!(matches!(Dimension::new(1), Err(Error::Config { .. })));
        let d = dim(5);
        assert_eq!(d.lambda(), 2.0);
    }

    #[test]
    fn gegenbauer_examples() {
        assert_eq!(gegenbauer(0, 1.5, 0.3).unwrap(), 1.0);
        assert_relative_eq!(gegenbauer(1, 0.5, 0.3).unwrap(), 0.3, max_relative = 1e-15);
        assert!(gegenbauer(2, 1.0, 0.5).unwrap().abs() < 1e-15);
        assert!(gegenbauer(3, 1.0, 1.2).is_err());
        assert!(gegenbauer(3, 0.0, 0.2).is_err());
    }

    #[test]
    fn legendre_closed_forms() {
        for &t in &[-0.9, -0.2, 0.0, 0.4, 1.0] {
            let p3 = 0.5 * (5.0 * t * t * t - 3.0 * t);
            assert_relative_eq!(gegenbauer(3, 0.5, t).unwrap(), p3, epsilon = 1e-14);
        }
    }

    #[test]
    fn large_degree_endpoint_matches_binomial() {
        // C_l^λ(1) = Γ(l+2λ)/(Γ(2λ) l!)
        for &lambda in &[0.5, 1.0, 1.5] {
            let l = 10_000u64;
            let exact = (statrs::function::gamma::ln_gamma(l as f64 + 2.0 * lambda)
                - statrs::function::gamma::ln_gamma(2.0 * lambda)
                - statrs::function::gamma::ln_gamma(l as f64 + 1.0))
            .exp();
            assert_relative_eq!(gegenbauer(l, lambda, 1.0).unwrap(), exact, max_relative = 1e-9);
        }
    }

    #[test]
    fn generating_function() {
        for &lambda in &[0.5, 1.0, 1.5] {
            for &r in &[0.3f64, 0.6, 0.9] {
                for &t in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
                    let lmax = 400usize;
                    let sum: f64 = GegenbauerSeq::new(lambda, t)
                        .take(lmax + 1)
                        .enumerate()
                        .map(|(l, c)| c * r.powi(l as i32))
                        .sum();
                    let exact = (1.0 - 2.0 * t * r + r * r).powf(-lambda);
                    // |C_l^λ(t)| ≤ C_l^λ(1); the tail Σ_{l>L} C_l(1) r^l equals the
                    // remainder of (1−r)^{−2λ}.
                    let head: f64 = GegenbauerSeq::new(lambda, 1.0)
                        .take(lmax + 1)
                        .enumerate()
                        .map(|(l, c)| c * r.powi(l as i32))
                        .sum();
                    let tail = ((1.0 - r).powf(-2.0 * lambda) - head).abs() + 1e-12 * exact.abs();
                    assert!((sum - exact).abs() <= tail, "λ={lambda} r={r} t={t}");
                }
            }
        }
    }

    #[test]
    fn dtheta_matches_finite_difference() {
        let h = 1e-5;
        for &(l, lambda) in &[(3u64, 0.5), (7, 1.0), (12, 1.5)] {
            for &theta in &[0.3f64, 1.0, 2.0, 2.9] {
                let fd = (gegenbauer(l, lambda, (theta + h).cos()).unwrap()
                    - gegenbauer(l, lambda, (theta - h).cos()).unwrap())
                    / (2.0 * h);
                let d = gegenbauer_dtheta(l, lambda, theta).unwrap();
                assert_relative_eq!(d, fd, max_relative = 1e-6);
            }
        }
        assert_eq!(gegenbauer_dtheta(0, 1.0, 1.3).unwrap(), 0.0);
        assert_eq!(gegenbauer_dtheta(5, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn zonal_kernel_trace() {
        for l in 0..=8u64 {
            assert_relative_eq!(
                zonal_kernel(l, dim(2), 1.0).unwrap(),
                (2 * l + 1) as f64,
                max_relative = 1e-14
            );
            assert_relative_eq!(
                zonal_kernel(l, dim(3), 1.0).unwrap(),
                ((l + 1) * (l + 1)) as f64,
                max_relative = 1e-14
            );
        }
        assert_eq!(zonal_kernel(0, dim(4), -0.3).unwrap(), 1.0);
    }

    #[test]
    fn addition_theorem_trace() {
        for n in 2..=5 {
            let d = dim(n);
            let ks = zonal_kernels(50, d, 1.0);
            for (l, k) in ks.iter().enumerate() {
                assert_eq!(k.round() as u64, harmonic_dim(d, l as u64).unwrap(), "n={n} l={l}");
            }
        }
    }

    #[test]
    fn surface_measures() {
        assert_relative_eq!(surface_measure(dim(2)), 4.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(surface_measure(dim(3)), 2.0 * PI * PI, max_relative = 1e-13);
        assert_relative_eq!(surface_measure(dim(4)), 8.0 * PI * PI / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn harmonic_dims() {
        assert_eq!(harmonic_dim(dim(7), 0).unwrap(), 1);
        assert_eq!(harmonic_dim(dim(2), 3).unwrap(), 7);
        assert_eq!(harmonic_dim(dim(3), 2).unwrap(), 9);
        // n = 4: (2l+3)(l+1)(l+2)/6
        assert_eq!(harmonic_dim(dim(4), 5).unwrap(), 13 * 6 * 7 / 6);
        assert_eq!(harmonic_dim_f64(dim(4), 5), 91.0);
        assert!(matches!(harmonic_dim(dim(40), 1_000_000), Err(Error::Numeric(_))));
    }
}
