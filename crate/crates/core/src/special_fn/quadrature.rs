//! Gauss quadrature for the Gegenbauer weight `(1−t²)^{λ−1/2}` on [−1, 1].
//!
//! Nodes are the eigenvalues of the symmetric Jacobi matrix of the monic
//! Gegenbauer recurrence; weights are `μ₀ · v₀²` with `v₀` the first
//! component of each normalised eigenvector (Golub–Welsch). The tridiagonal
//! eigenproblem is solved with implicit-shift QL, carrying only the first
//! eigenvector row, so a rule costs O(q²).

use serde::{Deserialize, Serialize};

use super::gamma_ln;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub lambda: f64,
}

impl QuadratureRule {
    /// `Σ w_i f(t_i)` ≈ `∫ f(t) (1−t²)^{λ−1/2} dt`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `∫_{−1}^{1} (1−t²)^{λ−1/2} dt = √π Γ(λ+½)/Γ(λ+1)`.
pub(crate) fn weight_mass(lambda: f64) -> Result<f64> {
    Ok((0.5 * std::f64::consts::PI.ln() + gamma_ln(lambda + 0.5)? - gamma_ln(lambda + 1.0)?).exp())
}

/// `q`-point Gauss rule for the weight `(1−t²)^{λ−1/2}`.
pub fn gauss_jacobi(q: usize, lambda: f64) -> Result<QuadratureRule> {
    if q == 0 {
        return Err(Error::Domain("quadrature size must be at least 1".into()));
    }
    if !(lambda > -0.5) {
        return Err(Error::Domain(format!(
            "weight exponent requires λ > −1/2, got {lambda}"
        )));
    }
    let mut diag = vec![0.0; q];
    let mut off = vec![0.0; q];
    for k in 1..q {
        let kf = k as f64;
        let beta = kf * (kf + 2.0 * lambda - 1.0) / (4.0 * (kf + lambda) * (kf + lambda - 1.0));
        off[k - 1] = beta.sqrt();
    }
    let mut first = vec![0.0; q];
    first[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut first)?;

    let mass = weight_mass(lambda)?;
    let mut pairs: Vec<(f64, f64)> = diag.into_iter().zip(first).map(|(t, v)| (t, mass * v * v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(QuadratureRule { nodes, weights, lambda })
}

/// Implicit-shift QL on a symmetric tridiagonal matrix.
///
/// `diag` is overwritten with eigenvalues, `off[i]` couples rows `i` and
/// `i+1` (the last entry is scratch), and `row` holds one row of the
/// accumulated eigenvector matrix.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], row: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 1 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::Numeric("tridiagonal eigensolver did not converge".into()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let t = row[i + 1];
                row[i + 1] = s * row[i] + c * t;
                row[i] = c * row[i] - s * t;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
