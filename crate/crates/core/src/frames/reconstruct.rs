//! Frame-algorithm reconstruction from discrete analysis coefficients.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::band::BandFunction;
use super::bounds::{analysis_data, synthesis, FrameSystem};
use crate::error::{Error, Result};
use crate::families::WaveletFamily;
use crate::sphere::PhaseSpaceGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub a_hat: f64,
    pub b_hat: f64,
    pub iterations: usize,
    /// Iterations guaranteed to reach the residual tolerance.
    pub iteration_bound: usize,
    pub tol: f64,
    /// Relative residual after each iteration.
    pub residuals: Vec<f64>,
    /// `‖u − f‖ / ‖f‖` in the normalized `L²` norm.
    pub relative_error: f64,
}

/// Steps of `u ← u + 2/(A+B)(Sf − Su)` that bring the relative residual
/// below `tol`. The error contracts by `ρ = (B−A)/(B+A)` per step and the
/// residual is within a factor `B/A` of it.
pub fn iteration_bound(a: f64, b: f64, tol: f64) -> usize {
    if b <= a {
        return 1;
    }
    let rho = (b - a) / (b + a);
    ((b / (a * tol)).ln() / (1.0 / rho).ln()).ceil().max(1.0) as usize
}

/// Recovers `target` from its analysis coefficients on `grid`. Iterates in
/// an orthonormal basis of the span of the target's kernel centers.
pub fn reconstruct(
    family: &WaveletFamily,
    grid: &PhaseSpaceGrid,
    target: &BandFunction,
    max_iter: usize,
    tol: f64,
) -> Result<(BandFunction, ReconstructionReport)> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::config("tol", "tolerance and iteration cap must be positive"));
    }
    let band = target.band();
    let system = FrameSystem::assemble(family, grid, band, target.centers().to_vec())?;
    let (a, b) = (system.lower(), system.upper());
    if !(a > 0.0) {
        return Err(Error::Numeric(format!("lower frame bound {a:e} is not positive")));
    }
    let data = analysis_data(family, grid, target)?;
    let rhs = system.whitening.transpose() * synthesis(family, grid, band, target.centers(), &data)?;
    let rhs_norm = rhs.norm();
    let step = 2.0 / (a + b);
    let mut xi = DVector::zeros(rhs.len());
    let mut residuals = Vec::new();
    let mut iterations = 0;
    if rhs_norm == 0.0 {
        iterations = 1;
        residuals.push(0.0);
    } else {
        loop {
            let r = &rhs - &system.reduced * &xi;
            let rel = r.norm() / rhs_norm;
            if iterations > 0 {
                residuals.push(rel);
            }
            if rel < tol {
                break;
            }
            if iterations == max_iter {
                let fmt = |r: &[f64]| r.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ");
                let trace = if residuals.len() <= 6 {
                    fmt(&residuals)
                } else {
                    format!("{} … {}", fmt(&residuals[..3]), fmt(&residuals[residuals.len() - 3..]))
                };
                return Err(Error::Numeric(format!(
                    "frame algorithm did not reach {tol:e} in {max_iter} iterations; residuals [{trace}]"
                )));
            }
            xi += r * step;
            iterations += 1;
        }
    }
    let coeffs = &system.whitening * &xi;
    let out = target.with_coeffs(coeffs.iter().copied().collect())?;
    // The target splits into its projection `W ξ_f` on the retained span and
    // an orthogonal remainder; comparing in whitened coordinates avoids the
    // cancellation of `cᵀGc` along the null directions of `G`.
    let c_f = DVector::from_column_slice(target.coeffs());
    let xi_f = system.whitening.transpose() * (&system.gram * &c_f);
    let target_norm = target.norm_sq();
    let remainder = (target_norm - xi_f.norm_squared()).max(0.0);
    let err_sq = (&xi - &xi_f).norm_squared() + remainder;
    let relative_error = if target_norm > 0.0 {
        (err_sq / target_norm).sqrt()
    } else {
        err_sq.sqrt()
    };
    Ok((
        out,
        ReconstructionReport {
            a_hat: a,
            b_hat: b,
            iterations,
            iteration_bound: iteration_bound(a, b, tol),
            tol,
            residuals,
            relative_error,
        },
    ))
}
