//! Bandlimited functions as combinations of truncated zonal kernels.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{Dimension, GegenbauerSeq};
use crate::sphere::{random_point, task_rng, SpherePoint};

/// Writes `K_l^λ(t)` for `l = 0..out.len()` into `out`.
pub(crate) fn zonal_row(dim: Dimension, t: f64, out: &mut [f64]) {
    let lambda = dim.lambda();
    for (l, (slot, c)) in out
        .iter_mut()
        .zip(GegenbauerSeq::new(lambda, t.clamp(-1.0, 1.0)))
        .enumerate()
    {
        *slot = (l as f64 + lambda) / lambda * c;
    }
}

/// `K^{(L)}(t) = Σ_{l=l_min}^{L} K_l^λ(t)`.
pub fn band_kernel(dim: Dimension, l_min: u64, band: u64, t: f64) -> f64 {
    let mut row = vec![0.0; band as usize + 1];
    zonal_row(dim, t, &mut row);
    row[l_min as usize..].iter().sum()
}

/// `f(x) = Σ_i c_i K^{(L)}(x·z_i)`, bandlimited to degrees `l_min..=L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandFunction {
    dim: Dimension,
    band: u64,
    l_min: u64,
    centers: Vec<SpherePoint>,
    coeffs: Vec<f64>,
}

impl BandFunction {
    pub fn new(dim: Dimension, band: u64, l_min: u64, centers: Vec<SpherePoint>, coeffs: Vec<f64>) -> Result<Self> {
        if centers.len() != coeffs.len() {
            return Err(Error::config("coeffs", "one coefficient per center is required"));
        }
        if l_min > band {
            return Err(Error::config("band", format!("band {band} is below l_min {l_min}")));
        }
        if centers.iter().any(|z| z.ambient() != dim.ambient()) {
            return Err(Error::config("centers", "center dimension does not match n"));
        }
        Ok(BandFunction {
            dim,
            band,
            l_min,
            centers,
            coeffs,
        })
    }

    /// Uniform centers and standard normal coefficients from one seeded stream.
    pub fn random(dim: Dimension, band: u64, l_min: u64, count: usize, seed: u64, stream: u64) -> Result<Self> {
        let mut rng = task_rng(seed, stream);
        let centers = (0..count).map(|_| random_point(dim, &mut rng)).collect();
        let coeffs = (0..count).map(|_| rng.sample(StandardNormal)).collect();
        Self::new(dim, band, l_min, centers, coeffs)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn band(&self) -> u64 {
        self.band
    }

    pub fn l_min(&self) -> u64 {
        self.l_min
    }

    pub fn centers(&self) -> &[SpherePoint] {
        &self.centers
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn with_coeffs(&self, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(self.dim, self.band, self.l_min, self.centers.clone(), coeffs)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        BandFunction {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            ..self.clone()
        }
    }

    pub fn rotated(&self, rows: &[Vec<f64>]) -> Self {
        BandFunction {
            centers: self
                .centers
                .iter()
                .map(|z| SpherePoint::normalized(z.rotated(rows).coords().to_vec()).expect("rotation keeps norm"))
                .collect(),
            ..self.clone()
        }
    }

    pub fn eval(&self, x: &SpherePoint) -> f64 {
        self.centers
            .iter()
            .zip(&self.coeffs)
            .map(|(z, c)| c * band_kernel(self.dim, self.l_min, self.band, x.dot(z)))
            .sum()
    }

    /// Gram matrix of a center set, `G[i,j] = K^{(L)}(z_i·z_j)`.
    pub fn gram_of(dim: Dimension, l_min: u64, band: u64, centers: &[SpherePoint]) -> DMatrix<f64> {
        let k = centers.len();
        let mut g = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = band_kernel(dim, l_min, band, centers[i].dot(&centers[j]));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    pub fn gram(&self) -> DMatrix<f64> {
        Self::gram_of(self.dim, self.l_min, self.band, &self.centers)
    }

    /// Degree-`l` Gram matrix `K_l(z_i·z_j)`, one per degree `l_min..=L`.
    pub fn degree_grams(&self) -> Vec<DMatrix<f64>> {
        let k = self.centers.len();
        let width = self.band as usize + 1;
        let mut out = vec![DMatrix::zeros(k, k); width - self.l_min as usize];
        let mut row = vec![0.0; width];
        for i in 0..k {
            for j in i..k {
                zonal_row(self.dim, self.centers[i].dot(&self.centers[j]), &mut row);
                for (g, v) in out.iter_mut().zip(&row[self.l_min as usize..]) {
                    g[(i, j)] = *v;
                    g[(j, i)] = *v;
                }
            }
        }
        out
    }

    /// `‖f‖² = cᵀ G c` for the normalized measure `σ/Σ_n`.
    pub fn norm_sq(&self) -> f64 {
        let c = DVector::from_column_slice(&self.coeffs);
        c.dot(&(self.gram() * &c))
    }

    /// Squared norms of the degree-`l` components, `l = l_min..=L`.
    pub fn degree_energy(&self) -> Vec<f64> {
        let c = DVector::from_column_slice(&self.coeffs);
        self.degree_grams().iter().map(|g| c.dot(&(g * &c))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::gauss_jacobi;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn norm_matches_quadrature() {
        let dim = Dimension::new(2).unwrap();
        for band in [1u64, 4, 8] {
            let f = BandFunction::random(dim, band, 1, 7, 11, band).unwrap();
            let rule = gauss_jacobi(band as usize + 2, 0.5).unwrap();
            let azimuths = 2 * band as usize + 3;
            let mut total = 0.0;
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let s = (1.0 - t * t).sqrt();
                for k in 0..azimuths {
                    let phi = 2.0 * PI * k as f64 / azimuths as f64;
                    let x = SpherePoint::new(vec![s * phi.cos(), s * phi.sin(), t]).unwrap();
                    total += w * (2.0 * PI / azimuths as f64) * f.eval(&x).powi(2);
                }
            }
            assert_relative_eq!(total / dim.sigma_n(), f.norm_sq(), max_relative = 1e-10);
        }
    }

    #[test]
    fn degree_energy_sums_to_norm() {
        let dim = Dimension::new(3).unwrap();
        let f = BandFunction::random(dim, 6, 0, 5, 3, 0).unwrap();
        let total: f64 = f.degree_energy().iter().sum();
        assert_relative_eq!(total, f.norm_sq(), max_relative = 1e-12);
        assert!(f.degree_energy().iter().all(|&e| e >= -1e-12));
    }

    #[test]
    fn rejects_mismatch() {
        let dim = Dimension::new(2).unwrap();
        assert!(BandFunction::new(dim, 3, 1, vec![SpherePoint::north(dim)], vec![]).is_err());
        assert!(BandFunction::new(dim, 0, 1, vec![], vec![]).is_err());
    }
}
