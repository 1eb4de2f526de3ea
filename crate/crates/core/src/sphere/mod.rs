//! Geometry of `S^n` and the unit ball: points, geodesic distance, uniform
//! sampling, the cube-projection partition, the hyperbolic-type metric used
//! for grid density, and phase-space grids.

mod grid;
mod hyperbolic;
mod partition;

pub use grid::{build_phase_grid, GridMeta, GridPoint, LevelSpec, PhaseSpaceGrid, Placement};
pub use hyperbolic::{
    density_check, hyperbolic_distance, radial_coordinate, BallPoint, DensityReport, HyperbolicDistance,
};
pub use partition::{CellDescriptor, MeasureEstimate, Partition, PrecisionProfile};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::Dimension;

/// Unit vector in `R^{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpherePoint(Vec<f64>);

const NORM_TOL: f64 = 1e-12;

impl SpherePoint {
    /// Wraps coordinates that already have unit norm.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if coords.len() < 3 || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!(
                "sphere point needs ≥ 3 coordinates and unit norm (got len {}, norm {norm})",
                coords.len()
            )));
        }
        Ok(SpherePoint(coords))
    }

    /// Projects a nonzero vector radially onto the sphere.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() || coords.len() < 3 {
            return Err(Error::Domain("cannot normalise a zero or non-finite vector".into()));
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Ok(SpherePoint(coords))
    }

    /// The pole `ê = (1, 0, …, 0)`.
    pub fn north(dim: Dimension) -> Self {
        let mut c = vec![0.0; dim.ambient()];
        c[0] = 1.0;
        SpherePoint(c)
    }

    /// Point at geodesic angle `theta` from `ê` inside the `(x₁, x₂)` plane.
    pub fn at_angle(dim: Dimension, theta: f64) -> Self {
        let mut c = vec![0.0; dim.ambient()];
        c[0] = theta.cos();
        c[1] = theta.sin();
        SpherePoint(c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn ambient(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .clamp(-1.0, 1.0)
    }

    /// Applies an orthogonal matrix given as rows.
    pub fn rotated(&self, rows: &[Vec<f64>]) -> Self {
        let c = rows
            .iter()
            .map(|row| row.iter().zip(&self.0).map(|(a, b)| a * b).sum())
            .collect();
        SpherePoint(c)
    }
}

impl TryFrom<Vec<f64>> for SpherePoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SpherePoint::new(v)
    }
}

impl From<SpherePoint> for Vec<f64> {
    fn from(p: SpherePoint) -> Vec<f64> {
        p.0
    }
}

/// Geodesic distance `∠(x, y) = arccos(x·y)` in `[0, π]`.
///
/// Evaluated as `2·atan2(|x−y|, |x+y|)`, which keeps full precision for
/// nearly coincident and nearly antipodal pairs.
pub fn geodesic_distance(x: &SpherePoint, y: &SpherePoint) -> f64 {
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in x.0.iter().zip(&y.0) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Random generator for one task of a seeded computation. Distinct
/// `stream`s give independent sequences from the same `seed`.
pub fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point on `S^n` (normalised Gaussian vector).
pub fn random_point(dim: Dimension, rng: &mut impl rand::Rng) -> SpherePoint {
    loop {
        let v: Vec<f64> = (0..dim.ambient()).map(|_| StandardNormal.sample(rng)).collect();
        if let Ok(p) = SpherePoint::normalized(v) {
            return p;
        }
    }
}

/// `count` i.i.d. uniform points, deterministic in `seed`.
pub fn sample_uniform(dim: Dimension, count: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    if count == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| random_point(dim, &mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn distances() {
        let e = SpherePoint::north(dim(3));
        let minus = SpherePoint::new(vec![-1.0, 0.0, 0.0, 0.0]).unwrap();
        let side = SpherePoint::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(geodesic_distance(&e, &e), 0.0);
        assert!((geodesic_distance(&e, &minus) - PI).abs() < 1e-15);
        assert!((geodesic_distance(&e, &side) - PI / 2.0).abs() < 1e-15);
        let tiny = SpherePoint::at_angle(dim(3), 1e-9);
        assert!((geodesic_distance(&e, &tiny) - 1e-9).abs() < 1e-22);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(SpherePoint::new(vec![1.0, 1.0, 0.0]).is_err());
        assert!(SpherePoint::normalized(vec![0.0, 0.0, 0.0]).is_err());
        assert!(sample_uniform(dim(2), 0, 1).is_err());
    }

    #[test]
    fn uniform_samples() {
        let count = 100_000;
        let pts = sample_uniform(dim(2), count, 42).unwrap();
        assert!(pts
            .iter()
            .all(|p| (p.coords().iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-12));
        let bound = 4.0 / (count as f64).sqrt();
        for axis in 0..3 {
            let mean = pts.iter().map(|p| p.coords()[axis]).sum::<f64>() / count as f64;
            assert!(mean.abs() < bound, "axis {axis}: {mean}");
        }
        let cap = pts.iter().filter(|p| p.coords()[0] > 0.0).count() as f64 / count as f64;
        let sigma = (0.25 / count as f64).sqrt();
        assert!((cap - 0.5).abs() < 3.0 * sigma);
        assert_eq!(pts, sample_uniform(dim(2), count, 42).unwrap());
    }
}
