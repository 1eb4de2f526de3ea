//! Partition of `S^n` by central projection of a subdivided cube.
//!
//! The cube `[−1, 1]^{n+1}` has `2(n+1)` facets; facet `f` lies on the plane
//! `x_{f/2} = ±1` (`+` for even `f`). Each facet is cut into `2^{nk}` equal
//! sub-cubes and projected radially onto the sphere. A cell id is
//! `f · 2^{nk} + j` where `j` is the lexicographic index of the sub-cube in
//! the facet coordinates (the remaining `n` axes in increasing order).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{task_rng, SpherePoint};
use crate::error::{Error, Result};
use crate::exec;
use crate::special_fn::Dimension;

/// Precision target for Monte-Carlo cell measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionProfile {
    /// 1e−2 relative.
    Fast,
    /// 1e−3 relative.
    #[default]
    Default,
}

impl PrecisionProfile {
    pub fn relative_target(self) -> f64 {
        match self {
            PrecisionProfile::Fast => 1e-2,
            PrecisionProfile::Default => 1e-3,
        }
    }
}

impl std::str::FromStr for PrecisionProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(PrecisionProfile::Fast),
            "default" => Ok(PrecisionProfile::Default),
            other => Err(Error::config("profile", format!("unknown precision profile `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDescriptor {
    pub facet: usize,
    pub index: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub value: f64,
    /// Estimated relative standard error.
    pub relative_error: f64,
    pub samples: u64,
}

const MEASURE_SEED: u64 = 0x5eed_ce11;
const MAX_CELLS_PER_FACET: u64 = 1 << 26;

#[derive(Debug, Clone)]
pub struct Partition {
    dim: Dimension,
    level: u32,
    per_axis: u64,
    per_facet: u64,
    /// Measures indexed by in-facet sub-cube index; all facets are congruent.
    measures: Option<Vec<MeasureEstimate>>,
}

impl Partition {
    pub fn build(dim: Dimension, level: u32) -> Result<Self> {
        let n = dim.n() as u64;
        let too_big = || Error::config("k", format!("partition level {level} is too large for n = {n}"));
        let per_axis = 1u64.checked_shl(level).filter(|&v| v != 0).ok_or_else(too_big)?;
        let per_facet = (n as u32)
            .checked_mul(level)
            .and_then(|bits| 1u64.checked_shl(bits))
            .filter(|&v| v != 0 && v <= MAX_CELLS_PER_FACET)
            .ok_or_else(too_big)?;
        Ok(Partition {
            dim,
            level,
            per_axis,
            per_facet,
            measures: None,
        })
    }

    /// Same partition with every cell measure estimated up front.
    pub fn with_measures(mut self, profile: PrecisionProfile) -> Self {
        let table = exec::map_range(self.per_facet as usize, |j| self.estimate(j as u64, profile));
        self.measures = Some(table);
        self
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn facets(&self) -> usize {
        2 * self.dim.ambient()
    }

    pub fn cells_per_facet(&self) -> u64 {
        self.per_facet
    }

    /// `2(n+1) · 2^{nk}`.
    pub fn cell_count(&self) -> u64 {
        self.facets() as u64 * self.per_facet
    }

    /// `arctan(√n / 2^{k−1})`.
    pub fn diameter_bound(&self) -> f64 {
        let n = self.dim.n() as f64;
        (n.sqrt() / 2f64.powi(self.level as i32 - 1)).atan()
    }

    /// `d / (2√(n(n+1)))` with `d` the diameter bound. This bounds the
    /// diameter of the ball inscribed in every cell, so the guaranteed ball
    /// radius is half of it.
    pub fn inradius_bound(&self) -> f64 {
        let n = self.dim.n() as f64;
        self.diameter_bound() / (2.0 * (n * (n + 1.0)).sqrt())
    }

    pub fn descriptor(&self, cell: u64) -> CellDescriptor {
        let facet = (cell / self.per_facet) as usize;
        let mut j = cell % self.per_facet;
        let n = self.dim.n() as usize;
        let mut index = vec![0u32; n];
        for slot in index.iter_mut().rev() {
            *slot = (j % self.per_axis) as u32;
            j /= self.per_axis;
        }
        CellDescriptor { facet, index }
    }

    pub fn cell_id(&self, desc: &CellDescriptor) -> u64 {
        let j = desc.index.iter().fold(0u64, |acc, &i| acc * self.per_axis + i as u64);
        desc.facet as u64 * self.per_facet + j
    }

    /// Facet coordinates of the sub-cube: lower and upper corners in `[−1, 1]^n`.
    pub fn facet_box(&self, cell: u64) -> (usize, Vec<f64>, Vec<f64>) {
        let desc = self.descriptor(cell);
        let side = 2.0 / self.per_axis as f64;
        let lo: Vec<f64> = desc.index.iter().map(|&i| -1.0 + side * i as f64).collect();
        let hi = lo.iter().map(|l| l + side).collect();
        (desc.facet, lo, hi)
    }

    /// Central projection of the facet point with coordinates `u`.
    pub fn project(&self, facet: usize, u: &[f64]) -> SpherePoint {
        let axis = facet / 2;
        let sign = if facet.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut coords = Vec::with_capacity(self.dim.ambient());
        let mut rest = u.iter();
        for a in 0..self.dim.ambient() {
            if a == axis {
                coords.push(sign);
            } else {
                coords.push(*rest.next().expect("facet coordinate count"));
            }
        }
        SpherePoint::normalized(coords).expect("facet points are nonzero")
    }

    /// Projection of the sub-cube centre.
    pub fn cell_center(&self, cell: u64) -> SpherePoint {
        let (facet, lo, hi) = self.facet_box(cell);
        let mid: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
        self.project(facet, &mid)
    }

    /// Point of the cell drawn uniformly in facet coordinates.
    pub fn sample_in_cell(&self, cell: u64, rng: &mut impl Rng) -> SpherePoint {
        let (facet, lo, hi) = self.facet_box(cell);
        let u: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| rng.random_range(*l..*h)).collect();
        self.project(facet, &u)
    }

    /// Cell containing `x`. Boundary ties go to the lowest facet index and
    /// then to the lexicographically smallest sub-cube.
    pub fn locate(&self, x: &SpherePoint) -> u64 {
        let c = x.coords();
        let mut facet = 0;
        let mut best = -1.0;
        for (axis, &v) in c.iter().enumerate() {
            let candidates = [(2 * axis, v), (2 * axis + 1, -v)];
            for (f, val) in candidates {
                if val > best {
                    best = val;
                    facet = f;
                }
            }
        }
        let axis = facet / 2;
        let m = self.per_axis as f64;
        let mut j = 0u64;
        for (a, &v) in c.iter().enumerate() {
            if a == axis {
                continue;
            }
            let u = v / best;
            let t = (u + 1.0) * 0.5 * m;
            let idx = (t.ceil() - 1.0).clamp(0.0, m - 1.0) as u64;
            j = j * self.per_axis + idx;
        }
        facet as u64 * self.per_facet + j
    }

    /// `σ(cell)` by seeded Monte Carlo over the facet box with the
    /// projection Jacobian `(1 + |u|²)^{−(n+1)/2}`.
    pub fn cell_measure(&self, cell: u64, profile: PrecisionProfile) -> MeasureEstimate {
        let j = cell % self.per_facet;
        match &self.measures {
            Some(table) => table[j as usize],
            None => self.estimate(j, profile),
        }
    }

    /// Cached measure value, if [`Partition::with_measures`] was used.
    pub fn measure(&self, cell: u64) -> Option<f64> {
        self.measures
            .as_ref()
            .map(|t| t[(cell % self.per_facet) as usize].value)
    }

    fn estimate(&self, sub_index: u64, profile: PrecisionProfile) -> MeasureEstimate {
        let (_, lo, hi) = self.facet_box(sub_index);
        let n = self.dim.n() as usize;
        let volume = (2.0 / self.per_axis as f64).powi(n as i32);
        let power = -(n as f64 + 1.0) / 2.0;
        let target = profile.relative_target();
        let mut rng = task_rng(
            MEASURE_SEED ^ ((self.level as u64) << 48) ^ ((n as u64) << 56),
            sub_index,
        );
        const BATCH: u64 = 4096;
        const MAX_SAMPLES: u64 = 1 << 24;
        let (mut sum, mut sum_sq, mut count) = (0.0f64, 0.0f64, 0u64);
        let mut u = vec![0.0; n];
        loop {
            for _ in 0..BATCH {
                for (k, slot) in u.iter_mut().enumerate() {
                    *slot = rng.random_range(lo[k]..hi[k]);
                }
                let r2: f64 = u.iter().map(|v| v * v).sum();
                let f = (1.0 + r2).powf(power);
                sum += f;
                sum_sq += f * f;
            }
            count += BATCH;
            let mean = sum / count as f64;
            let var = (sum_sq / count as f64 - mean * mean).max(0.0);
            let rel = (var / count as f64).sqrt() / mean;
            // Stop a factor 2 inside the target so the reported error has margin.
            if rel < 0.5 * target || count >= MAX_SAMPLES {
                return MeasureEstimate {
                    value: mean * volume,
                    relative_error: rel,
                    samples: count,
                };
            }
        }
    }
}
