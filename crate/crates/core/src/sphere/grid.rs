//! Phase-space grids: one point per (scale, partition cell), weighted by the
//! cell measure.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{task_rng, Partition, PrecisionProfile, SpherePoint};
use crate::error::{Error, Result};
use crate::exec;
use crate::frames::ScaleSequence;
use crate::special_fn::Dimension;

/// Where each grid point sits inside its cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// Projection of the sub-cube centre.
    Center,
    /// Uniform in facet coordinates.
    Random { seed: u64 },
    /// `centre + fraction · (U − centre)` in facet coordinates, `fraction ∈ [0, 1]`.
    Jitter { seed: u64, fraction: f64 },
}

impl Placement {
    pub fn seed(&self) -> u64 {
        match *self {
            Placement::Center => 0,
            Placement::Random { seed } | Placement::Jitter { seed, .. } => seed,
        }
    }

    /// Rebuilds a placement from its label and the stored seed.
    pub fn from_label(label: &str, seed: u64) -> Result<Self> {
        match label.split_once(':') {
            None if label == "center" => Ok(Placement::Center),
            None if label == "random" => Ok(Placement::Random { seed }),
            Some(("jitter", f)) => {
                let fraction: f64 = f
                    .parse()
                    .map_err(|_| Error::config("placement", format!("bad jitter fraction `{f}`")))?;
                if !(0.0..=1.0).contains(&fraction) {
                    return Err(Error::config("placement", "jitter fraction must lie in [0, 1]"));
                }
                Ok(Placement::Jitter { seed, fraction })
            }
            _ => Err(Error::config(
                "placement",
                format!("expected center, random or jitter:<fraction>, got `{label}`"),
            )),
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Placement::Center => f.write_str("center"),
            Placement::Random { .. } => f.write_str("random"),
            Placement::Jitter { fraction, .. } => write!(f, "jitter:{fraction}"),
        }
    }
}

impl FromStr for Placement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Placement::from_label(s, 0)
    }
}

/// Partition level used at each scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelSpec {
    Uniform(u32),
    PerScale(Vec<u32>),
}

impl LevelSpec {
    fn level(&self, j: usize) -> u32 {
        match self {
            LevelSpec::Uniform(k) => *k,
            LevelSpec::PerScale(ks) => ks[j],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeclaredDensity {
    pub rho: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    /// Partition level (the finest one when levels vary by scale).
    pub k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_per_scale: Option<Vec<u32>>,
    pub placement: String,
    pub seed: u64,
    /// Largest ratio `b_j / b_{j+1}`.
    pub delta: f64,
    /// Largest `diam_j / b_j`.
    pub xi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DeclaredDensity>,
    /// Free-form record of how the grid was produced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub b: f64,
    pub y: SpherePoint,
    pub mu: f64,
    pub cell: u64,
    #[serde(skip)]
    pub scale_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    dim: Dimension,
    scales: ScaleSequence,
    points: Vec<GridPoint>,
    meta: GridMeta,
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    n: u32,
    scales: Vec<f64>,
    nu: Vec<f64>,
    points: Vec<GridPoint>,
    meta: GridMeta,
}

impl PhaseSpaceGrid {
    /// Assembles a grid from parts. Every point's scale must be one of the
    /// sequence's scales.
    pub fn from_parts(
        dim: Dimension,
        scales: ScaleSequence,
        mut points: Vec<GridPoint>,
        meta: GridMeta,
    ) -> Result<Self> {
        for p in &mut points {
            if p.y.ambient() != dim.ambient() {
                return Err(Error::config("points", "point dimension does not match n"));
            }
            if !(p.mu > 0.0) {
                return Err(Error::config("points", "weights must be positive"));
            }
            p.scale_index = scales
                .scales()
                .iter()
                .position(|&b| b == p.b)
                .ok_or_else(|| Error::config("points", format!("scale {} is not in the sequence", p.b)))?;
        }
        Ok(PhaseSpaceGrid {
            dim,
            scales,
            points,
            meta,
        })
    }

    /// Grid with no points (useful as a degenerate input).
    pub fn empty(dim: Dimension, scales: ScaleSequence) -> Self {
        PhaseSpaceGrid {
            dim,
            scales,
            points: Vec::new(),
            meta: GridMeta {
                k: 0,
                k_per_scale: None,
                placement: Placement::Center.to_string(),
                seed: 0,
                delta: 0.0,
                xi: 0.0,
                density: None,
                provenance: None,
            },
        }
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn scales(&self) -> &ScaleSequence {
        &self.scales
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Declared grid type `(δ, Ξ)`.
    pub fn grid_type(&self) -> (f64, f64) {
        (self.meta.delta, self.meta.xi)
    }

    pub fn with_provenance(mut self, provenance: serde_json::Value) -> Self {
        self.meta.provenance = Some(provenance);
        self
    }

    pub fn with_declared_density(mut self, rho: f64, h: f64) -> Self {
        self.meta.density = Some(DeclaredDensity { rho, h });
        self
    }

    /// Scale indices with `Ξ·b_j > π`, where the cell-size condition says
    /// nothing because every cell already fits.
    pub fn vacuous_scales(&self) -> Vec<usize> {
        let xi = self.meta.xi;
        self.scales
            .scales()
            .iter()
            .enumerate()
            .filter(|(_, b)| xi * *b > std::f64::consts::PI)
            .map(|(j, _)| j)
            .collect()
    }

    /// Same grid with every position rotated by an orthogonal matrix.
    pub fn rotated(&self, rows: &[Vec<f64>]) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            p.y = SpherePoint::normalized(p.y.rotated(rows).coords().to_vec()).expect("rotation keeps norm");
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let file = GridFile {
            n: self.dim.n(),
            scales: self.scales.scales().to_vec(),
            nu: self.scales.nu().to_vec(),
            points: self.points.clone(),
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GridFile = serde_json::from_str(text)?;
        let dim = Dimension::new(file.n)?;
        let scales = ScaleSequence::from_parts(file.scales, file.nu)?;
        PhaseSpaceGrid::from_parts(dim, scales, file.points, file.meta)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        PhaseSpaceGrid::from_json(&std::fs::read_to_string(path)?)
    }
}

const JITTER_ATTEMPTS: usize = 64;

fn place(partition: &Partition, cell: u64, placement: Placement, stream: u64) -> SpherePoint {
    match placement {
        Placement::Center => partition.cell_center(cell),
        Placement::Random { seed } => {
            let mut rng = task_rng(seed, stream);
            loop {
                let y = partition.sample_in_cell(cell, &mut rng);
                if partition.locate(&y) == cell {
                    return y;
                }
            }
        }
        Placement::Jitter { seed, fraction } => {
            if fraction == 0.0 {
                return partition.cell_center(cell);
            }
            let (facet, lo, hi) = partition.facet_box(cell);
            let mut rng = task_rng(seed, stream);
            for _ in 0..JITTER_ATTEMPTS {
                let u: Vec<f64> = lo
                    .iter()
                    .zip(&hi)
                    .map(|(l, h)| {
                        let c = 0.5 * (l + h);
                        c + fraction * (rng.random_range(*l..*h) - c)
                    })
                    .collect();
                let y = partition.project(facet, &u);
                if partition.locate(&y) == cell {
                    return y;
                }
            }
            partition.cell_center(cell)
        }
    }
}

/// One point per (scale, cell) with weight `μ = σ(cell)`.
///
/// The declared type is `δ = max b_j / b_{j+1}` (closing ratio included) and
/// `Ξ = max_j diam_j / b_j` with `diam_j` the partition diameter bound.
pub fn build_phase_grid(
    dim: Dimension,
    scales: &ScaleSequence,
    levels: &LevelSpec,
    placement: Placement,
    profile: PrecisionProfile,
) -> Result<PhaseSpaceGrid> {
    if let LevelSpec::PerScale(ks) = levels {
        if ks.len() != scales.len() {
            return Err(Error::config("k", "one partition level per scale is required"));
        }
    }
    if let Placement::Jitter { fraction, .. } = placement {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::config("placement", "jitter fraction must lie in [0, 1]"));
        }
    }
    let mut partitions: BTreeMap<u32, Partition> = BTreeMap::new();
    for j in 0..scales.len() {
        let k = levels.level(j);
        if let std::collections::btree_map::Entry::Vacant(e) = partitions.entry(k) {
            e.insert(Partition::build(dim, k)?.with_measures(profile));
        }
    }

    let mut stream_base = 0u64;
    let mut tasks = Vec::new();
    for (j, &b) in scales.scales().iter().enumerate() {
        let k = levels.level(j);
        let count = partitions[&k].cell_count();
        tasks.push((j, b, k, stream_base, count));
        stream_base += count;
    }
    let per_scale = exec::map_slice(&tasks, |&(j, b, k, base, count)| {
        let part = &partitions[&k];
        (0..count)
            .map(|cell| GridPoint {
                b,
                y: place(part, cell, placement, base + cell),
                mu: part.measure(cell).expect("measures were computed"),
                cell,
                scale_index: j,
            })
            .collect::<Vec<_>>()
    });
    let points: Vec<GridPoint> = per_scale.into_iter().flatten().collect();

    let xi = scales
        .scales()
        .iter()
        .enumerate()
        .map(|(j, b)| partitions[&levels.level(j)].diameter_bound() / b)
        .fold(0.0, f64::max);
    let k_max = partitions.keys().copied().max().unwrap_or(0);
    let meta = GridMeta {
        k: k_max,
        k_per_scale: match levels {
            LevelSpec::Uniform(_) => None,
            LevelSpec::PerScale(ks) => Some(ks.clone()),
        },
        placement: placement.to_string(),
        seed: placement.seed(),
        delta: scales.delta_hi(),
        xi,
        density: None,
        provenance: None,
    };
    Ok(PhaseSpaceGrid {
        dim,
        scales: scales.clone(),
        points,
        meta,
    })
}
