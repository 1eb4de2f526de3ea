//! Semi-continuous and discrete frame bounds.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use super::band::{zonal_row, BandFunction};
use super::scales::ScaleSequence;
use crate::error::{Error, Result};
use crate::exec;
use crate::families::{WaveletFamily, A_MIN};
use crate::special_fn::{harmonic_dim_f64, Dimension};
use crate::sphere::{sample_uniform, PhaseSpaceGrid, SpherePoint};

/// Points per work chunk when assembling over a grid.
const CHUNK: usize = 256;
/// Relative eigenvalue threshold for truncating the Gram matrix.
pub const GRAM_THRESHOLD: f64 = 1e-8;
/// Draws per Monte-Carlo trial before giving up on a degenerate trial.
const MAX_RESAMPLE: u64 = 16;

/// `S(l) = C κ² Σ_j γ(b_j τ(l))² ν_j` over a range of degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiframeProfile {
    pub l: Vec<u64>,
    pub s: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl SemiframeProfile {
    pub fn ratio(&self) -> f64 {
        self.b / self.a
    }

    /// CSV with columns `l,S`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "l,S")?;
        for (l, s) in self.l.iter().zip(&self.s) {
            writeln!(out, "{l},{s:e}")?;
        }
        out.flush()?;
        Ok(())
    }
}

fn check_family(family: &WaveletFamily, dim: Dimension) -> Result<()> {
    if family.dim() != dim {
        return Err(Error::config("n", "family and data live on different spheres"));
    }
    Ok(())
}

/// Semi-continuous frame bounds `A = min S(l)`, `B = max S(l)` for
/// `l ∈ [l_lo, l_hi]`. Sums are accumulated in double-double.
pub fn semiframe_bounds(
    family: &WaveletFamily,
    scales: &ScaleSequence,
    l_lo: u64,
    l_hi: u64,
) -> Result<SemiframeProfile> {
    if l_lo < family.l_min() || l_hi < l_lo {
        return Err(Error::config(
            "l_range",
            format!("need {} ≤ l_lo ≤ l_hi, got [{l_lo}, {l_hi}]", family.l_min()),
        ));
    }
    let norm = family.frame_constant() * family.kappa().powi(2);
    let ls: Vec<u64> = (l_lo..=l_hi).collect();
    let s = exec::map_slice(&ls, |&l| {
        let tau = family.spectral(l);
        let mut acc = TwoFloat::from(0.0);
        for (&b, &nu) in scales.scales().iter().zip(scales.nu()) {
            acc += TwoFloat::from((2.0 * family.profile_ln(b * tau)).exp()) * nu;
        }
        f64::from(acc * norm)
    });
    let a = s.iter().copied().fold(f64::INFINITY, f64::min);
    let b = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SemiframeProfile { l: ls, s, a, b })
}

/// `κ γ(b τ(l))` for `l = 0..=band`, zero below `l_min`.
fn scale_weights(family: &WaveletFamily, b: f64, band: u64) -> Vec<f64> {
    (0..=band)
        .map(|l| {
            if l < family.l_min() {
                0.0
            } else {
                family.kappa() * family.spectral_weight(b, l)
            }
        })
        .collect()
}

/// `v[i] = Σ_l w_l K_l(y·z_i)`, the analysis coefficient of `K^{(L)}(·, z_i)`.
fn analysis_row(
    dim: Dimension,
    weights: &[f64],
    y: &SpherePoint,
    centers: &[SpherePoint],
    buf: &mut [f64],
    out: &mut [f64],
) {
    for (slot, z) in out.iter_mut().zip(centers) {
        zonal_row(dim, y.dot(z), buf);
        *slot = weights.iter().zip(buf.iter()).map(|(w, k)| w * k).sum();
    }
}

/// `W f(b, y) = κ Σ_i c_i Σ_l γ(b τ(l)) K_l(y·z_i)`.
pub fn analysis_coeff(family: &WaveletFamily, b: f64, y: &SpherePoint, f: &BandFunction) -> Result<f64> {
    check_family(family, f.dim())?;
    if !(b >= A_MIN) {
        return Err(Error::Domain(format!("scale {b} is below the minimum {A_MIN}")));
    }
    let weights = scale_weights(family, b, f.band());
    let mut buf = vec![0.0; weights.len()];
    let mut row = vec![0.0; f.centers().len()];
    analysis_row(f.dim(), &weights, y, f.centers(), &mut buf, &mut row);
    Ok(row.iter().zip(f.coeffs()).map(|(v, c)| v * c).sum())
}

/// Per-point data shared by the discrete routines: `C ν μ / Σ_n` and the
/// analysis weights of each scale.
struct GridWeights {
    point: Vec<f64>,
    scale: Vec<Vec<f64>>,
}

impl GridWeights {
    fn new(family: &WaveletFamily, grid: &PhaseSpaceGrid, band: u64) -> Result<Self> {
        check_family(family, grid.dim())?;
        if let Some(b) = grid.scales().scales().iter().find(|&&b| !(b >= A_MIN)) {
            return Err(Error::Domain(format!("grid scale {b} is below the minimum {A_MIN}")));
        }
        let c = family.frame_constant() / grid.dim().sigma_n();
        let nu = grid.scales().nu();
        Ok(GridWeights {
            point: grid.points().iter().map(|p| c * nu[p.scale_index] * p.mu).collect(),
            scale: grid
                .scales()
                .scales()
                .iter()
                .map(|&b| scale_weights(family, b, band))
                .collect(),
        })
    }
}

/// `Σ_p w_p |W f(p)|²` where `f` has the given centers and coefficients.
fn weighted_energy(family: &WaveletFamily, grid: &PhaseSpaceGrid, f: &BandFunction) -> Result<f64> {
    let gw = GridWeights::new(family, grid, f.band())?;
    let points = grid.points();
    let parts = exec::map_chunks(points.len(), CHUNK, |range| {
        let mut buf = vec![0.0; f.band() as usize + 1];
        let mut row = vec![0.0; f.centers().len()];
        let mut acc = 0.0;
        for i in range {
            let p = &points[i];
            analysis_row(
                grid.dim(),
                &gw.scale[p.scale_index],
                &p.y,
                f.centers(),
                &mut buf,
                &mut row,
            );
            let w: f64 = row.iter().zip(f.coeffs()).map(|(v, c)| v * c).sum();
            acc += gw.point[i] * w * w;
        }
        acc
    });
    Ok(parts.into_iter().sum())
}

fn check_norm(f: &BandFunction) -> Result<f64> {
    let g = f.gram();
    let norm = DVector::from_column_slice(f.coeffs());
    let n2 = norm.dot(&(&g * &norm));
    let scale = norm.norm_squared() * g.amax();
    if !(n2 > 1e-12 * scale) {
        return Err(Error::Domain(format!(
            "band function is numerically zero (‖f‖² = {n2:e}, scale {scale:e})"
        )));
    }
    Ok(n2)
}

/// `Q(f) = C Σ_p ν μ/Σ_n |W f(p)|² / ‖f‖²`.
pub fn frame_quotient(family: &WaveletFamily, grid: &PhaseSpaceGrid, f: &BandFunction) -> Result<f64> {
    let n2 = check_norm(f)?;
    Ok(weighted_energy(family, grid, f)? / n2)
}

/// Continuous-position limit of the frame quotient,
/// `C κ² Σ_j ν_j Σ_l γ(b_j τ(l))² ‖f_l‖² / ‖f‖²`.
pub fn semicontinuous_quotient(family: &WaveletFamily, scales: &ScaleSequence, f: &BandFunction) -> Result<f64> {
    check_family(family, f.dim())?;
    let n2 = check_norm(f)?;
    let energy = f.degree_energy();
    let mut total = 0.0;
    for (&b, &nu) in scales.scales().iter().zip(scales.nu()) {
        for (e, l) in energy.iter().zip(f.l_min()..) {
            total += nu * family.spectral_weight(b, l).powi(2) * e;
        }
    }
    Ok(family.frame_constant() * family.kappa().powi(2) * total / n2)
}

/// Frame operator and Gram matrix on the span of `K^{(L)}(·, z_i)`, with the
/// generalized eigenproblem solved by whitening.
#[derive(Debug, Clone)]
pub struct FrameSystem {
    pub centers: Vec<SpherePoint>,
    pub band: u64,
    pub l_min: u64,
    /// `P[i,j] = Σ_p w_p v_p[i] v_p[j]`.
    pub operator: DMatrix<f64>,
    /// `G[i,j] = K^{(L)}(z_i·z_j)`.
    pub gram: DMatrix<f64>,
    /// `U_r Λ_r^{−1/2}`: columns are an orthonormal basis of the span.
    pub whitening: DMatrix<f64>,
    /// `Wᵀ P W`.
    pub reduced: DMatrix<f64>,
    /// Eigenvalues of the reduced operator, ascending.
    pub eigenvalues: Vec<f64>,
    /// Matching eigenvectors in whitened coordinates.
    pub eigenvectors: DMatrix<f64>,
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

impl FrameSystem {
    pub fn assemble(
        family: &WaveletFamily,
        grid: &PhaseSpaceGrid,
        band: u64,
        centers: Vec<SpherePoint>,
    ) -> Result<Self> {
        let l_min = family.l_min();
        if band < l_min {
            return Err(Error::config("band", format!("band {band} is below l_min {l_min}")));
        }
        let gw = GridWeights::new(family, grid, band)?;
        let k = centers.len();
        let points = grid.points();
        let dim = grid.dim();
        let parts = exec::map_chunks(points.len(), CHUNK, |range| {
            let mut buf = vec![0.0; band as usize + 1];
            let mut rows = DMatrix::zeros(range.len(), k);
            let mut row = vec![0.0; k];
            for (r, i) in range.enumerate() {
                let p = &points[i];
                analysis_row(dim, &gw.scale[p.scale_index], &p.y, &centers, &mut buf, &mut row);
                let s = gw.point[i].sqrt();
                for (c, v) in row.iter().enumerate() {
                    rows[(r, c)] = s * v;
                }
            }
            rows.transpose() * &rows
        });
        let mut operator = DMatrix::zeros(k, k);
        for part in parts {
            operator += part;
        }
        let gram = BandFunction::gram_of(dim, l_min, band, &centers);

        let (g_values, g_vectors) = sorted_eigen(gram.clone());
        let top = g_values.last().copied().unwrap_or(0.0);
        let keep: Vec<usize> = (0..g_values.len())
            .filter(|&i| g_values[i] > GRAM_THRESHOLD * top)
            .collect();
        if keep.len() < 3 {
            return Err(Error::config(
                "centers",
                format!("Gram matrix keeps only {} directions above the threshold", keep.len()),
            ));
        }
        let whitening = DMatrix::from_columns(
            &keep
                .iter()
                .map(|&i| g_vectors.column(i) / g_values[i].sqrt())
                .collect::<Vec<_>>(),
        );
        let mut reduced = whitening.transpose() * &operator * &whitening;
        reduced = (&reduced + reduced.transpose()) * 0.5;
        let (eigenvalues, eigenvectors) = sorted_eigen(reduced.clone());
        Ok(FrameSystem {
            centers,
            band,
            l_min,
            operator,
            gram,
            whitening,
            reduced,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn retained(&self) -> usize {
        self.whitening.ncols()
    }

    pub fn lower(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn upper(&self) -> f64 {
        *self.eigenvalues.last().expect("at least three directions")
    }

    /// Rayleigh quotient `cᵀPc / cᵀGc`.
    pub fn quotient(&self, coeffs: &[f64]) -> f64 {
        let c = DVector::from_column_slice(coeffs);
        c.dot(&(&self.operator * &c)) / c.dot(&(&self.gram * &c))
    }

    /// Kernel coefficients of the eigenfunction for eigenvalue `index`.
    pub fn eigenfunction(&self, index: usize) -> Vec<f64> {
        (&self.whitening * self.eigenvectors.column(index))
            .iter()
            .copied()
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameMethod {
    Mc,
    Eig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub family: String,
    pub grid: String,
    pub grid_points: usize,
    pub band: u64,
    pub l_min: u64,
    pub method: FrameMethod,
    pub a_hat: f64,
    pub b_hat: f64,
    pub ratio: f64,
    /// Number of random draws (MC) or kernel centers (eig).
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers_per_draw: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resampled: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retained: Option<usize>,
    pub seed: u64,
    /// The last scale weight uses a closing ratio.
    pub closing_weight: bool,
    pub warnings: Vec<String>,
    /// Wall time in seconds; only filled in when timing is requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime: Option<f64>,
}

/// Short descriptive id of a grid.
pub fn grid_id(grid: &PhaseSpaceGrid) -> String {
    let meta = grid.meta();
    format!(
        "n{}-k{}-J{}-{}-seed{}",
        grid.dim().n(),
        meta.k,
        grid.scales().len(),
        meta.placement,
        meta.seed
    )
}

/// `Σ_{l=l_min}^{L} N(n, l)`, the dimension of the band.
pub fn band_dimension(dim: Dimension, l_min: u64, band: u64) -> f64 {
    (l_min..=band).map(|l| harmonic_dim_f64(dim, l)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSpec {
    pub trials: usize,
    /// Kernel centers per random band function.
    pub centers: usize,
    pub seed: u64,
}

/// Monte-Carlo frame quotients of random band functions. `A_hat = min Q`
/// and `B_hat = max Q` bracket inward: `A ≤ A_hat ≤ B_hat ≤ B`.
pub fn frame_bounds_mc(family: &WaveletFamily, grid: &PhaseSpaceGrid, band: u64, spec: &McSpec) -> Result<FrameReport> {
    if spec.trials == 0 || spec.centers == 0 {
        return Err(Error::config("trials", "trials and centers must be at least 1"));
    }
    let l_min = family.l_min();
    if band < l_min {
        return Err(Error::config("band", format!("band {band} is below l_min {l_min}")));
    }
    let dim = grid.dim();
    let results = exec::map_range(spec.trials, |t| -> Result<(f64, u64)> {
        for attempt in 0..MAX_RESAMPLE {
            let f = BandFunction::random(
                dim,
                band,
                l_min,
                spec.centers,
                spec.seed,
                (t as u64) * MAX_RESAMPLE + attempt,
            )?;
            match frame_quotient(family, grid, &f) {
                Ok(q) => return Ok((q, attempt)),
                Err(Error::Domain(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::Numeric(format!(
            "trial {t} stayed degenerate after {MAX_RESAMPLE} draws"
        )))
    });
    let mut a = f64::INFINITY;
    let mut b = f64::NEG_INFINITY;
    let mut resampled = 0;
    for r in results {
        let (q, extra) = r?;
        a = a.min(q);
        b = b.max(q);
        resampled += extra as usize;
    }
    Ok(FrameReport {
        family: family.id(),
        grid: grid_id(grid),
        grid_points: grid.len(),
        band,
        l_min,
        method: FrameMethod::Mc,
        a_hat: a,
        b_hat: b,
        ratio: b / a,
        size: spec.trials,
        centers_per_draw: Some(spec.centers),
        resampled: Some(resampled),
        retained: None,
        seed: spec.seed,
        closing_weight: grid.scales().closing_weight_used(),
        warnings: Vec::new(),
        runtime: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentersSpec {
    pub count: usize,
    pub seed: u64,
}

impl CentersSpec {
    /// Twice the band dimension, which spans the band for generic centers.
    pub fn for_band(dim: Dimension, l_min: u64, band: u64, seed: u64) -> Self {
        CentersSpec {
            count: 2 * band_dimension(dim, l_min, band).ceil() as usize,
            seed,
        }
    }
}

/// Exact frame bounds on `span{K^{(L)}(·, z_i)}` from the extreme
/// generalized eigenvalues of `(P, G)`.
pub fn frame_bounds_eig(
    family: &WaveletFamily,
    grid: &PhaseSpaceGrid,
    band: u64,
    spec: &CentersSpec,
) -> Result<FrameReport> {
    let dim = grid.dim();
    let centers = sample_uniform(dim, spec.count, spec.seed)?;
    let system = FrameSystem::assemble(family, grid, band, centers)?;
    let mut warnings = Vec::new();
    let needed = band_dimension(dim, system.l_min, band);
    if (spec.count as f64) < needed {
        warnings.push(format!(
            "{} centers cannot span the band (dimension {needed}); bounds hold on the span only",
            spec.count
        ));
    }
    if (system.retained() as f64) < needed {
        warnings.push(format!(
            "Gram truncation kept {} of {needed} directions",
            system.retained()
        ));
    }
    let (a, b) = (system.lower(), system.upper());
    Ok(FrameReport {
        family: family.id(),
        grid: grid_id(grid),
        grid_points: grid.len(),
        band,
        l_min: system.l_min,
        method: FrameMethod::Eig,
        a_hat: a,
        b_hat: b,
        ratio: b / a,
        size: spec.count,
        centers_per_draw: None,
        resampled: None,
        retained: Some(system.retained()),
        seed: spec.seed,
        closing_weight: grid.scales().closing_weight_used(),
        warnings,
        runtime: None,
    })
}

/// `Σ_p w_p d_p v_p` for data `d_p` at the grid points.
pub(crate) fn synthesis(
    family: &WaveletFamily,
    grid: &PhaseSpaceGrid,
    band: u64,
    centers: &[SpherePoint],
    data: &[f64],
) -> Result<DVector<f64>> {
    let gw = GridWeights::new(family, grid, band)?;
    let points = grid.points();
    let k = centers.len();
    let parts = exec::map_chunks(points.len(), CHUNK, |range| {
        let mut buf = vec![0.0; band as usize + 1];
        let mut row = vec![0.0; k];
        let mut acc = DVector::zeros(k);
        for i in range {
            let p = &points[i];
            analysis_row(grid.dim(), &gw.scale[p.scale_index], &p.y, centers, &mut buf, &mut row);
            let s = gw.point[i] * data[i];
            for (a, v) in acc.iter_mut().zip(&row) {
                *a += s * v;
            }
        }
        acc
    });
    let mut total = DVector::zeros(k);
    for part in parts {
        total += part;
    }
    Ok(total)
}

/// Analysis coefficients `W f(p)` at every grid point.
pub fn analysis_data(family: &WaveletFamily, grid: &PhaseSpaceGrid, f: &BandFunction) -> Result<Vec<f64>> {
    let gw = GridWeights::new(family, grid, f.band())?;
    let points = grid.points();
    let parts = exec::map_chunks(points.len(), CHUNK, |range| {
        let mut buf = vec![0.0; f.band() as usize + 1];
        let mut row = vec![0.0; f.centers().len()];
        range
            .map(|i| {
                let p = &points[i];
                analysis_row(
                    grid.dim(),
                    &gw.scale[p.scale_index],
                    &p.y,
                    f.centers(),
                    &mut buf,
                    &mut row,
                );
                row.iter().zip(f.coeffs()).map(|(v, c)| v * c).sum::<f64>()
            })
            .collect::<Vec<f64>>()
    });
    Ok(parts.into_iter().flatten().collect())
}
