//! Distance in the metric `dζ_h = (2/(1−r²)) ‖(dr, h dψ)‖` on the unit ball
//! and a Monte-Carlo covering-radius check for grids mapped by `r = e^{−b}`.
//!
//! With `w = ln((1+r)/(1−r))` the metric becomes `dw² + (1 + cosh w)² h² dψ²`,
//! so the radial part is exact in `w` and only the mixed case needs a
//! numerical shortest path. That path is computed on a graph over the
//! `(w, hψ)` rectangle with a 3-ring stencil, once at a base resolution and
//! once refined; the refined value (or a cheaper explicit path, if shorter)
//! is returned. Every graph path is a real path, so the result never
//! underestimates the true distance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{geodesic_distance, random_point, task_rng, PhaseSpaceGrid, SpherePoint};
use crate::error::{Error, Result};
use crate::exec;

#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    r: f64,
    direction: SpherePoint,
}

impl BallPoint {
    pub fn new(r: f64, direction: SpherePoint) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::Domain(format!("ball radius must lie in [0, 1), got {r}")));
        }
        Ok(BallPoint { r, direction })
    }

    /// Source point `(e^{−b}, y)` of a wavelet at scale `b > 0`.
    pub fn from_scale(b: f64, direction: SpherePoint) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::Domain(format!("scale must be positive, got {b}")));
        }
        BallPoint::new((-b).exp(), direction)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn direction(&self) -> &SpherePoint {
        &self.direction
    }

    /// Radial coordinate `w = ln((1+r)/(1−r))`.
    pub fn w(&self) -> f64 {
        radial_coordinate(self.r)
    }
}

/// `ln((1+r)/(1−r))`: the metric distance from the centre along a radius.
pub fn radial_coordinate(r: f64) -> f64 {
    2.0 * r.atanh()
}

/// `w` for `r = e^{−b}`, accurate for small `b`.
pub(crate) fn radial_coordinate_of_scale(b: f64) -> f64 {
    let r = (-b).exp();
    ((1.0 + r) / -(-b).exp_m1()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicDistance {
    pub value: f64,
    /// Base-resolution graph value.
    pub coarse: f64,
    /// `|coarse − refined| / refined`.
    pub relative_change: f64,
    /// False when one refinement step moved the result by more than 1%.
    pub converged: bool,
}

impl HyperbolicDistance {
    fn exact(value: f64) -> Self {
        HyperbolicDistance {
            value,
            coarse: value,
            relative_change: 0.0,
            converged: true,
        }
    }
}

const BASE_RESOLUTION: usize = 24;
const STENCIL: i64 = 3;

fn conformal(w: f64) -> f64 {
    1.0 + w.cosh()
}

/// Length of the straight segment between `(w0, v0)` and `(w1, v1)`.
fn segment_length(w0: f64, dw: f64, dv: f64, panels: usize) -> f64 {
    let f = |s: f64| (dw * dw + (conformal(w0 + s * dw) * dv).powi(2)).sqrt();
    let h = 1.0 / panels as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..panels {
        let s = i as f64 * h;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(s);
    }
    acc * h / 3.0
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

fn stencil() -> Vec<(i64, i64)> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let mut out = Vec::new();
    for di in -STENCIL..=STENCIL {
        for dj in -STENCIL..=STENCIL {
            if (di, dj) != (0, 0) && gcd(di, dj) == 1 {
                out.push((di, dj));
            }
        }
    }
    out
}

/// Shortest graph path from `(w_from, 0)` to `(w_to, v_end)`.
fn graph_distance(w_from: f64, w_to: f64, v_end: f64, resolution: usize) -> f64 {
    let w_max = w_from.max(w_to);
    let mut ws: Vec<f64> = (0..=resolution).map(|i| w_max * i as f64 / resolution as f64).collect();
    ws.push(w_from);
    ws.push(w_to);
    ws.sort_by(f64::total_cmp);
    ws.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * w_max);
    let find = |w: f64| {
        ws.iter()
            .enumerate()
            .min_by(|a, b| (a.1 - w).abs().total_cmp(&(b.1 - w).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    };
    let (src_i, dst_i) = (find(w_from), find(w_to));
    let cols = resolution;
    let vs: Vec<f64> = (0..=cols).map(|j| v_end * j as f64 / cols as f64).collect();
    let rows = ws.len();
    let width = cols + 1;
    let node = |i: usize, j: usize| i * width + j;
    let source = node(src_i, 0);
    let target = node(dst_i, cols);

    let offsets = stencil();
    let mut dist = vec![f64::INFINITY; rows * width];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, u)) = heap.pop() {
        if u == target {
            return d;
        }
        if d > dist[u] {
            continue;
        }
        let (i, j) = (u / width, u % width);
        for &(di, dj) in &offsets {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni < 0 || nj < 0 || ni >= rows as i64 || nj > cols as i64 {
                continue;
            }
            let (ni, nj) = (ni as usize, nj as usize);
            let len = segment_length(ws[i], ws[ni] - ws[i], vs[nj] - vs[j], 2);
            let v = node(ni, nj);
            let cand = d + len;
            if cand < dist[v] {
                dist[v] = cand;
                heap.push(Entry(cand, v));
            }
        }
    }
    dist[target]
}

/// Cheap explicit paths: the straight segment in `(w, hψ)` and the path
/// through the centre.
fn explicit_upper_bound(w_p: f64, w_q: f64, v: f64) -> f64 {
    let straight = segment_length(w_p, w_q - w_p, v, 64);
    let via_centre = w_p + w_q + 2.0 * v;
    straight.min(via_centre)
}

/// `√(Δw² + (2hψ)²)`: the metric dominates the flat one with factor 2.
fn lower_bound(w_p: f64, w_q: f64, v: f64) -> f64 {
    ((w_p - w_q).powi(2) + 4.0 * v * v).sqrt()
}

fn distance_in_strip(w_p: f64, w_q: f64, v: f64) -> HyperbolicDistance {
    if v == 0.0 {
        return HyperbolicDistance::exact((w_p - w_q).abs());
    }
    if w_p.max(w_q) == 0.0 {
        return HyperbolicDistance::exact(2.0 * v);
    }
    let coarse = graph_distance(w_p, w_q, v, BASE_RESOLUTION);
    let fine = graph_distance(w_p, w_q, v, 2 * BASE_RESOLUTION);
    let relative_change = (coarse - fine).abs() / fine;
    let value = fine.min(explicit_upper_bound(w_p, w_q, v));
    HyperbolicDistance {
        value,
        coarse,
        relative_change,
        converged: relative_change <= 0.01,
    }
}

/// Distance between two ball points in `dζ_h`, reduced to the `(r, ψ)`
/// half-plane with `ψ` the geodesic angle between their directions.
pub fn hyperbolic_distance(p: &BallPoint, q: &BallPoint, h: f64) -> Result<HyperbolicDistance> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::config(
            "h",
            format!("angular constant must be positive, got {h}"),
        ));
    }
    let psi = geodesic_distance(&p.direction, &q.direction);
    Ok(distance_in_strip(p.w(), q.w(), h * psi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub rho: f64,
    pub h: f64,
    pub probes: usize,
    pub seed: u64,
    /// Largest distance from a probe to its nearest grid point.
    pub covering_radius: f64,
    pub pass: bool,
    /// Probes whose nearest distance did not settle under refinement.
    pub unconverged: usize,
    /// Number of shortest-path solves actually performed.
    pub solves: usize,
}

struct Nearest {
    distance: f64,
    converged: bool,
    solves: usize,
}

fn nearest(probe: &BallPoint, grid: &[BallPoint], h: f64) -> Nearest {
    let wp = probe.w();
    let mut cands: Vec<(f64, f64, f64)> = grid
        .iter()
        .map(|g| {
            let v = h * geodesic_distance(&probe.direction, &g.direction);
            let wq = g.w();
            (lower_bound(wp, wq, v), wq, v)
        })
        .collect();
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    let mut converged = true;
    let mut solves = 0;
    for (lb, wq, v) in cands {
        if lb >= best {
            break;
        }
        let d = distance_in_strip(wp, wq, v);
        solves += 1;
        if d.value < best {
            best = d.value;
            converged = d.converged;
        }
    }
    Nearest {
        distance: best,
        converged,
        solves,
    }
}

/// Covering radius of `grid` seen from the given probe centres.
pub fn density_check_with_probes(grid: &[BallPoint], probes: &[BallPoint], rho: f64, h: f64) -> Result<DensityReport> {
    if !(h > 0.0) {
        return Err(Error::config("h", "angular constant must be positive"));
    }
    if grid.is_empty() {
        return Ok(DensityReport {
            rho,
            h,
            probes: probes.len(),
            seed: 0,
            covering_radius: f64::INFINITY,
            pass: false,
            unconverged: 0,
            solves: 0,
        });
    }
    let found = exec::map_slice(probes, |p| nearest(p, grid, h));
    let covering_radius = found.iter().map(|f| f.distance).fold(0.0, f64::max);
    Ok(DensityReport {
        rho,
        h,
        probes: probes.len(),
        seed: 0,
        covering_radius,
        pass: covering_radius <= rho,
        unconverged: found.iter().filter(|f| !f.converged).count(),
        solves: found.iter().map(|f| f.solves).sum(),
    })
}

/// Monte-Carlo density check of a phase-space grid.
///
/// Probe centres are drawn uniformly in `w` over the radial band spanned by
/// the grid's scales and uniformly in direction. Passing is necessary, not
/// sufficient, for the grid to have hyperbolic density `rho`.
pub fn density_check(grid: &PhaseSpaceGrid, rho: f64, h: f64, probes: usize, seed: u64) -> Result<DensityReport> {
    let dim = grid.dim();
    let ball: Vec<BallPoint> = grid
        .points()
        .iter()
        .map(|p| BallPoint::from_scale(p.b, p.y.clone()))
        .collect::<Result<_>>()?;
    if ball.is_empty() {
        return density_check_with_probes(&ball, &[], rho, h).map(|r| DensityReport { seed, ..r });
    }
    let (b_lo, b_hi) = grid
        .points()
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.b), hi.max(p.b)));
    let (w_lo, w_hi) = (radial_coordinate_of_scale(b_hi), radial_coordinate_of_scale(b_lo));
    let mut rng = task_rng(seed, 0);
    let probe_points: Vec<BallPoint> = (0..probes)
        .map(|_| {
            let w = if w_hi > w_lo {
                rng.random_range(w_lo..=w_hi)
            } else {
                w_lo
            };
            let r = (0.5 * w).tanh();
            BallPoint::new(r, random_point(dim, &mut rng))
        })
        .collect::<Result<_>>()?;
    density_check_with_probes(&ball, &probe_points, rho, h).map(|r| DensityReport { seed, ..r })
}
