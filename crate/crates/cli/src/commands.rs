//! One handler per subcommand. Each returns the JSON result object.

use rand::Rng;
use serde_json::{json, Value};

use crate::config::RunConfig;
use sphframes::families::{
    admissibility_integral, gamma_tv, localization_rows, localization_scan, make_family, write_scan_csv, FamilyKind,
    LocalizationSpec, ScanQuantity, SeriesOptions, WaveletFamily,
};
use sphframes::frames::{
    band_dimension, frame_bounds_eig, frame_bounds_mc, grid_id, make_scales, reconstruct, semiframe_bounds,
    BandFunction, CentersSpec, McSpec, ScaleKind, ScaleSequence,
};
use sphframes::kernel::{kernel_closed, kernel_localization_scan, kernel_series, KernelScanParams, KernelSpec};
use sphframes::sphere::{
    build_phase_grid, density_check, random_point, task_rng, LevelSpec, PhaseSpaceGrid, Placement,
};
use sphframes::{Dimension, Error, Result};

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn dim(cfg: &RunConfig) -> Result<Dimension> {
    Dimension::new(cfg.parse("n")?)
}

fn family(cfg: &RunConfig, dim: Dimension) -> Result<WaveletFamily> {
    let order = cfg.parse_opt::<f64>("m")?;
    make_family(FamilyKind::from_name(cfg.str("family")?, order)?, dim)
}

fn series_options(cfg: &RunConfig) -> Result<SeriesOptions> {
    Ok(SeriesOptions {
        tol: cfg.parse("tol")?,
        a_min: cfg.parse("a_min")?,
        ..SeriesOptions::default()
    })
}

/// `geometric:b0,q,J` or `explicit:b1,b2,...`.
pub fn parse_scales(spec: &str) -> Result<ScaleSequence> {
    let bad = || {
        Error::config(
            "scales",
            format!("expected geometric:b0,q,J or explicit:b1,b2,..., got `{spec}`"),
        )
    };
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    let numbers: Vec<f64> = rest
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match kind {
        "geometric" => match numbers[..] {
            [b0, q, count] if count >= 1.0 && count.fract() == 0.0 => make_scales(&ScaleKind::Geometric {
                b0,
                q,
                count: count as usize,
            }),
            _ => Err(bad()),
        },
        "explicit" => make_scales(&ScaleKind::Explicit {
            scales: numbers,
            closing_ratio: None,
        }),
        _ => Err(bad()),
    }
}

fn read_grid(cfg: &RunConfig) -> Result<PhaseSpaceGrid> {
    PhaseSpaceGrid::read(cfg.str("grid")?)
}

pub fn eval(cfg: &RunConfig) -> Result<Value> {
    let f = family(cfg, dim(cfg)?)?;
    let opts = series_options(cfg)?;
    let a: f64 = cfg.parse("a")?;
    let gradient = cfg.str("quantity")? == "gradient";
    let mut rows = Vec::new();
    for theta in cfg.list::<f64>("theta")? {
        let v = if gradient {
            f.eval_gradient(a, theta, &opts)?
        } else {
            f.eval_zonal(a, theta, &opts)?
        };
        rows.push(json!({ "theta": theta, "value": v.value, "degree": v.degree }));
    }
    Ok(json!({ "family": f.id(), "a": a, "rows": rows }))
}

pub fn admissibility(cfg: &RunConfig) -> Result<Value> {
    let f = family(cfg, dim(cfg)?)?;
    let tv = gamma_tv(&f)?;
    Ok(json!({
        "family": f.id(),
        "kappa": f.kappa(),
        "i_gamma_closed": f.admissibility_constant(),
        "i_gamma_numeric": admissibility_integral(&f)?,
        "frame_constant": f.frame_constant(),
        "zero_mean": f.zero_mean(),
        "l_min": f.l_min(),
        "total_variation": to_value(&tv)?,
    }))
}

pub fn semiframe(cfg: &RunConfig) -> Result<Value> {
    let f = family(cfg, dim(cfg)?)?;
    let scales = match cfg.get("scales") {
        Some(spec) => parse_scales(spec)?,
        None => make_scales(&ScaleKind::Geometric {
            b0: cfg.parse("b0")?,
            q: cfg.parse("q")?,
            count: cfg.parse("J")?,
        })?,
    };
    let lmin = cfg.parse_opt::<u64>("lmin")?.unwrap_or(f.l_min());
    let lmax: u64 = cfg.parse("lmax")?;
    let p = semiframe_bounds(&f, &scales, lmin, lmax)?;
    if let Some(path) = cfg.get("profile") {
        p.write_csv(path)?;
    }
    Ok(json!({
        "family": f.id(),
        "l_min": lmin,
        "l_max": lmax,
        "scales": scales.len(),
        "delta_lo": scales.delta_lo(),
        "delta_hi": scales.delta_hi(),
        "closing_weight": scales.closing_weight_used(),
        "A": p.a,
        "B": p.b,
        "ratio": p.ratio(),
    }))
}

pub fn localization(cfg: &RunConfig) -> Result<Value> {
    let f = family(cfg, dim(cfg)?)?;
    let quantity = match cfg.str("quantity")? {
        "gradient" => ScanQuantity::Gradient,
        _ => ScanQuantity::Value,
    };
    let exponent: f64 = cfg.parse("exponent")?;
    let spec = LocalizationSpec {
        a_min: cfg.parse("scan_a_min")?,
        a_max: cfg.parse("scan_a_max")?,
        a_per_decade: cfg.parse("a_per_decade")?,
        theta_min: cfg.parse("theta_min")?,
        theta_per_decade: cfg.parse("theta_per_decade")?,
    };
    let report = localization_scan(&f, exponent, quantity, &spec)?;
    if let Some(path) = cfg.get("csv") {
        let rows = localization_rows(&f, exponent, quantity, &spec)?;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_scan_csv(&rows, &mut out)?;
    }
    to_value(&report)
}

pub fn kernel_check(cfg: &RunConfig) -> Result<Value> {
    let dim = dim(cfg)?;
    let m: u32 = cfg.parse("m")?;
    let spec = KernelSpec::new(dim, m)?;
    let poisson = make_family(FamilyKind::Poisson { m }, dim)?;
    let opts = series_options(cfg)?;
    let draws: usize = cfg.parse("draws")?;
    let mut rng = task_rng(cfg.parse("seed")?, 0);
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let a = 10f64.powf(rng.random_range(-1.3..0.3));
        let b = 10f64.powf(rng.random_range(-1.3..0.3));
        let x = random_point(dim, &mut rng);
        let y = random_point(dim, &mut rng);
        let c = kernel_closed(&spec, a, &x, b, &y)?;
        let s = kernel_series(&spec, a, &x, b, &y, &opts)?;
        worst = worst.max((c - s).abs() / s.abs());
    }
    let params = KernelScanParams {
        omega: cfg.parse("omega")?,
        epsilon: cfg.parse("epsilon")?,
        eps_tilde: cfg.parse("eps_tilde")?,
        b0: cfg.parse("b0")?,
        b_min: cfg.parse("b_min")?,
        scales_per_decade: cfg.parse("scales_per_decade")?,
        angles_per_decade: cfg.parse("angles_per_decade")?,
    };
    let scan = kernel_localization_scan(&spec, &params)?;
    Ok(json!({
        "pref": spec.pref(),
        "normalization": spec.normalization(&poisson),
        "draws": draws,
        "max_relative_error": worst,
        "scan": to_value(&scan)?,
    }))
}

pub fn grid_build(cfg: &RunConfig, provenance: Value) -> Result<(Value, PhaseSpaceGrid)> {
    let dim = dim(cfg)?;
    let scales = parse_scales(cfg.str("scales")?)?;
    let levels: Vec<u32> = cfg.list("k")?;
    let levels = match levels[..] {
        [k] => LevelSpec::Uniform(k),
        _ => LevelSpec::PerScale(levels),
    };
    let seed: u64 = cfg.parse("seed")?;
    let placement = Placement::from_label(cfg.str("placement")?, seed)?;
    let grid = build_phase_grid(dim, &scales, &levels, placement, cfg.parse("precision")?)?.with_provenance(provenance);
    let (delta, xi) = grid.grid_type();
    let summary = json!({
        "grid": grid_id(&grid),
        "points": grid.len(),
        "delta": delta,
        "xi": xi,
        "vacuous_scales": grid.vacuous_scales(),
    });
    Ok((summary, grid))
}

pub fn grid_density(cfg: &RunConfig) -> Result<Value> {
    let grid = read_grid(cfg)?;
    let report = density_check(
        &grid,
        cfg.parse("rho")?,
        cfg.parse("h")?,
        cfg.parse("probes")?,
        cfg.parse("seed")?,
    )?;
    Ok(json!({ "grid": grid_id(&grid), "report": to_value(&report)? }))
}

pub fn frame_audit(cfg: &RunConfig) -> Result<Value> {
    let grid = read_grid(cfg)?;
    let f = family(cfg, grid.dim())?;
    let band: u64 = cfg.parse("band")?;
    let seed: u64 = cfg.parse("seed")?;
    let band_dim = band_dimension(grid.dim(), f.l_min(), band).ceil() as usize;
    let centers = cfg.parse_opt::<usize>("centers")?;
    let report = match cfg.str("method")? {
        "mc" => frame_bounds_mc(
            &f,
            &grid,
            band,
            &McSpec {
                trials: cfg.parse("trials")?,
                centers: centers.unwrap_or(band_dim),
                seed,
            },
        )?,
        _ => frame_bounds_eig(
            &f,
            &grid,
            band,
            &CentersSpec {
                count: centers.unwrap_or(2 * band_dim),
                seed,
            },
        )?,
    };
    to_value(&report)
}

pub fn reconstruct_cmd(cfg: &RunConfig) -> Result<Value> {
    let grid = read_grid(cfg)?;
    let dim = grid.dim();
    let f = family(cfg, dim)?;
    let band: u64 = cfg.parse("band")?;
    let count = match cfg.parse_opt::<usize>("centers")? {
        Some(c) => c,
        None => 2 * band_dimension(dim, f.l_min(), band).ceil() as usize,
    };
    let target = BandFunction::random(dim, band, f.l_min(), count, cfg.parse("seed")?, 0)?;
    let (_, report) = reconstruct(&f, &grid, &target, cfg.parse("max_iter")?, cfg.parse("tol")?)?;
    Ok(json!({ "family": f.id(), "grid": grid_id(&grid), "centers": count, "report": to_value(&report)? }))
}
