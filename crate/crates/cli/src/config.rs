//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::str::FromStr;

use sphframes::{Error, Result};

/// One subcommand's configuration. Values are kept as the strings the user
/// wrote so they can be echoed verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: String,
    pub values: BTreeMap<String, String>,
}

/// Defaults shared by every command.
pub const COMMON_DEFAULTS: &[(&str, &str)] = &[
    ("omega", "1"),
    ("epsilon", "0.25"),
    ("eps_tilde", "0.25"),
    ("h", "1"),
    ("a_min", "0.001"),
];

/// `(command, key, default, help)`; an empty default means optional.
pub const KEYS: &[(&str, &str, &str, &str)] = &[
    ("eval", "family", "poisson", "wavelet family"),
    ("eval", "m", "2", "family order"),
    ("eval", "n", "2", "sphere dimension"),
    ("eval", "a", "0.5", "scale (s = a² for needlets)"),
    ("eval", "theta", "0,0.5,1,1.5,2,2.5,3", "comma-separated angles"),
    ("eval", "quantity", "value", "value or gradient"),
    ("eval", "tol", "1e-15", "relative series tolerance"),
    ("admissibility", "family", "poisson", "wavelet family"),
    ("admissibility", "m", "2", "family order"),
    ("admissibility", "n", "2", "sphere dimension"),
    ("semiframe", "family", "poisson", "wavelet family"),
    ("semiframe", "m", "2", "family order"),
    ("semiframe", "n", "2", "sphere dimension"),
    ("semiframe", "q", "0.99", "geometric scale ratio"),
    ("semiframe", "b0", "20", "largest scale"),
    ("semiframe", "J", "2000", "number of scales"),
    ("semiframe", "scales", "", "scale spec, overrides q, b0 and J"),
    ("semiframe", "lmin", "", "smallest degree (default l_min of the family)"),
    ("semiframe", "lmax", "200", "largest degree"),
    ("semiframe", "profile", "", "CSV path for the S(l) profile"),
    ("localization", "family", "poisson", "wavelet family"),
    ("localization", "m", "3", "family order"),
    ("localization", "n", "2", "sphere dimension"),
    ("localization", "quantity", "value", "value or gradient"),
    (
        "localization",
        "exponent",
        "",
        "weight exponent (default m+n, or m+n+1 for the gradient)",
    ),
    ("localization", "scan_a_min", "0.01", "smallest scale of the scan"),
    ("localization", "scan_a_max", "10", "largest scale of the scan"),
    ("localization", "a_per_decade", "24", "scale points per decade"),
    ("localization", "theta_min", "0.01", "smallest angle of the scan"),
    ("localization", "theta_per_decade", "96", "angle points per decade"),
    ("localization", "csv", "", "CSV path for every scan row"),
    ("kernel-check", "m", "3", "kernel order"),
    ("kernel-check", "n", "2", "sphere dimension"),
    ("kernel-check", "b0", "1", "largest scale of the scan"),
    ("kernel-check", "b_min", "0.001", "smallest scale of the scan"),
    ("kernel-check", "scales_per_decade", "6", "scale points per decade"),
    ("kernel-check", "angles_per_decade", "24", "angle points per decade"),
    ("kernel-check", "draws", "20", "random closed-vs-series comparisons"),
    ("kernel-check", "seed", "0", "random seed"),
    ("kernel-check", "tol", "1e-15", "relative series tolerance"),
    ("grid-build", "n", "2", "sphere dimension"),
    ("grid-build", "k", "3", "partition level, or one level per scale"),
    (
        "grid-build",
        "scales",
        "geometric:1,0.9,25",
        "geometric:b0,q,J or explicit:b1,b2,...",
    ),
    (
        "grid-build",
        "placement",
        "center",
        "center, random or jitter:<fraction>",
    ),
    (
        "grid-build",
        "precision",
        "default",
        "cell measure precision: fast or default",
    ),
    ("grid-build", "seed", "0", "random seed"),
    ("grid-density", "grid", "", "grid JSON path"),
    ("grid-density", "rho", "1", "declared density"),
    ("grid-density", "probes", "256", "number of probe points"),
    ("grid-density", "seed", "0", "random seed"),
    ("frame-audit", "method", "eig", "mc or eig"),
    ("frame-audit", "grid", "", "grid JSON path"),
    ("frame-audit", "family", "poisson", "wavelet family"),
    ("frame-audit", "m", "3", "family order"),
    ("frame-audit", "band", "10", "band limit L"),
    ("frame-audit", "trials", "64", "Monte-Carlo draws"),
    (
        "frame-audit",
        "centers",
        "",
        "kernel centers (default: band dimension for mc, twice that for eig)",
    ),
    ("frame-audit", "seed", "0", "random seed"),
    ("reconstruct", "grid", "", "grid JSON path"),
    ("reconstruct", "family", "poisson", "wavelet family"),
    ("reconstruct", "m", "3", "family order"),
    ("reconstruct", "band", "10", "band limit L"),
    (
        "reconstruct",
        "centers",
        "",
        "kernel centers of the target (default twice the band dimension)",
    ),
    ("reconstruct", "seed", "0", "random seed"),
    ("reconstruct", "tol", "1e-8", "relative residual tolerance"),
    ("reconstruct", "max_iter", "100000", "iteration cap"),
];

pub const COMMANDS: &[(&str, &str)] = &[
    ("eval", "Evaluate a wavelet or its angular derivative"),
    (
        "admissibility",
        "Admissibility integral, frame constant and profile variation",
    ),
    ("semiframe", "Semi-continuous frame bounds over a band of degrees"),
    (
        "localization",
        "Scan the scaled Poisson multipole for its localization constant",
    ),
    (
        "kernel-check",
        "Reproducing kernel identity, normalization and localization scan",
    ),
    ("grid-build", "Build a phase-space grid and write it as JSON"),
    ("grid-density", "Hyperbolic covering radius of a grid"),
    ("frame-audit", "Discrete frame bounds on a band (mc or eig)"),
    (
        "reconstruct",
        "Frame-algorithm reconstruction of a random band function",
    ),
];

/// Keys accepted by `command`, in table order.
pub fn command_keys(
    command: &str,
) -> impl Iterator<Item = &'static (&'static str, &'static str, &'static str, &'static str)> + '_ {
    KEYS.iter().filter(move |k| k.0 == command)
}

fn known_key(command: &str, key: &str) -> bool {
    COMMON_DEFAULTS.iter().any(|d| d.0 == key) || command_keys(command).any(|k| k.1 == key)
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config("config", format!("line {} is not `key = value`", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::config(key, "missing value"))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.str(key)?;
        raw.parse()
            .map_err(|_| Error::config(key, format!("cannot parse `{raw}`")))
    }

    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(_) => self.parse(key).map(Some),
        }
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.str(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::config(key, format!("cannot parse `{s}`")))
            })
            .collect()
    }
}

fn check(cfg: &RunConfig, key: &str, ok: impl Fn(f64) -> bool, msg: &str) -> Result<()> {
    match cfg.parse_opt::<f64>(key)? {
        Some(v) if !ok(v) => Err(Error::config(key, format!("{msg}, got {v}"))),
        _ => Ok(()),
    }
}

/// Fills defaults and checks constraints. Errors name the offending field.
pub fn validate_config(mut cfg: RunConfig) -> Result<RunConfig> {
    if !COMMANDS.iter().any(|c| c.0 == cfg.command) {
        return Err(Error::config("command", format!("unknown command `{}`", cfg.command)));
    }
    if let Some(key) = cfg.values.keys().find(|k| !known_key(&cfg.command, k)) {
        return Err(Error::config(
            key.clone(),
            format!("not a setting of `{}`", cfg.command),
        ));
    }
    for (key, value) in COMMON_DEFAULTS {
        cfg.values.entry(key.to_string()).or_insert_with(|| value.to_string());
    }
    for (_, key, value, _) in command_keys(&cfg.command) {
        if !value.is_empty() {
            cfg.values.entry(key.to_string()).or_insert_with(|| value.to_string());
        }
    }
    if cfg.command == "localization" && cfg.get("exponent").is_none() {
        let m: f64 = cfg.parse("m")?;
        let n: f64 = cfg.parse("n")?;
        let extra = if cfg.get("quantity") == Some("gradient") {
            1.0
        } else {
            0.0
        };
        cfg.values.insert("exponent".into(), format!("{}", m + n + extra));
    }

    match cfg.parse_opt::<u32>("n") {
        Ok(Some(n)) if n < 2 => return Err(Error::config("n", format!("need n ≥ 2, got {n}"))),
        Err(_) => return Err(Error::config("n", "must be an integer ≥ 2")),
        _ => {}
    }
    check(&cfg, "m", |v| v > 0.0, "order must be positive")?;
    if cfg.command == "kernel-check" {
        match cfg.parse::<u32>("m") {
            Ok(m) if m >= 1 => {}
            _ => return Err(Error::config("m", "kernel order must be an integer ≥ 1")),
        }
    }
    check(&cfg, "q", |v| v > 0.0 && v < 1.0, "need 0 < q < 1")?;
    check(&cfg, "omega", |v| v > 0.0, "must be positive")?;
    check(&cfg, "epsilon", |v| v > 0.0, "must be positive")?;
    check(&cfg, "eps_tilde", |v| v > 0.0 && v < 0.5, "need 0 < eps_tilde < 1/2")?;
    check(&cfg, "h", |v| v > 0.0, "must be positive")?;
    check(&cfg, "a_min", |v| v > 0.0, "must be positive")?;
    check(&cfg, "tol", |v| v > 0.0 && v < 1.0, "need 0 < tol < 1")?;
    check(&cfg, "rho", |v| v > 0.0, "must be positive")?;
    if let Some(q) = cfg.get("quantity") {
        if q != "value" && q != "gradient" {
            return Err(Error::config(
                "quantity",
                format!("expected value or gradient, got `{q}`"),
            ));
        }
    }
    if let Some(m) = cfg.get("method") {
        if m != "mc" && m != "eig" {
            return Err(Error::config("method", format!("expected mc or eig, got `{m}`")));
        }
    }
    Ok(cfg)
}
