//! Command-line driver: every experiment is a subcommand reading flat
//! `key = value` settings and writing deterministic JSON.
//!
//! Exit codes: 0 on success, 2 for configuration errors (bad flags, values or
//! files), 3 for numeric failures.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::{json, Value};

pub use commands::parse_scales;
pub use config::{parse_config_file, validate_config, RunConfig, COMMANDS, COMMON_DEFAULTS, KEYS};
use sphframes::{exec, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}

fn setting(key: &'static str, help: &'static str) -> Arg {
    Arg::new(key).long(key).value_name("VALUE").help(help).num_args(1)
}

pub fn app() -> Command {
    let mut app = Command::new("sphframes")
        .version(sphframes::VERSION)
        .about("Spherical wavelet frame experiments")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("PATH")
                .help("flat `key = value` file; flags override it"),
        )
        .arg(
            Arg::new("threads")
                .long("threads")
                .global(true)
                .env("SPHFRAMES_THREADS")
                .value_name("N")
                .value_parser(clap::value_parser!(usize))
                .help("cap on worker threads"),
        )
        .arg(
            Arg::new("timing")
                .long("timing")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("record wall time in a separate meta field"),
        )
        .arg(
            Arg::new("quiet")
                .short('q')
                .long("quiet")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("with -o, skip the grid-build summary on stdout"),
        )
        .arg(
            Arg::new("output")
                .short('o')
                .long("output")
                .global(true)
                .value_name("PATH")
                .help("write the result here instead of stdout"),
        );
    for (name, about) in COMMANDS {
        let mut sub = Command::new(*name).about(*about);
        let mut seen = Vec::new();
        for (_, key, _, help) in config::command_keys(name) {
            sub = sub.arg(setting(key, help));
            seen.push(*key);
        }
        for (key, _) in COMMON_DEFAULTS {
            if !seen.contains(key) {
                sub = sub.arg(setting(key, "shared setting"));
            }
        }
        app = app.subcommand(sub);
    }
    app
}

/// Effective configuration and the output path, which is not echoed.
fn collect(command: &str, global: &ArgMatches, sub: &ArgMatches) -> Result<(RunConfig, Option<String>)> {
    let mut values: BTreeMap<String, String> = match global.get_one::<String>("config").or(sub.get_one("config")) {
        Some(path) => parse_config_file(&std::fs::read_to_string(path)?)?,
        None => BTreeMap::new(),
    };
    for id in sub.ids() {
        let key = id.as_str();
        if ["config", "threads", "timing", "quiet", "output"].contains(&key) {
            continue;
        }
        if let Some(v) = sub.get_one::<String>(key) {
            values.insert(key.to_string(), v.clone());
        }
    }
    let output = sub
        .get_one::<String>("output")
        .cloned()
        .or_else(|| values.remove("output"));
    let cfg = validate_config(RunConfig {
        command: command.to_string(),
        values,
    })?;
    Ok((cfg, output))
}

fn envelope(cfg: &RunConfig, result: Value) -> Value {
    json!({
        "version": sphframes::VERSION,
        "command": cfg.command,
        "config": cfg.values,
        "result": result,
    })
}

fn write_text(path: Option<&str>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

fn execute(cfg: &RunConfig, output: Option<&str>, timing: bool, quiet: bool) -> Result<()> {
    let start = Instant::now();
    let meta = |v: &mut Value| {
        if timing {
            v["meta"] = json!({ "runtime_s": start.elapsed().as_secs_f64() });
        }
    };
    if cfg.command == "grid-build" {
        let provenance = json!({ "version": sphframes::VERSION, "command": cfg.command, "config": cfg.values });
        let (summary, grid) = commands::grid_build(cfg, provenance)?;
        let mut out = envelope(cfg, summary);
        meta(&mut out);
        match output {
            Some(path) => {
                grid.write(path)?;
                if quiet {
                    return Ok(());
                }
                write_text(None, &serde_json::to_string_pretty(&out)?)
            }
            None => write_text(None, &grid.to_json()?),
        }
    } else {
        let result = match cfg.command.as_str() {
            "eval" => commands::eval(cfg)?,
            "admissibility" => commands::admissibility(cfg)?,
            "semiframe" => commands::semiframe(cfg)?,
            "localization" => commands::localization(cfg)?,
            "kernel-check" => commands::kernel_check(cfg)?,
            "grid-density" => commands::grid_density(cfg)?,
            "frame-audit" => commands::frame_audit(cfg)?,
            "reconstruct" => commands::reconstruct_cmd(cfg)?,
            other => return Err(Error::config("command", format!("unknown command `{other}`"))),
        };
        let mut out = envelope(cfg, result);
        meta(&mut out);
        write_text(output, &serde_json::to_string_pretty(&out)?)
    }
}

/// Runs the driver on `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match app().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (command, sub) = matches.subcommand().expect("subcommand is required");
    if let Some(&threads) = sub.get_one::<usize>("threads") {
        if threads == 0 {
            eprintln!("error: threads: must be at least 1");
            return EXIT_CONFIG;
        }
        exec::init_threads(threads);
    }
    let (timing, quiet) = (sub.get_flag("timing"), sub.get_flag("quiet"));
    let outcome =
        collect(command, &matches, sub).and_then(|(cfg, output)| execute(&cfg, output.as_deref(), timing, quiet));
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
