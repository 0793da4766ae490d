//! `spinbridge <subcommand> --config <path> [--serial] [--out <prefix>]`
//!
//! Each run writes `<prefix>.result.json`, `<prefix>.table.csv` and
//! `<prefix>.manifest.json`. Exit codes: 0 success, 2 invalid input,
//! 3 numerical abort, 1 output failure.

pub mod config;
pub mod error;
pub mod run;

use std::path::{Path, PathBuf};

use serde_json::json;
use sha2::{Digest, Sha256};

pub use config::{RunConfig, Subcommand};
pub use error::CliError;
pub use run::{execute, Output};

#[derive(Debug, clap::Parser)]
#[command(name = "spinbridge", version, about = "Spin coherent-state propagators: exact, Monte Carlo, lattice and contraction runs")]
pub struct Cli {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Single-threaded, fixed summation order.
    #[arg(long)]
    pub serial: bool,
    /// Output prefix; defaults to the config's `out`, then the config path
    /// without its extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Paths written by [`run_cli`].
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub result: PathBuf,
    pub table: PathBuf,
    pub manifest: PathBuf,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn run_cli(cli: &Cli) -> Result<Artifacts, CliError> {
    let raw = std::fs::read(&cli.config)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", cli.config.display())))?;
    let text = std::str::from_utf8(&raw).map_err(|e| CliError::Validation(format!("config is not UTF-8: {e}")))?;
    let cfg = RunConfig::parse(text)?;
    let prefix = match (&cli.out, &cfg.out) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => cli.config.with_extension(""),
    };
    let output = execute(cli.subcommand, &cfg, cli.serial)?;

    let artifacts = Artifacts {
        result: with_suffix(&prefix, ".result.json"),
        table: with_suffix(&prefix, ".table.csv"),
        manifest: with_suffix(&prefix, ".manifest.json"),
    };
    for p in [&artifacts.result, &artifacts.table, &artifacts.manifest] {
        if same_file(p, &cli.config) {
            return Err(CliError::Validation(format!("output {} would overwrite the config", p.display())));
        }
    }
    let manifest = json!({
        "software": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": cli.subcommand,
        "serial": cli.serial,
        "seed": cfg.seed,
        "config_path": cli.config,
        "config_sha256": sha256_hex(&raw),
        "config": cfg,
        "outputs": {"result": artifacts.result, "table": artifacts.table},
    });
    write(&artifacts.result, &pretty(&output.result)?)?;
    write(&artifacts.table, &output.table)?;
    write(&artifacts.manifest, &pretty(&manifest)?)?;
    Ok(artifacts)
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn pretty(v: &serde_json::Value) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
