//! `apml`: command-line entry point. Exit 0 on success, 1 when verification
//! fails, 2 on usage or input errors.

mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde::Serialize;
use sha2::{Digest, Sha256};

use commands::{json_bytes, RunOutput, TimingNote};
use config::{Cli, Command, RunConfig};

#[derive(Debug)]
pub struct CliError(pub String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<apml_core::Error> for CliError {
    fn from(e: apml_core::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError(e.to_string())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    started_unix: u64,
    wall_time_secs: f64,
    pass: bool,
    /// sha256 of every payload file, keyed by path.
    digests: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cube_weight: Option<&'a str>,
    notes: &'a [String],
    timings: &'a [TimingNote],
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let file = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let cfg = file.overlay(RunConfig::from_cli(cli)).with_defaults();
    let cmd = cfg.command.ok_or_else(|| CliError("no command given; see `apml --help`".into()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError(format!("worker pool: {e}")))?;
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let start = Instant::now();
    let out = pool.install(|| commands::run(cmd, &cfg))?;
    let wall_time_secs = start.elapsed().as_secs_f64();
    let digests = write_outputs(cfg.out_dir(), &out)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cmd.name(),
        config: &cfg,
        started_unix,
        wall_time_secs,
        pass: out.pass,
        digests,
        cube_weight: out.cube_weight.as_deref(),
        notes: &out.notes,
        timings: &out.timings,
    };
    std::fs::write(cfg.out_dir().join("manifest.json"), json_bytes(&manifest)?)?;
    if cli.json || (cfg.output == Some(config::Output::Json) && cmd != Command::Report) {
        print!("{}", String::from_utf8_lossy(&out.payload));
    } else {
        println!("{}", out.summary);
    }
    for n in &out.notes {
        eprintln!("{n}");
    }
    Ok(out.pass)
}

fn write_outputs(dir: &Path, out: &RunOutput) -> Result<BTreeMap<String, String>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut digests = BTreeMap::new();
    for (rel, bytes) in &out.files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        digests.insert(path.display().to_string(), format!("{:x}", Sha256::digest(bytes)));
    }
    Ok(digests)
}
