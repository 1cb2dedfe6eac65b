//! Run configuration: command-line flags layered over an optional JSON file.

use std::path::{Path, PathBuf};

use apml_core::verify::Thresholds;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Sieve primes up to --x and cache the table.
    Sieve,
    /// Singular-series constants with tail bounds.
    Constants,
    /// Moment sums M, V, U, S1 over P < q <= Q.
    Moments,
    /// Lattice and divisor-type sums on an X grid.
    Lattice,
    /// Vertical-line integrals on an X grid.
    Integral,
    /// Run verification suites.
    Verify,
    /// Summarize the verify.json found in --out-dir.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sieve => "sieve",
            Command::Constants => "constants",
            Command::Moments => "moments",
            Command::Lattice => "lattice",
            Command::Integral => "integral",
            Command::Verify => "verify",
            Command::Report => "report",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "apml", version, about = "Numeric laboratory for cubic moments of primes in progressions")]
#[command(arg_required_else_help = true, allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub x: Option<f64>,
    #[arg(long = "P", global = true)]
    pub p: Option<f64>,
    #[arg(long = "Q", global = true)]
    pub q: Option<f64>,
    #[arg(long = "A", global = true)]
    pub a: Option<f64>,
    /// Comma-separated X values.
    #[arg(long = "X-grid", global = true, value_delimiter = ',')]
    pub x_grid: Option<Vec<f64>>,
    /// Same as --X-grid.
    #[arg(long = "X", global = true, value_delimiter = ',', conflicts_with = "x_grid")]
    pub x_points: Option<Vec<f64>>,
    /// Suite list for verify, or "all".
    #[arg(long, global = true)]
    pub suite: Option<String>,
    /// Integral id: E, Estar, I, Id, Jd, perron.
    #[arg(long, global = true)]
    pub which: Option<String>,
    /// Lattice sum id: jstar, jcal, L, psi1_linear, psi1_quadratic,
    /// psi1_plain, psi1_log, M1sum, M2sum, mu_phi.
    #[arg(long, global = true)]
    pub sum: Option<String>,
    #[arg(long, global = true)]
    pub d: Option<u64>,
    #[arg(long = "Delta", global = true)]
    pub delta: Option<u64>,
    /// Perron kernel: linear, quadratic, plain, log.
    #[arg(long, global = true)]
    pub kind: Option<String>,
    /// Reading of F1 in I: zeta_times_u or u_only.
    #[arg(long, global = true)]
    pub reading: Option<String>,
    /// Truncation height of line integrals.
    #[arg(long = "T", global = true)]
    pub t_max: Option<f64>,
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// Precision target for Euler products.
    #[arg(long, global = true)]
    pub precision: Option<f64>,
    #[arg(long = "cache-dir", global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long = "out-dir", global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Print the JSON payload on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write CSV files.
    #[arg(long, global = true)]
    pub csv: bool,
    #[arg(long = "csv-dir", global = true)]
    pub csv_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub x: Option<f64>,
    #[serde(default, rename = "P")]
    pub p: Option<f64>,
    #[serde(default, rename = "Q")]
    pub q: Option<f64>,
    #[serde(default, rename = "A")]
    pub a: Option<f64>,
    #[serde(default, rename = "X_grid")]
    pub x_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub suite: Option<String>,
    #[serde(default)]
    pub which: Option<String>,
    #[serde(default)]
    pub sum: Option<String>,
    #[serde(default)]
    pub d: Option<u64>,
    #[serde(default, rename = "Delta")]
    pub delta: Option<u64>,
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub reading: Option<String>,
    #[serde(default, rename = "T")]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub precision: Option<f64>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: Option<Output>,
    #[serde(default)]
    pub csv_dir: Option<PathBuf>,
    #[serde(default)]
    pub thresholds: Option<Thresholds>,
}

pub const CACHE_ENV: &str = "APML_CACHE_DIR";
const DEFAULT_CACHE: &str = ".apml-cache";
const DEFAULT_OUT: &str = "apml-out";

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError(format!("config {}: {e}", path.display())))
    }

    pub fn from_cli(cli: &Cli) -> Self {
        let output = match (cli.json, cli.csv) {
            (_, true) => Some(Output::Csv),
            (true, false) => Some(Output::Json),
            _ => None,
        };
        Self {
            command: cli.command,
            x: cli.x,
            p: cli.p,
            q: cli.q,
            a: cli.a,
            x_grid: cli.x_grid.clone().or_else(|| cli.x_points.clone()),
            suite: cli.suite.clone(),
            which: cli.which.clone(),
            sum: cli.sum.clone(),
            d: cli.d,
            delta: cli.delta,
            kind: cli.kind.clone(),
            reading: cli.reading.clone(),
            t_max: cli.t_max,
            step: cli.step,
            precision: cli.precision,
            cache_dir: cli.cache_dir.clone(),
            out_dir: cli.out_dir.clone(),
            workers: cli.workers,
            output,
            csv_dir: cli.csv_dir.clone(),
            thresholds: None,
        }
    }

    /// Values set in `top` win.
    pub fn overlay(self, top: RunConfig) -> Self {
        Self {
            command: top.command.or(self.command),
            x: top.x.or(self.x),
            p: top.p.or(self.p),
            q: top.q.or(self.q),
            a: top.a.or(self.a),
            x_grid: top.x_grid.or(self.x_grid),
            suite: top.suite.or(self.suite),
            which: top.which.or(self.which),
            sum: top.sum.or(self.sum),
            d: top.d.or(self.d),
            delta: top.delta.or(self.delta),
            kind: top.kind.or(self.kind),
            reading: top.reading.or(self.reading),
            t_max: top.t_max.or(self.t_max),
            step: top.step.or(self.step),
            precision: top.precision.or(self.precision),
            cache_dir: top.cache_dir.or(self.cache_dir),
            out_dir: top.out_dir.or(self.out_dir),
            workers: top.workers.or(self.workers),
            output: top.output.or(self.output),
            csv_dir: top.csv_dir.or(self.csv_dir),
            thresholds: top.thresholds.or(self.thresholds),
        }
    }

    /// Fills directory defaults; the cache falls back to $APML_CACHE_DIR.
    pub fn with_defaults(mut self) -> Self {
        if self.cache_dir.is_none() {
            self.cache_dir = Some(
                std::env::var_os(CACHE_ENV)
                    .filter(|v| !v.is_empty())
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE)),
            );
        }
        self.out_dir.get_or_insert_with(|| PathBuf::from(DEFAULT_OUT));
        self
    }

    pub fn cache_dir(&self) -> &Path {
        self.cache_dir.as_deref().unwrap_or(Path::new(DEFAULT_CACHE))
    }

    pub fn out_dir(&self) -> &Path {
        self.out_dir.as_deref().unwrap_or(Path::new(DEFAULT_OUT))
    }

    pub fn wants_csv(&self) -> bool {
        self.output == Some(Output::Csv) || self.csv_dir.is_some()
    }

    pub fn require_x(&self) -> Result<f64, CliError> {
        self.x.ok_or_else(|| CliError("--x is required".into()))
    }

    pub fn require_q(&self) -> Result<f64, CliError> {
        self.q.ok_or_else(|| CliError("--Q is required".into()))
    }

    pub fn require_grid(&self) -> Result<&[f64], CliError> {
        match self.x_grid.as_deref() {
            Some(g) if !g.is_empty() => Ok(g),
            _ => Err(CliError("--X-grid is required".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"x": 10, "colour": 1}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"command": "moments", "x": 1000, "Q": 20, "X_grid": [1, 2]}"#).unwrap();
        assert_eq!(c.command, Some(Command::Moments));
        assert_eq!(c.q, Some(20.0));
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig { x: Some(10.0), q: Some(3.0), ..Default::default() };
        let flags = RunConfig { x: Some(20.0), ..Default::default() };
        let c = file.overlay(flags);
        assert_eq!((c.x, c.q), (Some(20.0), Some(3.0)));
    }

    #[test]
    fn partial_thresholds() {
        let c: RunConfig = serde_json::from_str(r#"{"thresholds": {"lemma_slope_max": 3.3}}"#).unwrap();
        let th = c.thresholds.unwrap();
        assert_eq!(th.lemma_slope_max, 3.3);
        assert_eq!(th.local_p_max, Thresholds::default().local_p_max);
        assert!(serde_json::from_str::<RunConfig>(r#"{"thresholds": {"nope": 1}}"#).is_err());
    }
}
