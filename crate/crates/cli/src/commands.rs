//! Subcommand bodies. Each returns its payload files; nothing here touches
//! wall-clock time, so payloads are reproducible.

use std::fmt::Write as _;
use std::path::PathBuf;

use apml_core::analytic::integrals::{F1Reading, IntegralId, LineIntegralSpec, PerronKind, PreparedIntegral};
use apml_core::constants::{euler_product, lemma_coefficients, FactorId};
use apml_core::lattice::{
    cached_jstar, l_sum, m_sums, mu_phi_sum, psi1_sums_many, write_csv, LatticeSumResult, LatticeTable, MKind,
    MWeights, Psi1Kind, SumId,
};
use apml_core::moments::{moment_summary, MomentConfig};
use apml_core::sieve::{cache_path, load_or_build, CacheStatus, PrimeLogTable};
use apml_core::verify::checks::{run_suite, Suite, SuiteReport};
use apml_core::verify::mainterms::LemmaMainTerm;
use serde::{Deserialize, Serialize};

use crate::config::{Command, RunConfig};
use crate::CliError;

/// Wall time of a timed section, reported in the manifest only.
#[derive(Clone, Debug, Serialize)]
pub struct TimingNote {
    pub name: String,
    pub seconds: f64,
    pub limit: f64,
}

#[derive(Default)]
pub struct RunOutput {
    /// Paths relative to the output directory (absolute paths are kept).
    pub files: Vec<(PathBuf, Vec<u8>)>,
    /// Printed under --json.
    pub payload: Vec<u8>,
    pub summary: String,
    pub pass: bool,
    pub cube_weight: Option<String>,
    pub notes: Vec<String>,
    pub timings: Vec<TimingNote>,
}

impl RunOutput {
    fn new(name: &str, payload: Vec<u8>, summary: String) -> Self {
        Self {
            files: vec![(PathBuf::from(format!("{name}.json")), payload.clone())],
            payload,
            summary,
            pass: true,
            ..Default::default()
        }
    }
}

pub fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<RunOutput, CliError> {
    match cmd {
        Command::Sieve => sieve(cfg),
        Command::Constants => constants(cfg),
        Command::Moments => moments(cfg),
        Command::Lattice => lattice(cfg),
        Command::Integral => integral(cfg),
        Command::Verify => verify(cfg),
        Command::Report => report(cfg),
    }
}

fn bound_of(x: f64) -> Result<u64, CliError> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(CliError(format!("x = {x} must be a nonnegative number")));
    }
    Ok(x.floor() as u64)
}

fn table_for(cfg: &RunConfig, x: f64) -> Result<(PrimeLogTable, String), CliError> {
    let x_max = bound_of(x)?;
    let dir = cfg.cache_dir();
    let (table, status) = load_or_build(dir, x_max)?;
    let path = cache_path(dir, x_max);
    let note = match status {
        CacheStatus::Hit => format!("prime cache hit: {}", path.display()),
        CacheStatus::Built => format!("prime cache built: {}", path.display()),
        CacheStatus::Regenerated(why) => format!("prime cache regenerated ({why}): {}", path.display()),
    };
    Ok((table, note))
}

#[derive(Serialize)]
struct SievePayload {
    x_max: u64,
    count: usize,
    largest_prime: Option<u64>,
    theta: f64,
}

fn sieve(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let x = cfg.require_x()?;
    let (table, note) = table_for(cfg, x)?;
    let p = SievePayload {
        x_max: table.x_max(),
        count: table.len(),
        largest_prime: table.primes().last().copied(),
        theta: table.chebyshev_theta(table.x_max() as f64)?,
    };
    let summary = format!("{} primes up to {}, theta = {}", p.count, p.x_max, p.theta);
    let mut out = RunOutput::new("sieve", json_bytes(&p)?, summary);
    out.notes.push(note);
    Ok(out)
}

#[derive(Serialize)]
struct ConstantRow {
    name: String,
    value: f64,
    tail_bound: f64,
    prime_cutoff: Option<u64>,
}

const DEFAULT_PRECISION: f64 = 1e-12;

fn constants(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let precision = cfg.precision.unwrap_or(DEFAULT_PRECISION);
    let c = lemma_coefficients();
    let product = |id: FactorId| -> Result<ConstantRow, CliError> {
        let v = euler_product(id, precision)?;
        Ok(ConstantRow { name: id.name().into(), value: v.value, tail_bound: v.tail_bound, prime_cutoff: Some(v.prime_cutoff) })
    };
    let closed = |name: &str, value: f64| ConstantRow { name: name.into(), value, tail_bound: 0.0, prime_cutoff: None };
    let s = product(FactorId::LogSumS)?;
    let mut rows = vec![ConstantRow {
        name: "C2".into(),
        value: (2.0 * std::f64::consts::PI).ln() + c.gamma0 + s.value,
        tail_bound: s.tail_bound,
        prime_cutoff: s.prime_cutoff,
    }];
    for id in [FactorId::C3, FactorId::C5, FactorId::C6, FactorId::C8] {
        rows.push(product(id)?);
    }
    rows.push(closed("Z_prod", c.z_prod));
    rows.push(closed("Z_res", c.z_res));
    rows.push(closed("Z_bc", c.z_bc));
    for id in FactorId::ALL {
        if !matches!(id, FactorId::C3 | FactorId::C5 | FactorId::C6 | FactorId::C8) {
            rows.push(product(id)?);
        }
    }
    let mut summary = String::new();
    for r in &rows {
        let _ = writeln!(summary, "{:<18} {:<22?} tail <= {:.1e}", r.name, r.value, r.tail_bound);
    }
    let mut out = RunOutput::new("constants", json_bytes(&rows)?, summary.trim_end().into());
    if cfg.wants_csv() {
        let mut csv = String::from("name,value,tail_bound,prime_cutoff\n");
        for r in &rows {
            let cut = r.prime_cutoff.map(|p| p.to_string()).unwrap_or_default();
            let _ = writeln!(csv, "{},{:?},{:?},{cut}", r.name, r.value, r.tail_bound);
        }
        out.files.push((csv_path(cfg, "constants.csv"), csv.into_bytes()));
    }
    Ok(out)
}

fn csv_path(cfg: &RunConfig, name: &str) -> PathBuf {
    match &cfg.csv_dir {
        Some(dir) => dir.join(name),
        None => PathBuf::from(name),
    }
}

#[derive(Serialize)]
struct MomentsPayload {
    x: f64,
    #[serde(rename = "P")]
    p: f64,
    #[serde(rename = "Q")]
    q: f64,
    #[serde(rename = "A")]
    a: f64,
    in_regime: bool,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "V")]
    v: f64,
    #[serde(rename = "U")]
    u: f64,
    #[serde(rename = "S1")]
    s1: f64,
    /// Q³(x/Q)^{7/5}.
    bound_power: f64,
    /// x³/(log x)^A.
    bound_log: f64,
    /// |M| over the sum of the two bounds.
    ratio_to_bound: f64,
}

/// P = x/(log x)^{A+100} unless given; 0 when log x ≤ 1.
pub fn default_p(x: f64, a: f64) -> f64 {
    let l = x.ln();
    if l <= 1.0 { 0.0 } else { x / l.powf(a + 100.0) }
}

fn moments(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let x = cfg.require_x()?;
    let q = cfg.require_q()?;
    let a = cfg.a.unwrap_or(1.0);
    let p = cfg.p.unwrap_or_else(|| default_p(x, a));
    let mc = MomentConfig { x, p_lo: p, q_hi: q, a };
    mc.validate()?;
    let (table, note) = table_for(cfg, x)?;
    let rep = moment_summary(&table, &mc, true)?;
    let bound_power = q.powi(3) * (x / q).powf(1.4);
    let bound_log = x.powi(3) / x.ln().powf(a);
    let payload = MomentsPayload {
        x,
        p,
        q,
        a,
        in_regime: mc.in_regime(),
        m: rep.m,
        v: rep.v,
        u: rep.u,
        s1: rep.s1,
        bound_power,
        bound_log,
        ratio_to_bound: rep.m.abs() / (bound_power + bound_log),
    };
    let summary = format!(
        "M = {:e}, V = {:e}, U = {}, S1 = {:e}; |M|/bound = {:.4e}",
        rep.m, rep.v, rep.u, rep.s1, payload.ratio_to_bound
    );
    let mut out = RunOutput::new("moments", json_bytes(&payload)?, summary);
    out.notes.push(note);
    if cfg.wants_csv() {
        let mut csv = String::from("q,phi,sumE2,sumE3\n");
        for r in rep.per_q.as_deref().unwrap_or_default() {
            let _ = writeln!(csv, "{},{},{:.16e},{:.16e}", r.q, r.phi, r.sum_e2, r.sum_e3);
        }
        out.files.push((csv_path(cfg, "moments.csv"), csv.into_bytes()));
    }
    Ok(out)
}

fn psi1_kind(id: SumId) -> Option<Psi1Kind> {
    Psi1Kind::ALL.into_iter().find(|k| k.sum_id() == id)
}

fn lattice(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let id: SumId = cfg.sum.as_deref().unwrap_or("jstar").parse()?;
    let d = cfg.d.unwrap_or(1);
    let delta = cfg.delta.unwrap_or(1);
    let rows: Vec<LatticeSumResult> = match id {
        SumId::Jstar => {
            let grid = cfg.require_grid()?;
            cached_jstar(&cfg.cache_dir().join("lattice-jstar.csv"), grid)?
        }
        SumId::Jcal => {
            let grid = cfg.require_grid()?;
            let top = grid.iter().fold(2.0f64, |a, &b| a.max(b));
            let t = LatticeTable::build(top)?;
            grid.iter().map(|&x| t.jcal(x)).collect::<Result<_, _>>()?
        }
        SumId::L => cfg.require_grid()?.iter().map(|&x| l_sum(d, delta, x)).collect::<Result<_, _>>()?,
        SumId::M1sum | SumId::M2sum => {
            let w = MWeights::new(cfg.require_x()?, cfg.require_q()?)?;
            vec![m_sums(&w, if id == SumId::M1sum { MKind::M1 } else { MKind::M2 })?]
        }
        SumId::MuPhi => cfg.require_grid()?.iter().map(|&x| mu_phi_sum(d, x)).collect::<Result<_, _>>()?,
        other => {
            let kind = psi1_kind(other).ok_or_else(|| CliError(format!("unsupported sum {other}")))?;
            psi1_sums_many(kind, cfg.require_grid()?)?
        }
    };
    let mut summary = String::new();
    for r in &rows {
        let _ = writeln!(summary, "{} X={} value={:e} terms={}", r.sum_id, r.x, r.value, r.term_count);
    }
    let mut out = RunOutput::new("lattice", json_bytes(&rows)?, summary.trim_end().into());
    if cfg.wants_csv() {
        let mut csv = Vec::new();
        write_csv(&mut csv, &rows)?;
        out.files.push((csv_path(cfg, "lattice.csv"), csv));
        if id == SumId::Jstar {
            out.files.push((csv_path(cfg, "lattice_tidy.csv"), jstar_tidy(&rows)?.into_bytes()));
        }
    }
    Ok(out)
}

/// X, value, mainterm, residual with mainterm = C8(M(X) + E(X)).
fn jstar_tidy(rows: &[LatticeSumResult]) -> Result<String, CliError> {
    let e = PreparedIntegral::prepare(LineIntegralSpec::new(IntegralId::E))?;
    let m = LemmaMainTerm::default();
    let mut csv = String::from("X,value,mainterm,residual\n");
    for r in rows {
        let main = if r.x >= 2.0 { m.c8 * (m.m(r.x) + e.at(r.x)?.value) } else { 0.0 };
        let _ = writeln!(csv, "{:?},{:?},{:?},{:?}", r.x, r.value, main, r.value - main);
    }
    Ok(csv)
}

#[derive(Serialize)]
struct IntegralRow {
    #[serde(rename = "X")]
    x: f64,
    value: f64,
    error_estimate: f64,
    /// Arithmetic side, for Perron integrals only.
    #[serde(skip_serializing_if = "Option::is_none")]
    direct: Option<f64>,
}

#[derive(Serialize)]
struct IntegralPayload {
    spec: LineIntegralSpec,
    node_count: usize,
    rows: Vec<IntegralRow>,
}

fn parse_integral(cfg: &RunConfig) -> Result<IntegralId, CliError> {
    let which = cfg.which.as_deref().ok_or_else(|| CliError("--which is required".into()))?;
    let d = cfg.d.unwrap_or(1);
    let delta = cfg.delta.unwrap_or(1);
    let id = match which.to_ascii_lowercase().as_str() {
        "e" => IntegralId::E,
        "estar" | "e*" => IntegralId::EStar,
        "i" => {
            let reading = match cfg.reading.as_deref().unwrap_or("zeta_times_u") {
                "zeta_times_u" => F1Reading::ZetaTimesU,
                "u_only" => F1Reading::UOnly,
                r => return Err(CliError(format!("unknown reading {r}"))),
            };
            IntegralId::I { reading }
        }
        "id" => IntegralId::Id { d, delta },
        "jd" => IntegralId::Jd { d, delta },
        "perron" => {
            let kind = match cfg.kind.as_deref().unwrap_or("linear") {
                "linear" => PerronKind::Linear,
                "quadratic" => PerronKind::Quadratic,
                "plain" => PerronKind::Plain,
                "log" => PerronKind::Log,
                k => return Err(CliError(format!("unknown Perron kind {k}"))),
            };
            IntegralId::Perron { kind }
        }
        w => return Err(CliError(format!("unknown integral {w}"))),
    };
    Ok(id)
}

fn integral(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let id = parse_integral(cfg)?;
    let grid = cfg.require_grid()?;
    let mut spec = LineIntegralSpec::new(id);
    if let Some(t) = cfg.t_max {
        spec.t_max = t;
    }
    if let Some(h) = cfg.step {
        spec.step = h;
    }
    let prepared = PreparedIntegral::prepare(spec)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &x in grid {
        let v = prepared.at(x)?;
        let direct = match id {
            IntegralId::Perron { kind } => Some(kind.direct_sum(x)),
            _ => None,
        };
        rows.push(IntegralRow { x, value: v.value, error_estimate: v.error_estimate, direct });
    }
    let mut summary = String::new();
    for r in &rows {
        let _ = write!(summary, "X={} value={:e} err~{:.1e}", r.x, r.value, r.error_estimate);
        if let Some(dv) = r.direct {
            let _ = write!(summary, " direct={dv:e}");
        }
        summary.push('\n');
    }
    let payload = IntegralPayload { spec, node_count: prepared.node_count(), rows };
    let mut out = RunOutput::new("integral", json_bytes(&payload)?, summary.trim_end().into());
    if cfg.wants_csv() {
        let mut csv = String::from("X,value,error_estimate,direct\n");
        for r in &payload.rows {
            let dv = r.direct.map(|v| format!("{v:?}")).unwrap_or_default();
            let _ = writeln!(csv, "{:?},{:?},{:?},{dv}", r.x, r.value, r.error_estimate);
        }
        out.files.push((csv_path(cfg, "integral.csv"), csv.into_bytes()));
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
pub struct VerifyPayload {
    pub pass: bool,
    pub suites: Vec<SuiteReport>,
}

fn verify(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let suites = Suite::parse_list(cfg.suite.as_deref().unwrap_or("all"))?;
    let th = cfg.thresholds.clone().unwrap_or_default();
    let mut reports = Vec::with_capacity(suites.len());
    let mut summary = String::new();
    let mut timings = Vec::new();
    for s in suites {
        let rep = run_suite(s, &th)?;
        let gating = rep.checks.iter().filter(|c| c.gating).count();
        let failed: Vec<&str> =
            rep.checks.iter().filter(|c| c.gating && !c.pass).map(|c| c.name.as_str()).collect();
        let _ = write!(summary, "{:<10} {} ({} gating checks", s.name(), if rep.pass() { "PASS" } else { "FAIL" }, gating);
        if !failed.is_empty() {
            let _ = write!(summary, "; failed: {}", failed.join(", "));
        }
        summary.push_str(")\n");
        for t in &rep.timings {
            if !t.pass() {
                let _ = writeln!(summary, "           {} took {:.1}s, limit {:.0}s", t.name, t.seconds, t.limit);
            }
            timings.push(TimingNote { name: format!("{}/{}", s.name(), t.name), seconds: t.seconds, limit: t.limit });
        }
        reports.push(rep);
    }
    let payload = VerifyPayload { pass: reports.iter().all(SuiteReport::pass), suites: reports };
    let mut out = RunOutput::new("verify", json_bytes(&payload)?, summary.trim_end().into());
    out.pass = payload.pass;
    out.timings = timings;
    out.cube_weight = payload.suites.iter().find_map(|r| r.cube_weight.clone());
    if cfg.wants_csv() {
        for rep in &payload.suites {
            out.files.push((csv_path(cfg, &format!("{}_checks.csv", rep.suite)), checks_csv(rep).into_bytes()));
            if !rep.fits.is_empty() {
                out.files.push((csv_path(cfg, &format!("{}_fits.csv", rep.suite)), fits_csv(rep).into_bytes()));
            }
        }
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn checks_csv(rep: &SuiteReport) -> String {
    let mut csv = String::from("name,gating,pass,value,threshold,detail\n");
    for c in &rep.checks {
        let _ = writeln!(csv, "{},{},{},{:?},{:?},{}", c.name, c.gating, c.pass, c.value, c.threshold, csv_field(&c.detail));
    }
    csv
}

fn fits_csv(rep: &SuiteReport) -> String {
    let mut csv = String::from("fit,X,residual\n");
    for f in &rep.fits {
        for (x, r) in &f.fit.points {
            let _ = writeln!(csv, "{},{x:?},{r:?}", f.name);
        }
    }
    csv
}

fn report(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let path = cfg.out_dir().join("verify.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError(format!("{}: {e}; run `apml verify` first", path.display())))?;
    let v: VerifyPayload =
        serde_json::from_str(&text).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
    let mut md = String::from("| suite | check | gating | pass | value | threshold |\n|---|---|---|---|---|---|\n");
    for rep in &v.suites {
        for c in &rep.checks {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {:.6e} | {:.6e} |",
                rep.suite, c.name, c.gating, if c.pass { "yes" } else { "NO" }, c.value, c.threshold
            );
        }
    }
    let _ = writeln!(md, "\nOverall: {}", if v.pass { "PASS" } else { "FAIL" });
    let mut out = RunOutput::new("report", json_bytes(&v)?, md.trim_end().into());
    out.files = vec![(PathBuf::from("report.md"), md.into_bytes())];
    out.pass = v.pass;
    out.cube_weight = v.suites.iter().find_map(|r| r.cube_weight.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use apml_core::verify::Thresholds;

    #[test]
    fn default_p_is_tiny() {
        assert!(default_p(1e6, 1.0) < 1e-100);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn thresholds_default_when_absent() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.thresholds.clone().unwrap_or_default(), Thresholds::default());
    }
}
