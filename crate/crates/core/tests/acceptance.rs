//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! gating criterion fails.

use std::process::ExitCode;

use apml_core::verify::checks::{run_suite, CheckOutcome, Suite, SuiteReport};
use apml_core::verify::Thresholds;

struct Line {
    label: &'static str,
    pass: bool,
    detail: String,
}

fn checks<'a>(rep: &'a SuiteReport, prefix: &str) -> Vec<&'a CheckOutcome> {
    rep.checks.iter().filter(|c| c.name.starts_with(prefix)).collect()
}

fn all_pass(cs: &[&CheckOutcome]) -> bool {
    !cs.is_empty() && cs.iter().all(|c| c.pass)
}

fn summary(cs: &[&CheckOutcome]) -> String {
    cs.iter()
        .map(|c| format!("{}{}={:.3e}", if c.pass { "" } else { "!" }, c.name, c.value))
        .collect::<Vec<_>>()
        .join(" ")
}

fn timing(rep: &SuiteReport) -> (bool, String) {
    let ok = rep.timings.iter().all(|t| t.pass());
    let s = rep
        .timings
        .iter()
        .map(|t| format!("{} {:.1}s/{:.0}s", t.name, t.seconds, t.limit))
        .collect::<Vec<_>>()
        .join(", ");
    (ok, s)
}

fn in_pool(threads: usize, suite: Suite, th: &Thresholds) -> SuiteReport {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(|| run_suite(suite, th))
        .unwrap_or_else(|e| panic!("{suite} suite: {e}"))
}

fn run(suite: Suite, th: &Thresholds) -> SuiteReport {
    run_suite(suite, th).unwrap_or_else(|e| panic!("{suite} suite: {e}"))
}

fn main() -> ExitCode {
    let th = Thresholds::default();
    let mut lines = Vec::new();

    let local = run(Suite::Local, &th);
    let (t_ok, t_s) = timing(&local);
    let cs = checks(&local, "local_identities");
    lines.push(Line {
        label: "exact per-prime identities, p <= 1e5, s in {0,1,2}",
        pass: all_pass(&cs) && t_ok,
        detail: format!("{}; {t_s}", cs.first().map(|c| c.detail.as_str()).unwrap_or("")),
    });

    let constants = run(Suite::Constants, &th);
    let cs: Vec<_> = ["c5_c6_c8", "c3_h1", "u1_", "u0_regularized", "z_bc_vs_z_res"]
        .iter()
        .flat_map(|p| checks(&constants, p))
        .collect();
    lines.push(Line { label: "constant identities", pass: all_pass(&cs), detail: summary(&cs) });

    let series = run(Suite::Series, &th);
    let cs = checks(&series, "coefficients_");
    let bad: Vec<_> = cs.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    lines.push(Line {
        label: "coefficientwise factorizations, n <= 1e4",
        pass: all_pass(&cs),
        detail: format!("{} series/form pairs, mismatching: {bad:?}", cs.len()),
    });

    let perron = run(Suite::Perron, &th);
    let cs: Vec<_> = checks(&perron, "perron_");
    lines.push(Line { label: "Perron sums vs line integrals, residual slope", pass: all_pass(&cs), detail: summary(&cs) });

    // Criteria on the lattice and prime side run under 1 and 8 workers.
    let lemma1 = in_pool(1, Suite::Lemma, &th);
    let theorem1 = in_pool(1, Suite::Theorem, &th);
    let lemma8 = in_pool(8, Suite::Lemma, &th);
    let theorem8 = in_pool(8, Suite::Theorem, &th);

    let (t_ok, t_s) = timing(&lemma1);
    let cs: Vec<_> = ["lemma_residual_slope", "lemma_main_term_dominates", "lemma_leading_ratio_monotone"]
        .iter()
        .flat_map(|p| checks(&lemma1, p))
        .collect();
    lines.push(Line {
        label: "lattice sum vs C8(M + E), slope <= 3.5",
        pass: all_pass(&cs) && t_ok,
        detail: format!("{}; {t_s}", summary(&cs)),
    });

    let methods = run(Suite::Methods, &th);
    let mut cs: Vec<_> = th
        .method_pairs
        .iter()
        .flat_map(|&(d, delta)| checks(&methods, &format!("method2_d{d}_delta{delta}")))
        .collect();
    cs.extend(checks(&methods, "method2_intercept"));
    lines.push(Line { label: "second method residual slope <= 4.1, 1/d intercepts", pass: all_pass(&cs), detail: summary(&cs) });

    let cs = checks(&lemma1, "step1_equivalence");
    lines.push(Line { label: "divisor-sum rewrite of the lattice sum, X <= 200", pass: all_pass(&cs), detail: summary(&cs) });

    let cs = checks(&theorem1, "decomposition_");
    lines.push(Line {
        label: "cube decomposition",
        pass: all_pass(&cs),
        detail: format!("{}; weight {}", summary(&cs), theorem1.cube_weight.clone().unwrap_or_default()),
    });

    let (t_ok, t_s) = timing(&theorem1);
    let diag = theorem1.theorem.as_ref();
    let emitted = diag.map_or(false, |d| d.rows.len() == th.theorem_xs.len());
    let detail = diag
        .map(|d| {
            let v = d.rows.last().map(|r| r.v_ratio).unwrap_or(f64::NAN);
            let trend = d.rows.iter().map(|r| format!("{:.4}", r.ratio_3_2)).collect::<Vec<_>>().join(" > ");
            format!("V-ratio at x=1e6 {v:.4}; |M|/(Q^3 (x/Q)^1.5) {trend} (decreasing: {}); {t_s}", d.ratio_3_2_decreasing)
        })
        .unwrap_or_default();
    lines.push(Line { label: "prime-side diagnostics emitted (non-gating)", pass: emitted && t_ok, detail });

    let json = |r: &SuiteReport| serde_json::to_vec_pretty(r).expect("serialize");
    let dir = tempfile::tempdir().expect("tempdir");
    let mut same = true;
    for (name, a, b) in [("lemma", &lemma1, &lemma8), ("theorem", &theorem1, &theorem8)] {
        let (pa, pb) = (dir.path().join(format!("{name}_w1.json")), dir.path().join(format!("{name}_w8.json")));
        std::fs::write(&pa, json(a)).expect("write");
        std::fs::write(&pb, json(b)).expect("write");
        same &= std::fs::read(&pa).expect("read") == std::fs::read(&pb).expect("read");
    }
    lines.push(Line {
        label: "byte-identical results with 1 and 8 workers",
        pass: same,
        detail: "lemma and theorem suite JSON".into(),
    });

    let mut failed = 0;
    for (i, l) in lines.iter().enumerate() {
        println!("[{}] {:2} {} :: {}", if l.pass { "PASS" } else { "FAIL" }, i + 1, l.label, l.detail);
        failed += usize::from(!l.pass);
    }
    println!("acceptance: {} of {} criteria pass", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
