use apml_core::moments::{decomposition_check, moment_summary, progression_errors, resum_m, CubeWeight, MomentConfig};
use apml_core::sieve::{enumerate_primes, load_or_build, CacheStatus};
use apml_core::verify::checks::{run_suite, Suite};
use apml_core::verify::{exponent_fit, Thresholds};
use proptest::prelude::*;

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

#[test]
fn sieve_agrees_with_trial_division() {
    let t = enumerate_primes(20_000).unwrap();
    let want: Vec<u64> = (0..=20_000).filter(|&n| is_prime(n)).collect();
    assert_eq!(t.primes(), &want[..]);
    assert_eq!(enumerate_primes(1_000_000).unwrap().len(), 78_498);
}

#[test]
fn cache_roundtrip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let (a, s) = load_or_build(dir.path(), 5000).unwrap();
    assert_eq!(s, CacheStatus::Built);
    let (b, s) = load_or_build(dir.path(), 5000).unwrap();
    assert_eq!(s, CacheStatus::Hit);
    assert_eq!(a.primes(), b.primes());
    let path = apml_core::sieve::cache_path(dir.path(), 5000);
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[5] ^= 0xff;
    std::fs::write(&path, &bytes).unwrap();
    let (c, s) = load_or_build(dir.path(), 5000).unwrap();
    assert!(matches!(s, CacheStatus::Regenerated(_)), "{s:?}");
    assert_eq!(c.primes(), a.primes());
}

#[test]
fn decomposition_selects_inverse_phi() {
    let t = enumerate_primes(10_000).unwrap();
    for (x, q) in [(1e3, 20.0), (1e4, 50.0)] {
        let r = decomposition_check(&t, &MomentConfig::new(x, 0.0, q)).unwrap();
        assert_eq!(r.weight, CubeWeight::InvPhi);
        assert!(r.residual <= 1e-9, "x = {x}: {}", r.residual);
        assert!(r.residual_inv_phi_squared > 1e-6);
    }
}

#[test]
fn constants_suite_passes() {
    let rep = run_suite(Suite::Constants, &Thresholds::default()).unwrap();
    assert!(rep.pass(), "{:#?}", rep.checks);
}

#[test]
fn thresholds_roundtrip() {
    let th = Thresholds::default();
    let s = serde_json::to_string(&th).unwrap();
    assert_eq!(serde_json::from_str::<Thresholds>(&s).unwrap(), th);
    assert_eq!(Suite::parse_list("all").unwrap().len(), 7);
    assert_eq!(Suite::parse_list("lemma,theorem").unwrap(), vec![Suite::Lemma, Suite::Theorem]);
    assert!(Suite::parse_list("bogus").is_err());
    assert_eq!(th.method1_target(1), 3.2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fit_recovers_power(k in 0.5f64..5.0, c in 1e-3f64..1e3) {
        let pts: Vec<(f64, f64)> = (0..8).map(|i| {
            let x = 100.0 * 2f64.powi(i);
            (x, c * x.powf(k))
        }).collect();
        let f = exponent_fit(&pts, k + 1e-6).unwrap();
        prop_assert!((f.slope.unwrap() - k).abs() < 1e-9);
        prop_assert!(f.pass);
    }

    #[test]
    fn theta_is_monotone(a in 0.0f64..5000.0, b in 0.0f64..5000.0) {
        let t = enumerate_primes(5000).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(t.chebyshev_theta(lo).unwrap() <= t.chebyshev_theta(hi).unwrap());
    }

    #[test]
    fn moment_resum_is_bitwise(x in 50.0f64..3000.0, qf in 0.05f64..1.0, pf in 0.0f64..0.9) {
        let t = enumerate_primes(3000).unwrap();
        let q = (x * qf).max(1.0).min(200.0);
        let cfg = MomentConfig::new(x, q * pf, q);
        let rep = moment_summary(&t, &cfg, true).unwrap();
        prop_assert_eq!(resum_m(rep.per_q.as_ref().unwrap()).to_bits(), rep.m.to_bits());
        prop_assert!(rep.v >= 0.0);
    }

    #[test]
    fn class_errors_sum_to_theta(x in 10.0f64..3000.0, q in 1u64..60) {
        let t = enumerate_primes(3000).unwrap();
        let e = progression_errors(&t, x, q).unwrap();
        let dividing: f64 = t.entries().filter(|&(p, _)| q % p == 0 && p as f64 <= x).map(|(_, l)| l).sum();
        let want = t.chebyshev_theta(x).unwrap() - dividing - x;
        let got: f64 = e.values().sum();
        prop_assert!((got - want).abs() <= 1e-9 * x.max(want.abs()));
    }
}
