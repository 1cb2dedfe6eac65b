//! Per-prime local factors in exact rational arithmetic, the multiplicative
//! functions assembled from them, and the per-prime identity suite.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};
use crate::sieve;
use crate::sum;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: u64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rat) -> f64 {
    // Scale so that both parts fit comfortably in an f64 before dividing.
    let (n, d) = (q.numer(), q.denom());
    let shift = (n.bits().max(d.bits()) as i64 - 900).max(0) as u64;
    if shift == 0 {
        n.to_f64().unwrap() / d.to_f64().unwrap()
    } else {
        (n >> shift).to_f64().unwrap() / (d >> shift).to_f64().unwrap()
    }
}

/// Y = p^(−s) for integer s.
pub fn y_pow(p: u64, s: i32) -> Rat {
    let base = int(p);
    if s >= 0 {
        num::pow(base, s as usize).recip()
    } else {
        num::pow(base, (-s) as usize)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalFactorSet {
    pub p: u64,
    pub r: Rat,
    pub psi1: Rat,
    pub i_p: Rat,
    /// Γ factor 1 + r.
    pub gamma: Rat,
    pub u: Rat,
    pub k: Rat,
    pub theta1: Rat,
    pub theta2: Rat,
    pub ell: Rat,
}

impl LocalFactorSet {
    pub fn new(p: u64) -> Result<Self> {
        if !arith::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let pq = int(p);
        let one = Rat::one();
        let r = if p == 2 {
            Rat::zero()
        } else {
            (pq.clone() - int(2) - pq.recip()).recip()
        };
        let psi1 = &one + (pq.clone() - &one - pq.recip()).recip();
        let i_p = if p == 2 {
            int(2)
        } else {
            -(r.clone() * (&one + int(3) * &r + &r * &r))
        };
        let gamma = &one + &r;
        let u = (&one + int(2) * &r / &pq).recip();
        let k = &one + &r * &r * &u / &pq;
        let rr = gamma.recip();
        let theta1 = &r * &rr - &one + &rr * &rr;
        let theta2 = &rr * &rr;
        let ell = &r + &r * &r * &gamma * &u / &pq;
        Ok(Self { p, r, psi1, i_p, gamma, u, k, theta1, theta2, ell })
    }

    fn pq(&self) -> Rat {
        int(self.p)
    }

    /// q_s(p) = 1 + rY.
    pub fn q_s(&self, y: &Rat) -> Rat {
        Rat::one() + &self.r * y
    }

    /// V_s(p) = 1 + 2r/p + rY(p + 3r + r²)/p.
    pub fn v_s(&self, y: &Rat) -> Rat {
        let p = self.pq();
        let r = &self.r;
        Rat::one() + int(2) * r / &p + r * y * (&p + int(3) * r + r * r) / &p
    }

    /// τ(p) = 1 + rY(2 + r).
    pub fn tau(&self, y: &Rat) -> Rat {
        Rat::one() + &self.r * y * (int(2) + &self.r)
    }

    /// g_1(p) = r.
    pub fn g(&self) -> Rat {
        self.r.clone()
    }
}

pub fn local_factors(p: u64) -> Result<LocalFactorSet> {
    LocalFactorSet::new(p)
}

/// Floating-point mirror of the local factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalF64 {
    pub p: u64,
    pub logp: f64,
    pub r: f64,
    pub psi1: f64,
    pub i_p: f64,
    pub gamma: f64,
    pub u: f64,
    pub k: f64,
    pub ell: f64,
}

impl LocalF64 {
    pub fn new(p: u64) -> Self {
        let pf = p as f64;
        let r = if p == 2 { 0.0 } else { pf / (pf * pf - 2.0 * pf - 1.0) };
        let psi1 = 1.0 + pf / (pf * pf - pf - 1.0);
        let i_p = if p == 2 { 2.0 } else { -r * (1.0 + 3.0 * r + r * r) };
        let u = pf / (pf + 2.0 * r);
        let k = 1.0 + r * r * u / pf;
        let ell = r + r * r * (1.0 + r) * u / pf;
        Self { p, logp: pf.ln(), r, psi1, i_p, gamma: 1.0 + r, u, k, ell }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultFn {
    Psi1,
    GammaDelta,
    GDelta,
    I,
    KDelta,
    U,
    Phi,
    Mu,
}

impl std::str::FromStr for MultFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "psi1" => MultFn::Psi1,
            "gammadelta" | "gamma" => MultFn::GammaDelta,
            "gdelta" | "g" => MultFn::GDelta,
            "i" => MultFn::I,
            "kdelta" | "k" => MultFn::KDelta,
            "u" => MultFn::U,
            "phi" => MultFn::Phi,
            "mu" => MultFn::Mu,
            other => return Err(Error::Unsupported(format!("function id {other}"))),
        })
    }
}

/// Evaluates a multiplicative function at n. `delta` is only read by the
/// Δ-dependent functions and must then be squarefree.
pub fn eval_mult(f: MultFn, n: u64, delta: u64) -> Result<Rat> {
    if n == 0 {
        return Err(Error::Range("n must be positive".into()));
    }
    let needs_delta = matches!(f, MultFn::GammaDelta | MultFn::GDelta | MultFn::KDelta);
    if needs_delta && !arith::is_squarefree(delta) {
        return Err(Error::Range(format!("Δ = {delta} is not squarefree")));
    }
    let fac = arith::trial_factor(n);
    let squarefree = fac.iter().all(|&(_, e)| e == 1);
    let coprime_to_delta = |p: u64| delta % p != 0;
    let mut acc = Rat::one();
    match f {
        MultFn::Phi => return Ok(int(arith::phi(n))),
        MultFn::Mu => return Ok(Rat::from_integer(BigInt::from(arith::mu(n)))),
        MultFn::GDelta if !squarefree || arith::gcd(n, delta) > 1 => return Ok(Rat::zero()),
        MultFn::I if !squarefree => return Ok(Rat::zero()),
        _ => {}
    }
    for &(p, _) in &fac {
        let lf = LocalFactorSet::new(p)?;
        let v = match f {
            MultFn::Psi1 => lf.psi1,
            MultFn::GammaDelta if coprime_to_delta(p) => lf.gamma,
            MultFn::KDelta if coprime_to_delta(p) => lf.k,
            MultFn::GammaDelta | MultFn::KDelta => continue,
            MultFn::GDelta => lf.r,
            MultFn::I => lf.i_p,
            MultFn::U => lf.u,
            MultFn::Phi | MultFn::Mu => unreachable!(),
        };
        acc *= v;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalIdentity {
    /// C5·C6·C8 factor equals 1.
    C5C6C8,
    /// C3·h(1) factor equals 1.
    C3H1,
    /// V_s(p) + Y·I(p)/p = (1 + 2r/p)(1 + Y/(p − 1)).
    VPlusIOverP,
    /// V_0(p) = q_1(p)q_0(p) + r(1 + r)²/p.
    V0Split,
    /// q_1(p)q_s(p) + rτ(p)/p = V_s(p).
    Q1QsTau,
    /// The θ₁/θ₂ chain ending in 1/(p(p − 1)).
    ThetaChain,
    /// (1 + 2r/p)(1 + [p|m]r²U(p)/p) = 1 + 2r/p + [p|m]r²/p.
    DsumFactor,
}

impl LocalIdentity {
    pub const ALL: [LocalIdentity; 7] = [
        LocalIdentity::C5C6C8,
        LocalIdentity::C3H1,
        LocalIdentity::VPlusIOverP,
        LocalIdentity::V0Split,
        LocalIdentity::Q1QsTau,
        LocalIdentity::ThetaChain,
        LocalIdentity::DsumFactor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LocalIdentity::C5C6C8 => "c5_c6_c8",
            LocalIdentity::C3H1 => "c3_h1",
            LocalIdentity::VPlusIOverP => "v_plus_i_over_p",
            LocalIdentity::V0Split => "v0_split",
            LocalIdentity::Q1QsTau => "q1_qs_tau",
            LocalIdentity::ThetaChain => "theta_chain",
            LocalIdentity::DsumFactor => "dsum_factor",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityOutcome {
    pub identity: LocalIdentity,
    pub p: u64,
    /// The sample s, or the indicator [p|m] for the D-sum factor.
    pub s: Option<i32>,
    pub pass: bool,
    pub lhs: String,
    pub rhs: String,
}

fn outcome(identity: LocalIdentity, p: u64, s: Option<i32>, lhs: Rat, rhs: Rat) -> IdentityOutcome {
    IdentityOutcome { identity, p, s, pass: lhs == rhs, lhs: lhs.to_string(), rhs: rhs.to_string() }
}

/// Checks all seven identities at p in exact arithmetic.
pub fn local_identity_suite(p: u64, s_samples: &[i32]) -> Result<Vec<IdentityOutcome>> {
    let lf = LocalFactorSet::new(p)?;
    let one = Rat::one();
    let pq = int(p);
    let r = &lf.r;
    let mut out = Vec::new();

    // C5, C6, C8 run over p > 2 only.
    let c568 = if p == 2 {
        one.clone()
    } else {
        let pm1 = int(p - 1);
        (&one - (&pm1 * &pm1).recip())
            * (&one - (&pq * int(p - 2)).recip())
            * (&one + int(2) * r / &pq)
    };
    out.push(outcome(LocalIdentity::C5C6C8, p, None, c568, one.clone()));

    let c3h = (&one - (&pq * int(p - 1)).recip()) * (&one + (&lf.psi1 - &one) / &pq);
    out.push(outcome(LocalIdentity::C3H1, p, None, c3h, one.clone()));

    for &s in s_samples {
        let y = y_pow(p, s);
        let lhs = lf.v_s(&y) + &y * &lf.i_p / &pq;
        let rhs = (&one + int(2) * r / &pq) * (&one + &y / int(p - 1));
        out.push(outcome(LocalIdentity::VPlusIOverP, p, Some(s), lhs, rhs));
    }

    let y0 = one.clone();
    let y1 = pq.recip();
    let v0 = lf.v_s(&y0);
    let split = lf.q_s(&y1) * lf.q_s(&y0) + r * &lf.gamma * &lf.gamma / &pq;
    out.push(outcome(LocalIdentity::V0Split, p, None, v0.clone(), split));

    for &s in s_samples {
        let y = y_pow(p, s);
        let lhs = lf.q_s(&y1) * lf.q_s(&y) + r * lf.tau(&y) / &pq;
        out.push(outcome(LocalIdentity::Q1QsTau, p, Some(s), lhs, lf.v_s(&y)));
    }

    // M1(p) sums I(Δ)g_Δ(d)Γ_Δ(d)² over dΔ = p; M2(p) = I(p)/(pV_0(p)).
    let m1 = (&lf.i_p + r * &lf.gamma * &lf.gamma) / (&pq * lf.q_s(&y1) * lf.q_s(&y0));
    let m2 = &lf.i_p / (&pq * &v0);
    let middle = &m1 * &lf.theta1 / (&one + &m1) - &m2 * &lf.theta2 / (&one + &m2);
    let total = (int(p - 1)).recip() - r / &lf.gamma + &middle;
    let final_ok = total == (&pq * int(p - 1)).recip();
    let mid_rhs = r * (&one + int(2) * r) / (&lf.gamma * (&pq + &pq * r + r));
    let mid_ok = p == 2 || middle == mid_rhs;
    out.push(IdentityOutcome {
        identity: LocalIdentity::ThetaChain,
        p,
        s: None,
        pass: final_ok && mid_ok,
        lhs: format!("{total} (middle {middle})"),
        rhs: format!("{} (middle {mid_rhs})", (&pq * int(p - 1)).recip()),
    });

    for divides in [0, 1] {
        let ind = int(divides as u64);
        let lhs = (&one + int(2) * r / &pq) * (&one + &ind * r * r * &lf.u / &pq);
        let rhs = &one + int(2) * r / &pq + &ind * r * r / &pq;
        out.push(outcome(LocalIdentity::DsumFactor, p, Some(divides), lhs, rhs));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentitySummary {
    pub p_max: u64,
    pub primes_tested: usize,
    pub s_samples: Vec<i32>,
    /// (identity name, checks run, checks passed)
    pub counts: Vec<(String, usize, usize)>,
    pub failures: Vec<IdentityOutcome>,
}

impl IdentitySummary {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty() && self.counts.iter().all(|(_, n, ok)| n == ok)
    }
}

/// Runs the suite for every prime up to `p_max`.
pub fn run_identity_suite(p_max: u64, s_samples: &[i32]) -> Result<IdentitySummary> {
    let primes = sieve::primes_upto(p_max);
    let parts = sum::chunked_map(primes.len(), 256, |range| {
        primes[range]
            .iter()
            .map(|&p| local_identity_suite(p, s_samples))
            .collect::<Result<Vec<_>>>()
    });
    let mut counts: Vec<(String, usize, usize)> =
        LocalIdentity::ALL.iter().map(|i| (i.name().to_string(), 0, 0)).collect();
    let mut failures = Vec::new();
    for part in parts {
        for outcomes in part? {
            for o in outcomes {
                let slot = LocalIdentity::ALL.iter().position(|&i| i == o.identity).unwrap();
                counts[slot].1 += 1;
                if o.pass {
                    counts[slot].2 += 1;
                } else {
                    failures.push(o);
                }
            }
        }
    }
    Ok(IdentitySummary {
        p_max,
        primes_tested: primes.len(),
        s_samples: s_samples.to_vec(),
        counts,
        failures,
    })
}

/// |r − 1/p|·p², the constant in r = 1/p + O(1/p²).
pub fn r_deviation_scaled(p: u64) -> Result<Rat> {
    let lf = LocalFactorSet::new(p)?;
    let pq = int(p);
    Ok((&lf.r - pq.recip()).abs() * &pq * &pq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn p2_and_p3_and_p5() {
        let two = local_factors(2).unwrap();
        assert!(two.r.is_zero());
        assert_eq!(two.i_p, int(2));
        let three = local_factors(3).unwrap();
        assert_eq!(three.r, rat(3, 2));
        assert_eq!(three.i_p, rat(-93, 8));
        assert_eq!(three.u, rat(1, 2));
        assert_eq!(three.k, rat(11, 8));
        assert_eq!(local_factors(5).unwrap().r, rat(5, 14));
        assert!(matches!(local_factors(9), Err(Error::NotPrime(9))));
    }

    #[test]
    fn float_mirror_matches() {
        for p in sieve::primes_upto(500) {
            let e = local_factors(p).unwrap();
            let f = LocalF64::new(p);
            for (a, b) in [(&e.r, f.r), (&e.psi1, f.psi1), (&e.i_p, f.i_p), (&e.u, f.u), (&e.k, f.k), (&e.ell, f.ell)] {
                assert!((to_f64(a) - b).abs() <= 1e-15 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn mult_examples() {
        assert_eq!(eval_mult(MultFn::Psi1, 1, 1).unwrap(), Rat::one());
        assert_eq!(eval_mult(MultFn::GammaDelta, 1, 6).unwrap(), Rat::one());
        assert_eq!(eval_mult(MultFn::I, 1, 1).unwrap(), Rat::one());
        assert_eq!(eval_mult(MultFn::Psi1, 6, 1).unwrap(), rat(24, 5));
        assert_eq!(eval_mult(MultFn::GDelta, 9, 1).unwrap(), Rat::zero());
        assert_eq!(eval_mult(MultFn::GDelta, 3, 3).unwrap(), Rat::zero());
        assert_eq!(eval_mult(MultFn::GDelta, 3, 1).unwrap(), rat(3, 2));
        assert_eq!(eval_mult(MultFn::I, 12, 1).unwrap(), Rat::zero());
        assert_eq!(eval_mult(MultFn::Phi, 12, 1).unwrap(), int(4));
        assert!(eval_mult(MultFn::GammaDelta, 5, 4).is_err());
        assert!("nope".parse::<MultFn>().is_err());
    }

    #[test]
    fn suite_at_three() {
        let out = local_identity_suite(3, &[0, 1, 2]).unwrap();
        assert_eq!(out.len(), 1 + 1 + 3 + 1 + 3 + 1 + 2);
        assert!(out.iter().all(|o| o.pass), "{out:?}");
    }

    #[test]
    fn theta_middle_fails_at_two_only_in_middle_form() {
        let lf = local_factors(2).unwrap();
        assert!(lf.r.is_zero());
        let out = local_identity_suite(2, &[1]).unwrap();
        let chain = out.iter().find(|o| o.identity == LocalIdentity::ThetaChain).unwrap();
        assert!(chain.pass);
        assert!(chain.lhs.contains("middle -1/2"));
    }

    #[test]
    fn suite_small_range() {
        let s = run_identity_suite(2000, &[0, 1, 2]).unwrap();
        assert!(s.all_pass(), "{:?}", s.failures.first());
        assert_eq!(s.primes_tested, 303);
    }

    #[test]
    fn r_close_to_inverse_p() {
        assert_eq!(r_deviation_scaled(3).unwrap(), rat(21, 2));
        for p in sieve::primes_upto(3000).into_iter().skip(2) {
            assert!(r_deviation_scaled(p).unwrap() <= int(4), "p={p}");
        }
    }

    #[test]
    fn g_convolves_to_gamma() {
        for delta in [1u64, 2, 3, 5, 6] {
            for n in 1..=400u64 {
                let total = arith::divisors_from(&arith::trial_factor(n))
                    .into_iter()
                    .map(|d| eval_mult(MultFn::GDelta, d, delta).unwrap())
                    .fold(Rat::zero(), |a, b| a + b);
                assert_eq!(total, eval_mult(MultFn::GammaDelta, n, delta).unwrap(), "n={n} Δ={delta}");
            }
        }
    }

    proptest! {
        #[test]
        fn multiplicative(m in 1u64..300, n in 1u64..300, which in 0usize..6) {
            prop_assume!(arith::gcd(m, n) == 1);
            let f = [MultFn::Psi1, MultFn::GammaDelta, MultFn::GDelta, MultFn::I, MultFn::KDelta, MultFn::U][which];
            let delta = 6;
            let lhs = eval_mult(f, m * n, delta).unwrap();
            let rhs = eval_mult(f, m, delta).unwrap() * eval_mult(f, n, delta).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
