//! Errors for primes in progressions and the moment sums built from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{self, Spf};
use crate::error::{Error, Result};
use crate::sieve::PrimeLogTable;
use crate::sum::{self, DoubleDouble, Neumaier};

/// Moduli handled per parallel task in [`moment_summary`].
const Q_CHUNK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentConfig {
    pub x: f64,
    /// Lower modulus cutoff (exclusive).
    pub p_lo: f64,
    /// Upper modulus cutoff (inclusive).
    pub q_hi: f64,
    pub a: f64,
}

impl MomentConfig {
    pub fn new(x: f64, p_lo: f64, q_hi: f64) -> Self {
        Self { x, p_lo, q_hi, a: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.x.is_finite()
            && self.p_lo >= 0.0
            && self.p_lo <= self.q_hi
            && self.q_hi <= self.x
            && self.a > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Range(format!("need 0 <= P <= Q <= x and A > 0, got {self:?}")))
        }
    }

    /// Whether Q ≤ x/(log x)².
    pub fn in_regime(&self) -> bool {
        let l = self.x.ln();
        self.q_hi <= self.x / (l * l)
    }

    pub fn moduli(&self) -> std::ops::RangeInclusive<u64> {
        (self.p_lo.floor() as u64 + 1)..=(self.q_hi.floor() as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerModulus {
    pub q: u64,
    pub phi: u64,
    pub sum_e2: f64,
    pub sum_e3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub m: f64,
    pub v: f64,
    pub u: f64,
    pub s1: f64,
    pub per_q: Option<Vec<PerModulus>>,
}

fn check_x(table: &PrimeLogTable, x: f64) -> Result<()> {
    if x > table.x_max() as f64 {
        Err(Error::Range(format!("x = {x} exceeds table bound {}", table.x_max())))
    } else {
        Ok(())
    }
}

/// Sum of log p over primes p ≤ x in each residue class modulo q.
fn class_sums(table: &PrimeLogTable, x: f64, q: u64) -> Vec<Neumaier> {
    let k = table.count_upto(x);
    let mut acc = vec![Neumaier::new(); q as usize];
    for (&p, &l) in table.primes()[..k].iter().zip(&table.logs()[..k]) {
        acc[(p % q) as usize].add(l);
    }
    acc
}

fn coprime_classes(q: u64) -> Vec<u64> {
    if q == 1 {
        return vec![0];
    }
    (1..q).filter(|&a| arith::gcd(a, q) == 1).collect()
}

/// E_x(q, a) for every reduced residue a. For q = 1 the single class is
/// labelled a = 0.
pub fn progression_errors(table: &PrimeLogTable, x: f64, q: u64) -> Result<BTreeMap<u64, f64>> {
    check_x(table, x)?;
    if q == 0 {
        return Err(Error::Range("modulus must be positive".into()));
    }
    let sums = class_sums(table, x, q);
    let phi = arith::phi(q) as f64;
    Ok(coprime_classes(q)
        .into_iter()
        .map(|a| (a, sums[a as usize].value() - x / phi))
        .collect())
}

pub fn restricted_moment(table: &PrimeLogTable, x: f64, q: u64, k: u32) -> Result<f64> {
    if !(2..=3).contains(&k) {
        return Err(Error::Unsupported(format!("moment order {k}")));
    }
    let e = progression_errors(table, x, q)?;
    Ok(sum::sum(e.values().map(|v| v.powi(k as i32))))
}

/// Per-modulus pieces of the cube expansion.
#[derive(Clone, Copy, Debug)]
struct ModulusTerms {
    q: u64,
    phi: u64,
    sum_e: f64,
    sum_e2: f64,
    sum_e3: f64,
    /// phi(q) times the sum of cubed class sums.
    s1: DoubleDouble,
}

fn modulus_terms(table: &PrimeLogTable, x: f64, q: u64, phi: u64) -> ModulusTerms {
    let sums = class_sums(table, x, q);
    let c = x / phi as f64;
    let (mut e1, mut e2, mut e3) = (Neumaier::new(), Neumaier::new(), Neumaier::new());
    let mut t3 = DoubleDouble::ZERO;
    for a in coprime_classes(q) {
        let t = sums[a as usize].value();
        let e = t - c;
        e1.add(e);
        e2.add(e * e);
        e3.add(e * e * e);
        let td = DoubleDouble::from_f64(t);
        t3 = t3.add(td.mul(td).mul(td));
    }
    ModulusTerms {
        q,
        phi,
        sum_e: e1.value(),
        sum_e2: e2.value(),
        sum_e3: e3.value(),
        s1: t3.mul_f64(phi as f64),
    }
}

fn all_terms(table: &PrimeLogTable, cfg: &MomentConfig) -> Result<Vec<ModulusTerms>> {
    cfg.validate()?;
    check_x(table, cfg.x)?;
    let qs: Vec<u64> = cfg.moduli().collect();
    let spf = Spf::new(cfg.q_hi.floor().max(1.0) as u64);
    let parts = sum::chunked_map(qs.len(), Q_CHUNK, |r| {
        qs[r]
            .iter()
            .map(|&q| modulus_terms(table, cfg.x, q, spf.phi(q)))
            .collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

/// M, V, U and S1 over P < q ≤ Q.
pub fn moment_summary(table: &PrimeLogTable, cfg: &MomentConfig, keep_per_q: bool) -> Result<MomentReport> {
    let terms = all_terms(table, cfg)?;
    let (mut m, mut v, mut u) = (Neumaier::new(), Neumaier::new(), Neumaier::new());
    let mut s1 = DoubleDouble::ZERO;
    for t in &terms {
        m.add(t.phi as f64 * t.sum_e3);
        v.add(t.sum_e2);
        u.add(1.0 / t.phi as f64);
        s1 = s1.add(t.s1);
    }
    let per_q = keep_per_q.then(|| {
        terms
            .iter()
            .map(|t| PerModulus { q: t.q, phi: t.phi, sum_e2: t.sum_e2, sum_e3: t.sum_e3 })
            .collect()
    });
    Ok(MomentReport { m: m.value(), v: v.value(), u: u.value(), s1: s1.value(), per_q })
}

/// Re-sums M from a per-modulus breakdown in ascending q.
pub fn resum_m(per_q: &[PerModulus]) -> f64 {
    sum::sum(per_q.iter().map(|r| r.phi as f64 * r.sum_e3))
}

/// Weight on the x³ term of the cube expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CubeWeight {
    /// Σ 1/φ(q)
    InvPhi,
    /// Σ 1/φ(q)²
    InvPhiSquared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub lhs: f64,
    pub rhs: f64,
    /// |lhs − rhs| / |lhs| for the selected weight.
    pub residual: f64,
    pub weight: CubeWeight,
    pub residual_inv_phi: f64,
    pub residual_inv_phi_squared: f64,
    /// Change in the right side when the per-modulus sum of errors is
    /// replaced by E_x(1,0), relative to |lhs|.
    pub e10_substitution_shift: f64,
}

/// Evaluates both sides of
/// `M = S1 − 3x V − 3x² Σ (Σ′E)/φ(q) − x³ Σ w(q)`
/// for each candidate weight w and keeps the one that closes.
pub fn decomposition_check(table: &PrimeLogTable, cfg: &MomentConfig) -> Result<DecompositionReport> {
    let terms = all_terms(table, cfg)?;
    let x = cfg.x;
    let x3 = DoubleDouble::from_f64(x).mul_f64(x).mul_f64(x);
    let e10 = table.chebyshev_theta(x)? - x;
    let mut lhs = Neumaier::new();
    let mut base = DoubleDouble::ZERO;
    let mut w1 = DoubleDouble::ZERO;
    let mut w2 = DoubleDouble::ZERO;
    let mut shift = Neumaier::new();
    for t in &terms {
        let phi = t.phi as f64;
        lhs.add(phi * t.sum_e3);
        let quad = DoubleDouble::from_f64(t.sum_e2).mul_f64(3.0 * x);
        let lin = DoubleDouble::from_f64(t.sum_e).mul_f64(3.0 * x).mul_f64(x).div_f64(phi);
        base = base.add(t.s1).sub(quad).sub(lin);
        w1 = w1.add(x3.div_f64(phi));
        w2 = w2.add(x3.div_f64(phi).div_f64(phi));
        shift.add(3.0 * x * x * (t.sum_e - e10) / phi);
    }
    let lhs = lhs.value();
    let rel = |rhs: f64| {
        if lhs == 0.0 {
            (lhs - rhs).abs()
        } else {
            ((lhs - rhs) / lhs).abs()
        }
    };
    let rhs1 = base.sub(w1).value();
    let rhs2 = base.sub(w2).value();
    let (r1, r2) = (rel(rhs1), rel(rhs2));
    let (weight, rhs, residual) =
        if r1 <= r2 { (CubeWeight::InvPhi, rhs1, r1) } else { (CubeWeight::InvPhiSquared, rhs2, r2) };
    let scale = if lhs == 0.0 { 1.0 } else { lhs.abs() };
    Ok(DecompositionReport {
        lhs,
        rhs,
        residual,
        weight,
        residual_inv_phi: r1,
        residual_inv_phi_squared: r2,
        e10_substitution_shift: shift.value() / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::enumerate_primes;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn small_progressions() {
        let t = enumerate_primes(100).unwrap();
        let e = progression_errors(&t, 30.0, 4).unwrap();
        assert_eq!(e.len(), 2);
        assert!(close(e[&1], -4.625104, 1e-6));
        assert!(close(e[&3], -3.477650, 1e-6));
        let one = progression_errors(&t, 10.0, 1).unwrap();
        assert!(close(one[&0], -4.652893, 1e-6));
        let seven = progression_errors(&t, 10.0, 7).unwrap();
        assert!(close(seven[&1], -10.0 / 6.0, 1e-12));
    }

    #[test]
    fn restricted_moments() {
        let t = enumerate_primes(100).unwrap();
        assert!(close(restricted_moment(&t, 10.0, 3, 3).unwrap(), -48.113434, 1e-6));
        assert!(close(restricted_moment(&t, 10.0, 3, 2).unwrap(), 16.6036, 1e-4));
        let e10 = t.chebyshev_theta(10.0).unwrap() - 10.0;
        assert!(close(restricted_moment(&t, 10.0, 1, 3).unwrap(), e10.powi(3), 1e-12));
        assert!(restricted_moment(&t, 10.0, 3, 4).is_err());
    }

    #[test]
    fn summary_examples() {
        let t = enumerate_primes(100).unwrap();
        let r = moment_summary(&t, &MomentConfig::new(10.0, 0.0, 3.0), true).unwrap();
        assert!(close(r.m, -349.75, 0.01), "{}", r.m);
        let u = moment_summary(&t, &MomentConfig::new(10.0, 5.0, 10.0), false).unwrap();
        assert!(close(u.u, 4.0 / 3.0, 1e-14));
        let empty = moment_summary(&t, &MomentConfig::new(50.0, 7.0, 7.0), true).unwrap();
        assert_eq!((empty.m, empty.v, empty.u, empty.s1), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn errors_sum_to_theta_prime() {
        let t = enumerate_primes(5000).unwrap();
        let x = 4321.5;
        let theta = t.chebyshev_theta(x).unwrap();
        for q in 1..60u64 {
            let s: f64 = sum::sum(progression_errors(&t, x, q).unwrap().into_values());
            let dividing: f64 = arith::trial_factor(q).iter().map(|&(p, _)| (p as f64).ln()).sum();
            let want = theta - dividing - x;
            assert!((s - want).abs() <= 1e-9 * theta, "q={q}");
        }
    }

    #[test]
    fn bad_config() {
        assert!(MomentConfig::new(10.0, 5.0, 3.0).validate().is_err());
        assert!(MomentConfig::new(10.0, 0.0, 11.0).validate().is_err());
    }

    #[test]
    fn decomposition_small() {
        let t = enumerate_primes(1000).unwrap();
        let r = decomposition_check(&t, &MomentConfig::new(1000.0, 0.0, 20.0)).unwrap();
        assert_eq!(r.weight, CubeWeight::InvPhi);
        assert!(r.residual <= 1e-9, "{r:?}");
        assert!(r.residual_inv_phi_squared > 1e-3);
    }
}
