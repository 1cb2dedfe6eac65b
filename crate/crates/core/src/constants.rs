//! Global constants as Euler products and prime sums. Primes up to a cutoff
//! are multiplied out; the rest is summed through the prime zeta function
//! P(x) = Σ_k μ(k)/k · log ζ(kx).

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::analytic::special::{digamma, EULER_GAMMA};
use crate::analytic::zeta::{zeta_minus_one, zeta_real, zeta_with_derivative};
use crate::analytic::C64;
use crate::arith;
use crate::error::{Error, Result};
use crate::local::LocalF64;
use crate::sieve::primes_upto;
use crate::sum::Neumaier;

pub const DEFAULT_PRIME_CUTOFF: u64 = 10_000;
const MAX_ORDER: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorId {
    C3,
    C5,
    C6,
    C8,
    /// h(1) = ∏(1 − 1/p)/(1 − 1/p − 1/p²).
    H1,
    /// 𝒰(1) = ∏(1 + 1/(p(p − 1))).
    U1,
    /// 𝒬₁(1) = ∏(1 + r/p).
    Q1At1,
    /// ∏(1 + r)(1 − 1/p), the value at 0 with ζ(s+1) removed.
    Q1At0Reg,
    /// Σ log p/(p(p − 1)).
    LogSumS,
    /// Σ (1/(p − 1) − r/(1 + r)) log p.
    LogSumCalS,
    /// 𝒰′(1)/𝒰(1) = −Σ log p/(p² − p + 1).
    ULogDeriv,
}

impl FactorId {
    pub const ALL: [FactorId; 11] = [
        FactorId::C3,
        FactorId::C5,
        FactorId::C6,
        FactorId::C8,
        FactorId::H1,
        FactorId::U1,
        FactorId::Q1At1,
        FactorId::Q1At0Reg,
        FactorId::LogSumS,
        FactorId::LogSumCalS,
        FactorId::ULogDeriv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FactorId::C3 => "C3",
            FactorId::C5 => "C5",
            FactorId::C6 => "C6",
            FactorId::C8 => "C8",
            FactorId::H1 => "h1",
            FactorId::U1 => "U1",
            FactorId::Q1At1 => "Q1_at_1",
            FactorId::Q1At0Reg => "Q1_at_0_reg",
            FactorId::LogSumS => "S",
            FactorId::LogSumCalS => "S_cal",
            FactorId::ULogDeriv => "U_log_deriv_at_1",
        }
    }
}

impl std::str::FromStr for FactorId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FactorId::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unsupported(format!("constant {s}")))
    }
}

enum Shape {
    /// ∏_p N(1/p)/D(1/p).
    Product,
    /// Σ_p log p · N(1/p)/D(1/p).
    LogSum,
}

struct Rule {
    shape: Shape,
    /// Value of the p = 2 term when the rational rule does not apply.
    at_two: Option<f64>,
    num: &'static [f64],
    den: &'static [f64],
}

fn rule(id: FactorId) -> Rule {
    use Shape::*;
    let (shape, at_two, num, den): (Shape, Option<f64>, &'static [f64], &'static [f64]) = match id {
        FactorId::C3 => (Product, None, &[1.0, -1.0, -1.0], &[1.0, -1.0]),
        FactorId::C5 => (Product, Some(1.0), &[1.0, -2.0], &[1.0, -2.0, 1.0]),
        FactorId::C6 => (Product, Some(1.0), &[1.0, -2.0, -1.0], &[1.0, -2.0]),
        FactorId::C8 => (Product, Some(1.0), &[1.0, -2.0, 1.0], &[1.0, -2.0, -1.0]),
        FactorId::H1 => (Product, None, &[1.0, -1.0], &[1.0, -1.0, -1.0]),
        FactorId::U1 => (Product, None, &[1.0, -1.0, 1.0], &[1.0, -1.0]),
        FactorId::Q1At1 => (Product, Some(1.0), &[1.0, -2.0], &[1.0, -2.0, -1.0]),
        FactorId::Q1At0Reg => {
            (Product, Some(0.5), &[1.0, -2.0, 0.0, 1.0], &[1.0, -2.0, -1.0])
        }
        FactorId::LogSumS => (LogSum, None, &[0.0, 0.0, 1.0], &[1.0, -1.0]),
        FactorId::LogSumCalS => (LogSum, Some(1.0), &[0.0, 0.0, 0.0, -1.0], &[1.0, -2.0, 0.0, 1.0]),
        FactorId::ULogDeriv => (LogSum, None, &[0.0, 0.0, -1.0], &[1.0, -1.0, 1.0]),
    };
    Rule { shape, at_two, num, den }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerProductValue {
    pub factor_id: FactorId,
    pub value: f64,
    pub prime_cutoff: u64,
    pub tail_bound: f64,
}

fn poly(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * u + v)
}

/// Power series of log P(u) for P(0) = 1, through u^k_max.
fn log_series(p: &[f64], k_max: usize) -> Vec<f64> {
    let a = |k: usize| p.get(k).copied().unwrap_or(0.0);
    let mut l = vec![0.0; k_max + 1];
    for k in 1..=k_max {
        let mut v = k as f64 * a(k);
        for j in 1..k {
            v -= j as f64 * l[j] * a(k - j);
        }
        l[k] = v / k as f64;
    }
    l
}

/// Power series of N(u)/D(u) with D(0) = 1.
fn ratio_series(num: &[f64], den: &[f64], k_max: usize) -> Vec<f64> {
    let mut c = vec![0.0; k_max + 1];
    for k in 0..=k_max {
        let mut v = num.get(k).copied().unwrap_or(0.0);
        for j in 1..den.len().min(k + 1) {
            v -= den[j] * c[k - j];
        }
        c[k] = v;
    }
    c
}

/// Σ_{p>N} p^{-x} and Σ_{p>N} log p · p^{-x} for real x > 1.
pub struct PrimeTail {
    cutoff: u64,
    primes: Vec<u64>,
    logs: Vec<f64>,
}

impl PrimeTail {
    pub fn new(cutoff: u64) -> Self {
        let primes = primes_upto(cutoff);
        let logs = primes.iter().map(|&p| (p as f64).ln()).collect();
        Self { cutoff, primes, logs }
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Σ_p p^{-x}.
    pub fn prime_zeta(x: f64) -> f64 {
        let mut acc = Neumaier::new();
        let mu = arith::mu_table(64);
        for k in 1..64usize {
            let kx = k as f64 * x;
            if kx > 70.0 {
                break;
            }
            if mu[k] != 0 {
                acc.add(mu[k] as f64 / k as f64 * zeta_minus_one(kx).ln_1p());
            }
        }
        acc.value()
    }

    /// Σ_p log p · p^{-x}.
    pub fn prime_zeta_log(x: f64) -> f64 {
        let mut acc = Neumaier::new();
        let mu = arith::mu_table(64);
        for k in 1..64usize {
            let kx = k as f64 * x;
            if kx > 70.0 {
                break;
            }
            if mu[k] != 0 {
                let (z, dz) = zeta_with_derivative(C64::new(kx, 0.0)).expect("real argument");
                acc.add(-(mu[k] as f64) * dz.re / z.re);
            }
        }
        acc.value()
    }

    pub fn tail(&self, x: f64) -> f64 {
        let mut part = Neumaier::new();
        for &l in self.logs.iter().rev() {
            part.add((-x * l).exp());
        }
        Self::prime_zeta(x) - part.value()
    }

    pub fn tail_log(&self, x: f64) -> f64 {
        let mut part = Neumaier::new();
        for &l in self.logs.iter().rev() {
            part.add(l * (-x * l).exp());
        }
        Self::prime_zeta_log(x) - part.value()
    }

    /// Crude upper bound for Σ_{p>N} p^{-x}.
    pub fn tail_bound(&self, x: f64) -> f64 {
        let n = self.cutoff as f64;
        n.powf(1.0 - x) / (x - 1.0)
    }
}

pub fn euler_product(id: FactorId, precision_target: f64) -> Result<EulerProductValue> {
    euler_product_with(id, precision_target, DEFAULT_PRIME_CUTOFF)
}

pub fn euler_product_with(id: FactorId, precision_target: f64, cutoff: u64) -> Result<EulerProductValue> {
    if !(precision_target >= 1e-12) {
        return Err(Error::Range(format!("precision target {precision_target} below 1e-12")));
    }
    if cutoff < 100 {
        return Err(Error::Range("prime cutoff must be at least 100".into()));
    }
    let tail = PrimeTail::new(cutoff);
    let rule = rule(id);
    let n = cutoff as f64;
    let mut head = Neumaier::new();
    let mut abs_terms = 0.0;
    for (&p, &l) in tail.primes.iter().zip(&tail.logs) {
        let u = 1.0 / p as f64;
        let term = match (&rule.shape, rule.at_two) {
            (Shape::Product, Some(v)) if p == 2 => v.ln(),
            (Shape::LogSum, Some(v)) if p == 2 => v * l,
            (Shape::Product, _) => {
                let d = poly(rule.den, u);
                let diff: Vec<f64> = (0..rule.num.len().max(rule.den.len()))
                    .map(|k| rule.num.get(k).copied().unwrap_or(0.0) - rule.den.get(k).copied().unwrap_or(0.0))
                    .collect();
                (poly(&diff, u) / d).ln_1p()
            }
            (Shape::LogSum, _) => l * poly(rule.num, u) / poly(rule.den, u),
        };
        abs_terms += term.abs();
        head.add(term);
    }
    let coeffs = match rule.shape {
        Shape::Product => {
            let a = log_series(rule.num, MAX_ORDER);
            let b = log_series(rule.den, MAX_ORDER);
            a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>()
        }
        Shape::LogSum => ratio_series(rule.num, rule.den, MAX_ORDER),
    };
    let mut tail_sum = Neumaier::new();
    let mut omitted = 0.0;
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        if c == 0.0 {
            continue;
        }
        let kf = k as f64;
        if kf <= 1.0 {
            return Err(Error::Domain(format!("{} diverges: first-order term present", id.name())));
        }
        let bound = c.abs() * tail.tail_bound(kf) * if matches!(rule.shape, Shape::LogSum) { n.ln() + 1.0 / (kf - 1.0) } else { 1.0 };
        if bound < 1e-22 {
            omitted = coeffs[k..].iter().enumerate().map(|(j, c)| c.abs() * tail.tail_bound(kf + j as f64) * (n.ln() + 1.0)).sum();
            break;
        }
        let t = match rule.shape {
            Shape::Product => tail.tail(kf),
            Shape::LogSum => tail.tail_log(kf),
        };
        tail_sum.add(c * t);
    }
    let log_total = head.value() + tail_sum.value();
    // Rounding allowance for the head and the prime zeta subtraction.
    let rounding = 4.0 * f64::EPSILON * (abs_terms + 1.0) + omitted;
    let (value, tail_bound) = match rule.shape {
        Shape::Product => {
            let v = log_total.exp();
            (v, v * rounding.exp_m1() * 2.0)
        }
        Shape::LogSum => (log_total, rounding * (1.0 + log_total.abs())),
    };
    if tail_bound > precision_target {
        return Err(Error::Budget(format!(
            "{}: bound {tail_bound:e} exceeds target {precision_target:e} at cutoff {cutoff}",
            id.name()
        )));
    }
    Ok(EulerProductValue { factor_id: id, value, prime_cutoff: cutoff, tail_bound })
}

/// (h(s), h′(s)) for real s in (1/2, 3/2), with h(s) = ∏(1 + (ψ₁(p) − 1)p^{-s}).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HValue {
    pub s: f64,
    pub h: f64,
    pub h_prime: f64,
    pub tail_bound: f64,
}

pub fn h_and_derivative(s: f64) -> Result<HValue> {
    if !(s > 0.5 && s < 1.5) {
        return Err(Error::Range(format!("h(s) evaluated at s = {s} outside (1/2, 3/2)")));
    }
    let tail = PrimeTail::new(DEFAULT_PRIME_CUTOFF);
    let (mut lh, mut dlh) = (Neumaier::new(), Neumaier::new());
    for &p in &tail.primes {
        let lf = LocalF64::new(p);
        let x = (lf.psi1 - 1.0) * (-s * lf.logp).exp();
        lh.add(x.ln_1p());
        dlh.add(-lf.logp * x / (1.0 + x));
    }
    // log(1 + w(u)Y) with w = u/(1 − u − u²): Σ_m (−1)^{m+1}/m · w^m Y^m.
    const J: usize = 40;
    let w = ratio_series(&[0.0, 1.0], &[1.0, -1.0, -1.0], J);
    let mut wm = vec![0.0; J + 1];
    wm[0] = 1.0;
    let mut omitted: f64 = 0.0;
    for m in 1..=J {
        let mut next = vec![0.0; J + 1];
        for i in 0..=J {
            for j in 1..=J - i {
                next[i + j] += wm[i] * w[j];
            }
        }
        wm = next;
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 } / m as f64;
        for (j, &c) in wm.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let x = j as f64 + m as f64 * s;
            let b = c.abs() * tail.tail_bound(x) * (1.0 + m as f64 * 10.0);
            if b < 1e-22 {
                omitted += b;
                continue;
            }
            lh.add(sign * c * tail.tail(x));
            dlh.add(-sign * c * m as f64 * tail.tail_log(x));
        }
    }
    let h = lh.value().exp();
    let tail_bound = h * (omitted + 1e-15);
    Ok(HValue { s, h, h_prime: h * dlh.value(), tail_bound })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZConsistency {
    pub z_bc: f64,
    pub z_res: f64,
    pub difference: f64,
    pub log_derivative_at_zero: f64,
    pub digamma_five_plus_gamma: f64,
    pub pass: bool,
}

pub fn z_consistency() -> ZConsistency {
    let c = lemma_coefficients();
    let difference = c.z_bc - c.z_res;
    ZConsistency {
        z_bc: c.z_bc,
        z_res: c.z_res,
        difference,
        log_derivative_at_zero: c.zeta_prime_0 / c.zeta_0,
        digamma_five_plus_gamma: digamma(5.0) + EULER_GAMMA,
        pass: difference.abs() <= 1e-10,
    }
}

/// Every named constant, computed once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma0: f64,
    pub zeta_0: f64,
    pub zeta_prime_0: f64,
    /// ζ′(0)/ζ(0) + γ₀ − 13/12.
    pub z_res: f64,
    /// ζ′(0)/ζ(0) − ψ(5) + 1.
    pub z_bc: f64,
    /// ζ(2)ζ(3)/ζ(6).
    pub z_prod: f64,
    pub u1: f64,
    pub u0_reg: f64,
    pub u_log_deriv_1: f64,
    pub s_log: f64,
    pub s_cal: f64,
    pub c2: f64,
    pub c3: f64,
    pub c5: f64,
    pub c6: f64,
    pub c8: f64,
    pub h1: f64,
    pub h1_prime: f64,
    pub q1_at_1: f64,
    pub q1_at_0_reg: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub values: Vec<EulerProductValue>,
}

fn compute() -> LemmaCoefficients {
    let get = |id| euler_product(id, 1e-12).expect("default cutoff meets 1e-12");
    let values: Vec<EulerProductValue> = FactorId::ALL.iter().map(|&id| get(id)).collect();
    let v = |id: FactorId| values.iter().find(|e| e.factor_id == id).unwrap().value;
    let (z0, dz0) = zeta_with_derivative(C64::new(0.0, 0.0)).expect("ζ at 0");
    let (zeta_0, zeta_prime_0) = (z0.re, dz0.re);
    let gamma0 = EULER_GAMMA;
    let z_res = zeta_prime_0 / zeta_0 + gamma0 - 13.0 / 12.0;
    let z_bc = zeta_prime_0 / zeta_0 - digamma(5.0) + 1.0;
    let z_prod = zeta_real(2.0) * zeta_real(3.0) / zeta_real(6.0);
    let s_log = v(FactorId::LogSumS);
    let c2 = (2.0 * PI).ln() + gamma0 + s_log;
    let a = 2.0 * 2.0 / 120.0;
    let b = 2.0 * 2.0 * zeta_0 / 24.0;
    let u1 = v(FactorId::U1);
    let u0_reg = 1.0;
    let alpha = a * u1;
    let beta = b * u0_reg;
    let gamma = beta * (z_res + s_log) + zeta_0 / 12.0;
    let h1 = v(FactorId::H1);
    let h1_prime = -s_log * h1;
    LemmaCoefficients {
        a,
        b,
        c: b,
        gamma0,
        zeta_0,
        zeta_prime_0,
        z_res,
        z_bc,
        z_prod,
        u1,
        u0_reg,
        u_log_deriv_1: v(FactorId::ULogDeriv),
        s_log,
        s_cal: v(FactorId::LogSumCalS),
        c2,
        c3: v(FactorId::C3),
        c5: v(FactorId::C5),
        c6: v(FactorId::C6),
        c8: v(FactorId::C8),
        h1,
        h1_prime,
        q1_at_1: v(FactorId::Q1At1),
        q1_at_0_reg: v(FactorId::Q1At0Reg),
        alpha,
        beta,
        gamma,
        alpha1: h1,
        beta1: h1 * (gamma0 - 1.0) + h1_prime,
        alpha2: h1 / 2.0,
        beta2: h1 * (gamma0 / 2.0 - 0.75) + h1_prime / 2.0,
        values,
    }
}

pub fn lemma_coefficients() -> &'static LemmaCoefficients {
    static C: OnceLock<LemmaCoefficients> = OnceLock::new();
    C.get_or_init(compute)
}

pub fn c8() -> f64 {
    lemma_coefficients().c8
}

fn r_of(p: u64) -> f64 {
    LocalF64::new(p).r
}

/// 𝒬_n(1) for squarefree n.
pub fn q_at_1(n: u64) -> f64 {
    let c = lemma_coefficients();
    arith::trial_factor(n).iter().fold(c.q1_at_1, |acc, &(p, _)| acc / (1.0 + r_of(p) / p as f64))
}

/// 𝒬_n(0) with ζ(s+1) removed, for squarefree n.
pub fn q_at_0_reg(n: u64) -> f64 {
    let c = lemma_coefficients();
    arith::trial_factor(n).iter().fold(c.q1_at_0_reg, |acc, &(p, _)| acc / (1.0 + r_of(p)))
}

/// ℛ′_{1,n}(0)/ℛ_{1,n}(0) = 𝒮 + Σ_{p|n} r log p/(1 + r).
pub fn r_log_derivative_at_0(n: u64) -> f64 {
    let c = lemma_coefficients();
    arith::trial_factor(n).iter().fold(c.s_cal, |acc, &(p, _)| {
        let r = r_of(p);
        acc + r * (p as f64).ln() / (1.0 + r)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn prime_zeta_at_two() {
        assert!(close(PrimeTail::prime_zeta(2.0), 0.452_247_420_041_065_5, 1e-14));
        let t = PrimeTail::new(100);
        let direct: f64 = primes_upto(2_000_000).iter().filter(|&&p| p > 100).map(|&p| (p as f64).powi(-3)).sum();
        assert!(close(t.tail(3.0), direct, 1e-6));
    }

    #[test]
    fn frozen_values() {
        let c = lemma_coefficients();
        let checks = [
            ("C3", c.c3, 0.373_955_813_619_202_3),
            ("C5", c.c5, 0.660_161_815_846_869_6),
            ("C6", c.c6, 0.583_617_473_784_531_4),
            ("C8", c.c8, 2.595_501_670_494_431_5),
            ("h1", c.h1, 2.674_112_725_570_021_5),
            ("h1'", c.h1_prime, -2.019_935_466_495_715),
            ("U1", c.u1, 1.943_596_436_820_759_2),
            ("S", c.s_log, 0.755_366_610_831_688_0),
            ("C2", c.c2, 3.170_459_342_142_566_4),
            ("Zres", c.z_res, 1.331_759_397_977_545),
            ("alpha", c.alpha, 0.064_786_547_894_025_31),
            ("gamma", c.gamma, -0.215_593_834_067_436_1),
            ("beta1", c.beta1, -3.150_508_437_154_186),
            ("beta2", c.beta2, -2.243_782_399_969_598_5),
            ("Q1(1)", c.q1_at_1, 1.713_451_095_827_187_2),
            ("Q1(0)", c.q1_at_0_reg, 0.970_602_938_939_743_8),
        ];
        for (name, got, want) in checks {
            assert!(close(got, want, 1e-12), "{name}: {got} vs {want}");
        }
    }

    #[test]
    fn identities() {
        let c = lemma_coefficients();
        assert!((c.c5 * c.c6 * c.c8 - 1.0).abs() < 1e-12);
        assert!((c.c3 * c.h1 - 1.0).abs() < 1e-12);
        assert!((c.u1 - c.z_prod).abs() < 1e-12);
        assert!(z_consistency().pass);
        assert!((c.a - 1.0 / 30.0).abs() < 1e-17 && (c.b + 1.0 / 12.0).abs() < 1e-16);
    }

    #[test]
    fn h_derivative_matches_bundle_and_difference() {
        let c = lemma_coefficients();
        let h = h_and_derivative(1.0).unwrap();
        assert!(close(h.h, c.h1, 1e-12));
        assert!(close(h.h_prime, c.h1_prime, 1e-11));
        let e = 1e-5;
        let fd = (h_and_derivative(1.0 + e).unwrap().h - h_and_derivative(1.0 - e).unwrap().h) / (2.0 * e);
        assert!(close(fd, h.h_prime, 1e-8));
        assert!(h_and_derivative(0.4).is_err());
    }

    #[test]
    fn cutoff_independence() {
        for id in FactorId::ALL {
            let a = euler_product_with(id, 1e-12, 1_000).unwrap();
            let b = euler_product_with(id, 1e-12, 30_000).unwrap();
            assert!((a.value - b.value).abs() <= 1e-13 + a.tail_bound + b.tail_bound, "{id:?}");
        }
    }

    #[test]
    fn precision_floor() {
        assert!(euler_product(FactorId::C5, 1e-13).is_err());
    }

    #[test]
    fn q_helpers() {
        let c = lemma_coefficients();
        assert_eq!(q_at_1(1), c.q1_at_1);
        let r3 = 3.0 / 2.0;
        assert!(close(q_at_0_reg(3), c.q1_at_0_reg / (1.0 + r3), 1e-15));
        assert!(close(r_log_derivative_at_0(2), c.s_cal, 1e-15));
    }
}
