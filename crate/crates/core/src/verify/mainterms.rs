//! Closed-form main terms: M(X), the per-(d, Δ) terms M_{d,Δ}(X), the
//! leading 𝒦_d coefficient and the theorem-scale assembly.

use serde::{Deserialize, Serialize};

use crate::analytic::series::{Form, SeriesFactorization, SeriesId};
use crate::analytic::C64;
use crate::arith;
use crate::constants::{lemma_coefficients, q_at_0_reg, q_at_1, r_log_derivative_at_0};
use crate::error::{Error, Result};
use crate::local::LocalF64;
use crate::sieve::primes_upto;

/// α, β, γ and C₈ of the lemma main term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaMainTerm {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c8: f64,
}

impl Default for LemmaMainTerm {
    fn default() -> Self {
        let c = lemma_coefficients();
        Self { alpha: c.alpha, beta: c.beta, gamma: c.gamma, c8: c.c8 }
    }
}

impl LemmaMainTerm {
    /// αX⁵ + βX⁴log X + γX⁴.
    pub fn m(&self, x: f64) -> f64 {
        x.powi(4) * (self.alpha * x + self.beta * x.ln() + self.gamma)
    }

    /// 𝒞_M(X) = 10αX³ + 6βX²log²X + (12γ − 5β)X²log X + (6β − 5γ)X².
    pub fn c_m(&self, x: f64) -> f64 {
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        let l = x.ln();
        10.0 * a * x.powi(3) + x * x * (6.0 * b * l * l + (12.0 * g - 5.0 * b) * l + 6.0 * b - 5.0 * g)
    }
}

/// Coefficients of 𝒞_M with the X² term dropped, and the P/Q-difference
/// evaluators built on them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremAssembly {
    /// 𝒰(1)/3.
    pub a_coef: f64,
    /// −𝒰(0)/2 with 𝒰 regularized at 0.
    pub b_coef: f64,
    /// 𝒰(0)(1 − C₂).
    pub c_coef: f64,
    pub c2: f64,
}

impl Default for TheoremAssembly {
    fn default() -> Self {
        let c = lemma_coefficients();
        Self { a_coef: c.u1 / 3.0, b_coef: -c.u0_reg / 2.0, c_coef: c.u0_reg * (1.0 - c.c2), c2: c.c2 }
    }
}

impl TheoremAssembly {
    /// M*(X) = AX³ + BX²log²X + CX²log X.
    pub fn m_star(&self, x: f64) -> f64 {
        let l = x.ln();
        x * x * (self.a_coef * x + self.b_coef * l * l + self.c_coef * l)
    }

    /// M**(Q) = A(x/P − x/Q) + C₂log(P/Q) + B(log²P − log²Q).
    pub fn m_star_star(&self, x: f64, p: f64, q: f64) -> f64 {
        let (lp, lq) = (p.ln(), q.ln());
        self.a_coef * (x / p - x / q) + self.c2 * (lp - lq) + self.b_coef * (lp * lp - lq * lq)
    }

    /// 𝒜(Q) = P²M*(x/P) − Q²M*(x/Q).
    pub fn a_of_q(&self, x: f64, p: f64, q: f64) -> f64 {
        p * p * self.m_star(x / p) - q * q * self.m_star(x / q)
    }

    /// ℰ(Q) = P²E*(x/P) − Q²E*(x/Q), E* supplied by the caller.
    pub fn e_of_q<F: Fn(f64) -> Result<f64>>(&self, e_star: F, x: f64, p: f64, q: f64) -> Result<f64> {
        Ok(p * p * e_star(x / p)? - q * q * e_star(x / q)?)
    }
}

fn gamma_delta(n: u64, delta: u64) -> f64 {
    arith::trial_factor(n)
        .iter()
        .filter(|&&(p, _)| delta % p != 0)
        .map(|&(p, _)| LocalF64::new(p).gamma)
        .product()
}

fn check_pair(d: u64, delta: u64) -> Result<()> {
    if d == 0 || delta == 0 || !arith::is_squarefree(d) || !arith::is_squarefree(delta) {
        return Err(Error::Range(format!("d = {d} and Δ = {delta} must be squarefree")));
    }
    if arith::gcd(d, delta) != 1 {
        return Err(Error::Range(format!("gcd(d = {d}, Δ = {delta}) > 1")));
    }
    Ok(())
}

/// Principal-character main term M_{d,Δ}(X) = AX⁵ + B(log(X/d) + Z_{dΔ})X⁴ + B*X⁴.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodMainTerm {
    pub d: u64,
    pub delta: u64,
    pub a: f64,
    pub b: f64,
    pub b_star: f64,
    pub z: f64,
}

impl MethodMainTerm {
    pub fn new(d: u64, delta: u64) -> Result<Self> {
        check_pair(d, delta)?;
        let c = lemma_coefficients();
        let n = d * delta;
        let q1 = q_at_1(n);
        let q0 = q_at_0_reg(n);
        let mut inner = 0.0;
        for e in arith::divisors_from(&arith::trial_factor(d)) {
            let m = d / e;
            let phi_m = arith::phi(m) as f64;
            inner += gamma_delta(e, delta).powi(2) * phi_m / ((m * m) as f64 * (e * e) as f64);
        }
        let a = c.a * q1 * q1 * inner;
        let b = c.c / d as f64 * q1 * q0 * gamma_delta(d, delta).powi(2);
        let log_sum: f64 = arith::trial_factor(d)
            .iter()
            .map(|&(p, _)| (p as f64).ln() / gamma_delta(p, delta).powi(2))
            .sum();
        let z = r_log_derivative_at_0(n) + c.z_bc;
        Ok(Self { d, delta, a, b, b_star: b * log_sum, z })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x4 = x.powi(4);
        self.a * x4 * x + self.b * ((x / self.d as f64).ln() + self.z) * x4 + self.b_star * x4
    }
}

/// 𝒦_d(1) with the ζ(s) pole removed: K_Δ(d)/d · ∏_{p∤dΔ}(1 + r²U(p)/p²),
/// as an explicit product to `p_max`; the omitted factors are 1 + O(p⁻⁴).
pub fn k_d_at_1_product(d: u64, delta: u64, p_max: u64) -> Result<f64> {
    check_pair(d, delta)?;
    let k_d: f64 = arith::trial_factor(d)
        .iter()
        .map(|&(p, _)| LocalF64::new(p).k)
        .product();
    let mut log_prod = 0.0;
    for p in primes_upto(p_max) {
        if (d * delta) % p == 0 {
            continue;
        }
        log_prod += ((LocalF64::new(p).k - 1.0) / p as f64).ln_1p();
    }
    Ok(k_d / d as f64 * log_prod.exp())
}

/// 𝒦_d(1) with the ζ(s) pole removed, from the series evaluator.
pub fn k_d_at_1_series(d: u64, delta: u64) -> Result<f64> {
    let k = SeriesFactorization::new(SeriesId::K { d, delta }, Form::Plain, 100_000)?;
    Ok(k.eval_at_pole(C64::new(1.0, 0.0))?.value.re)
}

/// Leading coefficient C₈U(Δ)𝒦_d(1)/30 of the second method.
pub fn method2_leading(d: u64, delta: u64) -> Result<f64> {
    let u: f64 = arith::trial_factor(delta).iter().map(|&(p, _)| LocalF64::new(p).u).product();
    Ok(lemma_coefficients().c8 * u * k_d_at_1_product(d, delta, 1_000_000)? / 30.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_m_collapse_of_m() {
        // 𝒞 applied to M(X) termwise.
        let m = LemmaMainTerm::default();
        let x: f64 = 37.5;
        let l = x.ln();
        let want = m.alpha * 10.0 * x.powi(3)
            + m.beta * x * x * (6.0 * l * l - 5.0 * l + 6.0)
            + m.gamma * x * x * (12.0 * l - 5.0);
        assert!((m.c_m(x) - want).abs() < 1e-10 * want.abs());
    }

    #[test]
    fn assembly_matches_c_m() {
        // Up to the dropped X² term, C₈-free 𝒞_M equals M*.
        let m = LemmaMainTerm::default();
        let t = TheoremAssembly::default();
        let c6 = 6.0 * m.beta - 5.0 * m.gamma;
        for x in [10.0f64, 200.0, 5000.0] {
            let want = m.c_m(x) - c6 * x * x;
            assert!((t.m_star(x) - want).abs() < 1e-9 * want.abs(), "{x}");
        }
        assert!((2.0 * t.b_coef + 1.0).abs() < 1e-12);
        assert!((t.a_of_q(1e5, 300.0, 300.0)).abs() == 0.0);
    }

    #[test]
    fn k_d_closed_matches_series() {
        for (d, delta) in [(1, 1), (2, 1), (3, 1), (5, 1), (1, 2), (1, 3), (5, 2)] {
            let a = k_d_at_1_product(d, delta, 1_000_000).unwrap();
            let b = k_d_at_1_series(d, delta).unwrap();
            assert!((a - b).abs() < 1e-6 * a, "d={d} Δ={delta}: {a} vs {b}");
        }
    }

    #[test]
    fn d1_main_term_uses_lemma_constants() {
        let c = lemma_coefficients();
        let t = MethodMainTerm::new(1, 1).unwrap();
        assert!((t.a - c.a * c.q1_at_1 * c.q1_at_1).abs() < 1e-15);
        assert_eq!(t.b_star, 0.0);
        assert!(MethodMainTerm::new(2, 2).is_err());
    }
}
