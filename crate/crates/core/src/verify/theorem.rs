//! Prime-side diagnostics: the variance main terms, the cube decomposition
//! with those main terms substituted, the normalized size of M(Q), and the
//! numeric 𝒞-transfer of the lattice sum.

use serde::{Deserialize, Serialize};

use super::mainterms::TheoremAssembly;
use crate::analytic::c_operator::c_operator;
use crate::analytic::integrals::{F1Reading, IntegralId, LineIntegralSpec, PreparedIntegral};
use crate::constants::lemma_coefficients;
use crate::error::{Error, Result};
use crate::lattice::LatticeTable;
use crate::moments::{moment_summary, MomentConfig};
use crate::sieve::PrimeLogTable;

/// x ≤ 10⁷ for the prime side.
pub const PRIME_BUDGET: f64 = 1e7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremRow {
    pub x: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub v_emp: f64,
    /// F(Q) − F(P) with F(t) = tx log t − (C₂+1)tx + 2t²I(x/t).
    pub v_main: f64,
    pub v_ratio: f64,
    pub u_emp: f64,
    /// Z log(Q/P).
    pub u_main: f64,
    pub m_emp: f64,
    pub s1_emp: f64,
    /// S₁ − 3x(F(Q) − F(P)) − 3x²E_x(1,0)U − x³U.
    pub m_rhs: f64,
    /// S₁ − 3xF(Q) − 3Zx³log(Q/P), P-terms dropped.
    pub m_rhs_literal: f64,
    /// |M|/(Q³(x/Q)^{3/2}).
    pub ratio_3_2: f64,
    /// |M|/(Q³(x/Q)^{7/5}).
    pub ratio_7_5: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub x: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    /// P²𝒞_{𝒥*}(x/P) − Q²𝒞_{𝒥*}(x/Q), exact piecewise integration.
    pub lhs: f64,
    /// The same through numeric quadrature of 𝒥*.
    pub lhs_quadrature: f64,
    pub a_of_q: f64,
    pub e_of_q: f64,
    /// C₈(𝒜(Q) + ℰ(Q)).
    pub rhs: f64,
    /// |lhs − rhs|/(Q²(x/Q)^{7/5}).
    pub scaled_gap: f64,
    /// |lhs − rhs|/|lhs|.
    pub rel_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub rows: Vec<TheoremRow>,
    pub transfer: Vec<TransferRow>,
    /// ratio_3_2 strictly decreasing along the x grid.
    pub ratio_3_2_decreasing: bool,
}

/// Q = x/(log x)², P = Q/2.
pub fn default_range(x: f64) -> (f64, f64) {
    let l = x.ln();
    let q = x / (l * l);
    (q / 2.0, q)
}

struct VarianceMain {
    i: PreparedIntegral,
    c2: f64,
}

impl VarianceMain {
    fn new() -> Result<Self> {
        let i = PreparedIntegral::prepare(LineIntegralSpec::new(IntegralId::I { reading: F1Reading::ZetaTimesU }))?;
        Ok(Self { i, c2: lemma_coefficients().c2 })
    }

    /// tx log t − (C₂+1)tx + 2t²I(x/t).
    fn f(&self, x: f64, t: f64) -> Result<f64> {
        Ok(t * x * t.ln() - (self.c2 + 1.0) * t * x + 2.0 * t * t * self.i.at(x / t)?.value)
    }
}

fn theorem_row(table: &PrimeLogTable, vm: &VarianceMain, x: f64, p: f64, q: f64) -> Result<TheoremRow> {
    let c = lemma_coefficients();
    let cfg = MomentConfig::new(x, p, q);
    cfg.validate()?;
    let rep = moment_summary(table, &cfg, false)?;
    let (fq, fp) = if p < q { (vm.f(x, q)?, vm.f(x, p)?) } else { (0.0, 0.0) };
    let v_main = fq - fp;
    let e10 = table.chebyshev_theta(x)? - x;
    let m_rhs = rep.s1 - 3.0 * x * v_main - 3.0 * x * x * e10 * rep.u - x.powi(3) * rep.u;
    let m_rhs_literal = rep.s1 - 3.0 * x * fq - 3.0 * c.z_prod * x.powi(3) * (q / p).ln();
    let big_x = x / q;
    let q3 = q.powi(3);
    Ok(TheoremRow {
        x,
        p,
        q,
        v_emp: rep.v,
        v_main,
        v_ratio: if v_main != 0.0 { rep.v / v_main } else { f64::NAN },
        u_emp: rep.u,
        u_main: c.z_prod * (q / p).ln(),
        m_emp: rep.m,
        s1_emp: rep.s1,
        m_rhs,
        m_rhs_literal,
        ratio_3_2: rep.m.abs() / (q3 * big_x.powf(1.5)),
        ratio_7_5: rep.m.abs() / (q3 * big_x.powf(1.4)),
    })
}

fn transfer_row(
    lattice: &LatticeTable,
    e_star: &PreparedIntegral,
    x: f64,
    p: f64,
    q: f64,
) -> Result<TransferRow> {
    let asm = TheoremAssembly::default();
    let c8 = lemma_coefficients().c8;
    let exact = |t: f64| lattice.c_transform_jstar(t);
    let f = |t: f64| if t < 2.0 { 0.0 } else { lattice.jstar(t).map(|r| r.value).unwrap_or(f64::NAN) };
    let quad = |t: f64| c_operator(f, 2.0, t, 1e-9 * t.powi(3));
    let lhs = p * p * exact(x / p)? - q * q * exact(x / q)?;
    let lhs_quadrature = p * p * quad(x / p)? - q * q * quad(x / q)?;
    let a_of_q = asm.a_of_q(x, p, q);
    let e_of_q = asm.e_of_q(|t| Ok(e_star.at(t)?.value), x, p, q)?;
    let rhs = c8 * (a_of_q + e_of_q);
    let gap = (lhs - rhs).abs();
    Ok(TransferRow {
        x,
        p,
        q,
        lhs,
        lhs_quadrature,
        a_of_q,
        e_of_q,
        rhs,
        scaled_gap: gap / (q * q * (x / q).powf(1.4)),
        rel_gap: gap / lhs.abs(),
    })
}

/// Runs the diagnostics at each x with P, Q from [`default_range`].
pub fn theorem_pipeline(table: &PrimeLogTable, xs: &[f64]) -> Result<TheoremReport> {
    if let Some(&x) = xs.iter().find(|&&x| x > PRIME_BUDGET || x > table.x_max() as f64) {
        return Err(Error::Budget(format!("x = {x} exceeds the prime table or the 1e7 budget")));
    }
    let vm = VarianceMain::new()?;
    let e_star = PreparedIntegral::prepare(LineIntegralSpec::new(IntegralId::EStar))?;
    let ranges: Vec<(f64, f64, f64)> = xs
        .iter()
        .map(|&x| {
            let (p, q) = default_range(x);
            (x, p, q)
        })
        .collect();
    let top = ranges.iter().map(|&(x, p, _)| x / p).fold(2.0, f64::max);
    let lattice = LatticeTable::build(top.ceil() + 1.0)?;
    let rows = ranges.iter().map(|&(x, p, q)| theorem_row(table, &vm, x, p, q)).collect::<Result<Vec<_>>>()?;
    let transfer = ranges
        .iter()
        .map(|&(x, p, q)| transfer_row(&lattice, &e_star, x, p, q))
        .collect::<Result<Vec<_>>>()?;
    let ratio_3_2_decreasing = rows.windows(2).all(|w| w[1].ratio_3_2 < w[0].ratio_3_2);
    Ok(TheoremReport { rows, transfer, ratio_3_2_decreasing })
}

/// One row at explicit (x, P, Q).
pub fn theorem_row_at(table: &PrimeLogTable, x: f64, p: f64, q: f64) -> Result<TheoremRow> {
    theorem_row(table, &VarianceMain::new()?, x, p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::enumerate_primes;

    #[test]
    fn empty_range_is_zero() {
        let table = enumerate_primes(10_000).unwrap();
        let row = theorem_row_at(&table, 1e4, 50.0, 50.0).unwrap();
        assert_eq!((row.v_emp, row.m_emp, row.s1_emp, row.u_emp, row.v_main), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn default_range_values() {
        let (p, q) = default_range(1e6);
        assert!((q - 1e6 / 13.815510557964274f64.powi(2)).abs() < 1e-6);
        assert_eq!(p, q / 2.0);
    }
}
