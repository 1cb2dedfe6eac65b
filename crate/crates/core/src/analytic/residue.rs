//! Residues at s = 0 of the principal-character integrands.

use super::series::{Form, SeriesFactorization, SeriesId};
use super::special::digamma;
use super::C64;
use crate::arith;
use crate::constants::{lemma_coefficients, q_at_0_reg, r_log_derivative_at_0};
use crate::error::{Error, Result};

/// C*_Δ(X) for d = 1, C**_{d,Δ} for d prime.
pub fn residue_terms(d: u64, delta: u64, x: f64) -> Result<f64> {
    if !arith::is_squarefree(delta) || delta == 0 {
        return Err(Error::Range(format!("Δ = {delta} is not squarefree")));
    }
    if arith::gcd(d, delta) != 1 {
        return Err(Error::Range(format!("gcd(d = {d}, Δ = {delta}) > 1")));
    }
    if !(x > 1.0) {
        return Err(Error::Range(format!("X = {x} must exceed 1")));
    }
    let c = lemma_coefficients();
    if d == 1 {
        let lead = c.zeta_0 * q_at_0_reg(delta) / 24.0;
        Ok(lead * (c.zeta_prime_0 / c.zeta_0 + r_log_derivative_at_0(delta) - digamma(5.0) + x.ln() + 1.0))
    } else if arith::is_prime(d) {
        Ok(c.zeta_0 * (d as f64).ln() * q_at_0_reg(d * delta) / 24.0)
    } else {
        Err(Error::Unsupported(format!("residue terms need d = 1 or prime, got {d}")))
    }
}

/// Residue at 0 of 𝒢_Δ^{χ₀(d)}(s)X^s/(s(s+2)(s+3)(s+4)) by the trapezoid
/// rule on a circle of the given radius.
pub fn residue_by_contour(d: u64, delta: u64, x: f64, radius: f64, points: usize) -> Result<f64> {
    let g = SeriesFactorization::new(SeriesId::G { d, delta }, Form::Accelerated, 100_000)?;
    let lx = x.ln();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..points {
        let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / points as f64;
        let s = C64::from_polar(radius, th);
        let f = g.eval(s)?.value * (s * lx).exp() / (s * (s + 2.0) * (s + 3.0) * (s + 4.0));
        acc += f * s;
    }
    Ok(acc.re / points as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_in_log_x() {
        let c = lemma_coefficients();
        for delta in [1, 2, 3, 5] {
            let a = residue_terms(1, delta, 10.0).unwrap();
            let b = residue_terms(1, delta, 1000.0).unwrap();
            let slope = c.zeta_0 * q_at_0_reg(delta) / 24.0;
            assert!((b - a - slope * 100f64.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn prime_d_value() {
        let c = lemma_coefficients();
        let want = -0.5 * 2f64.ln() * q_at_0_reg(2) / 24.0;
        assert!((residue_terms(2, 1, 7.0).unwrap() - want).abs() < 1e-16);
        assert!((c.zeta_0 + 0.5).abs() < 1e-15);
        assert!(residue_terms(6, 1, 7.0).is_err());
        assert!(residue_terms(3, 3, 7.0).is_err());
    }

    #[test]
    fn matches_contour_residue() {
        for (d, delta) in [(1, 1), (1, 2), (1, 3), (2, 1), (3, 1), (5, 2)] {
            let want = residue_by_contour(d, delta, 50.0, 0.3, 96).unwrap();
            let got = residue_terms(d, delta, 50.0).unwrap();
            assert!((got - want).abs() < 1e-8, "d={d} Δ={delta}: {got} vs {want}");
        }
    }
}
