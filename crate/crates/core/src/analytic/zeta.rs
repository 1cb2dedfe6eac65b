//! Riemann zeta by Euler–Maclaurin summation, valid without reflection on
//! the strip used here (σ ≥ −1, |t| ≤ 10⁴).

use num::complex::Complex64 as C64;

use super::bernoulli::{em_coefficients, EM_TERMS};
use crate::error::{Error, Result};
use crate::sum::ComplexNeumaier;

pub const SIGMA_MIN: f64 = -1.0;
pub const T_MAX: f64 = 1.0e4;

/// Accuracy contract of the evaluator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaEvaluator {
    /// Absolute error bound where |ζ| ≤ 1, relative bound elsewhere.
    pub target_abs_error: f64,
}

impl Default for ZetaEvaluator {
    fn default() -> Self {
        Self { target_abs_error: 1e-10 }
    }
}

impl ZetaEvaluator {
    pub fn eval(&self, s: C64) -> Result<C64> {
        zeta(s)
    }
}

fn cutoff(s: C64) -> usize {
    10 + (s.norm() / std::f64::consts::PI).ceil() as usize
}

fn check_domain(s: C64) -> Result<()> {
    if s == C64::new(1.0, 0.0) {
        return Err(Error::Domain("pole of zeta at s = 1".into()));
    }
    if !(s.re >= SIGMA_MIN) || !(s.im.abs() <= T_MAX) {
        return Err(Error::Domain(format!("zeta evaluated at {s} outside σ ≥ −1, |t| ≤ 1e4")));
    }
    Ok(())
}

pub fn zeta(s: C64) -> Result<C64> {
    check_domain(s)?;
    Ok(zeta_unchecked(s))
}

/// ζ(s) without the strip check; s must not be 1.
pub fn zeta_unchecked(s: C64) -> C64 {
    em_sum(s, true)
}

fn em_sum(s: C64, with_one: bool) -> C64 {
    let n = cutoff(s);
    let mut acc = ComplexNeumaier::new();
    if with_one {
        acc.add(C64::new(1.0, 0.0));
    }
    for k in 2..n {
        acc.add((-s * (k as f64).ln()).exp());
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_neg_s = (-s * ln_n).exp();
    acc.add(n_neg_s * nf / (s - 1.0));
    acc.add(n_neg_s * 0.5);
    let c = em_coefficients();
    let mut poch = s;
    let mut pow = n_neg_s / nf;
    let inv_n2 = 1.0 / (nf * nf);
    for k in 1..=EM_TERMS {
        let term = poch * pow * c[k - 1];
        acc.add(term);
        if term.norm() < 1e-18 * acc.value().norm() && k > 2 {
            break;
        }
        let m = 2.0 * k as f64;
        poch *= (s + (m - 1.0)) * (s + m);
        pow *= inv_n2;
    }
    acc.value()
}

/// (ζ(s), ζ′(s)).
pub fn zeta_with_derivative(s: C64) -> Result<(C64, C64)> {
    check_domain(s)?;
    let n = cutoff(s);
    let (mut z, mut dz) = (ComplexNeumaier::new(), ComplexNeumaier::new());
    z.add(C64::new(1.0, 0.0));
    for k in 2..n {
        let l = (k as f64).ln();
        let t = (-s * l).exp();
        z.add(t);
        dz.add(-t * l);
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_neg_s = (-s * ln_n).exp();
    let a = n_neg_s * nf;
    z.add(a / (s - 1.0));
    dz.add(-a * ln_n / (s - 1.0) - a / ((s - 1.0) * (s - 1.0)));
    z.add(n_neg_s * 0.5);
    dz.add(-n_neg_s * ln_n * 0.5);
    let c = em_coefficients();
    let mut poch = s;
    let mut dpoch = C64::new(1.0, 0.0);
    let mut pow = n_neg_s / nf;
    let inv_n2 = 1.0 / (nf * nf);
    for k in 1..=EM_TERMS {
        let term = poch * pow * c[k - 1];
        let dterm = (dpoch - poch * ln_n) * pow * c[k - 1];
        z.add(term);
        dz.add(dterm);
        if term.norm() + dterm.norm() < 1e-18 * (z.value().norm() + dz.value().norm()) && k > 2 {
            break;
        }
        let m = 2.0 * k as f64;
        let (f1, f2) = (s + (m - 1.0), s + m);
        dpoch = dpoch * f1 * f2 + poch * (f1 + f2);
        poch *= f1 * f2;
        pow *= inv_n2;
    }
    Ok((z.value(), dz.value()))
}

pub fn zeta_real(x: f64) -> f64 {
    zeta_unchecked(C64::new(x, 0.0)).re
}

/// ζ(x) − 1 for real x > 1, accurate relative to ζ(x) − 1 itself.
pub fn zeta_minus_one(x: f64) -> f64 {
    em_sum(C64::new(x, 0.0), false).re
}

/// ζ′(x)/ζ(x) for real x ≠ 1.
pub fn log_derivative_real(x: f64) -> f64 {
    let (z, dz) = zeta_with_derivative(C64::new(x, 0.0)).expect("real argument in domain");
    dz.re / z.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn classical_values() {
        assert!((zeta(C64::new(2.0, 0.0)).unwrap().re - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(C64::new(0.0, 0.0)).unwrap().re + 0.5).abs() < 1e-15);
        let z = zeta(C64::new(-1.0, 0.0)).unwrap().re;
        assert!((z + 1.0 / 12.0).abs() < 1e-14, "{z:e}");
        assert!((zeta(C64::new(4.0, 0.0)).unwrap().re - PI.powi(4) / 90.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_at_zero() {
        let (z, dz) = zeta_with_derivative(C64::new(0.0, 0.0)).unwrap();
        assert!((z.re + 0.5).abs() < 1e-15);
        assert!((dz.re + 0.5 * (2.0 * PI).ln()).abs() < 1e-14);
        assert!((log_derivative_real(0.0) - (2.0 * PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = C64::new(-0.3, 37.0);
        let h = 1e-5;
        let (_, d) = zeta_with_derivative(s).unwrap();
        let fd = (zeta(s + h).unwrap() - zeta(s - h).unwrap()) / (2.0 * h);
        assert!((d - fd).norm() < 1e-7 * d.norm());
    }

    #[test]
    fn domain_errors() {
        assert!(zeta(C64::new(1.0, 0.0)).is_err());
        assert!(zeta(C64::new(-2.0, 1.0)).is_err());
        assert!(zeta(C64::new(0.5, 2e4)).is_err());
    }

    #[test]
    fn zeta_minus_one_small_values() {
        assert!((zeta_minus_one(2.0) - (PI * PI / 6.0 - 1.0)).abs() < 1e-15);
        let k = 50.0;
        let direct = 2f64.powf(-k) + 3f64.powf(-k);
        assert!((zeta_minus_one(k) / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn near_first_zero() {
        let z = zeta(C64::new(0.5, 14.134725141734693)).unwrap();
        assert!(z.norm() < 1e-12);
    }
}
