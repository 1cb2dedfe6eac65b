//! 𝒞_f(X) = f(X)/X² − 6X∫_0^X f(t)t^{-4}dt + 12X²∫_0^X f(t)t^{-5}dt.

use super::quad::adaptive;
use super::C64;
use crate::error::{Error, Result};

/// 𝒞 applied to t^{s+4} over (0, X]: X^{s+2} times this factor.
pub fn c_operator_monomial(s: C64) -> Result<C64> {
    if s.norm() == 0.0 || (s + 1.0).norm() == 0.0 {
        return Err(Error::Domain("monomial factor has poles at s = 0, −1".into()));
    }
    Ok((s + 3.0) * (s + 4.0) / (s * (s + 1.0)))
}

/// 𝒞 applied to t^{s+4}·1_{t≥t₀}, minus X^{s+2} times the monomial factor.
pub fn c_operator_boundary(s: C64, t0: f64, x: f64) -> C64 {
    let lt = t0.ln();
    6.0 * x * (lt * (s + 1.0)).exp() / (s + 1.0) - 12.0 * x * x * (lt * s).exp() / s
}

/// Numeric 𝒞 for f vanishing on (0, t₀).
pub fn c_operator<F: Fn(f64) -> f64>(f: F, t0: f64, x: f64, tol: f64) -> Result<f64> {
    if !(t0 > 0.0) {
        return Err(Error::Domain("t₀ must be positive".into()));
    }
    if f(0.5 * t0) != 0.0 {
        return Err(Error::Domain("f does not vanish below t₀; the integrals diverge".into()));
    }
    if x <= t0 {
        return Ok(f(x) / (x * x));
    }
    let (i4, _) = adaptive(&|t: f64| f(t) / t.powi(4), t0, x, tol / x)?;
    let (i5, _) = adaptive(&|t: f64| f(t) / t.powi(5), t0, x, tol / (x * x))?;
    Ok(f(x) / (x * x) - 6.0 * x * i4 + 12.0 * x * x * i5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_at_one() {
        let m = c_operator_monomial(C64::new(1.0, 0.0)).unwrap();
        assert!((m.re - 10.0).abs() < 1e-15 && m.im == 0.0);
        assert!(c_operator_monomial(C64::new(-1.0, 0.0)).is_err());
    }

    #[test]
    fn fifth_power() {
        let t0 = 1e-3;
        let x = 7.0;
        let v = c_operator(|t| if t >= t0 { t.powi(5) } else { 0.0 }, t0, x, 1e-10).unwrap();
        let s = C64::new(1.0, 0.0);
        let want = 10.0 * x.powi(3) + c_operator_boundary(s, t0, x).re;
        assert!((v - want).abs() < 1e-8 * want.abs(), "{v} {want}");
        let small = c_operator(|t| if t >= 1e-6 { t.powi(5) } else { 0.0 }, 1e-6, x, 1e-10).unwrap();
        assert!((small - 10.0 * x.powi(3)).abs() < 1e-5 * x.powi(3));
    }

    #[test]
    fn complex_monomial_with_boundary() {
        let s = C64::new(-0.4, 3.0);
        let (t0, x) = (2.0f64, 50.0f64);
        let lx = x.ln();
        let re = c_operator(|t: f64| if t >= t0 { (C64::new(t.ln(), 0.0) * (s + 4.0)).exp().re } else { 0.0 }, t0, x, 1e-9)
            .unwrap();
        let want = (lx * (s + 2.0)).exp() * c_operator_monomial(s).unwrap() + c_operator_boundary(s, t0, x);
        assert!((re - want.re).abs() < 1e-7 * want.norm(), "{re} {want}");
    }

    #[test]
    fn zero_function() {
        assert_eq!(c_operator(|_| 0.0, 1.0, 10.0, 1e-12).unwrap(), 0.0);
        assert!(c_operator(|t| t, 1.0, 10.0, 1e-12).is_err());
    }
}
