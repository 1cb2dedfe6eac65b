use std::sync::OnceLock;

use num::{BigInt, One, Zero};

use crate::local::{to_f64, Rat};

/// Number of even-index coefficients kept for Euler–Maclaurin.
pub const EM_TERMS: usize = 80;

/// B_0..=B_n by the Akiyama–Tanigawa algorithm (B_1 = +1/2).
pub fn bernoulli(n: usize) -> Vec<Rat> {
    let mut a: Vec<Rat> = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(Rat::new(BigInt::one(), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            let diff = &a[j - 1] - &a[j];
            a[j - 1] = diff * Rat::from_integer(BigInt::from(j));
        }
        out.push(a[0].clone());
    }
    out
}

/// B_{2k}/(2k)! for k = 1..=EM_TERMS (index 0 holds k = 1).
pub fn em_coefficients() -> &'static [f64] {
    static C: OnceLock<Vec<f64>> = OnceLock::new();
    C.get_or_init(|| {
        let b = bernoulli(2 * EM_TERMS);
        let mut fact = Rat::one();
        let mut out = Vec::with_capacity(EM_TERMS);
        for n in 1..=2 * EM_TERMS {
            fact *= Rat::from_integer(BigInt::from(n));
            if n % 2 == 0 {
                out.push(if b[n].is_zero() { 0.0 } else { to_f64(&(&b[n] / &fact)) });
            }
        }
        out
    })
}

/// B_{2k}/(2k) for k = 1..=EM_TERMS, as used by the digamma expansion.
pub fn digamma_coefficients() -> &'static [f64] {
    static C: OnceLock<Vec<f64>> = OnceLock::new();
    C.get_or_init(|| {
        let b = bernoulli(2 * EM_TERMS);
        (1..=EM_TERMS)
            .map(|k| to_f64(&(&b[2 * k] / Rat::from_integer(BigInt::from(2 * k)))))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::rat;

    #[test]
    fn first_values() {
        let b = bernoulli(12);
        assert_eq!(b[0], rat(1, 1));
        assert_eq!(b[1], rat(1, 2));
        assert_eq!(b[2], rat(1, 6));
        assert!(b[3].is_zero());
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[10], rat(5, 66));
        assert_eq!(b[12], rat(-691, 2730));
    }

    #[test]
    fn em_coefficients_decay_like_two_pi() {
        let c = em_coefficients();
        assert!((c[0] - 1.0 / 12.0).abs() < 1e-17);
        assert!((c[1] + 1.0 / 720.0).abs() < 1e-18);
        let k = 40;
        let ratio = c[k].abs() / c[k - 1].abs();
        let want = 1.0 / (2.0 * std::f64::consts::PI).powi(2);
        assert!((ratio / want - 1.0).abs() < 1e-10);
    }
}
