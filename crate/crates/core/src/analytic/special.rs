use super::bernoulli::digamma_coefficients;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Digamma ψ(x) for real x > 0.
pub fn digamma(mut x: f64) -> f64 {
    assert!(x > 0.0, "digamma needs x > 0");
    let mut shift = 0.0;
    while x < 20.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let c = digamma_coefficients();
    let inv2 = 1.0 / (x * x);
    let mut pow = inv2;
    let mut tail = 0.0;
    for ck in c.iter().take(12) {
        tail += ck * pow;
        pow *= inv2;
    }
    shift + x.ln() - 0.5 / x - tail
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digamma_values() {
        assert!((digamma(1.0) + EULER_GAMMA).abs() < 1e-15);
        assert!((digamma(5.0) - (25.0 / 12.0 - EULER_GAMMA)).abs() < 1e-15);
        assert!((digamma(0.5) + EULER_GAMMA + 2.0 * 2f64.ln()).abs() < 1e-14);
    }
}
