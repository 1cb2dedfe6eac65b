//! Compensated accumulation and fixed-chunk parallel maps.
//!
//! Chunk boundaries depend only on the problem size, never on the number of
//! worker threads, and partial results are always folded in ascending chunk
//! order. Results are therefore bitwise identical for any pool size.

use std::ops::Range;

use num::complex::Complex64;
use rayon::prelude::*;

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another accumulator in, keeping both compensation terms.
    pub fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for Neumaier {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        acc.extend(iter);
        acc
    }
}

/// Compensated sum in iteration order.
pub fn sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().collect::<Neumaier>().value()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub const fn new() -> Self {
        Self { re: Neumaier::new(), im: Neumaier::new() }
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Unevaluated sum of two doubles, roughly 32 significant digits.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        Self { hi: h, lo: l }
    }

    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        Self::renorm(s, e + self.lo + o.lo)
    }

    pub fn add_f64(self, x: f64) -> Self {
        let (s, e) = two_sum(self.hi, x);
        Self::renorm(s, e + self.lo)
    }

    pub fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn mul_f64(self, x: f64) -> Self {
        let (p, e) = two_prod(self.hi, x);
        Self::renorm(p, e + self.lo * x)
    }

    pub fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        Self::renorm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    pub fn div_f64(self, x: f64) -> Self {
        let q1 = self.hi / x;
        let r = self.sub(Self::from_f64(q1).mul_f64(x));
        let q2 = r.hi / x;
        let r2 = r.sub(Self::from_f64(q2).mul_f64(x));
        Self::renorm(q1, q2).add_f64(r2.hi / x)
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Splits `0..n` into consecutive ranges of length `chunk` (the last may be
/// shorter).
pub fn chunks(n: usize, chunk: usize) -> Vec<Range<usize>> {
    let chunk = chunk.max(1);
    (0..n.div_ceil(chunk))
        .map(|i| i * chunk..((i + 1) * chunk).min(n))
        .collect()
}

/// Applies `f` to every chunk of `0..n` in parallel and returns the results
/// in chunk order.
pub fn chunked_map<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    chunks(n, chunk).into_par_iter().map(f).collect()
}

/// Parallel compensated sum of `f(i)` over `0..n` with a fixed chunking.
pub fn chunked_sum<F>(n: usize, chunk: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let parts = chunked_map(n, chunk, |r| r.map(&f).collect::<Neumaier>());
    let mut acc = Neumaier::new();
    for p in &parts {
        acc.merge(p);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_small_terms() {
        let mut acc = Neumaier::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-12).abs() < 1e-20);
    }

    #[test]
    fn classic_cancellation() {
        assert_eq!(sum([1.0, 1e100, 1.0, -1e100]), 2.0);
    }

    #[test]
    fn double_double_keeps_low_bits() {
        let third = DoubleDouble::from_f64(1.0).div_f64(3.0);
        let back = third.mul_f64(3.0).sub(DoubleDouble::from_f64(1.0));
        assert!(back.value().abs() < 1e-30);
        let big = DoubleDouble::from_f64(1e16).add_f64(1.0).add_f64(-1e16);
        assert_eq!(big.value(), 1.0);
        let x = 1.0 + f64::EPSILON;
        let sq = DoubleDouble::from_f64(x).mul(DoubleDouble::from_f64(x));
        assert_eq!(sq.sub(DoubleDouble::from_f64(1.0)).value(), 2.0 * f64::EPSILON + f64::EPSILON * f64::EPSILON);
    }

    #[test]
    fn chunks_cover_range() {
        let c = chunks(10, 4);
        assert_eq!(c, vec![0..4, 4..8, 8..10]);
        assert!(chunks(0, 4).is_empty());
    }

    #[test]
    fn pool_size_does_not_change_bits() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| chunked_sum(100_003, 1000, f))
        };
        assert_eq!(run(1).to_bits(), run(4).to_bits());
    }
}
