//! Dirichlet series written as a product of shifted zeta factors times an
//! absolutely convergent Euler product.

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use super::zeta::zeta_unchecked;
use super::C64;
use crate::arith::{self, Spf};
use crate::error::{Error, Result};
use crate::local::{int, to_f64, LocalFactorSet, Rat};
use crate::sieve::primes_upto;
use crate::sum::chunked_map;

/// ζ(scale·s + shift)^exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZetaFactor {
    pub scale: u32,
    pub shift: i32,
    pub exponent: i32,
}

const fn zf(scale: u32, shift: i32, exponent: i32) -> ZetaFactor {
    ZetaFactor { scale, shift, exponent }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesId {
    /// Σ ψ₁(n) n^{-s}.
    F,
    /// 𝓕(s)/ζ(s).
    H,
    /// Σ n/φ(n) n^{-s}.
    F1,
    /// Σ μ²(n)/φ(n) n^{-s}.
    U,
    /// Σ over squarefree m coprime to n of ∏_{p|m} r(p) m^{-s}.
    Q { n: u64 },
    /// Σ_{d|m} K_Δ(m) m^{-s}; d squarefree and coprime to Δ.
    K { d: u64, delta: u64 },
    /// ∏_{p∤Δ} V_s(p), carried with its constant C₈U(Δ) split off.
    V { delta: u64 },
    /// Σ Γ_Δ(m) χ₀(m) m^{-s} with χ₀ principal modulo d.
    G { d: u64, delta: u64 },
    /// ζ(s)∏_{p|q}(1 − p^{-s}).
    L { q: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Plain,
    Accelerated,
}

/// Exact local remainder N(Y)/D(Y), Y = p^{-s}, with D(0) = 1.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalRatFn {
    pub num: Vec<Rat>,
    pub den: Vec<Rat>,
}

impl LocalRatFn {
    fn poly(num: Vec<Rat>) -> Self {
        Self { num, den: vec![Rat::one()] }
    }

    /// Power-series coefficients of N/D up to Y^k_max.
    pub fn expand(&self, k_max: usize) -> Vec<Rat> {
        let mut c: Vec<Rat> = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let mut v = self.num.get(k).cloned().unwrap_or_else(Rat::zero);
            for j in 1..self.den.len().min(k + 1) {
                v -= &self.den[j] * &c[k - j];
            }
            c.push(v);
        }
        c
    }
}

fn mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn lin(c0: i64, c1: Rat) -> Vec<Rat> {
    vec![Rat::from_integer(c0.into()), c1]
}

#[derive(Clone, Debug)]
struct PrimeLocal {
    p: u64,
    logp: f64,
    num: Vec<f64>,
    den: Vec<f64>,
}

impl PrimeLocal {
    fn eval(&self, s: C64) -> C64 {
        let y = (-s * self.logp).exp();
        horner(&self.num, y) / horner(&self.den, y)
    }
}

fn horner(c: &[f64], y: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &v in c.iter().rev() {
        acc = acc * y + v;
    }
    acc
}

/// Value of a series together with an absolute bound on the Euler-product
/// truncation error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: C64,
    pub tail_bound: f64,
}

#[derive(Clone, Debug)]
pub struct SeriesFactorization {
    pub id: SeriesId,
    pub form: Form,
    pub zeta_factors: Vec<ZetaFactor>,
    /// The remainder converges absolutely for σ > validity_sigma.
    pub validity_sigma: f64,
    pub prime_cutoff: u64,
    /// Constant multiplying the whole product.
    pub prefactor: f64,
    /// Pairs (m, k): the Y^k remainder coefficient is O(p^{-m}) for large p.
    decay: Vec<(f64, f64)>,
    locals: Vec<PrimeLocal>,
}

pub const DEFAULT_PRIME_CUTOFF: u64 = 10_000;

fn squarefree_coprime(d: u64, delta: u64) -> Result<()> {
    if d == 0 || delta == 0 || !arith::is_squarefree(d) || !arith::is_squarefree(delta) {
        return Err(Error::Range(format!("need squarefree d = {d}, Δ = {delta}")));
    }
    if arith::gcd(d, delta) != 1 {
        return Err(Error::Range(format!("gcd(d = {d}, Δ = {delta}) > 1")));
    }
    Ok(())
}

impl SeriesFactorization {
    pub fn new(id: SeriesId, form: Form, prime_cutoff: u64) -> Result<Self> {
        match id {
            SeriesId::K { d, delta } | SeriesId::G { d, delta } => squarefree_coprime(d, delta)?,
            SeriesId::V { delta } => squarefree_coprime(1, delta)?,
            SeriesId::Q { n } if n == 0 || !arith::is_squarefree(n) => {
                return Err(Error::Range(format!("need squarefree n = {n}")))
            }
            SeriesId::L { q } if q == 0 => return Err(Error::Range("q must be positive".into())),
            _ => {}
        }
        let accel = form == Form::Accelerated && Self::has_accelerated(id);
        let form = if accel { Form::Accelerated } else { Form::Plain };
        let accel_factors = [zf(1, 2, 1), zf(1, 2, 1), zf(2, 2, -1)];
        let (mut zeta_factors, decay, validity_sigma): (Vec<ZetaFactor>, Vec<(f64, f64)>, f64) =
            match id {
                SeriesId::F => (vec![zf(1, 0, 1), zf(1, 1, 1)], vec![(2.0, 1.0), (2.0, 2.0)], -0.5),
                SeriesId::H => (vec![zf(1, 1, 1)], vec![(2.0, 1.0), (2.0, 2.0)], -0.5),
                SeriesId::F1 | SeriesId::U if accel => {
                    (vec![zf(1, 1, 1), zf(1, 2, 1), zf(2, 2, -1)], vec![(3.0, 1.0), (3.0, 2.0)], -1.0)
                }
                SeriesId::F1 | SeriesId::U => (vec![zf(1, 1, 1)], vec![(2.0, 1.0), (2.0, 2.0)], -0.5),
                SeriesId::Q { .. } | SeriesId::V { .. } | SeriesId::G { .. } if accel => {
                    let mut z = vec![zf(1, 1, 1)];
                    z.extend_from_slice(&accel_factors);
                    (z, vec![(3.0, 1.0), (3.0, 2.0)], -1.0)
                }
                SeriesId::Q { .. } | SeriesId::V { .. } | SeriesId::G { .. } => {
                    (vec![zf(1, 1, 1)], vec![(2.0, 1.0), (2.0, 2.0)], -0.5)
                }
                SeriesId::K { .. } => (vec![zf(1, 0, 1)], vec![(3.0, 1.0)], -2.0),
                SeriesId::L { .. } => (vec![zf(1, 0, 1)], vec![], f64::NEG_INFINITY),
            };
        if matches!(id, SeriesId::F1 | SeriesId::G { .. }) {
            zeta_factors.insert(0, zf(1, 0, 1));
        }
        let prefactor = match id {
            SeriesId::V { delta } => {
                crate::constants::c8()
                    * arith::trial_factor(delta)
                        .iter()
                        .map(|&(p, _)| to_f64(&LocalFactorSet::new(p).expect("prime").u))
                        .product::<f64>()
            }
            _ => 1.0,
        };
        let mut me = Self {
            id,
            form,
            zeta_factors,
            validity_sigma,
            prime_cutoff: 0,
            prefactor,
            decay,
            locals: Vec::new(),
        };
        let special_max = me.special_primes().into_iter().max().unwrap_or(2);
        me.prime_cutoff = prime_cutoff.max(special_max);
        let primes = primes_upto(me.prime_cutoff);
        me.locals = chunked_map(primes.len(), 256, |r| {
            primes[r]
                .iter()
                .map(|&p| {
                    let l = me.local_exact(p);
                    PrimeLocal {
                        p,
                        logp: (p as f64).ln(),
                        num: l.num.iter().map(to_f64).collect(),
                        den: l.den.iter().map(to_f64).collect(),
                    }
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();
        Ok(me)
    }

    pub fn plain(id: SeriesId) -> Result<Self> {
        Self::new(id, Form::Plain, DEFAULT_PRIME_CUTOFF)
    }

    pub fn accelerated(id: SeriesId) -> Result<Self> {
        Self::new(id, Form::Accelerated, DEFAULT_PRIME_CUTOFF)
    }

    pub fn has_accelerated(id: SeriesId) -> bool {
        matches!(
            id,
            SeriesId::F1 | SeriesId::U | SeriesId::Q { .. } | SeriesId::V { .. } | SeriesId::G { .. }
        )
    }

    /// Primes whose local factor differs from the generic rule.
    pub fn special_primes(&self) -> Vec<u64> {
        let n = match self.id {
            SeriesId::Q { n } => n,
            SeriesId::K { d, delta } | SeriesId::G { d, delta } => d * delta,
            SeriesId::V { delta } => delta,
            SeriesId::L { q } => q,
            _ => 1,
        };
        arith::trial_factor(n).into_iter().map(|(p, _)| p).collect()
    }

    /// Exact remainder factor at the prime p.
    pub fn local_exact(&self, p: u64) -> LocalRatFn {
        let lf = LocalFactorSet::new(p).expect("prime");
        let pq = int(p);
        let inv_p = pq.recip();
        let inv_p2 = &inv_p * &inv_p;
        let accel = self.form == Form::Accelerated;
        let one_minus_y_over_p = lin(1, -inv_p.clone());
        // Plain remainder → accelerated one: times (1 − Y/p²)² (1 − Y²/p²)^{-1}.
        let accelerate = |plain: Vec<Rat>| -> LocalRatFn {
            let sq = mul(&lin(1, -inv_p2.clone()), &lin(1, -inv_p2.clone()));
            let den = lin(1, inv_p.clone());
            // plain always carries the factor (1 − Y/p); strip it exactly.
            let stripped = divide_linear(&plain, &inv_p);
            LocalRatFn { num: mul(&stripped, &sq), den }
        };
        let divides = |n: u64| n % p == 0;
        match self.id {
            SeriesId::F | SeriesId::H => {
                let psi_m1 = &lf.psi1 - Rat::one();
                LocalRatFn::poly(mul(&one_minus_y_over_p, &lin(1, psi_m1)))
            }
            SeriesId::F1 | SeriesId::U => {
                let plain = mul(&lin(1, int(p - 1).recip()), &one_minus_y_over_p);
                if accel {
                    let inv_pm1 = int(p - 1).recip();
                    LocalRatFn {
                        num: mul(&lin(1, inv_pm1), &lin(1, -inv_p2.clone())),
                        den: lin(1, inv_p.clone()),
                    }
                } else {
                    LocalRatFn::poly(plain)
                }
            }
            SeriesId::Q { n } => {
                let base = if divides(n) { vec![Rat::one()] } else { lin(1, lf.r.clone()) };
                let plain = mul(&base, &one_minus_y_over_p);
                if accel { accelerate(plain) } else { LocalRatFn::poly(plain) }
            }
            SeriesId::V { delta } => {
                let base = if divides(delta) {
                    vec![Rat::one()]
                } else {
                    let r = &lf.r;
                    let c = r * (&pq + int(3) * r + r * r) / (&pq + int(2) * r);
                    lin(1, c)
                };
                let plain = mul(&base, &one_minus_y_over_p);
                if accel { accelerate(plain) } else { LocalRatFn::poly(plain) }
            }
            SeriesId::G { d, delta } => {
                let base = if divides(d) {
                    lin(1, -Rat::one())
                } else if divides(delta) {
                    vec![Rat::one()]
                } else {
                    lin(1, lf.r.clone())
                };
                let plain = mul(&base, &one_minus_y_over_p);
                if accel { accelerate(plain) } else { LocalRatFn::poly(plain) }
            }
            SeriesId::K { d, delta } => {
                if divides(d) {
                    LocalRatFn::poly(vec![Rat::zero(), lf.k.clone()])
                } else if divides(delta) {
                    LocalRatFn::poly(vec![Rat::one()])
                } else {
                    LocalRatFn::poly(lin(1, &lf.k - Rat::one()))
                }
            }
            SeriesId::L { q } => {
                if divides(q) {
                    LocalRatFn::poly(lin(1, -Rat::one()))
                } else {
                    LocalRatFn::poly(vec![Rat::one()])
                }
            }
        }
    }

    /// Exponent g with |ζ-part(σ+it)| ≪ t^g, from the convexity bound
    /// plus 0.1 per factor.
    pub fn growth_exponent(&self, sigma: f64) -> f64 {
        self.zeta_factors
            .iter()
            .map(|f| {
                let x = f.scale as f64 * sigma + f.shift as f64;
                let mu = if f.exponent < 0 || x >= 1.0 {
                    0.0
                } else if x >= 0.0 {
                    (1.0 - x) / 2.0
                } else {
                    0.5 - x
                };
                f.exponent.max(0) as f64 * mu + 0.1
            })
            .sum()
    }

    /// Exponent e(σ) with |R_p − 1| = O(p^{-e}).
    pub fn decay_exponent(&self, sigma: f64) -> f64 {
        self.decay.iter().map(|&(m, k)| m + k * sigma).fold(f64::INFINITY, f64::min)
    }

    /// Remainder Euler product with its truncation bound (absolute).
    pub fn remainder(&self, s: C64) -> Result<SeriesValue> {
        let mut prod = C64::new(1.0, 0.0);
        for l in &self.locals {
            prod *= l.eval(s);
        }
        if self.decay.is_empty() {
            return Ok(SeriesValue { value: prod, tail_bound: 0.0 });
        }
        let e = self.decay_exponent(s.re);
        if !(e > 1.0) {
            return Err(Error::Domain(format!(
                "remainder of {:?} diverges at σ = {} (decay exponent {e})",
                self.id, s.re
            )));
        }
        let tail_n = self.locals.len().min(32);
        let c = self.locals[self.locals.len() - tail_n..]
            .iter()
            .map(|l| (l.eval(s) - 1.0).norm() * (l.p as f64).powf(e))
            .fold(0.0, f64::max)
            * 2.0;
        let n = self.prime_cutoff as f64;
        let rel = (c * n.powf(1.0 - e) / (e - 1.0)).exp_m1();
        Ok(SeriesValue { value: prod, tail_bound: rel * prod.norm() })
    }

    fn zeta_part(&self, s: C64, skip: Option<usize>) -> Result<C64> {
        let mut z = C64::new(self.prefactor, 0.0);
        for (i, f) in self.zeta_factors.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            let arg = s * f.scale as f64 + f.shift as f64;
            if arg == C64::new(1.0, 0.0) {
                return Err(Error::Domain(format!("zeta factor {i} of {:?} has its pole at s = {s}", self.id)));
            }
            z *= zeta_unchecked(arg).powi(f.exponent);
        }
        Ok(z)
    }

    pub fn eval(&self, s: C64) -> Result<SeriesValue> {
        self.eval_inner(s, None)
    }

    /// Value with the zeta factor at index `skip` left out.
    pub fn eval_regularized(&self, s: C64, skip: usize) -> Result<SeriesValue> {
        if skip >= self.zeta_factors.len() {
            return Err(Error::Range(format!("no zeta factor {skip}")));
        }
        self.eval_inner(s, Some(skip))
    }

    /// Leaves out the factor whose pole sits at s, e.g. ζ(s+1) at s = 0.
    pub fn eval_at_pole(&self, s: C64) -> Result<SeriesValue> {
        let idx = self
            .zeta_factors
            .iter()
            .position(|f| s * f.scale as f64 + f.shift as f64 == C64::new(1.0, 0.0) && f.exponent == 1)
            .ok_or_else(|| Error::Domain(format!("no simple zeta pole of {:?} at {s}", self.id)))?;
        self.eval_inner(s, Some(idx))
    }

    fn eval_inner(&self, s: C64, skip: Option<usize>) -> Result<SeriesValue> {
        if !(s.re > self.validity_sigma) {
            return Err(Error::Domain(format!(
                "{:?} evaluated at σ = {} ≤ {}",
                self.id, s.re, self.validity_sigma
            )));
        }
        let z = self.zeta_part(s, skip)?;
        let rem = self.remainder(s)?;
        Ok(SeriesValue { value: z * rem.value, tail_bound: z.norm() * rem.tail_bound })
    }

    /// Dirichlet coefficients a(1..=n_max) of the factorized product, exact.
    pub fn factorized_coefficients(&self, n_max: usize) -> Vec<Rat> {
        let spf = Spf::new(n_max as u64);
        let mut cache: std::collections::HashMap<u64, Vec<Rat>> = Default::default();
        let special: Vec<(u64, Rat)> = self
            .special_primes()
            .into_iter()
            .map(|p| (p, self.local_exact(p).expand(0).swap_remove(0)))
            .collect();
        let mut rem = vec![Rat::zero(); n_max + 1];
        for n in 1..=n_max as u64 {
            let mut v = Rat::one();
            for (p, c0) in &special {
                if n % p != 0 {
                    v *= c0;
                }
            }
            for (p, k) in spf.factor(n) {
                let c = cache.entry(p).or_insert_with(|| {
                    let k_max = (n_max as f64).ln() / (p as f64).ln();
                    self.local_exact(p).expand(k_max.floor() as usize + 1)
                });
                v *= &c[k as usize];
                if v.is_zero() {
                    break;
                }
            }
            rem[n as usize] = v;
        }
        let mut acc = rem;
        for f in &self.zeta_factors {
            let z = zeta_factor_coefficients(*f, n_max);
            for _ in 0..f.exponent.unsigned_abs() {
                acc = convolve(&acc, &z, n_max);
            }
        }
        acc
    }

    /// Coefficients of the defining series, computed from the multiplicative
    /// definition rather than from the factorization.
    pub fn defining_coefficients(&self, n_max: usize) -> Vec<Rat> {
        let spf = Spf::new(n_max as u64);
        let mut out = vec![Rat::zero(); n_max + 1];
        for n in 1..=n_max as u64 {
            let fac = spf.factor(n);
            let sqf = fac.iter().all(|&(_, e)| e == 1);
            let mut v = Rat::one();
            let coprime = |m: u64| fac.iter().all(|&(p, _)| m % p != 0);
            let ok = match self.id {
                SeriesId::F => {
                    for &(p, _) in &fac {
                        v *= LocalFactorSet::new(p).unwrap().psi1;
                    }
                    true
                }
                SeriesId::F1 => {
                    v = Rat::new(n.into(), spf.phi(n).into());
                    true
                }
                SeriesId::U => {
                    v = Rat::new(1.into(), spf.phi(n).into());
                    sqf
                }
                SeriesId::Q { n: m } => {
                    for &(p, _) in &fac {
                        v *= LocalFactorSet::new(p).unwrap().r;
                    }
                    sqf && coprime(m)
                }
                SeriesId::V { delta } => {
                    for &(p, _) in &fac {
                        let lf = LocalFactorSet::new(p).unwrap();
                        let (r, pq) = (&lf.r, int(p));
                        v *= r * (&pq + int(3) * r + r * r) / (&pq + int(2) * r);
                    }
                    sqf && coprime(delta)
                }
                SeriesId::K { d, delta } => {
                    for &(p, _) in &fac {
                        if delta % p != 0 {
                            v *= LocalFactorSet::new(p).unwrap().k;
                        }
                    }
                    n % d == 0
                }
                SeriesId::G { d, delta } => {
                    for &(p, _) in &fac {
                        if delta % p != 0 {
                            v *= LocalFactorSet::new(p).unwrap().gamma;
                        }
                    }
                    coprime(d)
                }
                SeriesId::L { q } => coprime(q),
                SeriesId::H => {
                    // h = 𝓕/ζ: coefficients Σ_{e|n} μ(e) ψ₁(n/e).
                    let mut s = Rat::zero();
                    for e in spf.divisors(n) {
                        let mu = spf.mu(e);
                        if mu != 0 {
                            let mut w = Rat::from_integer(mu.into());
                            for (p, _) in spf.factor(n / e) {
                                w *= LocalFactorSet::new(p).unwrap().psi1;
                            }
                            s += w;
                        }
                    }
                    v = s;
                    true
                }
            };
            if ok {
                out[n as usize] = v;
            }
        }
        out
    }
}

/// Exact division of a polynomial by (1 − cY), assuming it divides.
fn divide_linear(a: &[Rat], c: &Rat) -> Vec<Rat> {
    let mut q = Vec::with_capacity(a.len() - 1);
    let mut carry = Rat::zero();
    for coef in &a[..a.len() - 1] {
        carry = coef + c * &carry;
        q.push(carry.clone());
    }
    debug_assert!((&a[a.len() - 1] + c * &carry).is_zero());
    q
}

/// Coefficients of ζ(a s + b)^{±1}, single factor.
pub fn zeta_factor_coefficients(f: ZetaFactor, n_max: usize) -> Vec<Rat> {
    let mu = if f.exponent < 0 { Some(arith::mu_table(n_max as u64)) } else { None };
    let mut out = vec![Rat::zero(); n_max + 1];
    let mut m: u64 = 1;
    loop {
        let n = m.pow(f.scale);
        if n as usize > n_max {
            break;
        }
        let sign = mu.as_ref().map_or(1, |t| t[m as usize] as i64);
        if sign != 0 {
            let base = Rat::from_integer(num::BigInt::from(m).pow(f.shift.unsigned_abs()));
            let v = if f.shift >= 0 { base.recip() } else { base };
            out[n as usize] = v * Rat::from_integer(sign.into());
        }
        m += 1;
    }
    out
}

/// Dirichlet convolution truncated at n_max (index 0 unused).
pub fn convolve(a: &[Rat], b: &[Rat], n_max: usize) -> Vec<Rat> {
    let nz_a: Vec<usize> = (1..=n_max).filter(|&i| !a[i].is_zero()).collect();
    let mut out: Vec<Rat> = vec![Rat::zero()];
    let parts = chunked_map(n_max, 1024, |r| {
        let (lo, hi) = (r.start + 1, r.end + 1);
        let mut local = vec![Rat::zero(); hi - lo];
        for &d in &nz_a {
            if d >= hi {
                break;
            }
            let m_lo = lo.div_ceil(d);
            let m_hi = (hi - 1) / d;
            for m in m_lo..=m_hi {
                if !b[m].is_zero() {
                    local[d * m - lo] += &a[d] * &b[m];
                }
            }
        }
        local
    });
    for p in parts {
        out.extend(p);
    }
    out
}

/// Indices n ≤ n_max where the factorized and defining coefficients differ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    pub id: SeriesId,
    pub form: Form,
    pub n_max: usize,
    pub nonzero: usize,
    pub mismatches: Vec<u64>,
}

impl CoefficientCheck {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn coefficient_check(id: SeriesId, form: Form, n_max: usize) -> Result<CoefficientCheck> {
    let f = SeriesFactorization::new(id, form, 2)?;
    let a = f.factorized_coefficients(n_max);
    let b = f.defining_coefficients(n_max);
    let mismatches = (1..=n_max).filter(|&n| a[n] != b[n]).map(|n| n as u64).collect();
    let nonzero = (1..=n_max).filter(|&n| !b[n].is_zero()).count();
    Ok(CoefficientCheck { id, form: f.form, n_max, nonzero, mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_geometric() {
        let l = LocalRatFn { num: vec![Rat::one()], den: lin(1, -Rat::one()) };
        assert!(l.expand(5).iter().all(|c| c == &Rat::one()));
    }

    #[test]
    fn zeta_squared_is_divisor_count() {
        let z = zeta_factor_coefficients(zf(1, 0, 1), 100);
        let d = convolve(&z, &z, 100);
        assert_eq!(d[12], Rat::from_integer(6.into()));
        assert_eq!(d[97], Rat::from_integer(2.into()));
        let mu = zeta_factor_coefficients(zf(1, 0, -1), 100);
        let e = convolve(&z, &mu, 100);
        assert_eq!(e[1], Rat::one());
        assert!(e[2..].iter().all(|c| c.is_zero()));
    }

    #[test]
    fn small_coefficient_checks() {
        for id in [
            SeriesId::F,
            SeriesId::H,
            SeriesId::F1,
            SeriesId::U,
            SeriesId::Q { n: 6 },
            SeriesId::K { d: 2, delta: 3 },
            SeriesId::V { delta: 2 },
            SeriesId::G { d: 3, delta: 2 },
            SeriesId::L { q: 6 },
        ] {
            for form in [Form::Plain, Form::Accelerated] {
                let c = coefficient_check(id, form, 500).unwrap();
                assert!(c.pass(), "{id:?} {form:?}: {:?}", &c.mismatches[..c.mismatches.len().min(5)]);
            }
        }
    }

    #[test]
    fn u_at_one_and_regularized_zero() {
        let u = SeriesFactorization::accelerated(SeriesId::U).unwrap();
        let v = u.eval(C64::new(1.0, 0.0)).unwrap();
        let z = |x: f64| crate::analytic::zeta::zeta_real(x);
        let want = z(2.0) * z(3.0) / z(6.0);
        assert!((v.value.re - want).abs() < 1e-8, "{} vs {want}", v.value.re);
        let r = u.eval_at_pole(C64::new(0.0, 0.0)).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-10, "{}", r.value.re);
        let p = SeriesFactorization::plain(SeriesId::U).unwrap();
        let r = p.eval_at_pole(C64::new(0.0, 0.0)).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plain_and_accelerated_agree() {
        let s = C64::new(0.3, 4.0);
        for id in [SeriesId::U, SeriesId::Q { n: 5 }, SeriesId::G { d: 2, delta: 3 }] {
            let a = SeriesFactorization::new(id, Form::Plain, 100_000).unwrap().eval(s).unwrap();
            let b = SeriesFactorization::accelerated(id).unwrap().eval(s).unwrap();
            assert!((a.value - b.value).norm() <= a.tail_bound + b.tail_bound + 1e-12);
            assert!(b.tail_bound < a.tail_bound);
        }
    }

    #[test]
    fn divergent_remainder_errors() {
        let u = SeriesFactorization::plain(SeriesId::U).unwrap();
        assert!(u.eval(C64::new(-0.49, 1.0)).is_ok());
        assert!(u.eval(C64::new(-0.6, 1.0)).is_err());
        let z = SeriesFactorization::plain(SeriesId::F).unwrap();
        assert!(z.eval(C64::new(0.0, 0.0)).is_err());
    }
}
