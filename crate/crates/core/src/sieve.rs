//! Segmented sieve of Eratosthenes producing primes together with their
//! natural logarithms, plus a small binary cache format.
//!
//! Cache layout (all integers little-endian):
//!
//! ```text
//! "APML1" | version: u8 | x_max: u64 | count: u64 | count * (p: u64, log p: f64)
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sum::{self, Neumaier};

pub const CACHE_MAGIC: &[u8; 5] = b"APML1";
pub const CACHE_VERSION: u8 = 1;
pub const DEFAULT_SEGMENT: usize = 1 << 20;
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

#[derive(Clone, Copy, Debug)]
pub struct SieveConfig {
    pub segment_size: usize,
    /// Upper bound on the bytes the finished table may occupy.
    pub memory_budget: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self { segment_size: DEFAULT_SEGMENT, memory_budget: DEFAULT_MEMORY_BUDGET }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrimeLogTable {
    x_max: u64,
    segment_size: usize,
    primes: Vec<u64>,
    logs: Vec<f64>,
    theta: Vec<f64>,
}

fn simple_sieve(n: u64) -> Vec<u64> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let len = (hi - lo) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p >= hi {
            break;
        }
        let mut start = (lo.div_ceil(p) * p).max(p * p);
        while start < hi {
            composite[(start - lo) as usize] = true;
            start += p;
        }
    }
    (0..len)
        .filter(|&i| !composite[i])
        .map(|i| lo + i as u64)
        .filter(|&n| n >= 2)
        .collect()
}

/// Rough upper bound for pi(x), used for the capacity check.
fn pi_upper(x: u64) -> u64 {
    if x < 17 {
        return 7;
    }
    let xf = x as f64;
    (1.26 * xf / xf.ln()).ceil() as u64
}

/// Bytes per table entry: prime, log and the theta prefix.
const ENTRY_BYTES: u64 = 24;

pub fn enumerate_primes(x_max: u64) -> Result<PrimeLogTable> {
    enumerate_primes_with(x_max, SieveConfig::default())
}

pub fn enumerate_primes_with(x_max: u64, cfg: SieveConfig) -> Result<PrimeLogTable> {
    let need = pi_upper(x_max) * ENTRY_BYTES + cfg.segment_size as u64;
    if need > cfg.memory_budget {
        return Err(Error::Capacity(format!(
            "primes up to {x_max} need about {need} bytes, budget is {}",
            cfg.memory_budget
        )));
    }
    let seg = cfg.segment_size.max(64) as u64;
    let base = simple_sieve(isqrt(x_max));
    let end = x_max + 1;
    let nseg = end.div_ceil(seg) as usize;
    let parts = sum::chunked_map(nseg, 1, |r| {
        let lo = r.start as u64 * seg;
        let hi = (lo + seg).min(end);
        sieve_segment(lo, hi, &base)
    });
    let primes: Vec<u64> = parts.into_iter().flatten().collect();
    Ok(PrimeLogTable::from_primes(x_max, cfg.segment_size, primes))
}

impl PrimeLogTable {
    fn from_primes(x_max: u64, segment_size: usize, primes: Vec<u64>) -> Self {
        let logs: Vec<f64> = primes.iter().map(|&p| (p as f64).ln()).collect();
        let mut acc = Neumaier::new();
        let theta = logs
            .iter()
            .map(|&l| {
                acc.add(l);
                acc.value()
            })
            .collect();
        Self { x_max, segment_size, primes, logs, theta }
    }

    pub fn x_max(&self) -> u64 {
        self.x_max
    }

    pub fn segment_size(&self) -> usize {
        self.segment_size
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn logs(&self) -> &[f64] {
        &self.logs
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.primes.iter().copied().zip(self.logs.iter().copied())
    }

    /// Number of primes not exceeding x.
    pub fn count_upto(&self, x: f64) -> usize {
        if x < 2.0 {
            return 0;
        }
        let xi = x.floor() as u64;
        self.primes.partition_point(|&p| p <= xi)
    }

    /// Chebyshev's theta: the sum of log p over primes p ≤ x.
    pub fn chebyshev_theta(&self, x: f64) -> Result<f64> {
        if x > self.x_max as f64 {
            return Err(Error::Range(format!("x = {x} exceeds table bound {}", self.x_max)));
        }
        let k = self.count_upto(x);
        Ok(if k == 0 { 0.0 } else { self.theta[k - 1] })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(22 + 16 * self.len());
        out.extend_from_slice(CACHE_MAGIC);
        out.push(CACHE_VERSION);
        out.extend_from_slice(&self.x_max.to_le_bytes());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for (p, l) in self.entries() {
            out.extend_from_slice(&p.to_le_bytes());
            out.extend_from_slice(&l.to_bits().to_le_bytes());
        }
        out
    }

    /// Parses a cache image, rejecting anything that is not a well-formed
    /// table for exactly `x_max`.
    pub fn from_bytes(bytes: &[u8], x_max: u64) -> Result<Self> {
        let bad = |m: &str| Err(Error::Cache(m.to_string()));
        if bytes.len() < 22 || &bytes[..5] != CACHE_MAGIC {
            return bad("bad magic");
        }
        if bytes[5] != CACHE_VERSION {
            return Err(Error::Cache(format!(
                "format version {} (expected {CACHE_VERSION})",
                bytes[5]
            )));
        }
        let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        if word(6) != x_max {
            return bad("bound mismatch");
        }
        let count = word(14) as usize;
        if bytes.len() != 22 + 16 * count {
            return bad("truncated or oversized record block");
        }
        let mut primes = Vec::with_capacity(count);
        let mut prev = 1u64;
        for i in 0..count {
            let at = 22 + 16 * i;
            let p = word(at);
            let l = f64::from_bits(word(at + 8));
            if p <= prev || p > x_max || l != (p as f64).ln() {
                return bad("corrupt record");
            }
            prev = p;
            primes.push(p);
        }
        if pi_upper(x_max) < count as u64 {
            return bad("implausible count");
        }
        Ok(Self::from_primes(x_max, DEFAULT_SEGMENT, primes))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Built,
    Regenerated(String),
}

pub fn cache_path(dir: &Path, x_max: u64) -> PathBuf {
    dir.join(format!("primes-{x_max}.apml"))
}

/// Loads the table for `x_max` from `dir`, sieving and rewriting the file if
/// it is missing or unusable.
pub fn load_or_build(dir: &Path, x_max: u64) -> Result<(PrimeLogTable, CacheStatus)> {
    let path = cache_path(dir, x_max);
    let status = match fs::read(&path) {
        Ok(bytes) => match PrimeLogTable::from_bytes(&bytes, x_max) {
            Ok(t) => return Ok((t, CacheStatus::Hit)),
            Err(e) => CacheStatus::Regenerated(e.to_string()),
        },
        Err(_) => CacheStatus::Built,
    };
    let table = enumerate_primes(x_max)?;
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&table.to_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &path)?;
    Ok((table, status))
}

/// Primes up to n as a plain vector.
pub fn primes_upto(n: u64) -> Vec<u64> {
    simple_sieve(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith;

    #[test]
    fn tiny_bounds() {
        assert!(enumerate_primes(0).unwrap().is_empty());
        assert!(enumerate_primes(1).unwrap().is_empty());
        assert_eq!(enumerate_primes(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(enumerate_primes(2).unwrap().primes(), &[2]);
    }

    #[test]
    fn theta_values() {
        let t = enumerate_primes(100).unwrap();
        assert_eq!(t.chebyshev_theta(1.0).unwrap(), 0.0);
        assert!((t.chebyshev_theta(10.0).unwrap() - 5.347107530717468).abs() < 1e-12);
        assert!((t.chebyshev_theta(100.0).unwrap() - 83.72839039906393).abs() < 1e-10);
        assert!(t.chebyshev_theta(101.0).is_err());
    }

    #[test]
    fn matches_trial_division_with_small_segments() {
        let cfg = SieveConfig { segment_size: 97, ..Default::default() };
        let t = enumerate_primes_with(20_000, cfg).unwrap();
        let direct: Vec<u64> = (2..=20_000).filter(|&n| arith::is_prime(n)).collect();
        assert_eq!(t.primes(), direct.as_slice());
    }

    #[test]
    fn capacity_limit() {
        let cfg = SieveConfig { memory_budget: 1000, ..Default::default() };
        assert!(matches!(enumerate_primes_with(1_000_000, cfg), Err(Error::Capacity(_))));
    }

    #[test]
    fn bytes_roundtrip_and_rejection() {
        let t = enumerate_primes(1000).unwrap();
        let b = t.to_bytes();
        assert_eq!(PrimeLogTable::from_bytes(&b, 1000).unwrap(), t);
        let mut v = b.clone();
        v[5] = 9;
        assert!(PrimeLogTable::from_bytes(&v, 1000).is_err());
        let mut c = b.clone();
        let n = c.len();
        c[n - 3] ^= 0x40;
        assert!(PrimeLogTable::from_bytes(&c, 1000).is_err());
        assert!(PrimeLogTable::from_bytes(&b, 999).is_err());
        assert!(PrimeLogTable::from_bytes(&b[..b.len() - 1], 1000).is_err());
    }
}
