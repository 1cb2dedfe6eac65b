//! Elementary arithmetic: smallest-prime-factor tables, factorization,
//! Euler's phi and the Möbius function.

pub use num::integer::{gcd, lcm};

/// Smallest prime factor for every integer up to a bound.
#[derive(Clone, Debug)]
pub struct Spf {
    spf: Vec<u32>,
}

impl Spf {
    pub fn new(limit: u64) -> Self {
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Self { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    #[inline]
    pub fn smallest(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.smallest(n) == n
    }

    /// Prime factorization as (p, exponent) pairs in ascending order.
    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        assert!(n >= 1 && n <= self.limit(), "{n} outside factor table");
        let mut out = Vec::new();
        while n > 1 {
            let p = self.smallest(n);
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    pub fn distinct_primes(&self, n: u64) -> Vec<u64> {
        self.factor(n).into_iter().map(|(p, _)| p).collect()
    }

    pub fn is_squarefree(&self, n: u64) -> bool {
        self.factor(n).iter().all(|&(_, e)| e == 1)
    }

    pub fn phi(&self, n: u64) -> u64 {
        self.factor(n)
            .iter()
            .fold(n, |acc, &(p, _)| acc / p * (p - 1))
    }

    pub fn mu(&self, n: u64) -> i64 {
        let f = self.factor(n);
        if f.iter().any(|&(_, e)| e > 1) {
            0
        } else if f.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn divisors(&self, n: u64) -> Vec<u64> {
        divisors_from(&self.factor(n))
    }
}

/// All divisors from a factorization, sorted ascending.
pub fn divisors_from(factors: &[(u64, u32)]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in factors {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Trial-division factorization, for values outside any table.
pub fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && trial_factor(n) == [(n, 1)]
}

pub fn phi(n: u64) -> u64 {
    trial_factor(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn mu(n: u64) -> i64 {
    let f = trial_factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && trial_factor(n).iter().all(|&(_, e)| e == 1)
}

/// Euler phi for 0..=n by sieving (entry 0 is 0).
pub fn phi_table(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for i in 2..=n {
        if phi[i] == i as u64 {
            let mut j = i;
            while j <= n {
                phi[j] -= phi[j] / i as u64;
                j += i;
            }
        }
    }
    phi
}

/// Möbius function for 0..=n (entry 0 is 0).
pub fn mu_table(n: u64) -> Vec<i8> {
    let spf = Spf::new(n.max(1));
    let mut mu = vec![0i8; n as usize + 1];
    if n >= 1 {
        mu[1] = 1;
    }
    for i in 2..=n as usize {
        let p = spf.smallest(i as u64) as usize;
        let q = i / p;
        mu[i] = if q % p == 0 { 0 } else { -mu[q] };
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let s = Spf::new(100);
        assert_eq!(s.factor(60), vec![(2, 2), (3, 1), (5, 1)]);
        assert_eq!(s.phi(36), 12);
        assert_eq!(s.mu(30), -1);
        assert_eq!(s.mu(12), 0);
        assert_eq!(s.divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert!(s.is_prime(97) && !s.is_prime(91));
    }

    #[test]
    fn tables_agree_with_trial_division() {
        let s = Spf::new(2000);
        let ph = phi_table(2000);
        let mt = mu_table(2000);
        for n in 1..=2000u64 {
            assert_eq!(s.phi(n), phi(n));
            assert_eq!(ph[n as usize], phi(n));
            assert_eq!(mt[n as usize] as i64, mu(n));
            assert_eq!(s.is_squarefree(n), is_squarefree(n));
        }
    }

    #[test]
    fn phi_sums_to_identity() {
        let s = Spf::new(500);
        for n in 1..=500u64 {
            let total: u64 = s.divisors(n).iter().map(|&d| s.phi(d)).sum();
            assert_eq!(total, n);
        }
    }
}
