//! Direct evaluation of the convolution lattice sums 𝒥*(X), 𝒥(X) and
//! ℒ_{d,Δ}(X), the ψ₁-weighted sums, the 𝓜₁/𝓜₂ sums and the truncated
//! μ/φ convolution.
//!
//! Writing m = Δl̃ with l̃ = l + l′, both 𝒥 sums collapse to
//! Σ_{m ≤ X} (X − m)² W(m), where W collects I(Δ)Γ_Δ(l̃)c_Δ(l̃) over the
//! squarefree Δ dividing m and c_Δ(n) = Σ_{l+l′=n} Γ_Δ(l)Γ_Δ(l′).
//! The table stores W once, so every X up to the build bound is O(X).

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::quad;
use crate::arith::{self, Spf};
use crate::error::{Error, Result};
use crate::local::LocalF64;
use crate::sum::{chunked_map, Neumaier};

/// Largest X accepted by the quadratic-cost lattice sums.
pub const X_BUDGET: f64 = 3.0e4;

const DELTA_CHUNK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SumId {
    Jstar,
    Jcal,
    L,
    #[serde(rename = "psi1_linear")]
    Psi1Linear,
    #[serde(rename = "psi1_quadratic")]
    Psi1Quadratic,
    #[serde(rename = "psi1_plain")]
    Psi1Plain,
    #[serde(rename = "psi1_log")]
    Psi1Log,
    M1sum,
    M2sum,
    #[serde(rename = "mu_phi")]
    MuPhi,
}

impl SumId {
    pub const ALL: [SumId; 10] = [
        SumId::Jstar,
        SumId::Jcal,
        SumId::L,
        SumId::Psi1Linear,
        SumId::Psi1Quadratic,
        SumId::Psi1Plain,
        SumId::Psi1Log,
        SumId::M1sum,
        SumId::M2sum,
        SumId::MuPhi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SumId::Jstar => "Jstar",
            SumId::Jcal => "Jcal",
            SumId::L => "L",
            SumId::Psi1Linear => "psi1_linear",
            SumId::Psi1Quadratic => "psi1_quadratic",
            SumId::Psi1Plain => "psi1_plain",
            SumId::Psi1Log => "psi1_log",
            SumId::M1sum => "M1sum",
            SumId::M2sum => "M2sum",
            SumId::MuPhi => "mu_phi",
        }
    }
}

impl fmt::Display for SumId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SumId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        SumId::ALL
            .into_iter()
            .find(|id| id.name().to_ascii_lowercase() == lower)
            .ok_or_else(|| Error::Unsupported(format!("sum id {s}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSumResult {
    pub sum_id: SumId,
    #[serde(rename = "X")]
    pub x: f64,
    pub value: f64,
    pub term_count: u64,
}

fn check_budget(x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::Range(format!("X = {x} must be nonnegative")));
    }
    if x > X_BUDGET {
        return Err(Error::Budget(format!("X = {x} exceeds the lattice budget {X_BUDGET}")));
    }
    Ok(())
}

/// Per-integer products of local factors up to a bound.
#[derive(Clone, Debug)]
pub struct FactorTables {
    spf: Spf,
    gamma1: Vec<f64>,
    i_fn: Vec<f64>,
    squarefree: Vec<bool>,
}

impl FactorTables {
    pub fn new(limit: u64) -> Self {
        let limit = limit.max(2);
        let spf = Spf::new(limit);
        let n = limit as usize;
        let mut gamma1 = vec![1.0; n + 1];
        let mut i_fn = vec![0.0; n + 1];
        let mut squarefree = vec![true; n + 1];
        i_fn[1] = 1.0;
        for m in 2..=n {
            let p = spf.smallest(m as u64) as usize;
            let rest = m / p;
            let lf = LocalF64::new(p as u64);
            if rest % p == 0 {
                squarefree[m] = false;
                gamma1[m] = gamma1[rest];
            } else {
                squarefree[m] = squarefree[rest];
                gamma1[m] = gamma1[rest] * lf.gamma;
                i_fn[m] = i_fn[rest] * lf.i_p;
            }
            if !squarefree[m] {
                i_fn[m] = 0.0;
            }
        }
        Self { spf, gamma1, i_fn, squarefree }
    }

    pub fn limit(&self) -> u64 {
        self.spf.limit()
    }

    pub fn spf(&self) -> &Spf {
        &self.spf
    }

    pub fn is_squarefree(&self, n: u64) -> bool {
        self.squarefree[n as usize]
    }

    /// I(n), zero off the squarefree integers.
    pub fn i_fn(&self, n: u64) -> f64 {
        self.i_fn[n as usize]
    }

    /// Γ_Δ(n) for every n in 1..=n_max (index 0 unused).
    pub fn gamma_delta_row(&self, delta: u64, n_max: usize) -> Vec<f64> {
        let delta_primes: Vec<u64> = arith::trial_factor(delta).into_iter().map(|(p, _)| p).collect();
        let mut row = self.gamma1[..=n_max].to_vec();
        for p in delta_primes {
            let scale = 1.0 / LocalF64::new(p).gamma;
            let mut j = p as usize;
            while j <= n_max {
                row[j] *= scale;
                j += p as usize;
            }
        }
        row[0] = 0.0;
        row
    }

    /// g_Δ(d): ∏_{p|d} r_p on squarefree d coprime to Δ, zero otherwise.
    pub fn g_delta(&self, d: u64, delta: u64) -> f64 {
        if !self.is_squarefree(d) || arith::gcd(d, delta) != 1 {
            return 0.0;
        }
        self.spf.distinct_primes(d).iter().map(|&p| LocalF64::new(p).r).product()
    }
}

/// c(n) = Σ_{l+l′=n} g(l)g(l′) for n in 0..=n_max, with `g` indexed from 1.
fn pair_convolution(g: &[f64], n_max: usize) -> Vec<f64> {
    let mut c = vec![0.0; n_max + 1];
    for (n, cn) in c.iter_mut().enumerate().skip(2) {
        let half = (n - 1) / 2;
        let mut acc = 0.0;
        for l in 1..=half {
            acc += g[l] * g[n - l];
        }
        acc *= 2.0;
        if n % 2 == 0 {
            acc += g[n / 2] * g[n / 2];
        }
        *cn = acc;
    }
    c
}

/// Tabulated weights for 𝒥* and 𝒥 up to a fixed bound.
#[derive(Clone, Debug)]
pub struct LatticeTable {
    x_max: f64,
    w_star: Vec<f64>,
    w_cal: Vec<f64>,
    count_prefix: Vec<u64>,
    moments: [Vec<f64>; 3],
}

impl LatticeTable {
    pub fn build(x_max: f64) -> Result<Self> {
        check_budget(x_max)?;
        let n = x_max.floor().max(2.0) as usize;
        let tables = FactorTables::new(n as u64);
        let deltas: Vec<u64> = (1..=(n / 2) as u64).filter(|&d| tables.is_squarefree(d)).collect();
        let parts = chunked_map(deltas.len(), DELTA_CHUNK, |range| {
            let mut out = Vec::new();
            for &delta in &deltas[range] {
                let top = n / delta as usize;
                let g = tables.gamma_delta_row(delta, top);
                let c = pair_convolution(&g, top);
                let i_delta = tables.i_fn(delta);
                for lt in 2..=top {
                    let m = delta as usize * lt;
                    let base = i_delta * g[lt] * c[lt];
                    out.push((m, base * m as f64, base / m as f64, (lt - 1) as u64));
                }
            }
            out
        });
        let mut w_star = vec![0.0; n + 1];
        let mut w_cal = vec![0.0; n + 1];
        let mut counts = vec![0u64; n + 1];
        for part in &parts {
            for &(m, ws, wc, cnt) in part {
                w_star[m] += ws;
                w_cal[m] += wc;
                counts[m] += cnt;
            }
        }
        let mut count_prefix = vec![0u64; n + 1];
        let mut moments = [vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]];
        let mut acc = [Neumaier::new(), Neumaier::new(), Neumaier::new()];
        let mut running = 0u64;
        for m in 0..=n {
            running += counts[m];
            count_prefix[m] = running;
            let mf = m as f64;
            let mut pw = w_star[m];
            for k in 0..3 {
                acc[k].add(pw);
                moments[k][m] = acc[k].value();
                pw *= mf;
            }
        }
        Ok(Self { x_max: x_max.max(2.0), w_star, w_cal, count_prefix, moments })
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    fn check(&self, x: f64) -> Result<usize> {
        if !(x >= 0.0) || x > self.x_max {
            return Err(Error::Range(format!("X = {x} outside the table range [0, {}]", self.x_max)));
        }
        Ok(x.floor() as usize)
    }

    fn weighted(&self, w: &[f64], x: f64) -> Result<f64> {
        let top = self.check(x)?;
        let mut acc = Neumaier::new();
        for (m, &wm) in w.iter().enumerate().take(top + 1).skip(2) {
            let gap = x - m as f64;
            acc.add(gap * gap * wm);
        }
        Ok(acc.value())
    }

    pub fn jstar(&self, x: f64) -> Result<LatticeSumResult> {
        let value = self.weighted(&self.w_star, x)?;
        Ok(LatticeSumResult { sum_id: SumId::Jstar, x, value, term_count: self.term_count(x)? })
    }

    pub fn jcal(&self, x: f64) -> Result<LatticeSumResult> {
        let value = self.weighted(&self.w_cal, x)?;
        Ok(LatticeSumResult { sum_id: SumId::Jcal, x, value, term_count: self.term_count(x)? })
    }

    /// Number of admissible (Δ, l, l′) with Δ squarefree and Δ(l+l′) ≤ X.
    pub fn term_count(&self, x: f64) -> Result<u64> {
        Ok(self.count_prefix[self.check(x)?])
    }

    /// Coefficients (A0, A1, A2) with 𝒥*(t) = t²A0 − 2tA1 + A2 on [k, k+1).
    pub fn jstar_piece(&self, k: usize) -> (f64, f64, f64) {
        let k = k.min(self.moments[0].len() - 1);
        (self.moments[0][k], self.moments[1][k], self.moments[2][k])
    }

    /// 𝒞 applied to 𝒥* at X, integrating the quadratic pieces exactly.
    pub fn c_transform_jstar(&self, x: f64) -> Result<f64> {
        let top = self.check(x)?;
        let (mut i4, mut i5) = (Neumaier::new(), Neumaier::new());
        for k in 2..=top {
            let (a, b) = (k as f64, (k as f64 + 1.0).min(x));
            if b <= a {
                break;
            }
            let (a0, a1, a2) = self.jstar_piece(k);
            let h = b - a;
            let (ab, s) = (a * b, a + b);
            let d1 = h / ab;
            let d2 = h * s / (ab * ab);
            let d3 = h * (a * a + ab + b * b) / (ab * ab * ab);
            let d4 = h * s * (a * a + b * b) / (ab * ab * ab * ab);
            i4.add(a0 * d1 - a1 * d2 + a2 * d3 / 3.0);
            i5.add(a0 * d2 / 2.0 - 2.0 * a1 * d3 / 3.0 + a2 * d4 / 4.0);
        }
        let f = self.jstar(x)?.value;
        Ok(f / (x * x) - 6.0 * x * i4.value() + 12.0 * x * x * i5.value())
    }
}

pub fn jstar(x: f64) -> Result<LatticeSumResult> {
    check_budget(x)?;
    LatticeTable::build(x)?.jstar(x)
}

pub fn jcal(x: f64) -> Result<LatticeSumResult> {
    check_budget(x)?;
    LatticeTable::build(x)?.jcal(x)
}

/// Closed count Σ_Δ N(N−1)/2, N = ⌊X/Δ⌋, over squarefree Δ.
pub fn admissible_count(x: f64) -> u64 {
    let n = x.floor().max(0.0) as u64;
    (1..=n / 2)
        .filter(|&d| arith::is_squarefree(d))
        .map(|d| {
            let big = n / d;
            big * (big - 1) / 2
        })
        .sum()
}

/// Triple loop over (Δ, l, l′) with Γ recomputed from factorizations.
pub fn jstar_brute(x: f64, cal: bool) -> Result<f64> {
    check_budget(x)?;
    let n = x.floor().max(2.0) as u64;
    let spf = Spf::new(n);
    let gamma = |l: u64, delta: u64| -> f64 {
        spf.distinct_primes(l)
            .into_iter()
            .filter(|p| delta % p != 0)
            .map(|p| LocalF64::new(p).gamma)
            .product()
    };
    let mut acc = Neumaier::new();
    for delta in 1..=n / 2 {
        if !spf.is_squarefree(delta) {
            continue;
        }
        let i_delta: f64 = spf.distinct_primes(delta).iter().map(|&p| LocalF64::new(p).i_p).product();
        for l in 1..=n / delta {
            for lp in 1..=n / delta {
                let m = (delta * (l + lp)) as f64;
                if m > x {
                    break;
                }
                let w = i_delta * (x - m).powi(2) * gamma(l, delta) * gamma(lp, delta) * gamma(l + lp, delta);
                acc.add(if cal { w / m } else { w * m });
            }
        }
    }
    Ok(acc.value())
}

/// Pair convolution c_Δ for one Δ, serving ℒ_{d,Δ}(X) for every d.
#[derive(Clone, Debug)]
pub struct LTable {
    delta: u64,
    x_max: f64,
    c: Vec<f64>,
}

impl LTable {
    pub fn build(delta: u64, x_max: f64) -> Result<Self> {
        check_budget(x_max)?;
        if delta == 0 || !arith::is_squarefree(delta) {
            return Err(Error::Range(format!("Δ = {delta} must be squarefree")));
        }
        let n = x_max.floor().max(2.0) as usize;
        let tables = FactorTables::new(n as u64);
        let g = tables.gamma_delta_row(delta, n);
        Ok(Self { delta, x_max: x_max.max(2.0), c: pair_convolution(&g, n) })
    }

    pub fn delta(&self) -> u64 {
        self.delta
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn l_sum(&self, d: u64, x: f64) -> Result<LatticeSumResult> {
        if d == 0 || arith::gcd(d, self.delta) != 1 {
            return Err(Error::Range(format!("d = {d} must be positive and coprime to Δ = {}", self.delta)));
        }
        if !(x >= 0.0) || x > self.x_max() {
            return Err(Error::Range(format!("X = {x} outside the table range [0, {}]", self.x_max())));
        }
        let top = x.floor() as usize;
        let mut acc = Neumaier::new();
        let mut term_count = 0u64;
        let d = d as usize;
        let mut n = d;
        while n <= top {
            if n >= 2 {
                let nf = n as f64;
                acc.add((x - nf).powi(2) * nf * self.c[n]);
                term_count += (n - 1) as u64;
            }
            n += d;
        }
        Ok(LatticeSumResult { sum_id: SumId::L, x, value: acc.value(), term_count })
    }
}

pub fn l_sum(d: u64, delta: u64, x: f64) -> Result<LatticeSumResult> {
    LTable::build(delta, x)?.l_sum(d, x)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Step1Point {
    #[serde(rename = "X")]
    pub x: f64,
    pub direct: f64,
    pub via_l: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Step1Report {
    pub points: Vec<Step1Point>,
    pub max_rel_error: f64,
}

/// Compares 𝒥*(X) with Σ_Δ I(Δ)Δ³ Σ_d g_Δ(d)ℒ_{d,Δ}(X/Δ) on the grid
/// X = k/`per_unit` up to `x_max`. The relative error is taken against
/// max(|𝒥*(X)|, 1).
pub fn step1_check(x_max: f64, per_unit: u32) -> Result<Step1Report> {
    let table = LatticeTable::build(x_max)?;
    let n = table.x_max() as u64;
    let tables = FactorTables::new(n);
    let l_tables: Vec<Option<LTable>> = (0..=n / 2)
        .map(|delta| {
            (delta >= 1 && tables.is_squarefree(delta))
                .then(|| LTable::build(delta, x_max / delta as f64))
                .transpose()
        })
        .collect::<Result<_>>()?;
    let steps = (x_max * per_unit as f64).floor() as u64;
    let mut points = Vec::with_capacity(steps as usize);
    let mut max_rel = 0.0f64;
    for k in 1..=steps {
        let x = k as f64 / per_unit as f64;
        let direct = table.jstar(x)?.value;
        let mut acc = Neumaier::new();
        for (delta, lt) in l_tables.iter().enumerate() {
            let Some(lt) = lt else { continue };
            let delta = delta as u64;
            let xd = x / delta as f64;
            if xd < 2.0 {
                continue;
            }
            let weight = tables.i_fn(delta) * (delta as f64).powi(3);
            for d in 1..=xd.floor() as u64 {
                let g = tables.g_delta(d, delta);
                if g != 0.0 {
                    acc.add(weight * g * lt.l_sum(d, xd)?.value);
                }
            }
        }
        let via_l = acc.value();
        let rel_error = (direct - via_l).abs() / direct.abs().max(1.0);
        max_rel = max_rel.max(rel_error);
        points.push(Step1Point { x, direct, via_l, rel_error });
    }
    Ok(Step1Report { points, max_rel_error: max_rel })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DsumReport {
    pub delta: u64,
    pub m: u64,
    pub cutoff: u64,
    pub truncated: f64,
    pub target: f64,
    pub residual: f64,
}

/// Truncated Σ_{D,D′ ≤ cutoff, (D,D′) | m} g_Δ(D)g_Δ(D′)/[D,D′] against
/// C₈U(Δ)K_Δ(m).
pub fn dsum_identity_check(delta: u64, m: u64, cutoff: u64, c8: f64) -> Result<DsumReport> {
    if m == 0 {
        return Err(Error::Range("m must be positive".into()));
    }
    if delta == 0 || !arith::is_squarefree(delta) {
        return Err(Error::Range(format!("Δ = {delta} must be squarefree")));
    }
    let tables = FactorTables::new(cutoff.max(2));
    let support: Vec<(u64, f64)> = (1..=cutoff)
        .filter_map(|d| {
            let g = tables.g_delta(d, delta);
            (g != 0.0).then_some((d, g))
        })
        .collect();
    let rows = chunked_map(support.len(), 64, |range| {
        let mut acc = Neumaier::new();
        for &(d1, g1) in &support[range] {
            for &(d2, g2) in &support {
                let h = arith::gcd(d1, d2);
                if m % h == 0 {
                    acc.add(g1 * g2 * h as f64 / (d1 as f64 * d2 as f64));
                }
            }
        }
        acc
    });
    let mut acc = Neumaier::new();
    for r in &rows {
        acc.merge(r);
    }
    let truncated = acc.value();
    let u: f64 = arith::trial_factor(delta).iter().map(|&(p, _)| LocalF64::new(p).u).product();
    let k: f64 = arith::trial_factor(m)
        .iter()
        .filter(|(p, _)| delta % p != 0)
        .map(|&(p, _)| LocalF64::new(p).k)
        .product();
    let target = c8 * u * k;
    Ok(DsumReport { delta, m, cutoff, truncated, target, residual: target - truncated })
}

/// The four ψ₁-weighted sums over l < X.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Psi1Kind {
    /// Σ (X − l)ψ₁(l)/l
    Linear,
    /// Σ (X − l)²ψ₁(l)/l
    Quadratic,
    /// Σ (X − l)ψ₁(l)
    Plain,
    /// Σ log(X/l)·lψ₁(l)
    Log,
}

impl Psi1Kind {
    pub const ALL: [Psi1Kind; 4] = [Psi1Kind::Linear, Psi1Kind::Quadratic, Psi1Kind::Plain, Psi1Kind::Log];

    pub fn sum_id(self) -> SumId {
        match self {
            Psi1Kind::Linear => SumId::Psi1Linear,
            Psi1Kind::Quadratic => SumId::Psi1Quadratic,
            Psi1Kind::Plain => SumId::Psi1Plain,
            Psi1Kind::Log => SumId::Psi1Log,
        }
    }

    fn weight(self, x: f64, l: f64) -> f64 {
        match self {
            Psi1Kind::Linear => (x - l) / l,
            Psi1Kind::Quadratic => (x - l).powi(2) / l,
            Psi1Kind::Plain => x - l,
            Psi1Kind::Log => (x / l).ln() * l,
        }
    }
}

/// ψ₁(l) for l ≤ limit.
pub fn psi1_table(limit: u64) -> Vec<f64> {
    let limit = limit.max(2);
    let spf = Spf::new(limit);
    let mut out = vec![1.0; limit as usize + 1];
    out[0] = 0.0;
    for m in 2..=limit as usize {
        let p = spf.smallest(m as u64) as usize;
        let rest = m / p;
        out[m] = if rest % p == 0 { out[rest] } else { out[rest] * LocalF64::new(p as u64).psi1 };
    }
    out
}

fn psi1_sum_with(psi: &[f64], kind: Psi1Kind, x: f64) -> LatticeSumResult {
    let mut acc = Neumaier::new();
    let mut term_count = 0;
    let mut l = 1usize;
    while (l as f64) < x {
        acc.add(kind.weight(x, l as f64) * psi[l]);
        term_count += 1;
        l += 1;
    }
    LatticeSumResult { sum_id: kind.sum_id(), x, value: acc.value(), term_count }
}

pub fn psi1_sums(kind: Psi1Kind, x: f64) -> Result<LatticeSumResult> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::Range(format!("X = {x} must be at least 1")));
    }
    Ok(psi1_sum_with(&psi1_table(x.ceil() as u64), kind, x))
}

/// Evaluates one ψ₁ sum at many X sharing a single ψ₁ table.
pub fn psi1_sums_many(kind: Psi1Kind, xs: &[f64]) -> Result<Vec<LatticeSumResult>> {
    let top = xs.iter().fold(1.0f64, |a, &b| a.max(b));
    if xs.iter().any(|&x| !(x >= 1.0) || !x.is_finite()) {
        return Err(Error::Range("every X must be at least 1".into()));
    }
    let psi = psi1_table(top.ceil() as u64);
    Ok(xs.iter().map(|&x| psi1_sum_with(&psi, kind, x)).collect())
}

/// Weights 𝓜₁, 𝓜₂ attached to (x, Q).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MWeights {
    pub x: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "X")]
    pub big_x: f64,
    pub gamma_m: f64,
    pub delta_m: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MKind {
    M1,
    M2,
}

impl MWeights {
    pub fn new(x: f64, q: f64) -> Result<Self> {
        if !(x > 1.0 && q > 0.0 && q <= x) {
            return Err(Error::Range(format!("need x > 1 and 0 < Q ≤ x, got x = {x}, Q = {q}")));
        }
        let lx = x.ln();
        Ok(Self { x, q, big_x: x / q, gamma_m: lx / 2.0 - 0.25, delta_m: 0.75 - lx / 2.0 })
    }

    pub fn m1(&self, l: f64) -> f64 {
        let (q, xx) = (self.q, self.big_x);
        q * q * (xx - l) * (self.gamma_m * xx + self.delta_m * l) - (l * q).powi(2) * (xx / l).ln() / 2.0
    }

    /// Closed form u²(log u/2 − 3/4) with u = x − Ql, continued by 0 at u = 0.
    pub fn m2(&self, l: f64) -> f64 {
        m2_closed(self.x - self.q * l)
    }

    /// ∫₀^u log t·(u − t) dt by quadrature, with t = u·v² to remove the
    /// logarithmic endpoint.
    pub fn m2_integral(&self, l: f64, tol: f64) -> Result<f64> {
        let u = self.x - self.q * l;
        if u <= 0.0 {
            return Ok(0.0);
        }
        let f = |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            let t = u * v * v;
            t.ln() * (u - t) * 2.0 * u * v
        };
        Ok(quad::adaptive(&f, 0.0, 1.0, tol * u * u * u.ln().abs().max(1.0))?.0)
    }
}

pub fn m2_closed(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        u * u * (u.ln() / 2.0 - 0.75)
    }
}

/// Σ_{l ≤ X} 𝓜(l)ψ₁(l)/l.
pub fn m_sums(cfg: &MWeights, which: MKind) -> Result<LatticeSumResult> {
    let top = cfg.big_x.floor() as u64;
    let psi = psi1_table(top.max(2));
    let mut acc = Neumaier::new();
    for l in 1..=top {
        let lf = l as f64;
        let w = match which {
            MKind::M1 => cfg.m1(lf),
            MKind::M2 => cfg.m2(lf),
        };
        acc.add(w * psi[l as usize] / lf);
    }
    let sum_id = if which == MKind::M1 { SumId::M1sum } else { SumId::M2sum };
    Ok(LatticeSumResult { sum_id, x: cfg.big_x, value: acc.value(), term_count: top })
}

/// Σ_{d ≤ cutoff} μ(d)/(d·φ(dl)).
pub fn mu_phi_sum(l: u64, cutoff: f64) -> Result<LatticeSumResult> {
    if l == 0 {
        return Err(Error::Range("l must be positive".into()));
    }
    let top = cutoff.floor().max(0.0) as u64;
    let spf = Spf::new(top.max(2));
    let phi_l = arith::phi(l);
    let mut acc = Neumaier::new();
    let mut term_count = 0;
    for d in 1..=top {
        let mu = spf.mu(d);
        if mu == 0 {
            continue;
        }
        // φ(dl) = φ(d)φ(l)·g/φ(g) with g = gcd(d, l).
        let g = arith::gcd(d, l);
        let phi_dl = spf.phi(d) as f64 * phi_l as f64 * g as f64 / spf.phi(g) as f64;
        acc.add(mu as f64 / (d as f64 * phi_dl));
        term_count += 1;
    }
    Ok(LatticeSumResult { sum_id: SumId::MuPhi, x: cutoff, value: acc.value(), term_count })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub points: Vec<(f64, f64)>,
    pub decreases: Vec<(f64, f64, f64)>,
}

impl MonotonicityReport {
    pub fn is_monotone(&self) -> bool {
        self.decreases.is_empty()
    }
}

/// Records every consecutive pair of grid points where 𝒥* decreases.
pub fn monotonicity_report(table: &LatticeTable, grid: &[f64]) -> Result<MonotonicityReport> {
    let points = grid.iter().map(|&x| Ok((x, table.jstar(x)?.value))).collect::<Result<Vec<_>>>()?;
    let decreases = points
        .windows(2)
        .filter(|w| w[1].1 < w[0].1)
        .map(|w| (w[0].0, w[1].0, w[0].1 - w[1].1))
        .collect();
    Ok(MonotonicityReport { points, decreases })
}

pub const CSV_HEADER: &str = "sum_id,X,value";

/// Writes results as CSV with the `sum_id,X,value` header.
pub fn write_csv<W: Write>(mut w: W, rows: &[LatticeSumResult]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{:?},{:?}", r.sum_id, r.x, r.value)?;
    }
    Ok(())
}

/// Reads a tabulation cache. Any malformed line is reported as a cache error.
pub fn read_csv(path: &Path) -> Result<Vec<(SumId, f64, f64)>> {
    let file = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Cache(format!("{}: missing header", path.display()))),
    }
    let bad = |n: usize| Error::Cache(format!("{}: malformed line {n}", path.display()));
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(i + 2));
        }
        let id = fields[0].parse::<SumId>().map_err(|_| bad(i + 2))?;
        let x = fields[1].trim().parse::<f64>().map_err(|_| bad(i + 2))?;
        let v = fields[2].trim().parse::<f64>().map_err(|_| bad(i + 2))?;
        out.push((id, x, v));
    }
    Ok(out)
}

/// 𝒥* values on a grid, read from `path` when it holds exactly that grid and
/// recomputed (and rewritten) otherwise.
pub fn cached_jstar(path: &Path, grid: &[f64]) -> Result<Vec<LatticeSumResult>> {
    if let Ok(rows) = read_csv(path) {
        let hit = rows.len() == grid.len()
            && rows.iter().zip(grid).all(|(r, &x)| r.0 == SumId::Jstar && r.1 == x);
        if hit {
            return Ok(rows
                .into_iter()
                .map(|(sum_id, x, value)| LatticeSumResult { sum_id, x, value, term_count: admissible_count(x) })
                .collect());
        }
    }
    let top = grid.iter().fold(2.0f64, |a, &b| a.max(b));
    let table = LatticeTable::build(top)?;
    let rows = grid.iter().map(|&x| table.jstar(x)).collect::<Result<Vec<_>>>()?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(std::fs::File::create(path)?, &rows)?;
    Ok(rows)
}
