//! The named contour integrals, each a line integral of a factorized series
//! against a rational kernel and a power of X.

use serde::{Deserialize, Serialize};

use super::quad::{LineGrid, LineIntegral, SampledLine};
use super::series::{Form, SeriesFactorization, SeriesId};
use super::C64;
use crate::arith;
use crate::constants::{q_at_1, lemma_coefficients};
use crate::error::{Error, Result};
use crate::lattice::{psi1_sums, Psi1Kind};
use crate::local::LocalF64;

/// Which Dirichlet series stands behind 𝓕₁ in I(X).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F1Reading {
    /// 𝓕₁ = ζ·𝒰, the Euler-factor computation of Σ n/φ(n) n^{-s}.
    ZetaTimesU,
    /// 𝓕₁ = 𝒰.
    UOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerronKind {
    /// 𝓕(s+1)X^{s+1}/(s(s+1)) = Σ_{l<X}(X − l)ψ₁(l)/l.
    Linear,
    /// 2𝓕(s+1)X^{s+2}/(s(s+1)(s+2)) = Σ_{l<X}(X − l)²ψ₁(l)/l.
    Quadratic,
    /// 𝓕(s+1)X^{s+2}/((s+1)(s+2)) = Σ_{l<X}(X − l)ψ₁(l).
    Plain,
    /// 𝓕(s+1)X^{s+2}/(s+2)² = Σ_{l<X} log(X/l) l ψ₁(l).
    Log,
}

impl PerronKind {
    pub const ALL: [PerronKind; 4] = [PerronKind::Linear, PerronKind::Quadratic, PerronKind::Plain, PerronKind::Log];

    /// Direct evaluation of the arithmetic side.
    pub fn psi1_kind(self) -> Psi1Kind {
        match self {
            PerronKind::Linear => Psi1Kind::Linear,
            PerronKind::Quadratic => Psi1Kind::Quadratic,
            PerronKind::Plain => Psi1Kind::Plain,
            PerronKind::Log => Psi1Kind::Log,
        }
    }

    pub fn direct_sum(self, x: f64) -> f64 {
        psi1_sums(self.psi1_kind(), x.max(1.0)).map(|r| r.value).unwrap_or(0.0)
    }

    fn kernel(self, s: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        match self {
            PerronKind::Linear => one / (s * (s + 1.0)),
            PerronKind::Quadratic => 2.0 / (s * (s + 1.0) * (s + 2.0)),
            PerronKind::Plain => one / ((s + 1.0) * (s + 2.0)),
            PerronKind::Log => one / ((s + 2.0) * (s + 2.0)),
        }
    }

    fn shift(self) -> f64 {
        if self == PerronKind::Linear { 1.0 } else { 2.0 }
    }

    fn degree(self) -> f64 {
        if self == PerronKind::Quadratic { 3.0 } else { 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "which", rename_all = "snake_case")]
pub enum IntegralId {
    /// factor·∫_{(−1/2)} ζ(s)𝒰(s)X^{s+4}/(s(s+3)(s+4)).
    E,
    /// factor·∫_{(−1/2)} ζ(s)𝒰(s)X^{s+2}/(s²(s+1)).
    EStar,
    /// ∫_{(−1/4)} 𝓕₁(s)X^{s+1}/((s−1)s(s+1)).
    I { reading: F1Reading },
    /// I_{d,Δ}(X), line (−1/2).
    Id { d: u64, delta: u64 },
    /// J_{d,Δ}(X), line (−1/2).
    Jd { d: u64, delta: u64 },
    Perron { kind: PerronKind },
    /// ∫_{(−1/2)} ζ(s)𝒱_Δ(s)X^{s+4}/(s(s+2)(s+3)(s+4)).
    Series1 { delta: u64 },
    /// ∫ ζ(s)𝒱_Δ(s)X^{s+4}/((s+2)(s+3)(s+4)) on (0) or, with `left`, on (−1/2).
    Series2 { delta: u64, left: bool },
}

/// A line integral: nominal abscissa c (the line actually used is
/// c + 1/100), truncation height, panel width and a constant factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineIntegralSpec {
    pub which: IntegralId,
    pub c: f64,
    pub t_max: f64,
    pub step: f64,
    pub prime_cutoff: u64,
    pub factor: f64,
    /// Also sample t < 0 so the imaginary part can be reported.
    pub two_sided: bool,
}

pub const LINE_OFFSET: f64 = 0.01;

impl LineIntegralSpec {
    pub fn new(which: IntegralId) -> Self {
        let (c, t_max, step, cutoff, factor) = match which {
            IntegralId::E => (-0.5, 1000.0, 0.3, 10_000, 2.0),
            IntegralId::EStar => (-0.5, 1000.0, 0.3, 10_000, 2.0),
            IntegralId::I { .. } => (-0.25, 1000.0, 0.3, 10_000, 1.0),
            IntegralId::Id { .. } | IntegralId::Jd { .. } => (-0.5, 400.0, 0.3, 10_000, 1.0),
            IntegralId::Perron { .. } => (0.0, 2000.0, 0.3, 2_000, 1.0),
            IntegralId::Series1 { .. } => (-0.5, 400.0, 0.3, 10_000, 1.0),
            IntegralId::Series2 { left, .. } => (if left { -0.5 } else { 0.0 }, 1000.0, 0.3, 10_000, 1.0),
        };
        Self { which, c, t_max, step, prime_cutoff: cutoff, factor, two_sided: false }
    }

    pub fn sigma(&self) -> f64 {
        self.c + LINE_OFFSET
    }

    /// Real poles of the rational kernel, with multiplicity.
    pub fn denominator_roots(&self) -> Vec<f64> {
        match self.which {
            IntegralId::E => vec![0.0, -3.0, -4.0],
            IntegralId::EStar => vec![0.0, 0.0, -1.0],
            IntegralId::I { .. } => vec![1.0, 0.0, -1.0],
            IntegralId::Id { .. } | IntegralId::Series1 { .. } => vec![0.0, -2.0, -3.0, -4.0],
            IntegralId::Jd { .. } | IntegralId::Series2 { .. } => vec![-2.0, -3.0, -4.0],
            IntegralId::Perron { kind } => match kind {
                PerronKind::Linear => vec![0.0, -1.0],
                PerronKind::Quadratic => vec![0.0, -1.0, -2.0],
                PerronKind::Plain => vec![-1.0, -2.0],
                PerronKind::Log => vec![-2.0, -2.0],
            },
        }
    }
}

/// A line sampled once and integrated against X^{s+shift} for many X.
#[derive(Clone, Debug)]
pub struct PreparedIntegral {
    pub spec: LineIntegralSpec,
    pub shift: f64,
    line: SampledLine,
}

fn grid_for(spec: &LineIntegralSpec, pole_at_zero: bool) -> Result<LineGrid> {
    let sigma = spec.sigma();
    let near = if pole_at_zero && sigma.abs() < spec.step { Some(sigma.abs()) } else { None };
    LineGrid::new(sigma, spec.t_max, spec.step, near)
}

fn gamma_delta(e: u64, delta: u64) -> f64 {
    arith::trial_factor(e)
        .iter()
        .filter(|&&(p, _)| delta % p != 0)
        .map(|&(p, _)| LocalF64::new(p).gamma)
        .product()
}

impl PreparedIntegral {
    pub fn prepare(spec: LineIntegralSpec) -> Result<Self> {
        let sigma = spec.sigma();
        let deg = spec.denominator_roots().len() as f64;
        let factor = spec.factor;
        let cutoff = spec.prime_cutoff;
        let ts = spec.two_sided;
        let (line, shift) = match spec.which {
            IntegralId::E | IntegralId::EStar => {
                let u = SeriesFactorization::new(SeriesId::U, Form::Accelerated, cutoff)?;
                let zg = SeriesFactorization::new(SeriesId::L { q: 1 }, Form::Plain, 2)?;
                let decay = deg - u.growth_exponent(sigma) - zg.growth_exponent(sigma);
                let grid = grid_for(&spec, false)?;
                let star = matches!(spec.which, IntegralId::EStar);
                let line = SampledLine::sample(&grid, decay, ts, |s| {
                    let g = zg.eval(s)?.value * u.eval(s)?.value * factor;
                    Ok(if star { g / (s * s * (s + 1.0)) } else { g / (s * (s + 3.0) * (s + 4.0)) })
                })?;
                (line, if star { 2.0 } else { 4.0 })
            }
            IntegralId::I { reading } => {
                let u = SeriesFactorization::new(SeriesId::U, Form::Accelerated, cutoff)?;
                let zg = SeriesFactorization::new(SeriesId::L { q: 1 }, Form::Plain, 2)?;
                let with_zeta = reading == F1Reading::ZetaTimesU;
                let decay = deg - u.growth_exponent(sigma) - if with_zeta { zg.growth_exponent(sigma) } else { 0.0 };
                let grid = grid_for(&spec, false)?;
                let line = SampledLine::sample(&grid, decay, ts, |s| {
                    let mut g = u.eval(s)?.value * factor;
                    if with_zeta {
                        g *= zg.eval(s)?.value;
                    }
                    Ok(g / ((s - 1.0) * s * (s + 1.0)))
                })?;
                (line, 1.0)
            }
            IntegralId::Id { d, delta } => {
                let n = d * delta;
                let q = SeriesFactorization::new(SeriesId::Q { n }, Form::Accelerated, cutoff)?;
                let q1 = q_at_1(n);
                let terms: Vec<(f64, f64, SeriesFactorization)> = arith::divisors_from(&arith::trial_factor(d))
                    .into_iter()
                    .map(|e| {
                        let m = d / e;
                        let l = SeriesFactorization::new(SeriesId::L { q: m }, Form::Plain, 2)?;
                        Ok((gamma_delta(e, delta).powi(2) / m as f64, (e as f64).ln(), l))
                    })
                    .collect::<Result<_>>()?;
                let decay = deg - q.growth_exponent(sigma) - terms[0].2.growth_exponent(sigma);
                let grid = grid_for(&spec, false)?;
                let line = SampledLine::sample(&grid, decay, ts, |s| {
                    let mut inner = C64::new(0.0, 0.0);
                    for (w, loge, l) in &terms {
                        inner += *w * (-(s + 1.0) * *loge).exp() * l.eval(s)?.value;
                    }
                    Ok(factor * q1 * q.eval(s)?.value * inner / (s * (s + 2.0) * (s + 3.0) * (s + 4.0)))
                })?;
                (line, 4.0)
            }
            IntegralId::Jd { d, delta } => {
                let k = SeriesFactorization::new(SeriesId::K { d, delta }, Form::Plain, cutoff)?;
                let c8u: f64 = lemma_coefficients().c8
                    * arith::trial_factor(delta).iter().map(|&(p, _)| LocalF64::new(p).u).product::<f64>();
                let decay = deg - k.growth_exponent(sigma);
                let grid = grid_for(&spec, false)?;
                let line = SampledLine::sample(&grid, decay, ts, |s| {
                    Ok(factor * c8u * k.eval(s)?.value / ((s + 2.0) * (s + 3.0) * (s + 4.0)))
                })?;
                (line, 4.0)
            }
            IntegralId::Perron { kind } => {
                let base = perron_base(&spec)?;
                (base.reweight(kind.degree() - 0.2, |s| kind.kernel(s) * factor)?, kind.shift())
            }
            IntegralId::Series1 { delta } | IntegralId::Series2 { delta, .. } => {
                let v = SeriesFactorization::new(SeriesId::V { delta }, Form::Accelerated, cutoff)?;
                let zg = SeriesFactorization::new(SeriesId::L { q: 1 }, Form::Plain, 2)?;
                let first = matches!(spec.which, IntegralId::Series1 { .. });
                let decay = deg - v.growth_exponent(sigma) - zg.growth_exponent(sigma);
                let grid = grid_for(&spec, !first)?;
                let line = SampledLine::sample(&grid, decay, ts, |s| {
                    let g = factor * zg.eval(s)?.value * v.eval(s)?.value / ((s + 2.0) * (s + 3.0) * (s + 4.0));
                    Ok(if first { g / s } else { g })
                })?;
                (line, 4.0)
            }
        };
        Ok(Self { spec, shift, line })
    }

    pub fn at(&self, x: f64) -> Result<LineIntegral> {
        if !(x >= 2.0) {
            return Err(Error::Range(format!("line integrals need X ≥ 2, got {x}")));
        }
        Ok(self.line.integrate(x, self.shift))
    }

    pub fn node_count(&self) -> usize {
        self.line.node_count()
    }
}

/// 𝓕(s+1) sampled on the Perron line; shared by the four Perron kernels.
pub fn perron_base(spec: &LineIntegralSpec) -> Result<SampledLine> {
    let f = SeriesFactorization::new(SeriesId::F, Form::Plain, spec.prime_cutoff)?;
    let grid = grid_for(spec, true)?;
    SampledLine::sample(&grid, 1.5, spec.two_sided, |s| Ok(f.eval(s + 1.0)?.value))
}

/// All four Perron integrals from one sampling pass.
pub fn perron_family(spec: &LineIntegralSpec) -> Result<Vec<PreparedIntegral>> {
    let base = perron_base(spec)?;
    PerronKind::ALL
        .iter()
        .map(|&kind| {
            let s = LineIntegralSpec { which: IntegralId::Perron { kind }, ..*spec };
            Ok(PreparedIntegral {
                spec: s,
                shift: kind.shift(),
                line: base.reweight(kind.degree() - 0.2, |z| kind.kernel(z) * spec.factor)?,
            })
        })
        .collect()
}

pub fn line_integral(spec: LineIntegralSpec, x: f64) -> Result<LineIntegral> {
    PreparedIntegral::prepare(spec)?.at(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perron_linear_small_x() {
        assert!((PerronKind::Linear.direct_sum(3.0) - 3.5).abs() < 1e-15);
        assert_eq!(PerronKind::Log.direct_sum(1.0), 0.0);
        let spec = LineIntegralSpec::new(IntegralId::Perron { kind: PerronKind::Linear });
        let r = line_integral(spec, 3.0).unwrap();
        assert!((r.value - 3.5).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn zero_factor_gives_zero() {
        let mut spec = LineIntegralSpec::new(IntegralId::E);
        spec.factor = 0.0;
        spec.t_max = 20.0;
        let r = line_integral(spec, 100.0).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
