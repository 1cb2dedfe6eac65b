//! Gauss–Kronrod quadrature, on real intervals and along vertical lines
//! σ + it.

use serde::{Deserialize, Serialize};

use super::C64;
use crate::error::{Error, Result};
use crate::sum::{chunked_map, Neumaier};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15 nodes on [a, b] with Kronrod and embedded Gauss weights.
pub fn gk15_nodes(a: f64, b: f64) -> [(f64, f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0, 0.0); 15];
    for i in 0..7 {
        let wg = if i % 2 == 1 { WG[i / 2] * h } else { 0.0 };
        out[2 * i] = (c - h * XGK[i], WGK[i] * h, wg);
        out[2 * i + 1] = (c + h * XGK[i], WGK[i] * h, wg);
    }
    out[14] = (c, WGK[7] * h, WG[3] * h);
    out
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (mut k, mut g) = (0.0, 0.0);
    for (x, wk, wg) in gk15_nodes(a, b) {
        let v = f(x);
        k += wk * v;
        g += wg * v;
    }
    (k, (k - g).abs())
}

/// Adaptive bisection until the Kronrod–Gauss difference is below tol.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let mut stack = vec![(a, b, 0u32)];
    let (mut val, mut err) = (Neumaier::new(), 0.0);
    let width = (b - a).abs().max(f64::MIN_POSITIVE);
    while let Some((lo, hi, depth)) = stack.pop() {
        let (k, e) = gk15(f, lo, hi);
        let share = tol * (hi - lo).abs() / width;
        if e <= share.max(1e-15 * k.abs()) || depth >= 40 {
            if depth >= 40 && e > share {
                return Err(Error::Quadrature(format!("adaptive split limit on [{lo}, {hi}]")));
            }
            val.add(k);
            err += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok((val.value(), err))
}

/// Panel edges in t for a line integral: geometric near t = 0 when a pole
/// lies at distance `near` from the line, uniform of width `width` after.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineGrid {
    pub sigma: f64,
    pub t_max: f64,
    pub width: f64,
    pub near: Option<f64>,
    pub edges: Vec<f64>,
}

pub const MAX_PANELS: usize = 400_000;

impl LineGrid {
    pub fn new(sigma: f64, t_max: f64, width: f64, near: Option<f64>) -> Result<Self> {
        if !(t_max > 0.0 && width > 0.0) {
            return Err(Error::Range("line grid needs positive height and width".into()));
        }
        let mut edges = vec![0.0];
        if let Some(d) = near {
            let mut h = d / 2.0;
            while h < width.min(t_max) {
                edges.push(h);
                h *= 2.0;
            }
        }
        let start = *edges.last().unwrap();
        let n = ((t_max - start) / width).ceil().max(1.0) as usize;
        if n + edges.len() > MAX_PANELS {
            return Err(Error::Budget(format!("{n} panels exceed the limit {MAX_PANELS}")));
        }
        let step = (t_max - start) / n as f64;
        for i in 1..=n {
            edges.push(if i == n { t_max } else { start + step * i as f64 });
        }
        Ok(Self { sigma, t_max, width, near, edges })
    }

    pub fn panels(&self) -> usize {
        self.edges.len() - 1
    }
}

/// Integrand values cached at the quadrature nodes so that many X reuse
/// one sampling pass.
#[derive(Clone, Debug)]
pub struct SampledLine {
    pub sigma: f64,
    pub t_max: f64,
    /// Integrand decay exponent e: |G(σ+it)| ≤ C t^{-e} beyond t_max.
    pub decay: f64,
    tail_constant: f64,
    nodes: Vec<(f64, f64, f64)>,
    values: Vec<C64>,
    mirror: Option<Vec<C64>>,
}

/// Output of a line integral: value of (1/2πi)∫ G(s) X^{s+shift} ds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineIntegral {
    pub value: f64,
    /// Imaginary part, only meaningful for two-sided sampling.
    pub imag: f64,
    pub discretization: f64,
    pub tail: f64,
    pub error_estimate: f64,
}

impl SampledLine {
    pub fn sample<F>(grid: &LineGrid, decay: f64, two_sided: bool, f: F) -> Result<Self>
    where
        F: Fn(C64) -> Result<C64> + Sync,
    {
        if !(decay > 1.0) {
            return Err(Error::Quadrature(format!("integrand decay exponent {decay} ≤ 1")));
        }
        let nodes: Vec<(f64, f64, f64)> = grid
            .edges
            .windows(2)
            .flat_map(|w| gk15_nodes(w[0], w[1]))
            .collect();
        let eval = |sign: f64| -> Result<Vec<C64>> {
            chunked_map(nodes.len(), 15 * 64, |r| {
                nodes[r].iter().map(|&(t, _, _)| f(C64::new(grid.sigma, sign * t))).collect::<Result<Vec<_>>>()
            })
            .into_iter()
            .try_fold(Vec::with_capacity(nodes.len()), |mut acc, part| {
                acc.extend(part?);
                Ok(acc)
            })
        };
        let values = eval(1.0)?;
        let mirror = if two_sided { Some(eval(-1.0)?) } else { None };
        let t_lo = 0.75 * grid.t_max;
        let tail_constant = nodes
            .iter()
            .zip(&values)
            .filter(|((t, _, _), _)| *t >= t_lo)
            .map(|((t, _, _), v)| v.norm() * t.powf(decay))
            .fold(0.0, f64::max)
            * 2.0;
        Ok(Self { sigma: grid.sigma, t_max: grid.t_max, decay, tail_constant, nodes, values, mirror })
    }

    /// The same nodes with every value multiplied by w(s).
    pub fn reweight<W: Fn(C64) -> C64>(&self, decay: f64, w: W) -> Result<Self> {
        if !(decay > 1.0) {
            return Err(Error::Quadrature(format!("integrand decay exponent {decay} ≤ 1")));
        }
        let sigma = self.sigma;
        let values: Vec<C64> =
            self.nodes.iter().zip(&self.values).map(|(&(t, _, _), v)| v * w(C64::new(sigma, t))).collect();
        let mirror = self.mirror.as_ref().map(|m| {
            self.nodes.iter().zip(m).map(|(&(t, _, _), v)| v * w(C64::new(sigma, -t))).collect()
        });
        let t_lo = 0.75 * self.t_max;
        let tail_constant = self
            .nodes
            .iter()
            .zip(&values)
            .filter(|((t, _, _), _)| *t >= t_lo)
            .map(|((t, _, _), v)| v.norm() * t.powf(decay))
            .fold(0.0, f64::max)
            * 2.0;
        Ok(Self { sigma, t_max: self.t_max, decay, tail_constant, nodes: self.nodes.clone(), values, mirror })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// (1/2πi)∫_{(σ)} G(s) X^{s+shift} ds.
    pub fn integrate(&self, x: f64, shift: f64) -> LineIntegral {
        let lx = x.ln();
        let scale = (lx * (self.sigma + shift)).exp();
        let (mut val, mut imag) = (Neumaier::new(), Neumaier::new());
        let mut disc = 0.0;
        for (p, chunk) in self.nodes.chunks(15).enumerate() {
            let (mut k, mut g) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for (j, &(t, wk, wg)) in chunk.iter().enumerate() {
                let i = p * 15 + j;
                let rot = C64::new(0.0, t * lx).exp();
                let term = match &self.mirror {
                    Some(m) => (self.values[i] * rot + m[i] * rot.conj()) * 0.5,
                    None => C64::new((self.values[i] * rot).re, 0.0),
                };
                k += term * wk;
                g += term * wg;
            }
            val.add(k.re);
            imag.add(k.im);
            disc += (k - g).norm();
        }
        let f = scale / std::f64::consts::PI;
        let tail = f * self.tail_constant * self.t_max.powf(1.0 - self.decay) / (self.decay - 1.0);
        let discretization = f * disc;
        LineIntegral {
            value: f * val.value(),
            imag: f * imag.value(),
            discretization,
            tail,
            error_estimate: discretization + tail,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_weights_sum_to_length() {
        let n = gk15_nodes(-1.0, 1.0);
        let k: f64 = n.iter().map(|x| x.1).sum();
        let g: f64 = n.iter().map(|x| x.2).sum();
        assert!((k - 2.0).abs() < 1e-15 && (g - 2.0).abs() < 1e-15);
        let poly: f64 = n.iter().map(|&(x, w, _)| w * x.powi(20)).sum();
        assert!((poly - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let (v, e) = adaptive(&|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10).unwrap();
        let want = 2.0 * 100.0 * (100.0f64).atan();
        assert!((v - want).abs() < 1e-8, "{v} {want} {e}");
    }

    #[test]
    fn inverse_mellin_of_simple_pole() {
        // (1/2πi)∫_{(2)} X^s/(s(s+1)) ds = 1 − 1/X for X > 1.
        let grid = LineGrid::new(2.0, 4000.0, 0.25, None).unwrap();
        let line = SampledLine::sample(&grid, 2.0, true, |s| Ok(1.0 / (s * (s + 1.0)))).unwrap();
        for x in [1.5, 10.0, 300.0] {
            let r = line.integrate(x, 0.0);
            let want = 1.0 - 1.0 / x;
            assert!((r.value - want).abs() <= r.error_estimate + 1e-9, "{x}: {} vs {want} ({:?})", r.value, r);
            assert!(r.imag.abs() <= r.error_estimate);
        }
    }

    #[test]
    fn zero_integrand() {
        let grid = LineGrid::new(-0.5, 100.0, 0.5, None).unwrap();
        let line = SampledLine::sample(&grid, 2.0, false, |_| Ok(C64::new(0.0, 0.0))).unwrap();
        let r = line.integrate(1000.0, 4.0);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.error_estimate, 0.0);
    }

    #[test]
    fn insufficient_decay() {
        let grid = LineGrid::new(0.5, 10.0, 1.0, None).unwrap();
        assert!(SampledLine::sample(&grid, 1.0, false, |_| Ok(C64::new(1.0, 0.0))).is_err());
    }

    #[test]
    fn near_pole_grading() {
        let g = LineGrid::new(0.01, 10.0, 0.25, Some(0.01)).unwrap();
        assert_eq!(g.edges[1], 0.005);
        assert!(g.edges.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*g.edges.last().unwrap(), 10.0);
    }
}
