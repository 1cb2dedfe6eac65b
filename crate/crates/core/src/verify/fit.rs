//! Least-squares exponent fits of residual growth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// (X, residual) as supplied, zeros included.
    pub points: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub target_exponent: f64,
    /// Fewer than two nonzero residuals, so no slope exists.
    pub degenerate: bool,
    pub pass: bool,
}

/// Fits log|residual| = intercept + slope·log X over the nonzero residuals.
pub fn exponent_fit(points: &[(f64, f64)], target_exponent: f64) -> Result<FitReport> {
    if let Some(&(x, _)) = points.iter().find(|(x, _)| !(*x > 0.0)) {
        return Err(Error::Range(format!("fit abscissa {x} must be positive")));
    }
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, r)| *r != 0.0 && r.is_finite())
        .map(|&(x, r)| (x.ln(), r.abs().ln()))
        .collect();
    let degenerate = used.len() < 2 || used.iter().all(|(lx, _)| *lx == used[0].0);
    let (slope, intercept) = if degenerate {
        (None, None)
    } else {
        let n = used.len() as f64;
        let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
        let my = used.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = used.iter().map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = used.iter().map(|(a, _)| (a - mx) * (a - mx)).sum();
        let slope = sxy / sxx;
        (Some(slope), Some(my - slope * mx))
    };
    let pass = slope.map_or(true, |s| s <= target_exponent);
    Ok(FitReport { points: points.to_vec(), slope, intercept, target_exponent, degenerate, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..12).map(|k| 100.0 * 1.6f64.powi(k)).collect()
    }

    #[test]
    fn pure_power() {
        let pts: Vec<_> = grid().into_iter().map(|x| (x, x.powi(3))).collect();
        let f = exponent_fit(&pts, 3.5).unwrap();
        assert!((f.slope.unwrap() - 3.0).abs() < 1e-6);
        assert!(f.pass);
    }

    #[test]
    fn oscillating_power() {
        let pts: Vec<_> = grid().into_iter().map(|x| (x, x.powf(3.4) * (2.0 + x.ln().sin()))).collect();
        let s = exponent_fit(&pts, 3.5).unwrap().slope.unwrap();
        assert!((3.2..=3.6).contains(&s), "{s}");
    }

    #[test]
    fn degenerate_cases() {
        let zeros: Vec<_> = grid().into_iter().map(|x| (x, 0.0)).collect();
        let f = exponent_fit(&zeros, 3.5).unwrap();
        assert!(f.degenerate && f.pass && f.slope.is_none());
        let one = [(10.0, 0.0), (20.0, 5.0), (40.0, 0.0)];
        assert!(exponent_fit(&one, 1.0).unwrap().degenerate);
        assert!(exponent_fit(&[(0.0, 1.0), (1.0, 1.0)], 1.0).is_err());
    }

    #[test]
    fn sign_is_ignored() {
        let pts: Vec<_> = grid().into_iter().map(|x| (x, -2.0 * x * x)).collect();
        let f = exponent_fit(&pts, 1.5).unwrap();
        assert!((f.slope.unwrap() - 2.0).abs() < 1e-9);
        assert!(!f.pass);
    }
}
