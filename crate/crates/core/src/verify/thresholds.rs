//! Every pass/fail threshold and test grid used by the checks.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
/// Missing keys take their default values.
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub local_p_max: u64,
    pub local_s_samples: Vec<i32>,
    pub local_runtime_secs: f64,

    pub c5c6c8_abs: f64,
    pub c3h1_abs: f64,
    pub u1_zprod_abs: f64,
    pub u0_reg_abs: f64,
    pub z_abs: f64,

    pub coefficient_n_max: usize,

    pub perron_grid: Vec<f64>,
    pub perron_rel: f64,
    pub perron_residual_grid: Vec<f64>,
    pub perron_residual_slope_max: f64,
    pub f1_reading_grid: Vec<f64>,
    pub f1_reading_rel: f64,

    pub lemma_grid: Vec<f64>,
    pub lemma_slope_max: f64,
    pub lemma_main_term_fraction: f64,
    pub lemma_runtime_secs: f64,
    pub step1_x_max: f64,
    pub step1_per_unit: u32,
    pub step1_rel: f64,

    pub method_grid: Vec<f64>,
    pub method_pairs: Vec<(u64, u64)>,
    pub method1_d1_slope_max: f64,
    pub method1_margin: f64,
    pub method2_slope_max: f64,
    /// (d_small, d_large): the d_large intercept must lie below.
    pub method2_intercept_pair: (u64, u64),
    pub kd_consistency_rel: f64,

    pub theta_chain_abs: f64,
    pub series_truncations: Vec<u64>,
    pub dsum_cutoffs: Vec<u64>,

    pub decomposition_cases: Vec<(f64, f64)>,
    pub decomposition_rel: f64,
    pub theorem_xs: Vec<f64>,
    pub v_ratio_range: (f64, f64),
    pub theorem_runtime_secs: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            local_p_max: 100_000,
            local_s_samples: vec![0, 1, 2],
            local_runtime_secs: 60.0,

            c5c6c8_abs: 1e-10,
            c3h1_abs: 1e-10,
            u1_zprod_abs: 1e-8,
            u0_reg_abs: 1e-10,
            z_abs: 1e-10,

            coefficient_n_max: 10_000,

            perron_grid: vec![50.0, 200.0, 1000.0],
            perron_rel: 1e-3,
            perron_residual_grid: (0..=15).map(|k| 100.0 * 10f64.powf(k as f64 / 5.0)).collect(),
            perron_residual_slope_max: 0.2,
            f1_reading_grid: vec![100.5, 1000.0, 10_000.0],
            f1_reading_rel: 1e-5,

            lemma_grid: vec![500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16_000.0],
            lemma_slope_max: 3.5,
            lemma_main_term_fraction: 1e-2,
            lemma_runtime_secs: 600.0,
            step1_x_max: 200.0,
            step1_per_unit: 4,
            step1_rel: 1e-9,

            method_grid: vec![500.0, 1000.0, 2000.0, 4000.0, 8000.0],
            method_pairs: vec![(1, 1), (2, 1), (1, 2), (3, 1)],
            method1_d1_slope_max: 3.2,
            method1_margin: 0.2,
            method2_slope_max: 4.1,
            method2_intercept_pair: (1, 5),
            kd_consistency_rel: 1e-6,

            theta_chain_abs: 1e-6,
            series_truncations: vec![1_000, 10_000, 100_000],
            dsum_cutoffs: vec![250, 500, 1000, 2000],

            decomposition_cases: vec![(1e3, 20.0), (1e4, 50.0)],
            decomposition_rel: 1e-9,
            theorem_xs: vec![1e4, 1e5, 1e6],
            v_ratio_range: (0.75, 1.25),
            theorem_runtime_secs: 900.0,
        }
    }
}

impl Thresholds {
    /// Target slope for the first method: 3 + 0.2 at d = 1, and
    /// max(3, 2.5 + 1.5·log d/log X_min) + 0.2 otherwise.
    pub fn method1_target(&self, d: u64) -> f64 {
        if d == 1 {
            return self.method1_d1_slope_max;
        }
        let x_min = self.method_grid.iter().cloned().fold(f64::INFINITY, f64::min);
        (2.5 + 1.5 * (d as f64).ln() / x_min.ln()).max(3.0) + self.method1_margin
    }
}
