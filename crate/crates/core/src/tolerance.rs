//! Comparison tolerance shared by every inequality check.
//!
//! Defaults to `1e-9`; the `ARGWF_EPS` environment variable overrides it
//! for the whole process (read once, on first use).

use std::sync::OnceLock;

pub const DEFAULT_EPS: f64 = 1e-9;
pub const ENV_VAR: &str = "ARGWF_EPS";

static EPS: OnceLock<f64> = OnceLock::new();

pub fn eps() -> f64 {
    *EPS.get_or_init(|| {
        std::env::var(ENV_VAR)
            .ok()
            .and_then(|raw| raw.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v >= 0.0)
            .unwrap_or(DEFAULT_EPS)
    })
}

/// `a > b` by more than the tolerance.
#[inline]
pub fn gt(a: f64, b: f64) -> bool {
    a > b + eps()
}

#[inline]
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= eps()
}
