use serde::{Deserialize, Serialize};

use crate::error::{OpsError, Result};

/// Absolute and relative tolerances for every approximate equality.
///
/// A residual `r` is numerically zero when `r ≤ abs_tol + rel_tol · scale`,
/// where `scale` is the largest Frobenius norm among the terms being compared.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { abs_tol: 1e-10, rel_tol: 1e-8 }
    }
}

impl ToleranceConfig {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if !(abs_tol >= 0.0 && abs_tol.is_finite()) || !(rel_tol >= 0.0 && rel_tol.is_finite()) {
            return Err(OpsError::InvalidArgument(format!(
                "tolerances must be finite and nonnegative, got abs={abs_tol}, rel={rel_tol}"
            )));
        }
        Ok(ToleranceConfig { abs_tol, rel_tol })
    }

    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_tol + self.rel_tol * scale
    }

    pub fn is_zero(&self, residual: f64, scale: f64) -> bool {
        residual <= self.threshold(scale)
    }

    /// Singular values at or below this cutoff count as zero.
    pub fn rank_cutoff(&self, sigma_max: f64) -> f64 {
        self.rel_tol * sigma_max
    }

    /// Half-width of the band around the unit circle treated as `|λ| = 1`.
    pub fn unit_band(&self, spectral_radius: f64) -> f64 {
        self.rel_tol * spectral_radius.max(1.0)
    }
}
