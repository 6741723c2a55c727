//! Derived-quantity calculators: flash-reflection correction, the dark-run
//! HDI-length predictor, and retinal background scaling.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use crate::math::{non_negative, positive};

#[derive(Debug, Error)]
pub enum BudgetError {
    #[error("flash model singular: rho_ratio * q = 1")]
    Singular,
    #[error("domain error: {0}")]
    Domain(String),
}

/// A Gaussian posterior summary in counts per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEstimate {
    pub mean: f64,
    pub sd: f64,
}

impl GaussianEstimate {
    pub fn new(mean: f64, sd: f64) -> Self {
        GaussianEstimate { mean, sd }
    }
}

/// Inputs to the flash-reflection correction: the difference posteriors from
/// the absorbing (b) and reflective (m) shutter-face campaigns, the ratio of
/// their closed-shutter count levels, and the surface reflectivity ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlashModelInput {
    pub delta_b: GaussianEstimate,
    pub delta_m: GaussianEstimate,
    /// Closed-shutter count-level ratio between the two campaigns.
    pub q: f64,
    /// Reflectivity ratio of the absorbing over the reflective face.
    pub rho_ratio: f64,
}

impl FlashModelInput {
    fn validate(&self) -> Result<(), BudgetError> {
        if !positive(self.q) {
            return Err(BudgetError::Domain(format!("q must be positive, got {}", self.q)));
        }
        if !non_negative(self.rho_ratio) {
            return Err(BudgetError::Domain(format!(
                "rho_ratio must be non-negative, got {}",
                self.rho_ratio
            )));
        }
        if !non_negative(self.delta_b.sd) || !non_negative(self.delta_m.sd) {
            return Err(BudgetError::Domain("standard deviations must be >= 0".into()));
        }
        Ok(())
    }
}

/// True light level once reflected flash counts are subtracted:
/// `(delta_b - r q delta_m) / (1 - r q)` with `r = rho_ratio`, propagated
/// exactly through the linear form assuming independent inputs.
pub fn flash_corrected(input: &FlashModelInput) -> Result<GaussianEstimate, BudgetError> {
    input.validate()?;
    let rq = input.rho_ratio * input.q;
    let denom = 1.0 - rq;
    if denom.abs() < 1e-12 {
        return Err(BudgetError::Singular);
    }
    let mean = (input.delta_b.mean - rq * input.delta_m.mean) / denom;
    let var = (input.delta_b.sd.powi(2) + (rq * input.delta_m.sd).powi(2)) / (denom * denom);
    Ok(GaussianEstimate::new(mean, var.sqrt()))
}

/// Evaluate the correction over a grid of reflectivity ratios.
pub fn flash_sweep(
    input: &FlashModelInput,
    rho_grid: &[f64],
) -> Result<Vec<(f64, GaussianEstimate)>, BudgetError> {
    rho_grid
        .iter()
        .map(|&rho| {
            let point = FlashModelInput {
                rho_ratio: rho,
                ..*input
            };
            flash_corrected(&point).map(|g| (rho, g))
        })
        .collect()
}

/// Gaussian z-score fixing the 0.95 interval.
pub const Z_95: f64 = 1.96;

/// Predicted 0.95-HDI length for a truly dark run: `1.96 sqrt(2 var_rd / n)`.
/// The factor two reflects the subtraction of two count distributions.
pub fn dark_hdi_length(var_rd: f64, n: usize) -> Result<f64, BudgetError> {
    if !positive(var_rd) {
        return Err(BudgetError::Domain(format!(
            "dark-rate variance must be positive, got {var_rd}"
        )));
    }
    if n == 0 {
        return Err(BudgetError::Domain("sample count must be >= 1".into()));
    }
    Ok(Z_95 * (2.0 * var_rd / n as f64).sqrt())
}

/// Reference spot diameter: the detector's active area, in millimetres.
pub const REFERENCE_SPOT_DIAMETER_MM: f64 = 0.180;

/// Scale a count-rate upper limit to a retinal spot of diameter `d` mm.
pub fn retina_scaling(upper_limit: f64, spot_diameter_mm: f64) -> Result<f64, BudgetError> {
    if !positive(spot_diameter_mm) {
        return Err(BudgetError::Domain(format!(
            "spot diameter must be positive, got {spot_diameter_mm}"
        )));
    }
    Ok(upper_limit * spot_diameter_mm / REFERENCE_SPOT_DIAMETER_MM)
}
