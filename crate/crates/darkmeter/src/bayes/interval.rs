//! Highest density intervals and direction probabilities from draws.

use super::BayesError;

const MIN_DRAWS: usize = 1000;

fn check_draws(draws: &[f64]) -> Result<(), BayesError> {
    if draws.len() < MIN_DRAWS {
        return Err(BayesError::TooFewDraws {
            need: MIN_DRAWS,
            have: draws.len(),
        });
    }
    Ok(())
}

/// Shortest contiguous interval containing `ceil(mass * n)` sorted draws.
pub fn hdi(draws: &[f64], mass: f64) -> Result<(f64, f64), BayesError> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(BayesError::Domain(format!(
            "HDI mass must be in (0, 1), got {mass}"
        )));
    }
    check_draws(draws)?;
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let w = ((mass * n as f64).ceil() as usize).clamp(1, n);
    let mut best = (sorted[0], sorted[w - 1]);
    let mut best_width = best.1 - best.0;
    for i in 1..=(n - w) {
        let width = sorted[i + w - 1] - sorted[i];
        if width < best_width {
            best_width = width;
            best = (sorted[i], sorted[i + w - 1]);
        }
    }
    Ok(best)
}

/// Posterior probability of positive direction: the fraction of draws
/// strictly greater than zero. Draws exactly at zero count as non-positive.
pub fn pd_plus(draws: &[f64]) -> Result<f64, BayesError> {
    check_draws(draws)?;
    let pos = draws.iter().filter(|&&d| d > 0.0).count();
    Ok(pos as f64 / draws.len() as f64)
}

/// The non-negative part of a draw set together with the retained fraction.
#[derive(Debug, Clone)]
pub struct PositivePart {
    pub draws: Vec<f64>,
    pub retained_fraction: f64,
}

/// Truncate draws to the non-negative half line.
pub fn positive_part(draws: &[f64]) -> Result<PositivePart, BayesError> {
    check_draws(draws)?;
    let kept: Vec<f64> = draws.iter().copied().filter(|&d| d >= 0.0).collect();
    let retained_fraction = kept.len() as f64 / draws.len() as f64;
    Ok(PositivePart {
        draws: kept,
        retained_fraction,
    })
}

/// Upper end of the zero-anchored interval holding `mass` of the truncated
/// draws, with the retained fraction. With no non-negative draws the bound
/// degenerates to zero (retained fraction 0 signals the empty positive part).
pub fn positive_upper_bound(draws: &[f64], mass: f64) -> Result<(f64, f64), BayesError> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(BayesError::Domain(format!(
            "mass must be in (0, 1), got {mass}"
        )));
    }
    let part = positive_part(draws)?;
    if part.draws.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut sorted = part.draws;
    sorted.sort_by(|a, b| a.total_cmp(b));
    let k = sorted.len();
    let idx = ((mass * k as f64).ceil() as usize).clamp(1, k) - 1;
    Ok((sorted[idx], part.retained_fraction))
}
