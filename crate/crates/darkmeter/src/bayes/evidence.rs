//! Savage-Dickey density ratios at the null value.
//!
//! The ratio is posterior density over prior density at zero. Values above
//! one favour the point null; a ratio of zero means the posterior places no
//! resolvable density at zero, i.e. decisive evidence against the null.

use crate::math::{normal_pdf, std_normal_cdf};

use super::density::{density_at, Support};
use super::interval::positive_part;
use super::{BayesError, PriorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdVariant {
    /// Full posterior over full prior.
    TwoSided,
    /// Both densities truncated to the non-negative half line, each
    /// renormalised to its positive mass.
    PositiveOnly,
}

/// Savage-Dickey ratio at zero from posterior draws of `mu`.
///
/// The prior side is exact (the normal prior is known in closed form); the
/// posterior side is a kernel density estimate of the draws, with reflection
/// at the boundary for the positive-only variant.
pub fn savage_dickey(
    posterior_draws: &[f64],
    prior: &PriorSpec,
    variant: SdVariant,
) -> Result<f64, BayesError> {
    prior.validate()?;
    let sigma0 = prior.sigma0_sq.sqrt();
    match variant {
        SdVariant::TwoSided => {
            let post = density_at(posterior_draws, 0.0, Support::Full)?.value;
            let prior_density = normal_pdf(0.0, prior.mu0, sigma0);
            Ok(post / prior_density)
        }
        SdVariant::PositiveOnly => {
            let part = positive_part(posterior_draws)?;
            if part.draws.len() < 1000 {
                return Err(BayesError::TooFewDraws {
                    need: 1000,
                    have: part.draws.len(),
                });
            }
            let post = density_at(&part.draws, 0.0, Support::NonNegative)?.value;
            let positive_mass = std_normal_cdf(prior.mu0 / sigma0);
            let prior_density = normal_pdf(0.0, prior.mu0, sigma0) / positive_mass;
            Ok(post / prior_density)
        }
    }
}
