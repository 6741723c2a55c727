//! Bayesian inference for the difference distribution.
//!
//! The model is a normal likelihood `delta ~ N(mu, sigma^2)` with
//! data-dependent priors
//!
//! ```text
//! mu      ~ N(mu0, sigma0^2)      mu0 = max(0, mean),  sigma0^2 = f_mu * var / n
//! sigma^2 ~ Gamma(alpha0, beta0)  beta0 = n / (2 * f_sigma * var),  alpha0 = var * beta0
//! ```
//!
//! so the prior means equal the sample moments while the broadening factors
//! `f_mu`, `f_sigma` widen the prior variances and weaken the information the
//! priors carry. Posterior draws come from a Metropolis-within-Gibbs sampler
//! ([`sample_posterior`]); every evidence measure (HDIs, probability of
//! positive direction, Savage-Dickey density ratios, prior-sensitivity sweep)
//! is computed from those draws.

mod density;
mod diagnostics;
mod evidence;
mod interval;
mod sampler;
mod sweep;

pub use density::{density_at, DensityEstimate, Support};
pub use diagnostics::{ess, split_rhat};
pub use evidence::{savage_dickey, SdVariant};
pub use interval::{hdi, pd_plus, positive_part, positive_upper_bound, PositivePart};
pub use sampler::{sample_posterior, SufficientStats};
pub use sweep::{default_f_grid, powerlaw_fit, sensitivity_sweep, SweepRow};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use crate::math::{non_negative, positive};

#[derive(Debug, Error)]
pub enum BayesError {
    #[error("degenerate prior: {0}")]
    DegeneratePrior(String),
    #[error("invalid MCMC config: {0}")]
    InvalidConfig(String),
    #[error("insufficient data: need at least {need} samples, have {have}")]
    InsufficientData { need: usize, have: usize },
    #[error("too few draws: need at least {need}, have {have}")]
    TooFewDraws { need: usize, have: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate draws: {0}")]
    DegenerateDraws(String),
    #[error("power-law fit error: {0}")]
    Fit(String),
}

/// Data-derived prior hyperparameters for `(mu, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    /// Prior mean of `mu`, counts per second. Non-negative by construction.
    pub mu0: f64,
    /// Prior variance of `mu`.
    pub sigma0_sq: f64,
    /// Gamma shape for `sigma^2`.
    pub alpha0: f64,
    /// Gamma rate for `sigma^2`.
    pub beta0: f64,
    pub f_mu: f64,
    pub f_sigma: f64,
}

impl PriorSpec {
    pub fn validate(&self) -> Result<(), BayesError> {
        if !positive(self.sigma0_sq) || !positive(self.alpha0) || !positive(self.beta0) {
            return Err(BayesError::DegeneratePrior(
                "sigma0_sq, alpha0 and beta0 must be positive".into(),
            ));
        }
        if !non_negative(self.mu0) {
            return Err(BayesError::DegeneratePrior("mu0 must be >= 0".into()));
        }
        if !positive(self.f_mu) || !positive(self.f_sigma) {
            return Err(BayesError::DegeneratePrior(
                "broadening factors must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Build the data-dependent priors from summary statistics.
pub fn derive_priors(
    stats: &SufficientStats,
    f_mu: f64,
    f_sigma: f64,
) -> Result<PriorSpec, BayesError> {
    if stats.n < 2 {
        return Err(BayesError::InsufficientData {
            need: 2,
            have: stats.n,
        });
    }
    if !positive(stats.variance) {
        return Err(BayesError::DegeneratePrior(format!(
            "sample variance must be positive (got {})",
            stats.variance
        )));
    }
    if !positive(f_mu) || !positive(f_sigma) {
        return Err(BayesError::DegeneratePrior(
            "broadening factors must be positive".into(),
        ));
    }
    let n = stats.n as f64;
    let beta0 = n / (2.0 * f_sigma * stats.variance);
    Ok(PriorSpec {
        mu0: stats.mean.max(0.0),
        sigma0_sq: f_mu * stats.variance / n,
        alpha0: stats.variance * beta0,
        beta0,
        f_mu,
        f_sigma,
    })
}

/// Sampler run configuration. `kept_draws` is per chain, so the total number
/// of retained draws is `chains * kept_draws`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub chains: usize,
    pub warmup_draws: usize,
    pub kept_draws: usize,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        // 4 x 15000 = 6e4 retained draws.
        McmcConfig {
            chains: 4,
            warmup_draws: 1500,
            kept_draws: 15_000,
            seed: 42,
        }
    }
}

impl McmcConfig {
    pub fn target_total_kept(&self) -> usize {
        self.chains * self.kept_draws
    }

    pub fn validate(&self) -> Result<(), BayesError> {
        if self.chains < 2 {
            return Err(BayesError::InvalidConfig("need at least 2 chains".into()));
        }
        if self.kept_draws == 0 {
            return Err(BayesError::InvalidConfig("kept_draws must be > 0".into()));
        }
        Ok(())
    }
}

/// Split-Rhat and effective sample size per parameter, with the convergence
/// verdict. Evidence must not be computed from non-converged runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub mu_rhat: f64,
    pub mu_ess: f64,
    pub sigma_sq_rhat: f64,
    pub sigma_sq_ess: f64,
    pub converged: bool,
}

pub const RHAT_THRESHOLD: f64 = 1.01;
pub const ESS_THRESHOLD: f64 = 1000.0;

/// Posterior draws, merged in chain order.
#[derive(Debug, Clone)]
pub struct PosteriorSamples {
    pub mu_draws: Vec<f64>,
    pub sigma_sq_draws: Vec<f64>,
    pub chains: usize,
    pub draws_per_chain: usize,
    pub diagnostics: ChainDiagnostics,
}

impl PosteriorSamples {
    /// View of one chain's `mu` draws.
    pub fn mu_chain(&self, chain: usize) -> &[f64] {
        let a = chain * self.draws_per_chain;
        &self.mu_draws[a..a + self.draws_per_chain]
    }

    pub fn sigma_sq_chain(&self, chain: usize) -> &[f64] {
        let a = chain * self.draws_per_chain;
        &self.sigma_sq_draws[a..a + self.draws_per_chain]
    }
}

/// Point summaries and evidence measures for the `mu` posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub sd: f64,
    pub hdi_full: (f64, f64),
    /// Upper end of the zero-anchored interval holding `mass` of the
    /// positive-truncated posterior.
    pub hdi_pos_upper: f64,
    /// Fraction of draws retained by the non-negative truncation.
    pub positive_fraction: f64,
    /// Posterior probability that `mu` is strictly positive.
    pub pd_plus: f64,
    /// Savage-Dickey ratio at zero from the full distributions.
    pub sd_ratio_full: f64,
    /// Savage-Dickey ratio at zero from the positive parts. Absent when too
    /// few draws survive the truncation to estimate a boundary density.
    pub sd_ratio_pos: Option<f64>,
    /// Broadening factor the priors were built with.
    pub f: f64,
    /// Probability mass used for the HDIs.
    pub mass: f64,
}

/// Reduce posterior draws to the standard summary at a given HDI mass.
pub fn summarize_posterior(
    samples: &PosteriorSamples,
    prior: &PriorSpec,
    mass: f64,
) -> Result<PosteriorSummary, BayesError> {
    let draws = &samples.mu_draws;
    let (mean, var) = crate::math::sample_mean_var(draws);
    let hdi_full = interval::hdi(draws, mass)?;
    let (upper, retained) = interval::positive_upper_bound(draws, mass)?;
    let pd = interval::pd_plus(draws)?;
    let sd_full = evidence::savage_dickey(draws, prior, SdVariant::TwoSided)?;
    let sd_pos = match evidence::savage_dickey(draws, prior, SdVariant::PositiveOnly) {
        Ok(v) => Some(v),
        Err(BayesError::TooFewDraws { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(PosteriorSummary {
        mean,
        sd: var.sqrt(),
        hdi_full,
        hdi_pos_upper: upper,
        positive_fraction: retained,
        pd_plus: pd,
        sd_ratio_full: sd_full,
        sd_ratio_pos: sd_pos,
        f: prior.f_mu,
        mass,
    })
}
