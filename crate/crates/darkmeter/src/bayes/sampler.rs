//! Metropolis-within-Gibbs sampler for the normal model.
//!
//! `mu` has a conjugate normal conditional given `sigma^2` and is drawn
//! exactly. The Gamma prior on the variance is non-conjugate, so `sigma^2`
//! moves by an adaptive random-walk Metropolis step on `ln sigma^2`; the step
//! size adapts towards a 0.44 acceptance rate during warmup and is frozen
//! afterwards. The likelihood is evaluated through the sufficient statistics
//! `(n, mean, variance)`, which is exact for this model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::math::{positive, splitmix64};
use crate::protocol::{DifferenceSeries, SeriesSummary};

use super::diagnostics::{ess, split_rhat};
use super::{
    BayesError, ChainDiagnostics, McmcConfig, PosteriorSamples, PriorSpec, ESS_THRESHOLD,
    RHAT_THRESHOLD,
};

/// The sufficient statistics of a sample under the normal likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SufficientStats {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
}

impl SufficientStats {
    pub fn new(n: usize, mean: f64, variance: f64) -> Self {
        SufficientStats { n, mean, variance }
    }

    pub fn validate(&self) -> Result<(), BayesError> {
        if self.n < 2 {
            return Err(BayesError::InsufficientData {
                need: 2,
                have: self.n,
            });
        }
        if !positive(self.variance) || !self.mean.is_finite() {
            return Err(BayesError::Domain(format!(
                "need finite mean and positive variance (got {}, {})",
                self.mean, self.variance
            )));
        }
        Ok(())
    }
}

impl From<&SeriesSummary> for SufficientStats {
    fn from(s: &SeriesSummary) -> Self {
        SufficientStats::new(s.n, s.mean, s.variance)
    }
}

impl From<&DifferenceSeries> for SufficientStats {
    fn from(d: &DifferenceSeries) -> Self {
        let (mean, variance) = crate::math::sample_mean_var(d.samples());
        SufficientStats::new(d.n(), mean, variance)
    }
}

struct Model {
    n: f64,
    mean: f64,
    mu0: f64,
    sigma0_sq: f64,
    alpha0: f64,
    beta0: f64,
    /// (n - 1) * sample variance, the residual sum of squares around the mean.
    ss_about_mean: f64,
}

impl Model {
    fn new(stats: &SufficientStats, prior: &PriorSpec) -> Self {
        Model {
            n: stats.n as f64,
            mean: stats.mean,
            mu0: prior.mu0,
            sigma0_sq: prior.sigma0_sq,
            alpha0: prior.alpha0,
            beta0: prior.beta0,
            ss_about_mean: (stats.n as f64 - 1.0) * stats.variance,
        }
    }

    /// Unnormalised log density of `sigma^2` given `mu`.
    fn log_post_sigma_sq(&self, sigma_sq: f64, mu: f64) -> f64 {
        let ss = self.ss_about_mean + self.n * (self.mean - mu) * (self.mean - mu);
        -0.5 * self.n * sigma_sq.ln() - ss / (2.0 * sigma_sq) + (self.alpha0 - 1.0) * sigma_sq.ln()
            - self.beta0 * sigma_sq
    }

    /// Exact conjugate draw of `mu` given `sigma^2`.
    fn draw_mu(&self, sigma_sq: f64, rng: &mut ChaCha12Rng) -> f64 {
        let prec = 1.0 / self.sigma0_sq + self.n / sigma_sq;
        let m = (self.mu0 / self.sigma0_sq + self.n * self.mean / sigma_sq) / prec;
        m + standard_normal(rng) / prec.sqrt()
    }
}

fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    use rand_distr::StandardNormal;
    rng.sample(StandardNormal)
}

/// Draw from `p(mu, sigma^2 | data)` and attach convergence diagnostics.
///
/// The result carries a `converged` flag instead of failing on bad
/// diagnostics; callers must not compute evidence from flagged runs.
pub fn sample_posterior(
    stats: &SufficientStats,
    prior: &PriorSpec,
    cfg: &McmcConfig,
) -> Result<PosteriorSamples, BayesError> {
    stats.validate()?;
    prior.validate()?;
    cfg.validate()?;

    let model = Model::new(stats, prior);
    let mut mu_chains: Vec<Vec<f64>> = Vec::with_capacity(cfg.chains);
    let mut s2_chains: Vec<Vec<f64>> = Vec::with_capacity(cfg.chains);

    for chain in 0..cfg.chains {
        let mut rng = ChaCha12Rng::seed_from_u64(splitmix64(cfg.seed, chain as u64));

        // Mildly overdispersed starts around the data moments.
        let se = (stats.variance / model.n).sqrt();
        let mut mu = stats.mean + 0.5 * se * standard_normal(&mut rng);
        let mut sigma_sq = stats.variance * (0.2 * standard_normal(&mut rng)).exp();

        // Initial log step sized to the rough posterior scale of ln sigma^2.
        let f_sigma = prior.f_sigma;
        let mut step = (2.4 * (2.0 * f_sigma / ((1.0 + f_sigma) * model.n)).sqrt())
            .clamp(1e-8, 1.0);

        let mut accepted = 0usize;
        const BATCH: usize = 50;

        for it in 0..cfg.warmup_draws {
            if metropolis_sigma_step(&model, &mut sigma_sq, mu, step, &mut rng) {
                accepted += 1;
            }
            mu = model.draw_mu(sigma_sq, &mut rng);
            if (it + 1).is_multiple_of(BATCH) {
                let rate = accepted as f64 / BATCH as f64;
                step = (step * (rate - 0.44).exp()).clamp(1e-9, 4.0);
                accepted = 0;
            }
        }

        let mut mu_draws = Vec::with_capacity(cfg.kept_draws);
        let mut s2_draws = Vec::with_capacity(cfg.kept_draws);
        for _ in 0..cfg.kept_draws {
            metropolis_sigma_step(&model, &mut sigma_sq, mu, step, &mut rng);
            mu = model.draw_mu(sigma_sq, &mut rng);
            mu_draws.push(mu);
            s2_draws.push(sigma_sq);
        }
        mu_chains.push(mu_draws);
        s2_chains.push(s2_draws);
    }

    let mu_rhat = split_rhat(&mu_chains);
    let mu_ess = ess(&mu_chains);
    let s2_rhat = split_rhat(&s2_chains);
    let s2_ess = ess(&s2_chains);
    let diagnostics = ChainDiagnostics {
        mu_rhat,
        mu_ess,
        sigma_sq_rhat: s2_rhat,
        sigma_sq_ess: s2_ess,
        converged: mu_rhat <= RHAT_THRESHOLD
            && s2_rhat <= RHAT_THRESHOLD
            && mu_ess >= ESS_THRESHOLD
            && s2_ess >= ESS_THRESHOLD,
    };

    let draws_per_chain = cfg.kept_draws;
    let mu_draws: Vec<f64> = mu_chains.into_iter().flatten().collect();
    let sigma_sq_draws: Vec<f64> = s2_chains.into_iter().flatten().collect();
    Ok(PosteriorSamples {
        mu_draws,
        sigma_sq_draws,
        chains: cfg.chains,
        draws_per_chain,
        diagnostics,
    })
}

fn metropolis_sigma_step(
    model: &Model,
    sigma_sq: &mut f64,
    mu: f64,
    step: f64,
    rng: &mut ChaCha12Rng,
) -> bool {
    let x = sigma_sq.ln();
    let x_new = x + step * standard_normal(rng);
    let s2_new = x_new.exp();
    if !s2_new.is_finite() || s2_new <= 0.0 {
        return false;
    }
    // Jacobian of the log transform enters as (x_new - x).
    let log_ratio = model.log_post_sigma_sq(s2_new, mu) - model.log_post_sigma_sq(*sigma_sq, mu)
        + (x_new - x);
    let u: f64 = rng.random();
    if u.ln() < log_ratio {
        *sigma_sq = s2_new;
        true
    } else {
        false
    }
}
