//! Full Bayesian darkness analysis from campaign summary statistics: the
//! posterior for the mean light level, its highest-density intervals, the
//! probability of positive direction, and the Savage-Dickey evidence for the
//! no-light hypothesis.
//!
//! Run with: cargo run --example reference_analysis

use darkmeter::bayes::{
    derive_priors, sample_posterior, summarize_posterior, McmcConfig, SufficientStats,
};

fn main() {
    // 616 h black-shutter campaign, reduced to its sufficient statistics.
    let stats = SufficientStats::new(997_920, -4.14e-3, 445.21);
    let f = 10.0;

    let prior = derive_priors(&stats, f, f).unwrap();
    println!("prior: mu ~ N({:.3e}, {:.3e})", prior.mu0, prior.sigma0_sq);
    println!(
        "       sigma^2 ~ Gamma(alpha = {:.3e}, beta = {:.3e})",
        prior.alpha0, prior.beta0
    );

    let cfg = McmcConfig::default();
    let samples = sample_posterior(&stats, &prior, &cfg).unwrap();
    println!(
        "\n{} chains x {} kept draws; mu Rhat {:.4}, ESS {:.0}; sigma^2 Rhat {:.4}, ESS {:.0}",
        cfg.chains,
        cfg.kept_draws,
        samples.diagnostics.mu_rhat,
        samples.diagnostics.mu_ess,
        samples.diagnostics.sigma_sq_rhat,
        samples.diagnostics.sigma_sq_ess,
    );

    let s = summarize_posterior(&samples, &prior, 0.95).unwrap();
    println!("\nposterior mean  {:+.3e} cnt/s", s.mean);
    println!("posterior sd     {:.3e} cnt/s", s.sd);
    println!("0.95 HDI        [{:+.3e}, {:+.3e}]", s.hdi_full.0, s.hdi_full.1);
    println!("pd+              {:.3}  (0.5 means direction fully uncertain)", s.pd_plus);
    println!("light level     < {:.3e} cnt/s  (positive-part 0.95 upper bound)", s.hdi_pos_upper);
    println!(
        "evidence for zero light: density ratio {:.2} (full), {:.2} (positive part)",
        s.sd_ratio_full,
        s.sd_ratio_pos.unwrap_or(f64::NAN)
    );
}
