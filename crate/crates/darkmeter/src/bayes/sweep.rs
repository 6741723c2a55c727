//! Prior-sensitivity sweep over the broadening factor and the power-law fit
//! describing how the Savage-Dickey ratio grows with it.

use crate::math::splitmix64;

use super::sampler::{sample_posterior, SufficientStats};
use super::{derive_priors, summarize_posterior, BayesError, ChainDiagnostics, McmcConfig,
            PosteriorSummary};

/// One full analysis at a single broadening factor.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub f: f64,
    pub summary: PosteriorSummary,
    pub diagnostics: ChainDiagnostics,
}

/// The default broadening grid: log-spaced factors plus the quasi-flat
/// `0.707 * n` point matching the default analytic Cauchy scale.
pub fn default_f_grid(n: usize) -> Vec<f64> {
    let mut grid = vec![
        1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1e3, 1e4, 1e5,
        0.707 * n as f64,
    ];
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    grid
}

/// Run one posterior analysis per broadening factor.
///
/// Each run gets its own deterministic sub-seed, so the sweep as a whole is
/// reproducible from the config seed.
pub fn sensitivity_sweep(
    stats: &SufficientStats,
    f_grid: &[f64],
    cfg: &McmcConfig,
    mass: f64,
) -> Result<Vec<SweepRow>, BayesError> {
    if f_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(BayesError::Domain("f grid must be sorted ascending".into()));
    }
    let mut rows = Vec::with_capacity(f_grid.len());
    for (i, &f) in f_grid.iter().enumerate() {
        let prior = derive_priors(stats, f, f)?;
        let sub_cfg = McmcConfig {
            seed: splitmix64(cfg.seed, 0xF00D + i as u64),
            ..*cfg
        };
        let samples = sample_posterior(stats, &prior, &sub_cfg)?;
        let summary = summarize_posterior(&samples, &prior, mass)?;
        rows.push(SweepRow {
            f,
            summary,
            diagnostics: samples.diagnostics,
        });
    }
    Ok(rows)
}

/// Least-squares fit of `r = a * f^b` in log-log space.
pub fn powerlaw_fit(points: &[(f64, f64)]) -> Result<(f64, f64), BayesError> {
    if points.len() < 3 {
        return Err(BayesError::Fit(format!(
            "need at least 3 points, have {}",
            points.len()
        )));
    }
    if let Some(&(f, r)) = points
        .iter()
        .find(|&&(f, r)| !crate::math::positive(f) || !crate::math::positive(r))
    {
        return Err(BayesError::Domain(format!(
            "power-law fit needs positive coordinates, got ({f}, {r})"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx <= 0.0 {
        return Err(BayesError::Fit("all abscissae are identical".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let b = sxy / sxx;
    let a = (ybar - b * xbar).exp();
    Ok((a, b))
}
