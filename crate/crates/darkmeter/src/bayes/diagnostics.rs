//! Split-Rhat and effective sample size.
//!
//! Both follow the standard split-chain construction: every chain is halved,
//! the potential scale reduction compares between- and within-half variances,
//! and the effective sample size sums chain-averaged autocorrelations with
//! Geyer's initial-monotone-sequence truncation.

use crate::math::sample_mean_var;

fn split(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    let n = chains.iter().map(|c| c.len()).min().unwrap_or(0);
    let half = n / 2;
    let mut out = Vec::with_capacity(chains.len() * 2);
    for c in chains {
        out.push(&c[..half]);
        // When n is odd the middle draw is dropped.
        out.push(&c[n - half..n]);
    }
    out
}

/// Split potential scale reduction factor across chains.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let halves = split(chains);
    if halves.iter().any(|h| h.len() < 2) {
        return f64::INFINITY;
    }
    let n = halves[0].len() as f64;
    let stats: Vec<(f64, f64)> = halves.iter().map(|h| sample_mean_var(h)).collect();
    let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let (_, between) = sample_mean_var(&means);
    let within = stats.iter().map(|s| s.1).sum::<f64>() / stats.len() as f64;
    if within <= 0.0 {
        // Identical constant chains are trivially converged.
        return if between <= 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (n - 1.0) / n * within + between;
    (var_plus / within).sqrt()
}

/// Effective sample size across chains.
pub fn ess(chains: &[Vec<f64>]) -> f64 {
    let halves = split(chains);
    if halves.iter().any(|h| h.len() < 4) {
        return 0.0;
    }
    let m = halves.len() as f64;
    let n = halves[0].len();
    let nf = n as f64;

    let stats: Vec<(f64, f64)> = halves.iter().map(|h| sample_mean_var(h)).collect();
    let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let (_, between) = sample_mean_var(&means);
    let within = stats.iter().map(|s| s.1).sum::<f64>() / m;
    if within <= 0.0 {
        return 0.0;
    }
    let var_plus = (nf - 1.0) / nf * within + between;

    // Biased (1/n) autocovariances averaged across chains.
    let acov = |lag: usize| -> f64 {
        halves
            .iter()
            .zip(&means)
            .map(|(h, &mean)| {
                let mut s = 0.0;
                for i in 0..n - lag {
                    s += (h[i] - mean) * (h[i + lag] - mean);
                }
                s / nf
            })
            .sum::<f64>()
            / m
    };
    let acov0 = acov(0);

    // Geyer pairs: accumulate rho_{2k} + rho_{2k+1} while positive and
    // non-increasing.
    let rho = |lag: usize| 1.0 - (within - acov(lag)) / var_plus;
    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut lag = 0usize;
    while lag + 1 < n {
        let pair = if lag == 0 {
            // rho_0 computed from the averaged autocovariance directly.
            (1.0 - (within - acov0) / var_plus) + rho(1)
        } else {
            rho(lag) + rho(lag + 1)
        };
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        lag += 2;
    }
    let tau = tau.max(1e-12);
    (m * nf / tau).min(m * nf)
}
