//! End-to-end pipeline checks and protocol invariants.

use darkmeter::bayes::{
    derive_priors, sample_posterior, summarize_posterior, McmcConfig, SufficientStats,
};
use darkmeter::jzs::{jzs_bf01, TTestInput, TestSide};
use darkmeter::protocol::{
    build_differences, summarize, CountInterval, CountSeries, Shutter, ShutterProtocol,
};
use darkmeter::simulate::{simulate_campaign, DarkRateModel, DriftModel, SimConfig};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn null_config(duration_hours: f64, seed: u64) -> SimConfig {
    SimConfig {
        dark: DarkRateModel {
            base_rate: 200.0,
            drift: DriftModel::None,
            clamp_min: 0.0,
        },
        light_rate: 0.0,
        flash_closed_rate: 0.0,
        duration_hours,
        protocol: ShutterProtocol::default(),
        seed,
    }
}

#[test]
fn campaign_scale_sample_count() {
    // 616 hours of 1 s intervals in alternating 10-interval blocks, first
    // interval of each block discarded: 0.9 * 1800 * 616 difference samples.
    let cfg = null_config(616.0, 3);
    let series = simulate_campaign(&cfg).unwrap();
    assert_eq!(series.intervals.len(), 616 * 3600);
    let diff = build_differences(&series, &cfg.protocol).unwrap();
    assert_eq!(diff.n(), 997_920);
}

#[test]
fn injected_light_is_detected_end_to_end() {
    let mut cfg = null_config(20.0, 8);
    cfg.light_rate = 0.5;
    let series = simulate_campaign(&cfg).unwrap();
    let diff = build_differences(&series, &cfg.protocol).unwrap();
    let summary = summarize(&diff).unwrap();
    let stats = SufficientStats::from(&summary);
    let prior = derive_priors(&stats, 10.0, 10.0).unwrap();
    let samples = sample_posterior(&stats, &prior, &McmcConfig::default()).unwrap();
    let s = summarize_posterior(&samples, &prior, 0.95).unwrap();
    assert!(s.pd_plus > 0.99, "pd+ {} for a strong injected signal", s.pd_plus);
    assert!(s.hdi_full.0 > 0.0, "HDI {:?} should exclude zero", s.hdi_full);
}

#[test]
fn null_campaign_recovers_zero() {
    let cfg = null_config(12.0, 21);
    let series = simulate_campaign(&cfg).unwrap();
    let diff = build_differences(&series, &cfg.protocol).unwrap();
    let summary = summarize(&diff).unwrap();
    let stats = SufficientStats::from(&summary);
    let prior = derive_priors(&stats, 10.0, 10.0).unwrap();
    let samples = sample_posterior(&stats, &prior, &McmcConfig::default()).unwrap();
    let s = summarize_posterior(&samples, &prior, 0.95).unwrap();
    assert!(
        s.hdi_full.0 < 0.0 && 0.0 < s.hdi_full.1,
        "HDI {:?} should contain zero",
        s.hdi_full
    );
}

#[test]
fn savage_dickey_agrees_with_analytic_bayes_factor() {
    // At the quasi-flat broadening point the sampled density ratio and the
    // Cauchy-prior quadrature answer the same question; they must agree to
    // ten percent.
    let stats = SufficientStats::new(997_920, -4.14e-3, 445.21);
    let f = 0.707 * stats.n as f64;
    let prior = derive_priors(&stats, f, f).unwrap();
    let samples = sample_posterior(&stats, &prior, &McmcConfig::default()).unwrap();
    let s = summarize_posterior(&samples, &prior, 0.95).unwrap();
    let rsd = s.sd_ratio_pos.expect("positive part is well populated here");

    let input = TTestInput::from_stats(
        stats.mean,
        stats.variance,
        stats.n,
        darkmeter::jzs::DEFAULT_CAUCHY_SCALE,
        TestSide::PositiveOnly,
    )
    .unwrap();
    let bf = jzs_bf01(&input).unwrap();
    assert!(
        (rsd - bf).abs() / bf < 0.10,
        "sampled ratio {rsd} vs analytic {bf}"
    );
}

// ---------------------------------------------------------------------------
// Protocol invariants
// ---------------------------------------------------------------------------

fn series_from_counts(counts: &[u32], block_len: usize) -> CountSeries {
    let first = Shutter::Open;
    let intervals = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| CountInterval {
            t_start: k as u64,
            shutter: if (k / block_len).is_multiple_of(2) {
                first
            } else {
                first.flipped()
            },
            counts: c,
        })
        .collect();
    CountSeries { intervals }
}

proptest! {
    /// Permuting whole block pairs leaves the multiset of differences alone.
    #[test]
    fn pairing_invariance(
        block_len in 2usize..6,
        n_pairs in 2usize..10,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let counts: Vec<u32> = (0..2 * block_len * n_pairs)
            .map(|_| rand::Rng::random_range(&mut rng, 0..1000u32))
            .collect();
        let protocol = ShutterProtocol { block_len, interval_len: 1, discard_first: true };

        let base = build_differences(&series_from_counts(&counts, block_len), &protocol).unwrap();

        // Shuffle the pair order, then relabel timestamps contiguously.
        let pair_span = 2 * block_len;
        let mut order: Vec<usize> = (0..n_pairs).collect();
        order.shuffle(&mut rng);
        let permuted: Vec<u32> = order
            .iter()
            .flat_map(|&p| counts[p * pair_span..(p + 1) * pair_span].iter().copied())
            .collect();
        let shuffled = build_differences(&series_from_counts(&permuted, block_len), &protocol).unwrap();

        let mut a = base.samples().to_vec();
        let mut b = shuffled.samples().to_vec();
        a.sort_by(|x, y| x.total_cmp(y));
        b.sort_by(|x, y| x.total_cmp(y));
        prop_assert_eq!(a, b);
    }

    /// A dark rate constant within each block pair cancels exactly.
    #[test]
    fn drift_cancellation_is_exact_per_pair(
        block_len in 2usize..6,
        rates in proptest::collection::vec(0u32..2000, 2..12),
    ) {
        let pair_span = 2 * block_len;
        let counts: Vec<u32> = rates
            .iter()
            .flat_map(|&r| std::iter::repeat_n(r, pair_span))
            .collect();
        let protocol = ShutterProtocol { block_len, interval_len: 1, discard_first: true };
        let diff = build_differences(&series_from_counts(&counts, block_len), &protocol).unwrap();
        prop_assert!(diff.samples().iter().all(|&d| d == 0.0));
    }

    /// Retained open counts minus retained closed counts equals n * mean * dt.
    #[test]
    fn count_conservation(
        block_len in 2usize..6,
        n_pairs in 1usize..8,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let counts: Vec<u32> = (0..2 * block_len * n_pairs)
            .map(|_| rand::Rng::random_range(&mut rng, 0..1000u32))
            .collect();
        let protocol = ShutterProtocol { block_len, interval_len: 1, discard_first: true };
        let series = series_from_counts(&counts, block_len);
        let diff = build_differences(&series, &protocol).unwrap();

        let mut open_sum = 0i64;
        let mut closed_sum = 0i64;
        for (k, iv) in series.intervals.iter().enumerate() {
            if k % block_len == 0 {
                continue; // discarded
            }
            match iv.shutter {
                Shutter::Open => open_sum += iv.counts as i64,
                Shutter::Closed => closed_sum += iv.counts as i64,
            }
        }
        let (mean, _) = darkmeter::math::sample_mean_var(diff.samples());
        let lhs = (open_sum - closed_sum) as f64;
        let rhs = diff.n() as f64 * mean * 1.0;
        prop_assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
    }
}
