//! # darkmeter
//!
//! How dark is a dark chamber, really? A photon counter placed inside it
//! cannot answer directly because its dark counts drown the signal and drift
//! over time. This crate implements the full measurement pipeline built
//! around a shuttered detector:
//!
//! - [`protocol`]: alternating open/closed counting blocks are differenced
//!   interval-by-interval, cancelling dark-rate drift and leaving a
//!   distribution whose mean is the light level.
//! - [`simulate`]: synthetic campaigns with drifting dark rate, injected
//!   light, and reflected-flash offsets, so every downstream claim can be
//!   tested against known ground truth.
//! - [`bayes`]: a normal model with data-derived, broadened priors; MCMC
//!   posterior draws; HDIs, probability of positive direction, Savage-Dickey
//!   density ratios, and a prior-sensitivity sweep.
//! - [`jzs`]: the analytic Cauchy-prior one-sample Bayes factor used as a
//!   robustness cross-check.
//! - [`ea`]: environment-attenuation calibration via log-domain least-squares
//!   tomography of source brightness and filter optical densities.
//! - [`budget`]: flash-reflection correction, the dark-run HDI-length
//!   predictor, and retinal background scaling.
//! - [`cli`]: the batch front end behind the `darkmeter` binary.
//!
//! ```
//! use darkmeter::bayes::{derive_priors, sample_posterior, summarize_posterior,
//!                        McmcConfig, SufficientStats};
//!
//! // Analyse a campaign from its summary statistics alone.
//! let stats = SufficientStats::new(100_000, 0.02, 400.0);
//! let prior = derive_priors(&stats, 10.0, 10.0).unwrap();
//! let samples = sample_posterior(&stats, &prior, &McmcConfig::default()).unwrap();
//! let summary = summarize_posterior(&samples, &prior, 0.95).unwrap();
//! assert!(summary.hdi_full.0 < 0.02 && 0.02 < summary.hdi_full.1);
//! ```

pub mod bayes;
pub mod budget;
pub mod cli;
pub mod ea;
pub mod jzs;
pub mod math;
pub mod protocol;
pub mod simulate;

pub use bayes::{McmcConfig, PosteriorSummary, PriorSpec, SufficientStats};
pub use budget::GaussianEstimate;
pub use ea::{AttenuationSystem, LsSolution};
pub use jzs::TTestInput;
pub use protocol::{CountSeries, DifferenceSeries, SeriesSummary, Shutter, ShutterProtocol};
pub use simulate::SimConfig;
