//! Simulate a campaign with a drifting dark rate and show that the
//! open-minus-closed differencing cancels the drift: the raw hourly count
//! levels wander while the difference series stays flat around zero.
//!
//! Run with: cargo run --example simulate_and_difference

use darkmeter::protocol::{build_differences, summarize, Shutter, ShutterProtocol};
use darkmeter::simulate::{simulate_campaign, DarkRateModel, DriftModel, SimConfig};

fn main() {
    let config = SimConfig {
        dark: DarkRateModel {
            base_rate: 200.0,
            drift: DriftModel::RandomWalk { step_sd_per_hour: 5.0 },
            clamp_min: 1.0,
        },
        light_rate: 0.0,
        flash_closed_rate: 0.0,
        duration_hours: 24.0,
        protocol: ShutterProtocol::default(),
        seed: 7,
    };

    let series = simulate_campaign(&config).unwrap();
    println!(
        "simulated {} intervals over {} h (seed {})",
        series.intervals.len(),
        config.duration_hours,
        config.seed
    );

    let open = series.summarize_shutter(Shutter::Open, 1).unwrap();
    let diff = build_differences(&series, &config.protocol).unwrap();
    let summary = summarize(&diff).unwrap();

    println!("\nhour | open-shutter mean |  difference mean");
    for (o, d) in open.hourly.iter().zip(&summary.hourly) {
        println!("{:>4} | {:>17.2} | {:>+16.3}", o.hour, o.mean, d.mean);
    }

    let se = (2.0 * config.dark.base_rate / summary.n as f64).sqrt();
    println!(
        "\nglobal difference mean {:+.4} cnt/s (standard error {:.4})",
        summary.mean, se
    );
    println!(
        "the raw level drifts by several cnt/s per hour; the differenced mean stays within noise of zero"
    );
}
