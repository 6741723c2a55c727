//! How strongly do the conclusions depend on the prior? Sweep the broadening
//! factor over five decades, watch the posterior stabilise once the prior is
//! weak enough, and fit the square-root growth of the Savage-Dickey ratio.
//!
//! Run with: cargo run --example prior_sensitivity

use darkmeter::bayes::{
    default_f_grid, powerlaw_fit, sensitivity_sweep, McmcConfig, SufficientStats,
};

fn main() {
    let stats = SufficientStats::new(997_920, -4.14e-3, 445.21);
    let grid = default_f_grid(stats.n);
    let rows = sensitivity_sweep(&stats, &grid, &McmcConfig::default(), 0.95).unwrap();

    println!("        f |      mean |       sd |   pd+ | ratio(full) | ratio(pos)");
    for row in &rows {
        let s = &row.summary;
        println!(
            "{:>9.1} | {:+.3e} | {:.3e} | {:.3} | {:>11.2} | {:>10.2}",
            row.f,
            s.mean,
            s.sd,
            s.pd_plus,
            s.sd_ratio_full,
            s.sd_ratio_pos.unwrap_or(f64::NAN),
        );
    }

    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.f >= 10.0)
        .map(|r| (r.f, r.summary.sd_ratio_full))
        .collect();
    let (a, b) = powerlaw_fit(&points).unwrap();
    println!("\nfit over f >= 10: ratio = {a:.3} * f^{b:.3}");
    println!("the exponent sits at one half: broadening the prior keeps making");
    println!("the null more plausible, but only as sqrt(f), while mean, sd and");
    println!("pd+ are flat once f >= 10 - the data, not the prior, speak there.");
}
