//! Derived quantities: the flash-reflection correction and its sweep over
//! reflectivity ratios, the predicted dark-run HDI length, and the scaling
//! of the upper limit to a retinal spot.
//!
//! Run with: cargo run --example darkness_budget

use darkmeter::budget::{
    dark_hdi_length, flash_corrected, flash_sweep, retina_scaling, FlashModelInput,
    GaussianEstimate,
};

fn main() {
    // Difference posteriors from the absorbing-face and reflective-face
    // campaigns, the closed-shutter level ratio between them, and the
    // measured reflectivity ratio of the two faces.
    let input = FlashModelInput {
        delta_b: GaussianEstimate::new(-4.19e-3, 21.0e-3),
        delta_m: GaussianEstimate::new(-4.48e-2, 2.31e-2),
        q: 1.05,
        rho_ratio: 3.4e-4,
    };

    let corrected = flash_corrected(&input).unwrap();
    println!(
        "flash-corrected light level: {:+.4e} +- {:.4e} cnt/s",
        corrected.mean, corrected.sd
    );
    println!(
        "shift against the raw posterior: {:+.2e} cnt/s (negligible at the measured reflectivity)",
        corrected.mean - input.delta_b.mean
    );

    println!("\nrho_ratio | corrected mean | corrected sd");
    let grid: Vec<f64> = (0..8).map(|i| 1e-4 * 10f64.powf(i as f64 * 0.45)).collect();
    for (rho, g) in flash_sweep(&input, &grid).unwrap() {
        println!("{rho:>9.2e} | {:+13.4e} | {:.4e}", g.mean, g.sd);
    }

    // How long must a campaign run before the upper limit reaches a target?
    println!("\npredicted 0.95 interval length in absolute darkness (dark-rate variance 222.6):");
    for n in [10_000usize, 100_000, 1_000_000, 10_000_000] {
        let l = dark_hdi_length(222.6, n).unwrap();
        println!("  n = {n:>9}: {l:.4} cnt/s");
    }

    let upper = 0.039;
    println!("\nretinal scaling of the {upper} cnt/s upper limit:");
    for d in [0.18, 0.34, 0.50] {
        println!(
            "  spot diameter {d:.2} mm -> {:.3} cnt/s",
            retina_scaling(upper, d).unwrap()
        );
    }
}
