//! Calibrate a bright source and a set of neutral-density filters at once
//! from stack measurements, then chain the result into the chamber
//! attenuation and the environment-attenuation darkness estimate.
//!
//! Run with: cargo run --example filter_tomography

use darkmeter::ea::{attenuation, ea_estimate, solve_ls, AttenuationSystem, Uncertain};

fn main() {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/data/attenuation_stacks.csv"
    );
    let system = AttenuationSystem::read_csv_file(path).unwrap();
    println!(
        "{} stack measurements, saturation cutoff {:.0e} cnt/s",
        system.rows.len(),
        system.saturation_cutoff
    );

    let sol = solve_ls(&system).unwrap();
    println!(
        "\nsource level: 10^({:.3} +- {:.3}) cnt/s",
        sol.log10_source, sol.log10_source_err
    );
    for (j, (od, err)) in sol.od.iter().zip(&sol.od_err).enumerate() {
        println!("filter {}: OD {:.3} +- {:.3}", j + 1, od, err);
    }
    println!(
        "residual norm {:.3} over {} rows ({} dropped as saturated)",
        sol.residual_norm, sol.rows_used, sol.rows_dropped_saturated
    );

    // Closed-chamber level seen from the bright source, and the ambient
    // level of the surrounding room.
    let closed = Uncertain::new(0.47, 0.09);
    let ambient = Uncertain::new(1.82, 0.03);

    let a_c = attenuation(
        Uncertain::new(sol.log10_source, sol.log10_source_err),
        closed,
    )
    .unwrap();
    println!("\nchamber attenuation: ({:.2} +- {:.2}) x 1e9", a_c.value / 1e9, a_c.sd / 1e9);

    let darkness = ea_estimate(ambient, a_c).unwrap();
    println!(
        "darkness estimate: ({:.2} +- {:.2}) x 1e-10 cnt/s",
        darkness.value / 1e-10,
        darkness.sd / 1e-10
    );
    println!("\nnote: this route is blind to light generated inside the chamber;");
    println!("the direct shuttered measurement bounds that instead.");
}
