//! Upper/lower energy-density bounds and their error exponents: 2/9 and
//! 1/13 powers of `a rho^{1/3}` in 3D, log powers in 2D.
//!
//! Run with `cargo run --release --example energy_bound_exponents`.

use fermigas::energy_bounds::{
    balanced_minimum, leading_energy, lower_bound_schedule, lower_exponent_sweep_2d,
    lower_exponent_sweep_3d, upper_bound_schedule, upper_exponent_sweep_2d,
    upper_exponent_sweep_3d, ConstantsTable, GasState, ScatteringLengths,
};
use fermigas::Dimension;

fn main() -> fermigas::Result<()> {
    let table = ConstantsTable::default();

    // Leading order and the balanced-split minimizer.
    let state = GasState {
        dimension: Dimension::Three,
        densities: vec![0.5, 0.5],
        scattering: ScatteringLengths::Uniform(0.01),
        r0: 0.01,
    };
    println!("leading energy density: {:.8}", leading_energy(&state)?);
    let (r1, r2) = balanced_minimum(1.0, 0.001, Dimension::Three)?;
    println!("optimal split at a = 0.001: rho1 = {r1:.6}, rho2 = {r2:.6}");

    // One dilute point, channels itemized.
    let y = 1e-20;
    let up = upper_bound_schedule(0.5, 0.5, y, 0.5 * y, &table)?;
    println!("upper bound at a rho^(1/3) = {y:e} (feasible: {}):", up.feasible);
    for (name, value) in &up.channels {
        println!("  {name:<22} {value:+.3e}");
    }
    let low = lower_bound_schedule(0.5, 0.5, y * 1e-8, 0.5 * y * 1e-8, &table)?;
    println!(
        "lower bound deficit at a rho^(1/3) = {:e}: {:.4e} (feasible: {})",
        y * 1e-8,
        -low.epsilon_rho,
        low.feasible
    );

    // Exponent fits across decades of diluteness.
    let ys_up: Vec<f64> = (0..9).map(|i| 1e-22 * 10f64.powf(i as f64 / 2.0)).collect();
    let up_fit = upper_exponent_sweep_3d(&ys_up, &table)?;
    println!("3D upper error exponent: {:.5} (expect 2/9 = {:.5})", up_fit.slope, 2.0 / 9.0);

    let ys_low: Vec<f64> = (0..9).map(|i| 1e-40 * 10f64.powf(i as f64)).collect();
    let low_fit = lower_exponent_sweep_3d(&ys_low, &table)?;
    println!("3D lower deficit exponent: {:.5} (expect 1/13 = {:.5})", low_fit.slope, 1.0 / 13.0);

    let ls: Vec<f64> = (0..9).map(|i| 1e8 * 10f64.powf(i as f64 / 2.0)).collect();
    let low2 = lower_exponent_sweep_2d(&ls, &table)?;
    println!("2D lower deficit exponent in L: {:.5} (expect -0.1)", low2.slope);

    let ls_up: Vec<f64> = (0..9).map(|i| 1e6 * 10f64.powf(i as f64 / 2.0)).collect();
    let up2 = upper_exponent_sweep_2d(&ls_up, &table)?;
    println!(
        "2D upper error slope in L: {:.4} with log-correction spreads {:.3} (compensated) vs {:.3} (raw)",
        up2.fit.slope, up2.corrected_spread, up2.uncorrected_spread
    );
    Ok(())
}
