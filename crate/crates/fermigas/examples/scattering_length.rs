//! Zero-energy scattering: lengths, exterior profiles, and the cutoff pair
//! integrals for a hard sphere and a square barrier.
//!
//! Run with `cargo run --release --example scattering_length`.

use fermigas::potential::RadialPotential;
use fermigas::scattering::{
    scattering_energy_integral, solve_zero_energy, square_barrier_scattering_length, xi_profile,
};
use fermigas::Dimension;
use std::f64::consts::PI;

fn main() -> fermigas::Result<()> {
    // Hard sphere: the scattering length equals the core radius in both
    // dimensions.
    let sphere = RadialPotential::hard_sphere(1.0);
    for dim in [Dimension::Three, Dimension::Two] {
        let sol = solve_zero_energy(&sphere, dim, 1e-10)?;
        println!("hard sphere, {dim}D: a = {:.12} (radius 1)", sol.a);
    }

    // Square barrier: closed-form transcendental comparison.
    let barrier = RadialPotential::square_barrier(10.0, 1.0);
    let sol = solve_zero_energy(&barrier, Dimension::Three, 1e-10)?;
    let exact = square_barrier_scattering_length(10.0, 1.0);
    println!(
        "square barrier: a = {:.12}, closed form {:.12}, rel err {:.2e}",
        sol.a,
        exact,
        (sol.a / exact - 1.0).abs()
    );

    // Exterior identity phi = 1 - a/r beyond the range.
    let mut worst: f64 = 0.0;
    for i in 0..=200 {
        let r = 1.0 + 9.0 * i as f64 / 200.0;
        worst = worst.max((sol.phi(r) - (1.0 - sol.a / r)).abs());
    }
    println!("max |phi - (1 - a/r)| on [R0, 10 R0]: {worst:.2e}");

    // Energy integral and the cutoff pair: quadrature against closed forms.
    for r in [2.0, 5.0] {
        let integral = scattering_energy_integral(&sol, r)?;
        let closed = 4.0 * PI * sol.a * (1.0 - sol.a / r);
        println!(
            "int_(|x|<={r}) (|grad phi|^2 + v phi^2/2) = {integral:.9} (closed {closed:.9})"
        );
    }
    let profile = xi_profile(&sol, 4.0)?;
    println!(
        "int xi at R = 4: {:.9} vs 4 pi a/(1 - a/R) = {:.9}",
        profile.integral_xi,
        4.0 * PI * sol.a / (1.0 - sol.a / 4.0)
    );

    // The 2D normalization carries a logarithm instead.
    let disc = solve_zero_energy(&sphere, Dimension::Two, 1e-10)?;
    let val = scattering_energy_integral(&disc, std::f64::consts::E)?;
    println!("hard disc: integral at R = e is {val:.9} (2 pi = {:.9})", 2.0 * PI);
    Ok(())
}
