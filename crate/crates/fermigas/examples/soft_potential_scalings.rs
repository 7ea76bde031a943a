//! Momentum-cutoff kernel, the envelope potential `w_R`, annulus
//! normalizations, and the magnitude scalings that feed the lower bound.
//!
//! Run with `cargo run --release --example soft_potential_scalings`.

use fermigas::soft_potential::{
    annulus_u, kernel_space_integral, lattice_sum_with_spacing, nearest_neighbor_count_i_r,
    unit_kernel, w_bound_fits, SoftKitParams, SoftPotentialKit,
};
use fermigas::Dimension;
use std::f64::consts::PI;

fn main() -> fermigas::Result<()> {
    // The kernel integrates to (2 pi)^{d/2} (transform pair at p = 0).
    for dim in [Dimension::Three, Dimension::Two] {
        let k = unit_kernel(dim);
        println!(
            "{dim}D kernel: h(0) = {:.6}, certified tail radius {:.1}, int h = {:.8} (expect {:.8})",
            k.values[0],
            k.trunc_radius,
            kernel_space_integral(dim, 1.0),
            (2.0 * PI).powf(dim.as_usize() as f64 / 2.0)
        );
    }

    // Magnitude scalings of w_R at fixed R: sup ~ s^-(d+2), integral ~ s^-2.
    let s_values: Vec<f64> = (0..6).map(|i| 16.0 * 1.6f64.powi(i)).collect();
    for dim in [Dimension::Three, Dimension::Two] {
        let fits = w_bound_fits(dim, 1.0, &s_values)?;
        println!(
            "{dim}D w_R: sup slope {:.3} (expect {}), int slope {:.3} (expect -2)",
            fits.slope_sup,
            -(dim.as_usize() as f64 + 2.0),
            fits.slope_int
        );
    }

    // Collective sums over separated centers stay N-independent.
    let kit = SoftPotentialKit::build(SoftKitParams::new(Dimension::Three, 2.0, 1.0, 0.5, 0.9))?;
    let spacing = 16.0 * kit.params.s;
    for n in [10usize, 100] {
        let rep = lattice_sum_with_spacing(&kit, n, spacing)?;
        println!(
            "lattice sum, N = {n}: sup_x sum w = {:.6e}, bound constant {:.4}",
            rep.sup_sum, rep.bound_constant
        );
    }

    // Annulus potentials carry the scattering data of the replaced core.
    let u3 = annulus_u(1.0, 2.0, 1.0, Dimension::Three)?;
    println!("3D annulus: int U = {:.10} (4 pi = {:.10})", u3.space_integral(), 4.0 * PI);
    let u2 = annulus_u(1.0, 3.0, 0.8, Dimension::Two)?;
    println!(
        "2D annulus: int U ln(|x|/a) = {:.10} (2 pi = {:.10}), nu = {:.6} in [{:.6}, {:.6}]",
        u2.log_weighted_integral()?,
        2.0 * PI,
        u2.nu,
        u2.nu_bounds().0,
        u2.nu_bounds().1
    );

    // Close-pair counting used by the lower-bound filtering.
    let pts = [
        [0.0, 0.0, 0.0],
        [1.5, 0.0, 0.0],
        [3.0, 0.0, 0.0],
        [3.2, 0.4, 0.0],
    ];
    println!(
        "close-pair count at R = 0.5: {} of {}",
        nearest_neighbor_count_i_r(&pts, 0.5),
        pts.len()
    );
    Ok(())
}
