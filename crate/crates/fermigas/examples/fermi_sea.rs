//! Dirichlet-box Fermi seas: exact eigenvalue sums, the finite-size
//! exponent, determinantal densities, and the low-momentum bathtub bound.
//!
//! Run with `cargo run --release --example fermi_sea`.

use fermigas::fermi_box::{
    density_square_integral, dirichlet_energy_sum, dirichlet_leading, low_momentum_bound,
    FermiSeaSpec,
};
use fermigas::fit::log_log_slope;
use fermigas::Dimension;

fn main() -> fermigas::Result<()> {
    // Small shells are exact integers times pi^2/l^2.
    for n in [1usize, 4, 10, 20] {
        let sum = dirichlet_energy_sum(n, 1.0, Dimension::Three)?;
        println!("E^D({n}) = {} x pi^2", sum.sum_k2);
    }

    // The Weyl excess decays like n^{-1/3}.
    let ns: Vec<usize> = (0..16)
        .map(|i| (1000.0 * 10f64.powf(2.0 * i as f64 / 15.0)) as usize)
        .collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in &ns {
        let e = dirichlet_energy_sum(n, 1.0, Dimension::Three)?.energy;
        let lead = dirichlet_leading(n, 1.0, Dimension::Three);
        xs.push(n as f64);
        ys.push(e / lead - 1.0);
    }
    println!("finite-size exponent: {:.4} (expect -1/3)", log_log_slope(&xs, &ys));

    // Densities: the pair density vanishes on the diagonal.
    let spec = FermiSeaSpec::new(Dimension::Three, 14, 1.0)?;
    let x = [0.41, 0.52, 0.63];
    let y = [0.44, 0.52, 0.63];
    println!(
        "rho({x:?}) = {:.6}, rho2(x, x) = {:.2e}, rho2(x, y) = {:.6}",
        spec.one_particle_density(&x)?,
        spec.two_particle_density(&x, &x)?,
        spec.two_particle_density(&x, &y)?
    );

    // The density-square sum approaches n^2/l^3 from above.
    for n in [1usize, 8, 64, 512] {
        let v = density_square_integral(n, 1.0)?;
        println!("int rho^2 at n = {n}: {:.6} (n^2 = {})", v, n * n);
    }

    // Bathtub filling of the low-momentum symbol reproduces the closed
    // form for the filled sea.
    let bound = low_momentum_bound(64, 80.0, 1.0, 50_000)?;
    println!(
        "bathtub minimum {:.8} vs closed form {:.8} (ball radius {:.4}, k_F {:.4})",
        bound.bathtub_value, bound.closed_form, bound.ball_radius, bound.k_fermi
    );
    Ok(())
}
