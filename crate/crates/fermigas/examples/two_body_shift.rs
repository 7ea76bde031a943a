//! Exact diagonalization of one up + one down particle in a box: the
//! interaction shift tracks `8 pi a int |phi_1|^4` across potential shapes
//! tuned to the same scattering length.
//!
//! Run with `cargo run --release --example two_body_shift` (about a
//! minute: three shapes at the largest basis).

use fermigas::potential::{Piece, RadialPotential};
use fermigas::two_body::{
    free_energy, ground_state_energy, pseudopotential_prediction,
    tune_amplitude_to_scattering_length, TwoBodyProblem,
};
use fermigas::Dimension;
use std::f64::consts::PI;

fn main() -> fermigas::Result<()> {
    let shapes: Vec<(&str, RadialPotential)> = vec![
        ("square barrier", RadialPotential::square_barrier(50.0, 0.1)),
        ("smooth bump", RadialPotential::smooth_bump(80.0, 0.12, 48)),
        (
            "two-step",
            RadialPotential {
                label: "two-step".into(),
                hard_core_radius: 0.0,
                range: 0.1,
                pieces: vec![
                    Piece::Const { r_lo: 0.0, r_hi: 0.05, value: 60.0 },
                    Piece::Const { r_lo: 0.05, r_hi: 0.1, value: 20.0 },
                ],
            },
        ),
    ];

    let target_a = 0.01;
    let ell = 1.0;
    let free = free_energy(ell, Dimension::Three);
    let predicted_shift =
        pseudopotential_prediction(target_a, ell, Dimension::Three)? - free;
    println!("target a = {target_a}, predicted shift 27 pi a = {predicted_shift:.6}");

    for (name, base) in shapes {
        let (tuned, a) = tune_amplitude_to_scattering_length(&base, target_a, 1e-7)?;
        let problem = TwoBodyProblem {
            potential: tuned,
            box_side: ell,
            cutoff: 7,
            dimension: Dimension::Three,
        };
        let gs = ground_state_energy(&problem)?;
        let shift = gs.energy - free;
        println!(
            "{name:<14} a = {a:.7}: shift = {shift:.6}, shift/(27 pi a) = {:.4}, converged = {}",
            shift / (27.0 * PI * a),
            gs.converged
        );
        for (cutoff, size, energy) in &gs.trace {
            println!("    cutoff {cutoff}: basis {size:>5}, E = {energy:.8}");
        }
    }
    Ok(())
}
