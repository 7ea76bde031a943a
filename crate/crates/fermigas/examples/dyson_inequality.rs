//! Numerical certification of the soft-potential operator inequality: the
//! momentum-cutoff kinetic energy inside a ball plus the hard interaction
//! dominates the annulus potential minus the remainder `w_R`.
//!
//! Run with `cargo run --release --example dyson_inequality`.

use fermigas::potential::RadialPotential;
use fermigas::soft_potential::{
    corollary_field_gap, dyson_gap_multi, test_function_corpus, GridSpec, SoftKitParams,
    SoftPotentialKit,
};
use fermigas::Dimension;

fn main() -> fermigas::Result<()> {
    let hard_sphere = RadialPotential::hard_sphere(1.0);
    let kit = SoftPotentialKit::build(SoftKitParams::new(Dimension::Three, 4.0, 2.0, 1.0, 1.0))?;
    let corpus = test_function_corpus(Dimension::Three, 12, 42, 10.0, Some(1.0));
    let grid = GridSpec { n: 80, dx: 0.45 };

    let mut min_gap = f64::INFINITY;
    let mut max_eta: f64 = 0.0;
    for tf in &corpus {
        for report in dyson_gap_multi(&|x: &[f64; 3]| tf.eval(x), &hard_sphere, &kit, &[0.1, 0.5], grid)? {
            min_gap = min_gap.min(report.gap / report.lhs_scale);
            max_eta = max_eta.max(report.eta / report.lhs_scale);
        }
    }
    println!(
        "hard sphere, 12 seeded test functions x eps in {{0.1, 0.5}}: min relative gap {min_gap:.4}, max eta {max_eta:.2e}"
    );

    // Many separated centers: the collective field variant.
    let psi = |x: &[f64; 3]| {
        let r2 = (x[0] - 2.5) * (x[0] - 2.5) + x[1] * x[1] + x[2] * x[2];
        let window = |r: f64| ((r - 1.0) / 2.0).clamp(0.0, 1.0);
        let ra = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let rb = ((x[0] - 5.0) * (x[0] - 5.0) + x[1] * x[1] + x[2] * x[2]).sqrt();
        (-r2 / 8.0).exp() * window(ra) * window(rb)
    };
    let centers = [[0.0, 0.0, 0.0], [5.0, 0.0, 0.0]];
    let rep = corollary_field_gap(&psi, &centers, &hard_sphere, &kit, 0.3, GridSpec {
        n: 96,
        dx: 0.5,
    })?;
    println!(
        "two-center field variant: gap {:.4e} (lhs {:.4e}, rhs {:.4e}, eta {:.1e})",
        rep.gap, rep.lhs, rep.rhs, rep.eta
    );

    // 2D disc version with a soft barrier.
    let barrier = RadialPotential::square_barrier(8.0, 1.0);
    let sol = fermigas::scattering::solve_zero_energy(&barrier, Dimension::Two, 1e-9)?;
    let kit2 = SoftPotentialKit::build(SoftKitParams::new(Dimension::Two, 4.0, 2.0, sol.a, 1.0))?;
    let corpus2 = test_function_corpus(Dimension::Two, 12, 7, 10.0, None);
    let mut min2 = f64::INFINITY;
    for tf in &corpus2 {
        for report in dyson_gap_multi(
            &|x: &[f64; 3]| tf.eval(x),
            &barrier,
            &kit2,
            &[0.1, 0.5],
            GridSpec { n: 128, dx: 0.3 },
        )? {
            min2 = min2.min(report.gap / report.lhs_scale);
        }
    }
    println!("2D barrier corpus: min relative gap {min2:.4}");
    Ok(())
}
