//! Property tests for the structural invariants: scaling covariances,
//! determinism of mode selection, positivity and range of the
//! determinantal quantities.

use fermigas::determinantal::{QuadratureSpec, SineBasis, WeightedSlater};
use fermigas::energy_bounds::{upper_bound_schedule, ConstantsTable};
use fermigas::fermi_box::{dirichlet_energy_sum, select_modes, FermiSeaSpec};
use fermigas::potential::RadialPotential;
use fermigas::scattering::solve_zero_energy;
use fermigas::Dimension;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Scaling all potential lengths by lambda scales the scattering
    /// length by lambda.
    #[test]
    fn scattering_length_scales_linearly(
        v0 in 0.5f64..80.0,
        r0 in 0.3f64..2.0,
        lambda in 0.4f64..2.5,
    ) {
        let base = RadialPotential::square_barrier(v0, r0);
        let a0 = solve_zero_energy(&base, Dimension::Three, 1e-9).unwrap().a;
        let a1 = solve_zero_energy(&base.scale_lengths(lambda), Dimension::Three, 1e-9)
            .unwrap()
            .a;
        prop_assert!((a1 / (lambda * a0) - 1.0).abs() < 1e-6);
    }

    /// The scattering profile stays within [0, 1] and above the
    /// Coulomb-like floor.
    #[test]
    fn profile_bounds_hold(v0 in 0.5f64..60.0, r0 in 0.4f64..1.5) {
        let sol = solve_zero_energy(
            &RadialPotential::square_barrier(v0, r0),
            Dimension::Three,
            1e-9,
        )
        .unwrap();
        for i in 1..=60 {
            let r = sol.r_max * i as f64 / 60.0;
            let phi = sol.phi(r);
            prop_assert!(phi >= (1.0 - sol.a / r).max(0.0) - 1e-7);
            prop_assert!((-1e-9..=1.0 + 1e-7).contains(&phi));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Mode selection is deterministic and eigenvalue-ordered for any n.
    #[test]
    fn mode_selection_deterministic(n in 1usize..400) {
        let m1 = select_modes(Dimension::Three, n).unwrap();
        let m2 = select_modes(Dimension::Three, n).unwrap();
        prop_assert_eq!(&m1, &m2);
        let norms: Vec<u64> = m1
            .iter()
            .map(|k| k.iter().map(|&v| (v as u64) * (v as u64)).sum())
            .collect();
        prop_assert!(norms.windows(2).all(|w| w[0] <= w[1]));
    }

    /// The Dirichlet sum scales exactly as 1/l^2 (the integer part is
    /// box-independent).
    #[test]
    fn dirichlet_sum_box_scaling(n in 1usize..2000, ell in 0.2f64..8.0) {
        let a = dirichlet_energy_sum(n, 1.0, Dimension::Three).unwrap();
        let b = dirichlet_energy_sum(n, ell, Dimension::Three).unwrap();
        prop_assert_eq!(a.sum_k2, b.sum_k2);
        prop_assert!((a.energy / (b.energy * ell * ell) - 1.0).abs() < 1e-12);
    }

    /// The determinantal pair density is nonnegative wherever sampled.
    #[test]
    fn pair_density_nonnegative(
        n in 2usize..20,
        x0 in 0.05f64..0.95,
        x1 in 0.05f64..0.95,
        x2 in 0.05f64..0.95,
        y0 in 0.05f64..0.95,
        y1 in 0.05f64..0.95,
        y2 in 0.05f64..0.95,
    ) {
        let spec = FermiSeaSpec::new(Dimension::Three, n, 1.0).unwrap();
        let d = spec.two_particle_density(&[x0, x1, x2], &[y0, y1, y2]).unwrap();
        prop_assert!(d >= -1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// det M lies in (0, 1] for admissible weights 0 < h <= 1, and the
    /// one-particle density stays nonnegative.
    #[test]
    fn weighted_norm_in_unit_interval(
        amp in 0.1f64..0.9,
        cx in 0.3f64..0.7,
        cy in 0.3f64..0.7,
        width in 0.1f64..0.4,
        px in 0.1f64..0.9,
        py in 0.1f64..0.9,
    ) {
        let basis = SineBasis::new(Dimension::Two, 3, 1.0).unwrap();
        let h = move |x: &[f64; 3]| {
            let q = (x[0] - cx).powi(2) + (x[1] - cy).powi(2);
            1.0 - amp * (-q / (2.0 * width * width)).exp()
        };
        let ws = WeightedSlater::new(basis, h, QuadratureSpec { points_per_axis: 32 });
        prop_assert!(ws.norm() > 0.0 && ws.norm() <= 1.0 + 1e-12);
        let dens = ws.k_particle_density(h, &[[px, py, 0.0]]).unwrap();
        prop_assert!(dens >= -1e-10);
    }

    /// 3D scale covariance of the upper-bound schedule:
    /// (rho, a, R0) -> (rho/lambda^3, lambda a, lambda R0) multiplies the
    /// energy density by lambda^-5 exactly.
    #[test]
    fn upper_bound_scale_covariance(lambda in 0.5f64..4.0) {
        let table = ConstantsTable::default();
        let base = upper_bound_schedule(0.5, 0.5, 1e-20, 5e-21, &table).unwrap();
        let scaled = upper_bound_schedule(
            0.5 * lambda.powi(-3),
            0.5 * lambda.powi(-3),
            1e-20 * lambda,
            5e-21 * lambda,
            &table,
        )
        .unwrap();
        prop_assert!((scaled.total * lambda.powi(5) / base.total - 1.0).abs() < 1e-9);
        // every error channel is nonnegative: dropping one only tightens
        for (name, value) in &base.channels {
            prop_assert!(*value >= 0.0, "channel {} negative: {}", name, value);
        }
    }
}
