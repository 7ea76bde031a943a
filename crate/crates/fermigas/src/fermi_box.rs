//! Dirichlet box spectra and Fermi-sea quantities.
//!
//! Modes of the Dirichlet Laplacian on a cube of side `l` are indexed by
//! positive integer vectors `k` with eigenvalue `pi^2 |k|^2 / l^2` and
//! eigenfunctions `prod_a sqrt(2/l) sin(k_a pi x_a / l)`. Degenerate shells
//! are broken lexicographically so every mode list is reproducible.

use crate::error::{FermigasError, Result};
use crate::Dimension;
use std::f64::consts::PI;

/// `(3/5) (6 pi^2)^{2/3}`: coefficient of `rho^{5/3}` in the 3D kinetic
/// energy density.
pub fn kinetic_coefficient_3d() -> f64 {
    0.6 * (6.0 * PI * PI).powf(2.0 / 3.0)
}

/// Sum of the `n` lowest Dirichlet eigenvalues, exact as an integer multiple
/// of `pi^2 / l^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirichletSum {
    /// `sum |k|^2` over the `n` lowest modes.
    pub sum_k2: u128,
    /// `pi^2 sum_k2 / l^2`.
    pub energy: f64,
}

fn ball_count(dim: Dimension, r2: u64) -> usize {
    // lattice points with all components >= 1 and |k|^2 <= r2
    let r = (r2 as f64).sqrt() as u64 + 1;
    let mut count = 0usize;
    match dim {
        Dimension::Two => {
            for k1 in 1..=r {
                let k1s = k1 * k1;
                if k1s + 1 > r2 {
                    break;
                }
                let rem = r2 - k1s;
                count += (rem as f64).sqrt() as usize;
            }
        }
        Dimension::Three => {
            for k1 in 1..=r {
                let k1s = k1 * k1;
                if k1s + 2 > r2 {
                    break;
                }
                for k2 in 1..=r {
                    let k12 = k1s + k2 * k2;
                    if k12 + 1 > r2 {
                        break;
                    }
                    count += ((r2 - k12) as f64).sqrt() as usize;
                }
            }
        }
    }
    count
}

/// Smallest squared radius whose closed lattice ball holds at least `n`
/// modes; grows geometrically so no shell guess is needed.
fn sufficient_radius2(dim: Dimension, n: usize) -> u64 {
    let mut r2 = match dim {
        Dimension::Two => (4.0 * n as f64 / PI).ceil() as u64 + 8,
        Dimension::Three => ((6.0 * n as f64 / PI).powf(2.0 / 3.0)).ceil() as u64 + 8,
    };
    while ball_count(dim, r2) < n {
        r2 = r2 * 2 + 8;
    }
    r2
}

fn collect_norms(dim: Dimension, r2: u64) -> Vec<u64> {
    let r = (r2 as f64).sqrt() as u64 + 1;
    let mut out = Vec::new();
    match dim {
        Dimension::Two => {
            for k1 in 1..=r {
                for k2 in 1..=r {
                    let s = k1 * k1 + k2 * k2;
                    if s <= r2 {
                        out.push(s);
                    } else if k2 > 1 {
                        break;
                    }
                }
            }
        }
        Dimension::Three => {
            for k1 in 1..=r {
                for k2 in 1..=r {
                    if k1 * k1 + k2 * k2 + 1 > r2 {
                        break;
                    }
                    for k3 in 1..=r {
                        let s = k1 * k1 + k2 * k2 + k3 * k3;
                        if s <= r2 {
                            out.push(s);
                        } else {
                            break;
                        }
                    }
                }
            }
        }
    }
    out
}

/// `E^D(n, l)`: sum of the `n` lowest Dirichlet eigenvalues.
pub fn dirichlet_energy_sum(n: usize, box_side: f64, dim: Dimension) -> Result<DirichletSum> {
    if n == 0 {
        return Err(FermigasError::InvalidInput("n must be >= 1".into()));
    }
    if n > 10_000_000 {
        return Err(FermigasError::InvalidInput(format!(
            "n = {n} exceeds the guarded enumeration limit 1e7"
        )));
    }
    if box_side <= 0.0 {
        return Err(FermigasError::InvalidInput("box side must be positive".into()));
    }
    let r2 = sufficient_radius2(dim, n);
    let mut norms = collect_norms(dim, r2);
    debug_assert!(norms.len() >= n);
    norms.select_nth_unstable(n - 1);
    let sum: u128 = norms[..n].iter().map(|&v| v as u128).sum();
    Ok(DirichletSum {
        sum_k2: sum,
        energy: PI * PI * sum as f64 / (box_side * box_side),
    })
}

/// Leading Weyl term for `E^D(n, l)`: `(3/5)(6 pi^2)^{2/3} n^{5/3}/l^2` in
/// 3D, `2 pi n^2 / l^2` in 2D.
pub fn dirichlet_leading(n: usize, box_side: f64, dim: Dimension) -> f64 {
    let nf = n as f64;
    match dim {
        Dimension::Three => kinetic_coefficient_3d() * nf.powf(5.0 / 3.0) / (box_side * box_side),
        Dimension::Two => 2.0 * PI * nf * nf / (box_side * box_side),
    }
}

/// The `n` lowest modes, ordered by `(|k|^2, lexicographic)`.
pub fn select_modes(dim: Dimension, n: usize) -> Result<Vec<[u32; 3]>> {
    if n == 0 {
        return Err(FermigasError::InvalidInput("n must be >= 1".into()));
    }
    if n > 2_000_000 {
        return Err(FermigasError::InvalidInput(format!(
            "mode selection capped at 2e6 entries (requested {n})"
        )));
    }
    let r2 = sufficient_radius2(dim, n);
    let r = (r2 as f64).sqrt() as u32 + 1;
    let mut modes: Vec<(u64, [u32; 3])> = Vec::new();
    match dim {
        Dimension::Two => {
            for k1 in 1..=r {
                for k2 in 1..=r {
                    let s = (k1 as u64).pow(2) + (k2 as u64).pow(2);
                    if s <= r2 {
                        modes.push((s, [k1, k2, 0]));
                    } else if k2 > 1 {
                        break;
                    }
                }
            }
        }
        Dimension::Three => {
            for k1 in 1..=r {
                for k2 in 1..=r {
                    if (k1 as u64).pow(2) + (k2 as u64).pow(2) + 1 > r2 {
                        break;
                    }
                    for k3 in 1..=r {
                        let s = (k1 as u64).pow(2) + (k2 as u64).pow(2) + (k3 as u64).pow(2);
                        if s <= r2 {
                            modes.push((s, [k1, k2, k3]));
                        } else {
                            break;
                        }
                    }
                }
            }
        }
    }
    modes.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    modes.truncate(n);
    Ok(modes.into_iter().map(|(_, k)| k).collect())
}

/// A filled Fermi sea in a Dirichlet box: the `n` lowest modes with
/// deterministic tie-breaking.
#[derive(Clone, Debug)]
pub struct FermiSeaSpec {
    pub dimension: Dimension,
    pub n: usize,
    pub box_side: f64,
    pub modes: Vec<[u32; 3]>,
}

impl FermiSeaSpec {
    pub fn new(dim: Dimension, n: usize, box_side: f64) -> Result<Self> {
        if box_side <= 0.0 {
            return Err(FermigasError::InvalidInput("box side must be positive".into()));
        }
        Ok(FermiSeaSpec {
            dimension: dim,
            n,
            box_side,
            modes: select_modes(dim, n)?,
        })
    }

    pub fn eigenvalue(&self, mode: [u32; 3]) -> f64 {
        let k2: u64 = mode.iter().map(|&k| (k as u64) * (k as u64)).sum();
        PI * PI * k2 as f64 / (self.box_side * self.box_side)
    }

    fn inside(&self, x: &[f64; 3]) -> bool {
        (0..self.dimension.as_usize()).all(|a| (0.0..=self.box_side).contains(&x[a]))
    }

    /// Normalized mode function `phi_k(x)`.
    pub fn mode_value(&self, mode: [u32; 3], x: &[f64; 3]) -> f64 {
        let d = self.dimension.as_usize();
        let norm = (2.0 / self.box_side).powf(d as f64 / 2.0);
        let mut prod = norm;
        for a in 0..d {
            prod *= (mode[a] as f64 * PI * x[a] / self.box_side).sin();
        }
        prod
    }

    /// `rho_n^D(x) = sum_k |phi_k(x)|^2`.
    pub fn one_particle_density(&self, x: &[f64; 3]) -> Result<f64> {
        if !self.inside(x) {
            return Err(FermigasError::InvalidInput(format!("point {x:?} outside box")));
        }
        Ok(self
            .modes
            .iter()
            .map(|&k| {
                let v = self.mode_value(k, x);
                v * v
            })
            .sum())
    }

    /// Mode kernel `K(x, y) = sum_k phi_k(x) phi_k(y)`.
    pub fn kernel(&self, x: &[f64; 3], y: &[f64; 3]) -> f64 {
        self.modes
            .iter()
            .map(|&k| self.mode_value(k, x) * self.mode_value(k, y))
            .sum()
    }

    /// Determinantal pair density
    /// `rho^(2)(x, y) = rho(x) rho(y) - K(x, y)^2`; vanishes quadratically
    /// as `y -> x`.
    pub fn two_particle_density(&self, x: &[f64; 3], y: &[f64; 3]) -> Result<f64> {
        if !self.inside(x) || !self.inside(y) {
            return Err(FermigasError::InvalidInput("point outside box".into()));
        }
        let rx = self.one_particle_density(x)?;
        let ry = self.one_particle_density(y)?;
        let k = self.kernel(x, y);
        Ok(rx * ry - k * k)
    }
}

/// `int rho_n^D(x)^2 d^3 x = l^-3 sum_{p,q} prod_a (1 + delta_{p_a q_a}/2)`,
/// 3D only.
pub fn density_square_integral(n: usize, box_side: f64) -> Result<f64> {
    let modes = select_modes(Dimension::Three, n)?;
    let mut total = 0.0;
    for p in &modes {
        for q in &modes {
            let mut prod = 1.0;
            for a in 0..3 {
                if p[a] == q[a] {
                    prod *= 1.5;
                }
            }
            total += prod;
        }
    }
    Ok(total / box_side.powi(3))
}

/// Leading kinetic energy density of free seas at the given densities:
/// 3D `(3/5)(6 pi^2)^{2/3} sum rho_i^{5/3}`, 2D `2 pi sum rho_i^2`.
pub fn fermi_leading_term(densities: &[f64], dim: Dimension) -> Result<f64> {
    if densities.iter().any(|&r| r < 0.0) {
        return Err(FermigasError::InvalidInput("densities must be nonnegative".into()));
    }
    Ok(match dim {
        Dimension::Three => {
            kinetic_coefficient_3d() * densities.iter().map(|r| r.powf(5.0 / 3.0)).sum::<f64>()
        }
        Dimension::Two => 2.0 * PI * densities.iter().map(|r| r * r).sum::<f64>(),
    })
}

/// Low-momentum filter `Gamma(p) = max(1 - k_F^2/p^2, 0)`.
#[derive(Clone, Copy, Debug)]
pub struct GammaFilter {
    pub k_fermi: f64,
}

impl GammaFilter {
    /// 3D spinless Fermi momentum `(6 pi^2 rho)^{1/3}`.
    pub fn from_density_3d(rho: f64) -> Self {
        GammaFilter { k_fermi: (6.0 * PI * PI * rho).powf(1.0 / 3.0) }
    }

    pub fn gamma(&self, p: f64) -> f64 {
        if p <= self.k_fermi {
            0.0
        } else {
            1.0 - (self.k_fermi / p).powi(2)
        }
    }

    /// Low-momentum symbol `p^2 (1 - Gamma(p)) = min(p^2, k_F^2)`.
    pub fn low_momentum_symbol(&self, p: f64) -> f64 {
        (p * p).min(self.k_fermi * self.k_fermi)
    }
}

/// The low-momentum kinetic bound and its bathtub-minimizer check.
#[derive(Clone, Copy, Debug)]
pub struct LowMomentumBound {
    /// `(3/5)(6 pi^2)^{2/3} N1^{5/3} / L^2`.
    pub closed_form: f64,
    /// Grid minimum of `int p^2 (1 - Gamma) xi(p)` over admissible `xi`.
    pub bathtub_value: f64,
    /// Radius of the minimizing centered ball `(6 pi^2 N1 / L^3)^{1/3}`.
    pub ball_radius: f64,
    pub k_fermi: f64,
}

/// Minimize `int p^2 (1 - Gamma(p)) xi(p) d^3 p` over
/// `0 <= xi <= (2 pi)^-3 L^3` with `int xi = N1`, on a radial grid, filling
/// cheapest symbol values first; confirms the centered-ball minimizer.
pub fn low_momentum_bound(n1: usize, rho: f64, box_side: f64, shells: usize) -> Result<LowMomentumBound> {
    let n1f = n1 as f64;
    let vol = box_side.powi(3);
    if n1f / vol > rho * (1.0 + 1e-12) {
        return Err(FermigasError::InvalidInput(format!(
            "N1/L^3 = {} exceeds rho = {rho}",
            n1f / vol
        )));
    }
    let filter = GammaFilter::from_density_3d(rho);
    let ball_radius = (6.0 * PI * PI * n1f / vol).powf(1.0 / 3.0);
    let closed_form = kinetic_coefficient_3d() * n1f.powf(5.0 / 3.0) / (box_side * box_side);

    // phase-space density cap and radial measure
    let cap = vol / (2.0 * PI).powi(3);
    let p_top = 2.0 * filter.k_fermi.max(ball_radius);
    let dp = p_top / shells as f64;
    let mut bins: Vec<(f64, f64)> = (0..shells)
        .map(|i| {
            let p = (i as f64 + 0.5) * dp;
            let capacity = cap * 4.0 * PI * p * p * dp;
            (filter.low_momentum_symbol(p), capacity)
        })
        .collect();
    // bathtub: fill the cheapest symbol values first
    bins.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut remaining = n1f;
    let mut value = 0.0;
    for (symbol, capacity) in bins {
        if remaining <= 0.0 {
            break;
        }
        let take = capacity.min(remaining);
        value += symbol * take;
        remaining -= take;
    }
    if remaining > 1e-9 * n1f {
        return Err(FermigasError::QuadratureFailure(
            "bathtub grid too small to hold the requested mass".into(),
        ));
    }
    Ok(LowMomentumBound {
        closed_form,
        bathtub_value: value,
        ball_radius,
        k_fermi: filter.k_fermi,
    })
}
