//! Exact diagonalization of one spin-up plus one spin-down particle in a
//! Dirichlet box, used as a desk-scale check of the pseudopotential energy
//! shift `8 pi a int |phi_1|^4`.
//!
//! The Hamiltonian `-lap_x - lap_y + v(x - y)` is represented in the tensor
//! product of Dirichlet sine modes, truncated by total mode energy
//! `|j|^2 + |k|^2 <= K^2 + 2d - 1` with per-axis indices bounded by the
//! cutoff `K`; the truncated spaces are nested, so the ground state energy
//! is monotone nonincreasing in `K` for a fixed quadrature of `v`.
//!
//! Interaction elements factorize per axis at fixed pair separation `z`:
//! `<jk|v|j'k'> = int_ball v(|z|) prod_a Omega_a(z_a) dz` with `Omega_a` an
//! elementary four-sine overlap, so assembly costs one small quadrature per
//! element. Hard cores are excluded: this basis cannot represent the core
//! constraint.

use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{FermigasError, Result};
use crate::potential::{PotentialValue, RadialPotential};
use crate::quad::GaussRule;
use crate::Dimension;

/// One spin-up and one spin-down particle in a Dirichlet box.
#[derive(Clone, Debug)]
pub struct TwoBodyProblem {
    pub potential: RadialPotential,
    pub box_side: f64,
    /// Max mode index per axis per particle; the basis additionally keeps
    /// `|j|^2 + |k|^2 <= cutoff^2 + 2d - 1` so the largest spaces stay
    /// tractable.
    pub cutoff: u32,
    pub dimension: Dimension,
}

impl TwoBodyProblem {
    pub fn validate(&self) -> Result<()> {
        if self.cutoff < 2 {
            return Err(FermigasError::InvalidInput("cutoff must be at least 2".into()));
        }
        if self.potential.has_hard_core() {
            return Err(FermigasError::InvalidInput(
                "hard cores are outside the Rayleigh-Ritz domain of this basis".into(),
            ));
        }
        if self.box_side <= 0.0 {
            return Err(FermigasError::InvalidInput("box side must be positive".into()));
        }
        let report = self.potential.validate();
        if !report.passed() {
            return Err(FermigasError::InvalidPotential(format!("{:?}", report.violations)));
        }
        Ok(())
    }
}

/// Basis state: mode indices of the two particles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct PairMode {
    j: [u32; 3],
    k: [u32; 3],
}

fn energy_cap(cutoff: u32, d: usize) -> u64 {
    (cutoff as u64) * (cutoff as u64) + 2 * d as u64 - 1
}

fn enumerate_basis(cutoff: u32, d: usize) -> Vec<PairMode> {
    let cap = energy_cap(cutoff, d);
    let kmax = cutoff;
    let mut singles: Vec<[u32; 3]> = Vec::new();
    match d {
        2 => {
            for a in 1..=kmax {
                for b in 1..=kmax {
                    singles.push([a, b, 0]);
                }
            }
        }
        3 => {
            for a in 1..=kmax {
                for b in 1..=kmax {
                    for c in 1..=kmax {
                        singles.push([a, b, c]);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    let norm2 = |m: &[u32; 3]| -> u64 { m.iter().map(|&v| (v as u64) * (v as u64)).sum() };
    let mut basis: Vec<(u64, PairMode)> = Vec::new();
    for j in &singles {
        for k in &singles {
            let e = norm2(j) + norm2(k);
            if e <= cap {
                basis.push((e, PairMode { j: *j, k: *k }));
            }
        }
    }
    basis.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.j.cmp(&b.1.j)).then(a.1.k.cmp(&b.1.k)));
    basis.into_iter().map(|(_, m)| m).collect()
}

/// Four-sine axis overlap
/// `int sin(j w x) sin(j' w x) sin(k w (x - t)) sin(k' w (x - t)) dx`
/// over `x in [max(0, t), min(l, l + t)]`, times the `(2/l)^2`
/// normalization of the four mode factors.
fn axis_overlap(box_side: f64, t: f64, j: u32, jp: u32, k: u32, kp: u32) -> f64 {
    let omega = PI / box_side;
    let lo = t.max(0.0);
    let hi = (box_side + t).min(box_side);
    if hi <= lo {
        return 0.0;
    }
    let j_int = |q: i64, phase: f64| -> f64 {
        if q == 0 {
            (hi - lo) * phase.cos()
        } else {
            let qw = q as f64 * omega;
            ((qw * hi + phase).sin() - (qw * lo + phase).sin()) / qw
        }
    };
    // sin a sin b = [cos(a-b) - cos(a+b)]/2 applied to both pairs
    let mut total = 0.0;
    let first = [(j as i64 - jp as i64, 1.0), (j as i64 + jp as i64, -1.0)];
    let second = [(k as i64 - kp as i64, 1.0), (k as i64 + kp as i64, -1.0)];
    for &(m, sm) in &first {
        for &(n, sn) in &second {
            // cos(m w x) cos(n w (x - t)):
            // [cos((m+n) w x - n w t) + cos((m-n) w x + n w t)] / 2
            let phase = n as f64 * omega * t;
            let val = 0.5 * (j_int(m + n, -phase) + j_int(m - n, phase));
            total += 0.25 * sm * sn * val;
        }
    }
    total * (2.0 / box_side).powi(2)
}

/// Quadrature nodes over the interaction ball `|z| <= R0`.
fn interaction_nodes(potential: &RadialPotential, dim: Dimension) -> Vec<([f64; 3], f64)> {
    let r0 = potential.range;
    if r0 <= 0.0 {
        return Vec::new();
    }
    let mut cuts: Vec<f64> = potential
        .pieces
        .iter()
        .flat_map(|p| [p.r_lo(), p.r_hi()])
        .filter(|&r| r > 0.0 && r < r0)
        .collect();
    cuts.push(0.0);
    cuts.push(r0);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let radial = GaussRule::new(10);
    let mut nodes = Vec::new();
    match dim {
        Dimension::Three => {
            let theta = GaussRule::new(6).mapped(-1.0, 1.0);
            let n_phi = 8;
            for panel in cuts.windows(2) {
                for (r, wr) in radial.mapped(panel[0], panel[1]) {
                    let v = match potential.evaluate(r) {
                        Ok(PotentialValue::Finite(val)) => val,
                        _ => 0.0,
                    };
                    if v == 0.0 {
                        continue;
                    }
                    for &(ct, wt) in &theta {
                        let st = (1.0 - ct * ct).sqrt();
                        for ip in 0..n_phi {
                            let phi = 2.0 * PI * (ip as f64 + 0.5) / n_phi as f64;
                            let w = wr * wt * (2.0 * PI / n_phi as f64) * r * r * v;
                            nodes.push(([r * st * phi.cos(), r * st * phi.sin(), r * ct], w));
                        }
                    }
                }
            }
        }
        Dimension::Two => {
            let n_phi = 16;
            for panel in cuts.windows(2) {
                for (r, wr) in radial.mapped(panel[0], panel[1]) {
                    let v = match potential.evaluate(r) {
                        Ok(PotentialValue::Finite(val)) => val,
                        _ => 0.0,
                    };
                    if v == 0.0 {
                        continue;
                    }
                    for ip in 0..n_phi {
                        let phi = 2.0 * PI * (ip as f64 + 0.5) / n_phi as f64;
                        let w = wr * (2.0 * PI / n_phi as f64) * r * v;
                        nodes.push(([r * phi.cos(), r * phi.sin(), 0.0], w));
                    }
                }
            }
        }
    }
    nodes
}

/// Ground-state result with its variational convergence trace.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    /// `(cutoff, basis size, energy)` for the nested cutoffs up to the
    /// requested one; energies are monotone nonincreasing.
    pub trace: Vec<(u32, usize, f64)>,
    /// Relative change between the two largest cutoffs.
    pub final_relative_change: f64,
    pub converged: bool,
}

/// Lowest eigenvalue of the two-particle Hamiltonian by Lanczos with full
/// reorthogonalization on the leading principal block of size `dim_keep`.
fn lanczos_ground_state(
    diag_kin: &[f64],
    v_matrix: &DMatrix<f64>,
    dim_keep: usize,
) -> Result<f64> {
    let n = dim_keep;
    let max_iter = n.min(260);
    let mut basis_vecs: Vec<Vec<f64>> = Vec::with_capacity(max_iter);
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut q = vec![0.0f64; n];
    q[0] = 1.0; // free ground state
    let mut prev_lowest = f64::INFINITY;
    let matvec = |x: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let mut acc = diag_kin[i] * x[i];
            let row = v_matrix.row(i);
            for (jj, xv) in x.iter().enumerate() {
                acc += row[jj] * xv;
            }
            out[i] = acc;
        }
    };
    let mut w = vec![0.0f64; n];
    for iter in 0..max_iter {
        matvec(&q, &mut w);
        let alpha: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
        alphas.push(alpha);
        basis_vecs.push(q.clone());
        // w -= alpha q + beta q_prev, then full reorthogonalization
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi -= alpha * qi;
        }
        if let Some(beta_prev) = betas.last() {
            let prev = &basis_vecs[basis_vecs.len() - 2];
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= beta_prev * pi;
            }
        }
        for b in &basis_vecs {
            let overlap: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
            if overlap.abs() > 1e-14 {
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= overlap * bi;
                }
            }
        }
        let beta: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        // tridiagonal lowest eigenvalue so far
        let k = alphas.len();
        let mut tri = DMatrix::zeros(k, k);
        for i in 0..k {
            tri[(i, i)] = alphas[i];
            if i + 1 < k {
                tri[(i, i + 1)] = betas[i];
                tri[(i + 1, i)] = betas[i];
            }
        }
        let lowest = tri
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &e| m.min(e));
        let converged = (prev_lowest - lowest).abs()
            <= 1e-12 * lowest.abs().max(1.0) && iter > 4;
        prev_lowest = lowest;
        if converged || beta < 1e-12 || iter + 1 == max_iter {
            return Ok(lowest);
        }
        betas.push(beta);
        for (qi, wi) in q.iter_mut().zip(&w) {
            *qi = wi / beta;
        }
    }
    Err(FermigasError::EigenFailure("Lanczos did not converge".into()))
}

/// Variational ground-state energy with a monotone convergence trace over
/// nested cutoffs `2..=problem.cutoff`.
pub fn ground_state_energy(problem: &TwoBodyProblem) -> Result<GroundState> {
    problem.validate()?;
    let d = problem.dimension.as_usize();
    let ell = problem.box_side;
    let basis = enumerate_basis(problem.cutoff, d);
    let n_basis = basis.len();
    if n_basis > 12_000 {
        return Err(FermigasError::InvalidInput(format!(
            "basis size {n_basis} exceeds the memory guard (reduce the cutoff)"
        )));
    }

    // kinetic diagonal
    let diag_kin: Vec<f64> = basis
        .iter()
        .map(|pm| {
            let s: u64 = pm
                .j
                .iter()
                .chain(pm.k.iter())
                .map(|&v| (v as u64) * (v as u64))
                .sum();
            PI * PI * s as f64 / (ell * ell)
        })
        .collect();

    // interaction matrix via per-axis overlap tables
    let nodes = interaction_nodes(&problem.potential, problem.dimension);
    let mut v_matrix = DMatrix::zeros(n_basis, n_basis);
    if !nodes.is_empty() {
        let kmax = problem.cutoff as usize;
        let table_len = kmax * kmax * kmax * kmax;
        // tables[axis][combo][node]
        let n_nodes = nodes.len();
        let mut tables: Vec<Vec<f64>> = vec![vec![0.0; table_len * n_nodes]; d];
        for (axis, table) in tables.iter_mut().enumerate() {
            let combos: Vec<(usize, u32, u32, u32, u32)> = (0..table_len)
                .map(|idx| {
                    let j = (idx % kmax) as u32 + 1;
                    let jp = ((idx / kmax) % kmax) as u32 + 1;
                    let k = ((idx / (kmax * kmax)) % kmax) as u32 + 1;
                    let kp = ((idx / (kmax * kmax * kmax)) % kmax) as u32 + 1;
                    (idx, j, jp, k, kp)
                })
                .collect();
            let rows: Vec<Vec<f64>> = combos
                .par_iter()
                .map(|&(_, j, jp, k, kp)| {
                    nodes
                        .iter()
                        .map(|(z, _)| axis_overlap(ell, z[axis], j, jp, k, kp))
                        .collect()
                })
                .collect();
            for (idx, row) in rows.into_iter().enumerate() {
                table[idx * n_nodes..(idx + 1) * n_nodes].copy_from_slice(&row);
            }
        }
        let weights: Vec<f64> = nodes.iter().map(|(_, w)| *w).collect();
        let combo_index = |a: u32, b: u32, c: u32, e: u32| -> usize {
            (a as usize - 1)
                + kmax * ((b as usize - 1)
                    + kmax * ((c as usize - 1) + kmax * (e as usize - 1)))
        };
        let entries: Vec<(usize, usize, f64)> = (0..n_basis)
            .into_par_iter()
            .flat_map_iter(|p| {
                let bp = basis[p];
                let tables = &tables;
                let weights = &weights;
                let basis = &basis;
                (p..n_basis).map(move |qq| {
                    let bq = basis[qq];
                    let idx: Vec<usize> = (0..d)
                        .map(|a| combo_index(bp.j[a], bq.j[a], bp.k[a], bq.k[a]))
                        .collect();
                    let mut acc = 0.0;
                    match d {
                        3 => {
                            let t0 = &tables[0][idx[0] * n_nodes..(idx[0] + 1) * n_nodes];
                            let t1 = &tables[1][idx[1] * n_nodes..(idx[1] + 1) * n_nodes];
                            let t2 = &tables[2][idx[2] * n_nodes..(idx[2] + 1) * n_nodes];
                            for i in 0..n_nodes {
                                acc += weights[i] * t0[i] * t1[i] * t2[i];
                            }
                        }
                        _ => {
                            let t0 = &tables[0][idx[0] * n_nodes..(idx[0] + 1) * n_nodes];
                            let t1 = &tables[1][idx[1] * n_nodes..(idx[1] + 1) * n_nodes];
                            for i in 0..n_nodes {
                                acc += weights[i] * t0[i] * t1[i];
                            }
                        }
                    }
                    (p, qq, acc)
                })
            })
            .collect();
        for (p, qq, val) in entries {
            v_matrix[(p, qq)] = val;
            v_matrix[(qq, p)] = val;
        }
    }

    // nested-cutoff trace
    let mut trace = Vec::new();
    for k in 2..=problem.cutoff {
        let cap = energy_cap(k, d);
        let keep = basis
            .iter()
            .take_while(|pm| {
                let s: u64 = pm
                    .j
                    .iter()
                    .chain(pm.k.iter())
                    .map(|&v| (v as u64) * (v as u64))
                    .sum();
                s <= cap
            })
            .filter(|pm| pm.j.iter().chain(pm.k.iter()).all(|&v| v <= k || v == 0))
            .count();
        // the basis is sorted by total energy; per-axis truncation is
        // implied by the cap for these cutoffs
        let keep = keep.max(1);
        let e = lanczos_ground_state(&diag_kin, &v_matrix, keep)?;
        trace.push((k, keep, e));
    }
    let energy = trace.last().unwrap().2;
    let final_relative_change = if trace.len() >= 2 {
        let prev = trace[trace.len() - 2].2;
        ((prev - energy) / energy.abs()).abs()
    } else {
        f64::INFINITY
    };
    Ok(GroundState {
        energy,
        trace,
        final_relative_change,
        converged: final_relative_change < 1e-3,
    })
}

/// Pseudopotential prediction for the box ground state.
///
/// 3D: `E_free + 8 pi a int |phi_1|^4 = E_free + 27 pi a / l^3`. The 2D
/// form replaces the coupling by `8 pi / (2 ln(l/a))` with the one-pair box
/// density; it is reported as a heuristic only (the 2D coupling is
/// density-dependent).
pub fn pseudopotential_prediction(a: f64, box_side: f64, dim: Dimension) -> Result<f64> {
    if a < 0.0 {
        return Err(FermigasError::InvalidInput("scattering length must be nonnegative".into()));
    }
    let d = dim.as_usize() as i32;
    let e_free = 2.0 * d as f64 * PI * PI / (box_side * box_side);
    let density4 = (1.5 / box_side).powi(d);
    match dim {
        Dimension::Three => Ok(e_free + 8.0 * PI * a * density4),
        Dimension::Two => {
            if a == 0.0 {
                return Ok(e_free);
            }
            let log = (box_side / a).ln();
            if log <= 0.0 {
                return Err(FermigasError::InvalidInput(
                    "2D heuristic requires a < box side".into(),
                ));
            }
            Ok(e_free + 8.0 * PI / (2.0 * log) * density4)
        }
    }
}

/// Free two-particle ground-state energy `2 d pi^2 / l^2`.
pub fn free_energy(box_side: f64, dim: Dimension) -> f64 {
    2.0 * dim.as_usize() as f64 * PI * PI / (box_side * box_side)
}

/// Scale a soft potential's amplitude until the 3D scattering length hits
/// the target (bisection; the scattering length grows with amplitude for
/// positive profiles).
pub fn tune_amplitude_to_scattering_length(
    base: &RadialPotential,
    target_a: f64,
    tolerance: f64,
) -> Result<(RadialPotential, f64)> {
    let scaled = |factor: f64| -> RadialPotential {
        let mut p = base.clone();
        for piece in &mut p.pieces {
            match piece {
                crate::potential::Piece::Const { value, .. } => *value *= factor,
                crate::potential::Piece::Table { points, .. } => {
                    for q in points.iter_mut() {
                        q[1] *= factor;
                    }
                }
            }
        }
        p
    };
    let a_of = |factor: f64| -> Result<f64> {
        Ok(crate::scattering::solve_zero_energy(&scaled(factor), Dimension::Three, 1e-10)?.a)
    };
    let mut lo = 1e-6;
    let mut hi = 1.0;
    while a_of(hi)? < target_a {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(FermigasError::InvalidInput(
                "cannot reach the target scattering length".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let a = a_of(mid)?;
        if (a - target_a).abs() <= tolerance * target_a {
            return Ok((scaled(mid), a));
        }
        if a < target_a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(FermigasError::SolverTolerance { requested: tolerance, achieved: f64::NAN })
}
