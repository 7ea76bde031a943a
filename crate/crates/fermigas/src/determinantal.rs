//! Weighted Slater determinants: norms, k-particle densities, weighted
//! traces, and the exact operator-norm deviation `||1 - M_Y||` of the
//! overlap matrix for product weights centered on separated points.
//!
//! For orthonormal orbitals `phi_a` and a one-body weight `h`, the state
//! `Phi(X) = D_n(X) prod_i h(x_i)` has norm `det M` with
//! `M_ab = int phi_a phi_b |h|^2`, k-particle densities given by wedge
//! contractions of `M^{-1}`, and weighted traces `det M * Tr[K M^{-1}]`.
//! The `bruteforce` submodule re-derives all of these by direct
//! multidimensional quadrature and stays independent of the determinantal
//! formulas; it is the verification oracle.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{FermigasError, Result};
use crate::fermi_box::FermiSeaSpec;
use crate::quad::GaussRule;
use crate::scattering::CutoffProfile;
use crate::Dimension;

/// Condition-number guard for `M^{-1}`.
const CONDITION_LIMIT: f64 = 1e12;

/// Calibrated constant of the structural bound
/// `||1 - M_Y|| <= C (a R^2 / s^3 + n^{2/3} (s/l)^2)`, frozen from a
/// 100-configuration corpus sweep (seed 42) with a 1.5x margin; see
/// `calibrate_lemma2_constant`.
pub const LEMMA2_CALIBRATED_C: f64 = 0.101;

/// Orthonormal sine modes on a box, usable in 1, 2, or 3 dimensions.
///
/// Dimensions 2 and 3 come from [`FermiSeaSpec`]; the 1D variant exists so
/// the brute-force suite can reach particle numbers whose full-dimensional
/// oracle integrals would be intractable.
#[derive(Clone, Debug)]
pub struct SineBasis {
    pub dim: usize,
    pub box_side: f64,
    pub modes: Vec<[u32; 3]>,
}

impl SineBasis {
    pub fn from_fermi_sea(spec: &FermiSeaSpec) -> Self {
        SineBasis {
            dim: spec.dimension.as_usize(),
            box_side: spec.box_side,
            modes: spec.modes.clone(),
        }
    }

    /// First `n` one-dimensional modes `sin(k pi x / l)`, `k = 1..=n`.
    pub fn line(n: usize, box_side: f64) -> Self {
        SineBasis {
            dim: 1,
            box_side,
            modes: (1..=n as u32).map(|k| [k, 0, 0]).collect(),
        }
    }

    pub fn new(dim: Dimension, n: usize, box_side: f64) -> Result<Self> {
        Ok(Self::from_fermi_sea(&FermiSeaSpec::new(dim, n, box_side)?))
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn value(&self, mode: [u32; 3], x: &[f64; 3]) -> f64 {
        let norm = (2.0 / self.box_side).powf(self.dim as f64 / 2.0);
        let mut prod = norm;
        for a in 0..self.dim {
            prod *= (mode[a] as f64 * std::f64::consts::PI * x[a] / self.box_side).sin();
        }
        prod
    }

    /// All mode values at `x`.
    pub fn vector(&self, x: &[f64; 3]) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.modes.iter().map(|&m| self.value(m, x)))
    }

    pub fn contains(&self, x: &[f64; 3]) -> bool {
        (0..self.dim).all(|a| (0.0..=self.box_side).contains(&x[a]))
    }

    fn tensor_nodes(&self, points_per_axis: usize) -> Vec<([f64; 3], f64)> {
        let rule = GaussRule::new(points_per_axis);
        let axis = rule.mapped(0.0, self.box_side);
        let mut out = Vec::new();
        match self.dim {
            1 => {
                for &(x, w) in &axis {
                    out.push(([x, 0.0, 0.0], w));
                }
            }
            2 => {
                for &(x, wx) in &axis {
                    for &(y, wy) in &axis {
                        out.push(([x, y, 0.0], wx * wy));
                    }
                }
            }
            3 => {
                for &(x, wx) in &axis {
                    for &(y, wy) in &axis {
                        for &(z, wz) in &axis {
                            out.push(([x, y, z], wx * wy * wz));
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }
}

/// Full-box tensor Gauss-Legendre order (per axis).
#[derive(Clone, Copy, Debug)]
pub struct QuadratureSpec {
    pub points_per_axis: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { points_per_axis: 32 }
    }
}

impl QuadratureSpec {
    /// Enough points to resolve the highest mode pair plus a smooth weight.
    pub fn for_basis(basis: &SineBasis) -> Self {
        let kmax = basis
            .modes
            .iter()
            .map(|m| m.iter().copied().max().unwrap())
            .max()
            .unwrap_or(1);
        QuadratureSpec { points_per_axis: (8 * kmax as usize).clamp(24, 64) }
    }
}

/// Gram matrix `G_ab = int phi_a phi_b wsq(x) dx` for an arbitrary
/// (already squared) weight.
fn weighted_gram<W>(basis: &SineBasis, wsq: W, quad: QuadratureSpec) -> DMatrix<f64>
where
    W: Fn(&[f64; 3]) -> f64 + Sync,
{
    let n = basis.len();
    let nodes = basis.tensor_nodes(quad.points_per_axis);
    let partial: Vec<DMatrix<f64>> = nodes
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = DMatrix::zeros(n, n);
            for (x, w) in chunk {
                let weight = wsq(x) * w;
                if weight == 0.0 {
                    continue;
                }
                let v = basis.vector(x);
                for alpha in 0..n {
                    let va = v[alpha] * weight;
                    for beta in alpha..n {
                        acc[(alpha, beta)] += va * v[beta];
                    }
                }
            }
            acc
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for p in partial {
        m += p;
    }
    // fill the lower triangle; the quadrature is symmetric by construction
    for alpha in 0..n {
        for beta in 0..alpha {
            m[(alpha, beta)] = m[(beta, alpha)];
        }
    }
    m
}

/// Overlap matrix `M_ab = int phi_a phi_b |h(x)|^2` for a weight amplitude
/// `h`.
pub fn overlap_matrix<H>(basis: &SineBasis, h: H, quad: QuadratureSpec) -> DMatrix<f64>
where
    H: Fn(&[f64; 3]) -> f64 + Sync,
{
    weighted_gram(basis, |x| h(x) * h(x), quad)
}

/// A Slater determinant multiplied by a one-body weight, with its overlap
/// matrix and factorization.
pub struct WeightedSlater {
    pub basis: SineBasis,
    pub overlap: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    det: f64,
}

impl WeightedSlater {
    pub fn new<H>(basis: SineBasis, h: H, quad: QuadratureSpec) -> Self
    where
        H: Fn(&[f64; 3]) -> f64 + Sync,
    {
        let overlap = overlap_matrix(&basis, h, quad);
        Self::from_overlap(basis, overlap)
    }

    pub fn from_overlap(basis: SineBasis, overlap: DMatrix<f64>) -> Self {
        let lu = overlap.clone().lu();
        let det = lu.determinant();
        WeightedSlater { basis, overlap, lu, det }
    }

    /// `<Phi|Phi> = det M`.
    pub fn norm(&self) -> f64 {
        self.det
    }

    fn condition_estimate(&self) -> f64 {
        let u = self.lu.u();
        let mut max_d: f64 = 0.0;
        let mut min_d = f64::INFINITY;
        for i in 0..u.nrows() {
            let d = u[(i, i)].abs();
            max_d = max_d.max(d);
            min_d = min_d.min(d);
        }
        if min_d == 0.0 {
            f64::INFINITY
        } else {
            max_d / min_d
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let cond = self.condition_estimate();
        if cond > CONDITION_LIMIT {
            return Err(FermigasError::SingularMatrix { cond, limit: CONDITION_LIMIT });
        }
        self.lu
            .solve(rhs)
            .ok_or(FermigasError::SingularMatrix { cond, limit: CONDITION_LIMIT })
    }

    /// k-particle density of `Phi` at the given points (`1 <= k <= 3`),
    /// normalized so the `k = 1` case integrates to `n` and `k = 2`
    /// integrates to `n(n-1)/2`:
    ///
    /// `(1/k!) prod_i |h(x_i)|^2 det[ (x_i| M^{-1} |x_j) ]`.
    pub fn k_particle_density<H>(&self, h: H, points: &[[f64; 3]]) -> Result<f64>
    where
        H: Fn(&[f64; 3]) -> f64,
    {
        let k = points.len();
        if !(1..=3).contains(&k) {
            return Err(FermigasError::InvalidInput(format!(
                "k-particle density supports 1 <= k <= 3, got {k}"
            )));
        }
        for p in points {
            if !self.basis.contains(p) {
                return Err(FermigasError::InvalidInput(format!("point {p:?} outside box")));
            }
        }
        let vs: Vec<DVector<f64>> = points.iter().map(|p| self.basis.vector(p)).collect();
        let solved: Vec<DVector<f64>> = vs.iter().map(|v| self.solve(v)).collect::<Result<_>>()?;
        let mut g = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                g[(i, j)] = vs[i].dot(&solved[j]);
            }
        }
        let det_g = match k {
            1 => g[(0, 0)],
            2 => g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)],
            _ => {
                g[(0, 0)] * (g[(1, 1)] * g[(2, 2)] - g[(1, 2)] * g[(2, 1)])
                    - g[(0, 1)] * (g[(1, 0)] * g[(2, 2)] - g[(1, 2)] * g[(2, 0)])
                    + g[(0, 2)] * (g[(1, 0)] * g[(2, 1)] - g[(1, 1)] * g[(2, 0)])
            }
        };
        let mut hprod = 1.0;
        for p in points {
            let hv = h(p);
            hprod *= hv * hv;
        }
        let kfact = [1.0, 1.0, 2.0, 6.0][k];
        Ok(hprod * det_g / kfact)
    }
}

/// `sum_i <Phi'_i|Phi'_i> = det(M) Tr[K M^{-1}]` where
/// `Phi'_i = Phi k(x_i)/h(x_i)` and `K_ab = int phi_a phi_b ksq`.
///
/// `ksq` is the squared replacement weight `|k(x)|^2` (in the variational
/// bound it is a sum of `xi` translates, not a perfect square).
pub fn weighted_trace<H, K>(basis: &SineBasis, h: H, ksq: K, quad: QuadratureSpec) -> Result<f64>
where
    H: Fn(&[f64; 3]) -> f64 + Sync,
    K: Fn(&[f64; 3]) -> f64 + Sync,
{
    let ws = WeightedSlater::new(basis.clone(), &h, quad);
    let cond = ws.condition_estimate();
    if cond > CONDITION_LIMIT {
        return Err(FermigasError::SingularMatrix { cond, limit: CONDITION_LIMIT });
    }
    let kmat = weighted_gram(basis, &ksq, quad);
    let minv_k = ws
        .lu
        .solve(&kmat)
        .ok_or(FermigasError::SingularMatrix { cond, limit: CONDITION_LIMIT })?;
    Ok(ws.det * minv_k.trace())
}

/// Exact and structural deviation of the overlap matrix for the weight
/// `h(x) = prod_j f(x - y_j)`.
#[derive(Clone, Copy, Debug)]
pub struct MDeviation {
    /// Largest eigenvalue of `1 - M_Y`.
    pub exact_norm: f64,
    /// `C (a R^2/s^3 + n^{2/3} (s/l)^2)`.
    pub structural_bound: f64,
    /// `a R^2 / s^3` term.
    pub channel_core: f64,
    /// `n^{2/3} (s/l)^2` term.
    pub channel_kinetic: f64,
}

/// Deficit matrix `Q = 1 - M_Y` integrated ball-by-ball in spherical
/// coordinates (the balls of radius `R` around separated centers are
/// disjoint, and `1 - prod f^2` reduces to `1 - f(x - y_j)^2` on ball `j`).
pub fn overlap_deficit_matrix(
    basis: &SineBasis,
    centers: &[[f64; 3]],
    profile: &CutoffProfile,
) -> DMatrix<f64> {
    let n = basis.len();
    let r_cut = profile.r_cutoff;
    let pot = &profile.solution().potential;
    let mut radial_breaks: Vec<f64> = vec![0.0, r_cut];
    for b in pot.breakpoints() {
        if b > 0.0 && b < r_cut {
            radial_breaks.push(b);
        }
    }
    radial_breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radial_breaks.dedup();
    let radial = GaussRule::new(12);
    let angular_theta = GaussRule::new(12).mapped(-1.0, 1.0);
    let n_phi = 12;

    let mut q = DMatrix::zeros(n, n);
    for y in centers {
        for panel in radial_breaks.windows(2) {
            for (r, wr) in radial.mapped(panel[0], panel[1]) {
                let f = profile.f(r);
                let deficit = 1.0 - f * f;
                if deficit == 0.0 {
                    continue;
                }
                for &(cos_t, wt) in &angular_theta {
                    let sin_t = (1.0 - cos_t * cos_t).sqrt();
                    for iphi in 0..n_phi {
                        let phi = 2.0 * std::f64::consts::PI * (iphi as f64 + 0.5) / n_phi as f64;
                        let x = [
                            y[0] + r * sin_t * phi.cos(),
                            y[1] + r * sin_t * phi.sin(),
                            y[2] + r * cos_t,
                        ];
                        if !basis.contains(&x) {
                            continue;
                        }
                        let w = wr * wt * (2.0 * std::f64::consts::PI / n_phi as f64)
                            * r
                            * r
                            * deficit;
                        let v = basis.vector(&x);
                        for alpha in 0..n {
                            for beta in alpha..n {
                                q[(alpha, beta)] += w * v[alpha] * v[beta];
                            }
                        }
                    }
                }
            }
        }
    }
    for alpha in 0..n {
        for beta in 0..alpha {
            q[(alpha, beta)] = q[(beta, alpha)];
        }
    }
    q
}

/// Exact `||1 - M_Y||` against the structural two-channel bound.
///
/// Requires the centers pairwise separated by at least `s >= 2R`.
pub fn m_deviation(
    basis: &SineBasis,
    centers: &[[f64; 3]],
    profile: &CutoffProfile,
    separation: f64,
    constant: f64,
) -> Result<MDeviation> {
    if separation < 2.0 * profile.r_cutoff {
        return Err(FermigasError::SeparationViolation(format!(
            "s = {separation} < 2R = {}",
            2.0 * profile.r_cutoff
        )));
    }
    for (i, yi) in centers.iter().enumerate() {
        for yj in centers.iter().skip(i + 1) {
            let d2: f64 = (0..3).map(|a| (yi[a] - yj[a]).powi(2)).sum();
            if d2.sqrt() < separation * (1.0 - 1e-12) {
                return Err(FermigasError::SeparationViolation(format!(
                    "centers closer than s = {separation}"
                )));
            }
        }
    }
    let exact_norm = if centers.is_empty() {
        0.0
    } else {
        let q = overlap_deficit_matrix(basis, centers, profile);
        q.symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, &e| m.max(e))
    };
    let n = basis.len() as f64;
    let channel_core = profile.a * profile.r_cutoff.powi(2) / separation.powi(3);
    let channel_kinetic = n.powf(2.0 / 3.0) * (separation / basis.box_side).powi(2);
    Ok(MDeviation {
        exact_norm,
        structural_bound: constant * (channel_core + channel_kinetic),
        channel_core,
        channel_kinetic,
    })
}

/// `A_n` and `B_n` correction factors of the norm-comparison chain.
#[derive(Clone, Copy, Debug)]
pub struct CorrectionFactors {
    /// `1 / (1 - C [a R^2/s^3 + n^{2/3} (s/l)^2])`.
    pub a_n: f64,
    /// `1 / (1 - C n^{8/3} A_n^2 (s/l)^5)`.
    pub b_n: f64,
}

pub fn correction_factors(
    a: f64,
    r_cut: f64,
    s: f64,
    box_side: f64,
    n: f64,
    constant: f64,
) -> Result<CorrectionFactors> {
    let nf = n;
    let denom_a = 1.0
        - constant
            * (a * r_cut * r_cut / s.powi(3) + nf.powf(2.0 / 3.0) * (s / box_side).powi(2));
    if denom_a <= 0.0 {
        return Err(FermigasError::InfeasibleSchedule(format!(
            "A_n denominator {denom_a} <= 0: parameters outside the dilute regime"
        )));
    }
    let a_n = 1.0 / denom_a;
    let denom_b = 1.0 - constant * nf.powf(8.0 / 3.0) * a_n * a_n * (s / box_side).powi(5);
    if denom_b <= 0.0 {
        return Err(FermigasError::InfeasibleSchedule(format!(
            "B_n denominator {denom_b} <= 0: parameters outside the dilute regime"
        )));
    }
    Ok(CorrectionFactors { a_n, b_n: 1.0 / denom_b })
}

/// A deterministic corpus of separated-center configurations for the
/// structural-bound calibration and acceptance sweep.
pub struct DeviationCorpus {
    pub configs: Vec<DeviationConfig>,
}

pub struct DeviationConfig {
    pub basis: SineBasis,
    pub profile: CutoffProfile,
    pub centers: Vec<[f64; 3]>,
    pub separation: f64,
}

/// Build `count` seeded configurations: hard-sphere profiles with
/// `a = R/3`, 1-3 centers separated by `s in [2R, 4R]`, kept `R` away from
/// the box faces.
pub fn deviation_corpus(count: usize, seed: u64) -> Result<DeviationCorpus> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let box_side = 1.0;
    let basis = SineBasis::new(Dimension::Three, 8, box_side)?;
    let mut configs = Vec::with_capacity(count);
    while configs.len() < count {
        let r_cut: f64 = rng.random_range(0.02..0.06);
        let a = r_cut / 3.0;
        let sol = crate::scattering::solve_zero_energy(
            &crate::potential::RadialPotential::hard_sphere(a),
            Dimension::Three,
            1e-10,
        )?;
        let profile = crate::scattering::xi_profile(&sol, r_cut)?;
        let separation = r_cut * rng.random_range(2.0..4.0);
        let n_pts = rng.random_range(1..=3usize);
        let mut centers: Vec<[f64; 3]> = Vec::new();
        let mut attempts = 0;
        while centers.len() < n_pts && attempts < 200 {
            attempts += 1;
            let c = [
                rng.random_range(r_cut..box_side - r_cut),
                rng.random_range(r_cut..box_side - r_cut),
                rng.random_range(r_cut..box_side - r_cut),
            ];
            if centers.iter().all(|y: &[f64; 3]| {
                let d2: f64 = (0..3).map(|i| (y[i] - c[i]).powi(2)).sum();
                d2.sqrt() >= separation
            }) {
                centers.push(c);
            }
        }
        if centers.len() == n_pts {
            configs.push(DeviationConfig { basis: basis.clone(), profile, centers, separation });
        }
    }
    Ok(DeviationCorpus { configs })
}

/// Maximum of `exact / (a R^2/s^3 + n^{2/3}(s/l)^2)` over the corpus; the
/// frozen default [`LEMMA2_CALIBRATED_C`] was set from this with margin.
pub fn calibrate_lemma2_constant(corpus: &DeviationCorpus) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for cfg in &corpus.configs {
        let dev = m_deviation(&cfg.basis, &cfg.centers, &cfg.profile, cfg.separation, 1.0)?;
        let denom = dev.channel_core + dev.channel_kinetic;
        worst = worst.max(dev.exact_norm / denom);
    }
    Ok(worst)
}

/// Brute-force quadrature oracles for the determinantal identities.
///
/// These integrate `|D_n(X) prod h(x_i)|^2` directly over the full
/// configuration space on tensor Gauss grids; nothing here touches the
/// overlap-matrix formulas they are meant to check. Grid dimensionality is
/// `n * dim`, so they are only usable at desk scale.
pub mod bruteforce {
    use super::SineBasis;
    use crate::quad::GaussRule;

    /// Slater determinant value `det[phi_a(x_i)] / sqrt(n!)`.
    pub fn slater_value(basis: &SineBasis, coords: &[[f64; 3]]) -> f64 {
        let n = basis.len();
        assert_eq!(coords.len(), n);
        let mut a = nalgebra::DMatrix::zeros(n, n);
        for (i, x) in coords.iter().enumerate() {
            for (alpha, &m) in basis.modes.iter().enumerate() {
                a[(i, alpha)] = basis.value(m, x);
            }
        }
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        a.determinant() / fact.sqrt()
    }

    struct Grid {
        nodes: Vec<([f64; 3], f64)>,
        /// per-node mode values (n entries each)
        mode_table: Vec<Vec<f64>>,
        h_table: Vec<f64>,
    }

    fn build_grid<H>(basis: &SineBasis, h: &H, points_per_axis: usize) -> Grid
    where
        H: Fn(&[f64; 3]) -> f64,
    {
        let rule = GaussRule::new(points_per_axis);
        let axis = rule.mapped(0.0, basis.box_side);
        let mut nodes = Vec::new();
        match basis.dim {
            1 => {
                for &(x, w) in &axis {
                    nodes.push(([x, 0.0, 0.0], w));
                }
            }
            2 => {
                for &(x, wx) in &axis {
                    for &(y, wy) in &axis {
                        nodes.push(([x, y, 0.0], wx * wy));
                    }
                }
            }
            3 => {
                for &(x, wx) in &axis {
                    for &(y, wy) in &axis {
                        for &(z, wz) in &axis {
                            nodes.push(([x, y, z], wx * wy * wz));
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        let mode_table = nodes
            .iter()
            .map(|(x, _)| basis.modes.iter().map(|&m| basis.value(m, x)).collect())
            .collect();
        let h_table = nodes.iter().map(|(x, _)| h(x)).collect();
        Grid { nodes, mode_table, h_table }
    }

    fn det_from_rows(rows: &[&[f64]]) -> f64 {
        match rows.len() {
            1 => rows[0][0],
            2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
            3 => {
                rows[0][0] * (rows[1][1] * rows[2][2] - rows[1][2] * rows[2][1])
                    - rows[0][1] * (rows[1][0] * rows[2][2] - rows[1][2] * rows[2][0])
                    + rows[0][2] * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0])
            }
            4 => {
                let mut det = 0.0;
                for c in 0..4 {
                    let minor_rows: Vec<Vec<f64>> = (1..4)
                        .map(|r| (0..4).filter(|&cc| cc != c).map(|cc| rows[r][cc]).collect())
                        .collect();
                    let refs: Vec<&[f64]> = minor_rows.iter().map(|v| v.as_slice()).collect();
                    let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                    det += sign * rows[0][c] * det_from_rows(&refs);
                }
                det
            }
            _ => panic!("brute-force determinant supports n <= 4"),
        }
    }

    /// Walk all placements of `vary` particles on the grid, with `fixed`
    /// rows prepended, accumulating `w |D prod h|^2 extra(indices)`.
    fn sweep<F>(
        basis: &SineBasis,
        grid: &Grid,
        fixed_rows: &[Vec<f64>],
        fixed_h: f64,
        vary: usize,
        mut extra: F,
    ) -> f64
    where
        F: FnMut(&[usize]) -> f64,
    {
        let n = basis.len();
        let total_rows = fixed_rows.len() + vary;
        assert_eq!(total_rows, n);
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let m = grid.nodes.len();
        let mut idx = vec![0usize; vary];
        let mut total = 0.0;
        loop {
            let mut rows: Vec<&[f64]> = Vec::with_capacity(n);
            for r in fixed_rows {
                rows.push(r.as_slice());
            }
            let mut w = fixed_h * fixed_h;
            let mut wq = 1.0;
            for &i in &idx {
                rows.push(grid.mode_table[i].as_slice());
                let h = grid.h_table[i];
                w *= h * h;
                wq *= grid.nodes[i].1;
            }
            let d2 = {
                let d = det_from_rows(&rows);
                d * d / fact
            };
            total += wq * w * d2 * extra(&idx);
            if vary == 0 {
                break;
            }
            // odometer over grid placements
            let mut carry = true;
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < m {
                    carry = false;
                    break;
                }
                *slot = 0;
            }
            if carry {
                break;
            }
        }
        total
    }

    /// `int |D_n prod h|^2 dX` by direct tensor quadrature.
    pub fn norm<H>(basis: &SineBasis, h: &H, points_per_axis: usize) -> f64
    where
        H: Fn(&[f64; 3]) -> f64,
    {
        let grid = build_grid(basis, h, points_per_axis);
        sweep(basis, &grid, &[], 1.0, basis.len(), |_| 1.0)
    }

    /// k-particle density at fixed points, in the convention that the
    /// `k = 1` case integrates to `n`:
    /// `binom(n, k) int |Phi|^2 dx_{k+1}..dx_n / <Phi|Phi>` with the norm
    /// supplied by the caller (also brute force).
    pub fn k_particle_density<H>(
        basis: &SineBasis,
        h: &H,
        points: &[[f64; 3]],
        norm_value: f64,
        points_per_axis: usize,
    ) -> f64
    where
        H: Fn(&[f64; 3]) -> f64,
    {
        let grid = build_grid(basis, h, points_per_axis);
        let k = points.len();
        let n = basis.len();
        let fixed_rows: Vec<Vec<f64>> = points
            .iter()
            .map(|x| basis.modes.iter().map(|&m| basis.value(m, x)).collect())
            .collect();
        let fixed_h: f64 = points.iter().map(h).product();
        let raw = sweep(basis, &grid, &fixed_rows, fixed_h, n - k, |_| 1.0);
        let binom = (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
        binom * raw / norm_value
    }

    /// `sum_i <Phi'_i|Phi'_i>` with `Phi'_i = Phi k(x_i)/h(x_i)`, i.e.
    /// `int |Phi|^2 sum_i ksq(x_i)/h(x_i)^2 dX`.
    pub fn weighted_trace<H, K>(basis: &SineBasis, h: &H, ksq: &K, points_per_axis: usize) -> f64
    where
        H: Fn(&[f64; 3]) -> f64,
        K: Fn(&[f64; 3]) -> f64,
    {
        let grid = build_grid(basis, h, points_per_axis);
        let ratio: Vec<f64> = grid
            .nodes
            .iter()
            .zip(&grid.h_table)
            .map(|((x, _), h_v)| ksq(x) / (h_v * h_v))
            .collect();
        sweep(basis, &grid, &[], 1.0, basis.len(), |idx| {
            idx.iter().map(|&i| ratio[i]).sum()
        })
    }
}
