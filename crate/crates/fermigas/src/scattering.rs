//! Zero-energy scattering in 2D and 3D.
//!
//! Solves `-lap(phi) + v phi / 2 = 0` for radial `phi`, extracts the
//! scattering length, and builds the cutoff profiles `f` and `xi` used by
//! the variational upper bound.
//!
//! 3D works with `u(r) = r phi(r)` (so `u'' = v u / 2`), 2D integrates
//! `phi'' + phi'/r = v phi / 2` directly. Hard cores start the integration
//! at the core radius with a vanishing wave function; the core then
//! contributes to energy integrals only through the derivative jump of `u`,
//! which the quadrature of `|phi'|^2` captures with no extra measure term
//! (`phi` vanishes where `v` is infinite).

use crate::error::{FermigasError, Result};
use crate::potential::{PotentialValue, RadialPotential};
use crate::Dimension;
use std::f64::consts::PI;

/// One accepted integration node: value, derivative, and the running
/// radial energy integral `int_0^r (phi'^2 + v phi^2 / 2) r^{d-1} dr`.
#[derive(Clone, Copy, Debug)]
pub struct ProfileSample {
    pub r: f64,
    /// 3D: `u(r) = r phi(r)`; 2D: `phi(r)`.
    pub value: f64,
    pub derivative: f64,
    pub energy_integral: f64,
    /// Time-derivatives of the three fields, kept for cubic interpolation.
    slope: [f64; 3],
}

/// How the stored profile is normalized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Normalization {
    /// 3D: `phi -> 1` as `r -> inf`.
    UnitAtInfinity,
    /// 2D: `phi(r_ref) = 1`.
    UnitAt { r_ref: f64 },
}

/// Solution of the zero-energy scattering equation.
#[derive(Clone, Debug)]
pub struct ScatteringSolution {
    pub dimension: Dimension,
    pub potential: RadialPotential,
    /// Scattering length.
    pub a: f64,
    pub normalization: Normalization,
    /// Maximum residual of the exterior fit, in units of the profile scale.
    pub residual: f64,
    pub r_max: f64,
    core_start: f64,
    samples: Vec<ProfileSample>,
}

impl ScatteringSolution {
    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    fn interp(&self, r: f64) -> [f64; 3] {
        let s = &self.samples;
        if r <= s[0].r {
            return [s[0].value, s[0].derivative, s[0].energy_integral];
        }
        let last = &s[s.len() - 1];
        if r >= last.r {
            return [last.value, last.derivative, last.energy_integral];
        }
        let idx = s.partition_point(|p| p.r <= r);
        let lo = &s[idx - 1];
        let hi = &s[idx];
        let h = hi.r - lo.r;
        let t = (r - lo.r) / h;
        let mut out = [0.0; 3];
        let ylo = [lo.value, lo.derivative, lo.energy_integral];
        let yhi = [hi.value, hi.derivative, hi.energy_integral];
        for i in 0..3 {
            // cubic Hermite with stored slopes
            let (h00, h10, h01, h11) = hermite_basis(t);
            out[i] = h00 * ylo[i] + h10 * h * lo.slope[i] + h01 * yhi[i] + h11 * h * hi.slope[i];
        }
        out
    }

    /// The scattering profile `phi` at any radius (0 inside a hard core,
    /// closed-form exterior beyond the solved range).
    pub fn phi(&self, r: f64) -> f64 {
        if r < self.core_start {
            return 0.0;
        }
        match self.dimension {
            Dimension::Three => {
                if self.potential.is_zero() {
                    return 1.0;
                }
                if r >= self.r_max {
                    return 1.0 - self.a / r;
                }
                if r < 1e-13 * self.r_max {
                    // u(r)/r -> u'(0)
                    return self.interp(r)[1];
                }
                self.interp(r)[0] / r
            }
            Dimension::Two => {
                if self.potential.is_zero() {
                    return 1.0;
                }
                if r >= self.r_max {
                    let alpha = self.exterior_log_slope();
                    return alpha * (r / self.a).ln();
                }
                self.interp(r)[0]
            }
        }
    }

    /// Radial derivative of `phi`.
    pub fn phi_derivative(&self, r: f64) -> f64 {
        if r < self.core_start || self.potential.is_zero() {
            return 0.0;
        }
        match self.dimension {
            Dimension::Three => {
                if r >= self.r_max {
                    return self.a / (r * r);
                }
                if r < 1e-13 * self.r_max {
                    return 0.0;
                }
                let y = self.interp(r);
                y[1] / r - y[0] / (r * r)
            }
            Dimension::Two => {
                if r >= self.r_max {
                    return self.exterior_log_slope() / r;
                }
                self.interp(r)[1]
            }
        }
    }

    /// 2D: coefficient `alpha` of the exterior form `alpha ln(r/a)` in the
    /// stored normalization.
    fn exterior_log_slope(&self) -> f64 {
        match self.normalization {
            Normalization::UnitAt { r_ref } => 1.0 / (r_ref / self.a).ln(),
            Normalization::UnitAtInfinity => 0.0,
        }
    }

    /// `int_{|x| <= r} (|grad phi|^2 + v phi^2 / 2) d^d x` in the stored
    /// normalization.
    pub fn energy_integral_to(&self, r: f64) -> f64 {
        if self.potential.is_zero() {
            return 0.0;
        }
        let sphere = self.dimension.unit_sphere_area();
        if r <= self.r_max {
            return sphere * self.interp(r)[2];
        }
        let base = sphere * self.samples[self.samples.len() - 1].energy_integral;
        // exterior tails are potential-free with known closed forms
        match self.dimension {
            Dimension::Three => base + 4.0 * PI * self.a * self.a * (1.0 / self.r_max - 1.0 / r),
            Dimension::Two => {
                let alpha = self.exterior_log_slope();
                base + 2.0 * PI * alpha * alpha * (r / self.r_max).ln()
            }
        }
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

/// Solve the zero-energy scattering equation and extract the scattering
/// length.
///
/// 3D matches `u(r) ~ alpha (r - a)` beyond the potential range; 2D matches
/// `phi(r) ~ alpha ln(r/a)`. Both fits are least squares over
/// `[R0, r_max]`, which averages residual integration error.
pub fn solve_zero_energy(
    potential: &RadialPotential,
    dimension: Dimension,
    tolerance: f64,
) -> Result<ScatteringSolution> {
    if tolerance <= 0.0 {
        return Err(FermigasError::InvalidInput("tolerance must be positive".into()));
    }
    let report = potential.validate();
    if !report.passed() {
        return Err(FermigasError::InvalidPotential(format!("{:?}", report.violations)));
    }

    if potential.is_zero() {
        return Ok(free_solution(potential, dimension));
    }

    let r0 = potential.range.max(potential.hard_core_radius);
    let r_max = 10.0 * r0;

    // Pure hard core: the exterior solution is exact, use it directly.
    if potential.has_hard_core() && tail_is_zero(potential) {
        return Ok(pure_core_solution(potential, dimension, r_max));
    }

    let core = potential.hard_core_radius;
    let rhs = |r: f64, y: &[f64; 3]| -> [f64; 3] {
        let v = potential.tail_value(r);
        match dimension {
            Dimension::Three => {
                // y = [u, u', I], u'' = v u / 2
                let u_over_r = if r > 1e-250 { y[0] / r } else { y[1] };
                let d_int = {
                    let t = y[1] - u_over_r;
                    t * t + 0.5 * v * y[0] * y[0]
                };
                [y[1], 0.5 * v * y[0], d_int]
            }
            Dimension::Two => {
                // y = [phi, phi', I], phi'' = v phi / 2 - phi'/r
                let inv_r = if r > 1e-250 { 1.0 / r } else { 0.0 };
                [
                    y[1],
                    0.5 * v * y[0] - y[1] * inv_r,
                    (y[1] * y[1] + 0.5 * v * y[0] * y[0]) * r,
                ]
            }
        }
    };

    // Starting point and state. Hard cores start on the core surface with a
    // vanishing wave function and unit (arbitrary) slope; the regular 2D
    // solution starts slightly off the origin from its power series.
    let (start_r, y0) = match dimension {
        Dimension::Three => {
            if core > 0.0 {
                (core, [0.0, 1.0, 0.0])
            } else {
                (0.0, [0.0, 1.0, 0.0])
            }
        }
        Dimension::Two => {
            if core > 0.0 {
                (core, [0.0, 1.0, 0.0])
            } else {
                let r_start = 1e-8 * r0;
                let v0 = potential.tail_value(0.0);
                (
                    r_start,
                    [1.0 + v0 * r_start * r_start / 8.0, v0 * r_start / 4.0, 0.0],
                )
            }
        }
    };

    let rtol = (tolerance * 1e-2).clamp(1e-13, 1e-4);
    let mut samples = Vec::new();
    let mut breaks: Vec<f64> = potential
        .breakpoints()
        .into_iter()
        .filter(|&b| b > start_r && b < r_max)
        .collect();
    breaks.push(r_max);
    let mut r_lo = start_r;
    let mut y = y0;
    record_sample(&mut samples, r_lo, y, &rhs);
    for r_hi in breaks {
        y = integrate_dopri5(&rhs, r_lo, r_hi, y, rtol, &mut samples)?;
        r_lo = r_hi;
    }

    // Fit the exterior form over [R0, r_max] on a uniform resample.
    let fit_lo = r0;
    let n_fit = 257;
    let mut sum = [0.0f64; 5]; // sxx, sx, s1, sxy, sy with x = r or ln r
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(n_fit);
    for i in 0..n_fit {
        let r = fit_lo + (r_max - fit_lo) * i as f64 / (n_fit - 1) as f64;
        let val = interp_samples(&samples, r)[0];
        let x = match dimension {
            Dimension::Three => r,
            Dimension::Two => r.ln(),
        };
        sum[0] += x * x;
        sum[1] += x;
        sum[2] += 1.0;
        sum[3] += x * val;
        sum[4] += val;
        raw.push((x, val));
    }
    let denom = sum[2] * sum[0] - sum[1] * sum[1];
    let alpha = (sum[2] * sum[3] - sum[1] * sum[4]) / denom;
    let beta = (sum[4] - alpha * sum[1]) / sum[2];
    // 3D: u = alpha r + beta => a = -beta/alpha; 2D: phi = alpha ln r + beta
    // => a = exp(-beta/alpha).
    let a = match dimension {
        Dimension::Three => -beta / alpha,
        Dimension::Two => (-beta / alpha).exp(),
    };
    let scale = alpha.abs().max(1e-300);
    let residual = raw
        .iter()
        .map(|&(x, val)| (val - alpha * x - beta).abs())
        .fold(0.0, f64::max)
        / scale;
    if !a.is_finite() || residual > 1e3 * tolerance {
        return Err(FermigasError::SolverTolerance {
            requested: tolerance,
            achieved: residual,
        });
    }

    // Rescale to the reference normalization.
    let norm_factor = match dimension {
        Dimension::Three => alpha, // u -> r - a, so phi -> 1 at infinity
        Dimension::Two => interp_samples(&samples, r_max)[0],
    };
    for s in &mut samples {
        s.value /= norm_factor;
        s.derivative /= norm_factor;
        s.energy_integral /= norm_factor * norm_factor;
        s.slope[0] /= norm_factor;
        s.slope[1] /= norm_factor;
        s.slope[2] /= norm_factor * norm_factor;
    }

    let normalization = match dimension {
        Dimension::Three => Normalization::UnitAtInfinity,
        Dimension::Two => Normalization::UnitAt { r_ref: r_max },
    };

    Ok(ScatteringSolution {
        dimension,
        potential: potential.clone(),
        a,
        normalization,
        residual,
        r_max,
        core_start: core,
        samples,
    })
}

fn tail_is_zero(potential: &RadialPotential) -> bool {
    potential.pieces.iter().all(|p| match p {
        crate::potential::Piece::Const { value, .. } => *value == 0.0,
        crate::potential::Piece::Table { points, .. } => points.iter().all(|q| q[1] == 0.0),
    })
}

fn free_solution(potential: &RadialPotential, dimension: Dimension) -> ScatteringSolution {
    let r_max = 10.0 * potential.range.max(1.0);
    let samples = (0..=64)
        .map(|i| {
            let r = r_max * i as f64 / 64.0;
            let (value, derivative) = match dimension {
                Dimension::Three => (r, 1.0), // u = r, phi = 1
                Dimension::Two => (1.0, 0.0),
            };
            ProfileSample {
                r,
                value,
                derivative,
                energy_integral: 0.0,
                slope: [derivative, 0.0, 0.0],
            }
        })
        .collect();
    ScatteringSolution {
        dimension,
        potential: potential.clone(),
        a: 0.0,
        normalization: match dimension {
            Dimension::Three => Normalization::UnitAtInfinity,
            Dimension::Two => Normalization::UnitAt { r_ref: r_max },
        },
        residual: 0.0,
        r_max,
        core_start: 0.0,
        samples,
    }
}

/// Pure hard core: `phi = 1 - a/r` (3D) or `ln(r/a)/ln(r_ref/a)` (2D) with
/// `a` exactly the core radius.
fn pure_core_solution(
    potential: &RadialPotential,
    dimension: Dimension,
    r_max: f64,
) -> ScatteringSolution {
    let a = potential.hard_core_radius;
    let n = 512;
    let log_norm = (r_max / a).ln();
    let samples: Vec<ProfileSample> = (0..=n)
        .map(|i| {
            let r = a + (r_max - a) * i as f64 / n as f64;
            match dimension {
                Dimension::Three => {
                    // u = r - a (normalized), I' = (u' - u/r)^2 = a^2/r^2
                    let integral = a * a * (1.0 / a - 1.0 / r);
                    ProfileSample {
                        r,
                        value: r - a,
                        derivative: 1.0,
                        energy_integral: integral,
                        slope: [1.0, 0.0, a * a / (r * r)],
                    }
                }
                Dimension::Two => {
                    let phi = (r / a).ln() / log_norm;
                    let dphi = 1.0 / (r * log_norm);
                    // I' = phi'^2 r = 1/(r ln^2), I = ln(r/a)/ln^2
                    let integral = (r / a).ln() / (log_norm * log_norm);
                    ProfileSample {
                        r,
                        value: phi,
                        derivative: dphi,
                        energy_integral: integral,
                        slope: [dphi, -1.0 / (r * r * log_norm), dphi * dphi * r],
                    }
                }
            }
        })
        .collect();
    ScatteringSolution {
        dimension,
        potential: potential.clone(),
        a,
        normalization: match dimension {
            Dimension::Three => Normalization::UnitAtInfinity,
            Dimension::Two => Normalization::UnitAt { r_ref: r_max },
        },
        residual: 0.0,
        r_max,
        core_start: a,
        samples,
    }
}

fn record_sample<F: Fn(f64, &[f64; 3]) -> [f64; 3]>(
    out: &mut Vec<ProfileSample>,
    r: f64,
    y: [f64; 3],
    rhs: &F,
) {
    let slope = rhs(r, &y);
    out.push(ProfileSample {
        r,
        value: y[0],
        derivative: y[1],
        energy_integral: y[2],
        slope,
    });
}

fn interp_samples(samples: &[ProfileSample], r: f64) -> [f64; 3] {
    if r <= samples[0].r {
        let s = &samples[0];
        return [s.value, s.derivative, s.energy_integral];
    }
    let last = &samples[samples.len() - 1];
    if r >= last.r {
        return [last.value, last.derivative, last.energy_integral];
    }
    let idx = samples.partition_point(|p| p.r <= r);
    let lo = &samples[idx - 1];
    let hi = &samples[idx];
    let h = hi.r - lo.r;
    let t = (r - lo.r) / h;
    let (h00, h10, h01, h11) = hermite_basis(t);
    let ylo = [lo.value, lo.derivative, lo.energy_integral];
    let yhi = [hi.value, hi.derivative, hi.energy_integral];
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = h00 * ylo[i] + h10 * h * lo.slope[i] + h01 * yhi[i] + h11 * h * hi.slope[i];
    }
    out
}

/// Dormand-Prince 5(4) with PI-free step control; records accepted steps.
fn integrate_dopri5<F: Fn(f64, &[f64; 3]) -> [f64; 3]>(
    rhs: &F,
    r0: f64,
    r1: f64,
    y0: [f64; 3],
    rtol: f64,
    samples: &mut Vec<ProfileSample>,
) -> Result<[f64; 3]> {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const E: [f64; 7] = [
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ];

    let span = r1 - r0;
    if span <= 0.0 {
        return Ok(y0);
    }
    let h_max = span / 8.0;
    let mut h = (span / 64.0).min(h_max);
    let mut r = r0;
    let mut y = y0;
    let mut k0 = rhs(r, &y);
    let mut rejected_in_a_row = 0usize;
    while r < r1 - 1e-14 * span.max(1.0) {
        h = h.min(r1 - r).min(h_max);
        let mut k = [[0.0f64; 3]; 7];
        k[0] = k0;
        for stage in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                for c in 0..3 {
                    ys[c] += h * A[stage][j] * kj[c];
                }
            }
            k[stage + 1] = rhs(r + C[stage] * h, &ys);
        }
        let mut y5 = y;
        for (j, kj) in k.iter().enumerate().take(7) {
            let b = A[5].get(j).copied().unwrap_or(0.0);
            let bj = if j == 6 { 0.0 } else { b };
            for c in 0..3 {
                y5[c] += h * bj * kj[c];
            }
        }
        // embedded error estimate
        let mut err: f64 = 0.0;
        for c in 0..3 {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[c];
            }
            e *= h;
            let scale = 1e-30 + rtol * y[c].abs().max(y5[c].abs()).max(1.0);
            err = err.max((e / scale).abs());
        }
        if err <= 1.0 {
            r += h;
            y = y5;
            k0 = k[6]; // FSAL
            record_sample(samples, r, y, rhs);
            rejected_in_a_row = 0;
        } else {
            rejected_in_a_row += 1;
            if rejected_in_a_row > 60 {
                return Err(FermigasError::SolverTolerance {
                    requested: rtol,
                    achieved: err * rtol,
                });
            }
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
        if h < 1e-14 * span {
            return Err(FermigasError::SolverTolerance { requested: rtol, achieved: err * rtol });
        }
    }
    Ok(y)
}

/// `int_{|x| <= R} (|grad phi|^2 + v phi^2 / 2)`, computed by radial
/// quadrature of the solved profile.
///
/// 3D uses the stored normalization (`phi -> 1` at infinity) and equals
/// `4 pi a (1 - a/R)`. 2D renormalizes to `phi(R) = 1` and equals
/// `2 pi / ln(R/a)`.
pub fn scattering_energy_integral(solution: &ScatteringSolution, r_cut: f64) -> Result<f64> {
    if r_cut < solution.potential.range {
        return Err(FermigasError::InvalidInput(format!(
            "R = {r_cut} is smaller than the potential range {}",
            solution.potential.range
        )));
    }
    if solution.potential.is_zero() {
        return Ok(0.0);
    }
    let raw = solution.energy_integral_to(r_cut);
    match solution.dimension {
        Dimension::Three => Ok(raw),
        Dimension::Two => {
            let phi_r = solution.phi(r_cut);
            Ok(raw / (phi_r * phi_r))
        }
    }
}

/// The cutoff pair `f` (continuous, 1 beyond `R`) and
/// `xi = |grad f|^2 + v f^2 / 2` (supported in `|x| <= R`).
#[derive(Clone, Debug)]
pub struct CutoffProfile {
    pub dimension: Dimension,
    /// Cutoff radius `R`.
    pub r_cutoff: f64,
    pub a: f64,
    /// `int xi`; 3D: `4 pi a / (1 - a/R)`, 2D: `2 pi / ln(R/a)`.
    pub integral_xi: f64,
    solution: ScatteringSolution,
    /// `f = phi / norm` inside `R`.
    norm: f64,
}

impl CutoffProfile {
    pub fn f(&self, r: f64) -> f64 {
        if r >= self.r_cutoff {
            1.0
        } else {
            self.solution.phi(r) / self.norm
        }
    }

    pub fn f_derivative(&self, r: f64) -> f64 {
        if r >= self.r_cutoff {
            0.0
        } else {
            self.solution.phi_derivative(r) / self.norm
        }
    }

    /// `xi(r) = f'(r)^2 + v(r) f(r)^2 / 2`; zero beyond `R` and inside a
    /// hard core (where `f` vanishes).
    pub fn xi(&self, r: f64) -> f64 {
        if r >= self.r_cutoff {
            return 0.0;
        }
        match self.solution.potential.evaluate(r) {
            Ok(PotentialValue::HardCore) => 0.0,
            Ok(PotentialValue::Finite(v)) => {
                let f = self.f(r);
                let df = self.f_derivative(r);
                df * df + 0.5 * v * f * f
            }
            Err(_) => 0.0,
        }
    }

    pub fn solution(&self) -> &ScatteringSolution {
        &self.solution
    }
}

/// Build the cutoff profile at radius `R > R0` and report `int xi`.
pub fn xi_profile(solution: &ScatteringSolution, r_cutoff: f64) -> Result<CutoffProfile> {
    if r_cutoff <= solution.potential.range {
        return Err(FermigasError::InvalidInput(format!(
            "cutoff R = {r_cutoff} must exceed the potential range {}",
            solution.potential.range
        )));
    }
    if solution.dimension == Dimension::Three && solution.a >= r_cutoff {
        return Err(FermigasError::InvalidInput(format!(
            "cutoff R = {r_cutoff} must exceed the scattering length {}",
            solution.a
        )));
    }
    let norm = match solution.dimension {
        Dimension::Three => 1.0 - solution.a / r_cutoff,
        Dimension::Two => solution.phi(r_cutoff),
    };
    let integral_xi = if solution.potential.is_zero() {
        0.0
    } else {
        solution.energy_integral_to(r_cutoff) / (norm * norm)
    };
    Ok(CutoffProfile {
        dimension: solution.dimension,
        r_cutoff,
        a: solution.a,
        integral_xi,
        solution: solution.clone(),
        norm,
    })
}

/// Closed-form scattering length of a square barrier of height `v0` and
/// range `r0`: `a = r0 - tanh(kappa r0)/kappa`, `kappa = sqrt(v0/2)`.
///
/// Interior solution `u = sinh(kappa r)` matched to `alpha (r - a)` at `r0`.
pub fn square_barrier_scattering_length(v0: f64, r0: f64) -> f64 {
    let kappa = (0.5 * v0).sqrt();
    r0 - (kappa * r0).tanh() / kappa
}
