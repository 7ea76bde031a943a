//! Positive, finite-range radial pair potentials with optional hard cores.
//!
//! Units: all lengths share one arbitrary unit, energies are `1/length^2`
//! (natural units `hbar^2/2m = 1`). A hard core is represented structurally
//! by its radius, never as a large finite value; solvers branch on it.

use serde::{Deserialize, Serialize};

use crate::error::{FermigasError, Result};

/// Value of a radial potential at one radius: either inside the hard core
/// or a finite tail value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PotentialValue {
    HardCore,
    Finite(f64),
}

impl PotentialValue {
    pub fn is_hard_core(self) -> bool {
        matches!(self, PotentialValue::HardCore)
    }

    /// The finite value, or `None` inside the core.
    pub fn finite(self) -> Option<f64> {
        match self {
            PotentialValue::HardCore => None,
            PotentialValue::Finite(v) => Some(v),
        }
    }
}

/// One piece of the radial tail profile.
///
/// Wire format (JSON): `{"r_lo": .., "r_hi": .., "kind": "const", "value": ..}`
/// or `{"r_lo": .., "r_hi": .., "kind": "table", "points": [[r, v], ..]}`.
/// Tabulated profiles are interpolated linearly; interpolation error is the
/// caller's responsibility.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Piece {
    Const { r_lo: f64, r_hi: f64, value: f64 },
    Table { r_lo: f64, r_hi: f64, points: Vec<[f64; 2]> },
}

impl Piece {
    pub fn r_lo(&self) -> f64 {
        match self {
            Piece::Const { r_lo, .. } | Piece::Table { r_lo, .. } => *r_lo,
        }
    }

    pub fn r_hi(&self) -> f64 {
        match self {
            Piece::Const { r_hi, .. } | Piece::Table { r_hi, .. } => *r_hi,
        }
    }

    fn value_at(&self, r: f64) -> f64 {
        match self {
            Piece::Const { value, .. } => *value,
            Piece::Table { points, .. } => {
                if points.is_empty() {
                    return 0.0;
                }
                if r <= points[0][0] {
                    return points[0][1];
                }
                if r >= points[points.len() - 1][0] {
                    return points[points.len() - 1][1];
                }
                let idx = points.partition_point(|p| p[0] <= r);
                let lo = points[idx - 1];
                let hi = points[idx];
                let t = (r - lo[0]) / (hi[0] - lo[0]);
                lo[1] + t * (hi[1] - lo[1])
            }
        }
    }
}

/// A positive, finite-range radial pair potential with an optional hard core.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RadialPotential {
    pub label: String,
    pub hard_core_radius: f64,
    /// Finite range `R0`: the potential vanishes for `r > R0`.
    #[serde(rename = "R0")]
    pub range: f64,
    #[serde(default)]
    pub pieces: Vec<Piece>,
}

/// A single validation failure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    /// `v(r) < 0` somewhere on the profile.
    Positivity { r: f64, value: f64 },
    /// `R0 < hard_core_radius`.
    RangeOrdering { hard_core_radius: f64, range: f64 },
    /// A tabulated radial grid is not strictly increasing.
    GridMonotonicity { piece: usize, index: usize },
    /// A piece claims support beyond `R0` with a nonzero value.
    SupportBeyondRange { piece: usize, r_hi: f64, range: f64 },
    /// Pieces overlap or are out of order.
    PieceOrdering { piece: usize },
    /// Negative radius in the definition.
    NegativeRadius { r: f64 },
}

/// Result of [`RadialPotential::validate`]; passes iff no violations.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl RadialPotential {
    /// Pure hard sphere: core radius equals the range, no tail.
    pub fn hard_sphere(radius: f64) -> Self {
        RadialPotential {
            label: format!("hard sphere r={radius}"),
            hard_core_radius: radius,
            range: radius,
            pieces: vec![],
        }
    }

    /// Square barrier of height `v0` on `[0, range]`.
    pub fn square_barrier(v0: f64, range: f64) -> Self {
        RadialPotential {
            label: format!("square barrier v0={v0} R0={range}"),
            hard_core_radius: 0.0,
            range,
            pieces: vec![Piece::Const { r_lo: 0.0, r_hi: range, value: v0 }],
        }
    }

    /// The zero potential (scattering length 0).
    pub fn zero() -> Self {
        RadialPotential {
            label: "zero".into(),
            hard_core_radius: 0.0,
            range: 0.0,
            pieces: vec![],
        }
    }

    /// `v(r) = v0 (1 - (r/R0)^2)^2` sampled on a uniform table.
    pub fn smooth_bump(v0: f64, range: f64, samples: usize) -> Self {
        let pts: Vec<[f64; 2]> = (0..=samples)
            .map(|i| {
                let r = range * i as f64 / samples as f64;
                let u = 1.0 - (r / range).powi(2);
                [r, v0 * u * u]
            })
            .collect();
        RadialPotential {
            label: format!("smooth bump v0={v0} R0={range}"),
            hard_core_radius: 0.0,
            range,
            pieces: vec![Piece::Table { r_lo: 0.0, r_hi: range, points: pts }],
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: RadialPotential = serde_json::from_str(s)?;
        let report = p.validate();
        if !report.passed() {
            return Err(FermigasError::InvalidPotential(format!("{:?}", report.violations)));
        }
        Ok(p)
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json_str(&s)
    }

    /// True iff the potential is identically zero (no core, no tail mass).
    pub fn is_zero(&self) -> bool {
        self.hard_core_radius == 0.0
            && self.pieces.iter().all(|p| match p {
                Piece::Const { value, .. } => *value == 0.0,
                Piece::Table { points, .. } => points.iter().all(|q| q[1] == 0.0),
            })
    }

    pub fn has_hard_core(&self) -> bool {
        self.hard_core_radius > 0.0
    }

    /// Evaluate at radius `r >= 0`.
    pub fn evaluate(&self, r: f64) -> Result<PotentialValue> {
        if r < 0.0 {
            return Err(FermigasError::InvalidInput(format!("negative radius r={r}")));
        }
        if r < self.hard_core_radius {
            return Ok(PotentialValue::HardCore);
        }
        if r > self.range {
            return Ok(PotentialValue::Finite(0.0));
        }
        for piece in &self.pieces {
            if r >= piece.r_lo() && r <= piece.r_hi() {
                return Ok(PotentialValue::Finite(piece.value_at(r)));
            }
        }
        Ok(PotentialValue::Finite(0.0))
    }

    /// Finite tail value for radii outside the core (panics inside the core).
    pub fn tail_value(&self, r: f64) -> f64 {
        match self.evaluate(r) {
            Ok(PotentialValue::Finite(v)) => v,
            Ok(PotentialValue::HardCore) => {
                panic!("tail_value called inside the hard core (r={r})")
            }
            Err(e) => panic!("{e}"),
        }
    }

    /// Radii where the profile may change character; solvers and quadratures
    /// split their panels here.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut bp = vec![self.hard_core_radius, self.range];
        for p in &self.pieces {
            bp.push(p.r_lo());
            bp.push(p.r_hi());
            if let Piece::Table { points, .. } = p {
                for q in points {
                    bp.push(q[0]);
                }
            }
        }
        bp.retain(|&r| r >= 0.0);
        bp.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bp.dedup();
        bp
    }

    /// Check every type invariant and report all failures.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.hard_core_radius < 0.0 {
            violations.push(Violation::NegativeRadius { r: self.hard_core_radius });
        }
        if self.range < self.hard_core_radius {
            violations.push(Violation::RangeOrdering {
                hard_core_radius: self.hard_core_radius,
                range: self.range,
            });
        }
        let mut prev_hi = f64::NEG_INFINITY;
        for (pi, piece) in self.pieces.iter().enumerate() {
            if piece.r_lo() < 0.0 {
                violations.push(Violation::NegativeRadius { r: piece.r_lo() });
            }
            if piece.r_lo() < prev_hi - 1e-14 || piece.r_hi() < piece.r_lo() {
                violations.push(Violation::PieceOrdering { piece: pi });
            }
            prev_hi = piece.r_hi();
            match piece {
                Piece::Const { value, r_hi, .. } => {
                    if *value < 0.0 {
                        violations.push(Violation::Positivity { r: piece.r_lo(), value: *value });
                    }
                    if *value != 0.0 && *r_hi > self.range + 1e-12 {
                        violations.push(Violation::SupportBeyondRange {
                            piece: pi,
                            r_hi: *r_hi,
                            range: self.range,
                        });
                    }
                }
                Piece::Table { points, r_hi, .. } => {
                    for (qi, q) in points.iter().enumerate() {
                        if q[1] < 0.0 {
                            violations.push(Violation::Positivity { r: q[0], value: q[1] });
                        }
                        if qi > 0 && q[0] <= points[qi - 1][0] {
                            violations.push(Violation::GridMonotonicity { piece: pi, index: qi });
                        }
                    }
                    if points.iter().any(|q| q[1] != 0.0) && *r_hi > self.range + 1e-12 {
                        violations.push(Violation::SupportBeyondRange {
                            piece: pi,
                            r_hi: *r_hi,
                            range: self.range,
                        });
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    /// Physical rescaling of all lengths by `lambda`: radii scale by
    /// `lambda`, values by `lambda^-2`. The scattering length then scales
    /// by `lambda` exactly.
    pub fn scale_lengths(&self, lambda: f64) -> Self {
        let s2 = lambda * lambda;
        let pieces = self
            .pieces
            .iter()
            .map(|p| match p {
                Piece::Const { r_lo, r_hi, value } => Piece::Const {
                    r_lo: r_lo * lambda,
                    r_hi: r_hi * lambda,
                    value: value / s2,
                },
                Piece::Table { r_lo, r_hi, points } => Piece::Table {
                    r_lo: r_lo * lambda,
                    r_hi: r_hi * lambda,
                    points: points.iter().map(|q| [q[0] * lambda, q[1] / s2]).collect(),
                },
            })
            .collect();
        RadialPotential {
            label: format!("{} (x{lambda})", self.label),
            hard_core_radius: self.hard_core_radius * lambda,
            range: self.range * lambda,
            pieces,
        }
    }
}
