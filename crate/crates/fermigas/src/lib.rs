//! Numerics for the ground-state energy of the dilute Fermi gas.
//!
//! The crate turns the rigorous low-density constructions for two-component
//! Fermi gases into executable numerics, in natural units `hbar^2/2m = 1`
//! (energies in 1/length^2):
//!
//! - [`potential`]: positive, finite-range radial pair potentials with
//!   optional hard cores, loadable from JSON.
//! - [`scattering`]: the zero-energy scattering equation in 2D and 3D,
//!   scattering lengths, and the cutoff profiles `f`, `xi` entering the
//!   variational upper bound.
//! - [`fermi_box`]: Dirichlet box spectra, Fermi-sea energies, determinantal
//!   one- and two-particle densities, and the low-momentum kinetic bound.
//! - [`determinantal`]: weighted Slater norms, k-particle densities, weighted
//!   traces, and the exact `||1 - M_Y||` deviation behind the overlap-matrix
//!   bound.
//! - [`soft_potential`]: momentum-cutoff kernels, the envelope `f_R`, the
//!   error potential `w_R`, annulus potentials `U`, assembled soft fields
//!   `W_Y`, and a numerical certifier for the Dyson operator inequality.
//! - [`energy_bounds`]: leading-order energy formulas, the finite-box upper
//!   bound chain, lower-bound error schedules, and error-exponent fits.
//! - [`two_body`]: exact diagonalization of one spin-up plus one spin-down
//!   particle in a Dirichlet box, validating the pseudopotential shift.
//! - [`pipelines`]: configuration-driven runs backing the `fermigas` CLI,
//!   with deterministic, machine-readable reports.
//!
//! Each major capability has a runnable example under `examples/`.

pub mod determinantal;
pub mod energy_bounds;
pub mod error;
pub mod fermi_box;
pub mod fft;
pub mod fit;
pub mod pipelines;
pub mod potential;
pub mod quad;
pub mod scattering;
pub mod soft_potential;
pub mod two_body;

pub use error::{FermigasError, Result};
pub use potential::{PotentialValue, RadialPotential, ValidationReport};
pub use scattering::{CutoffProfile, ScatteringSolution};

/// Spatial dimension of the gas; only 2D and 3D are meaningful here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Dimension {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    pub fn from_usize(d: usize) -> crate::Result<Self> {
        match d {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            _ => Err(crate::FermigasError::InvalidInput(format!(
                "dimension must be 2 or 3, got {d}"
            ))),
        }
    }

    /// Surface area of the unit sphere: `2*pi` in 2D, `4*pi` in 3D.
    pub fn unit_sphere_area(self) -> f64 {
        match self {
            Dimension::Two => 2.0 * std::f64::consts::PI,
            Dimension::Three => 4.0 * std::f64::consts::PI,
        }
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_usize())
    }
}
