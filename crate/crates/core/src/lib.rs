//! Reducible-representation free fields on a wave-vector grid.
//!
//! Every wave vector `k` of a quadrature grid carries its own normalized
//! oscillator wave function (one mode for the scalar boson, two modes for
//! the photon). Classical fields, energies and polarization observables are
//! expectation values integrated over `k`.
//!
//! Module map:
//!
//! * [`fock`] truncated one- and two-mode Fock spaces, ladder operators,
//!   coherent states, Stokes operators and the mode-mixing unitary.
//! * [`kspace`] quadrature grids over wave-vector space, profiles, state
//!   fields and physical constants.
//! * [`scalar`] classical and quantum scalar fields, energies, correlations
//!   and covariance transformations.
//! * [`polarization`] the frame rotation `Ξ(k)` and compensating rotations.
//! * [`em`] vector potential, electric and magnetic fields, energies and
//!   rotations of photon fields.
//! * [`photon`] Stokes parameters and single-photon fields.

pub mod em;
mod error;
pub mod exec;
pub mod fock;
pub mod kspace;
pub mod photon;
pub mod polarization;
pub mod scalar;
pub mod sum;

pub use error::{Error, Result};
pub use kspace::{KGrid, PhysicalConstants, Profile, StateField};

/// Real three-vector (wave vectors, positions).
pub type Vec3 = nalgebra::Vector3<f64>;
/// Real 3×3 matrix (rotations, frames).
pub type Mat3 = nalgebra::Matrix3<f64>;
pub use num_complex::Complex64 as C64;
