//! Open-system dynamics of a harmonic oscillator coupled to model baths.
//!
//! The crate covers two exactly specified toy environments:
//!
//! * [`gravity`]: pure dephasing with an ohmic, exponentially cut-off bath,
//!   solved in closed form entry by entry;
//! * [`lindblad`] and [`langevin`]: two-photon damping, either as a Markovian
//!   master equation or as classical Langevin trajectories.
//!
//! [`phase_space`] turns density matrices into Wigner functions, position
//! densities, fringe visibilities and negativity volumes.

pub mod error;
pub mod fock;
pub mod gravity;
pub mod langevin;
pub mod lindblad;
pub mod phase_space;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use fock::{
    beta_for_occupation, cat_density, coherent_state, default_dim, parity_expectation,
    thermal_occupation, DensityMatrix, FockSpace, Operator, StateVector,
};
pub use gravity::{DecoherenceForm, GravityBathParams};
pub use num_complex::Complex64;
pub use lindblad::{Damping, Liouvillian, QedParams};
pub use langevin::{Calculus, NonRwaMode, SdeParams, TrajectoryEnsemble, Variant};
pub use phase_space::{PhaseSpaceGrid, PositionDensity, WignerField};
