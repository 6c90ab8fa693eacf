//! Numerical laboratory for the totally asymmetric simple exclusion process
//! coupled to Langmuir kinetics (TASEP-LK).
//!
//! Three levels of description are provided: a stochastic lattice
//! ([`lattice::kmc_run`]), the mean-field lattice ODE
//! ([`lattice::meanfield_steady`]) and the continuum PDE
//! ([`continuum::steady_solve`], [`continuum::pde_evolve`]). The
//! [`phase`] module computes the ε→0 limit profiles and the [`bounds`]
//! module builds and checks upper/lower solutions.

pub mod bounds;
pub mod checks;
pub mod continuum;
pub mod error;
pub mod io;
pub mod lattice;
mod linalg;
pub mod model;
pub mod phase;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use model::{
    in_neighborhood, particle_hole_transform, sup_distance, BreakKind, Breakpoint, DensityProfile,
    ModelParams, Piece, PieceKind, PiecewiseLimitProfile, Tolerance,
};
pub use phase::{classify, limit_profile, CharacteristicCurve, PhaseFeatures, PhaseLabel, Regime};
