//! Stochastic lattice (kinetic Monte Carlo) and the mean-field lattice ODE.

mod kmc;
mod meanfield;

pub use kmc::{kmc_run, kmc_run_detailed, KmcConfig, KmcOutput, LatticeState};
pub use meanfield::{meanfield_integrate, meanfield_rhs, meanfield_steady, MeanFieldState};
