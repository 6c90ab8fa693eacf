//! Parabolic problem φ_t = ε Lφ and steady problem Lρ = 0 on [0,1] with
//! Dirichlet data ρ(0) = α, ρ(1) = 1 − β, where
//! Lρ = ε/2 ρ'' + (2ρ − 1)ρ' + Ω_A(1 − ρ) − Ω_D ρ.

mod discretize;
mod evolve;
mod steady;

pub use discretize::{n_cells_for, steady_residual, steady_residual_with, Flux};
pub use evolve::{pde_evolve, PdeConfig, Scheme, Snapshot};
pub use steady::{steady_solve, steady_solve_with_telemetry, SteadyConfig, SteadyTelemetry, StepTelemetry};
