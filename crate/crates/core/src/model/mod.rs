//! Shared domain types, the neighborhood metric and the particle-hole map.

mod limit;
mod neighborhood;
mod params;
mod profile;
mod symmetry;

pub use limit::{BreakKind, Breakpoint, Piece, PieceKind, PiecewiseLimitProfile};
pub use neighborhood::{in_neighborhood, neighborhood_margin};
pub use params::{ModelParams, Tolerance};
pub use profile::{sup_distance, DensityProfile};
pub use symmetry::particle_hole_transform;
