//! Characteristic curves, phase classification, limit profiles and sweeps.

mod characteristic;
mod classify;
mod profile;
mod sweep;

pub use characteristic::{domain_wall, Branch, CharacteristicCurve};
pub use classify::{analyze, classify, Analysis, PhaseFeatures, PhaseLabel, Regime, TIE_TOL};
pub use profile::{limit_profile, limit_profile_from};
pub use sweep::{phase_sweep, PhaseMap, Polyline, SweepCell};
