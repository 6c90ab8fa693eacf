//! Boundary-layer solutions and upper/lower solution constructions.

mod construction;
mod layer;
pub mod recipes;
mod verify;

pub use construction::{BoundConstruction, BoundKind, BoundPiece, Realization, Term};
pub use layer::{w_closed_form, w_limit, BoundaryLayer};
pub use verify::{
    operator, verify_bound, verify_bound_at, verify_bound_on, BoundReport, EpsilonCheck, PieceMargin,
    CHECK_SLACK, EPSILON_LADDER,
};

use crate::error::{Error, Result};
use crate::model::{neighborhood_margin, DensityProfile, ModelParams, PiecewiseLimitProfile};
use crate::phase::{analyze, limit_profile_from, Analysis, PhaseLabel};
use recipes::Free;

/// ε standing in for the limit when testing ρ̂_u, ρ̂_l.
pub const LIMIT_EPSILON: f64 = 1e-7;
/// [`EPSILON_LADDER`] continued downwards; used to rank free-parameter choices.
pub const EXTENDED_LADDER: [f64; 10] = [0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 5e-4, 2e-4, 1e-4];
const SEARCH_CELLS: usize = 2000;
const MAX_HALVINGS: i32 = 10;
const SCORE_NODES: usize = 300;
const SEARCH_ROUNDS: usize = 24;

struct Candidate {
    c: BoundConstruction,
    vals: Vec<f64>,
    score: f64,
}

struct Search<'a> {
    params: &'a ModelParams,
    an: Analysis,
    limit: PiecewiseLimitProfile,
    grid: Vec<f64>,
    delta: f64,
}

impl Search<'_> {
    fn working(&self, kind: BoundKind) -> BoundKind {
        if self.an.label.applied_symmetry {
            kind.flip()
        } else {
            kind
        }
    }

    /// Limit samples of a construction, or an error if it leaves O(ρ̂, Δ).
    fn admit(&self, kind: BoundKind, free: Free) -> Result<(BoundConstruction, Vec<f64>)> {
        let c = BoundConstruction::new(self.params, kind, free)?;
        let vals = c.realize_with(&self.an, LIMIT_EPSILON)?.sample(&self.grid)?;
        let prof = DensityProfile::from_parts_unchecked(self.grid.clone(), vals.clone());
        let m = neighborhood_margin(&prof, &self.limit, self.delta)?;
        if !(m > 0.0) {
            return Err(Error::Parameter(format!("{kind:?} bound leaves O(ρ̂, Δ) (margin {m:.3e})")));
        }
        Ok((c, vals))
    }

    fn candidate(&self, kind: BoundKind, free: Free, other: &[f64]) -> Result<Candidate> {
        let (c, vals) = self.admit(kind, free)?;
        let ordered = vals.iter().zip(other).all(|(v, o)| match kind {
            BoundKind::Upper => v >= o,
            BoundKind::Lower => v <= o,
        });
        if !ordered {
            return Err(Error::Parameter("limit bounds are not ordered".into()));
        }
        let score = score(&c);
        Ok(Candidate { c, vals, score })
    }

    /// Coordinate search: doubles or halves one free parameter at a time while
    /// the score improves.
    fn improve(&self, start: Candidate, other: &[f64]) -> Candidate {
        let kind = start.c.kind;
        let keys: Vec<String> = start.c.free.keys().cloned().collect();
        let mut best = start;
        for _ in 0..SEARCH_ROUNDS {
            let mut moved = false;
            for k in &keys {
                for f in [0.5, 2.0] {
                    let mut free = best.c.free.clone();
                    *free.get_mut(k).unwrap() *= f;
                    if let Ok(cand) = self.candidate(kind, free, other) {
                        if cand.score > best.score + 1e-12 {
                            best = cand;
                            moved = true;
                        }
                    }
                }
            }
            if !moved {
                break;
            }
        }
        best
    }
}

/// Ladder position of the largest passing ε (≥ 1), or minus the squashed
/// worst violation at the smallest ε when nothing passes.
fn score(c: &BoundConstruction) -> f64 {
    let mut last = None;
    for (i, &e) in EXTENDED_LADDER.iter().enumerate() {
        let chk = verify_bound_at(c, e, SCORE_NODES);
        if chk.passed {
            return (EXTENDED_LADDER.len() - i) as f64;
        }
        last = Some(chk);
    }
    let chk = last.unwrap();
    if !chk.defined {
        return -1.0;
    }
    let v = [-chk.boundary_margin, -chk.operator_margin, -chk.cusp_margin.unwrap_or(0.0), chk.continuity_error]
        .into_iter()
        .fold(0.0, f64::max);
    -v / (1.0 + v)
}

/// Upper and lower constructions whose ε→0 limits lie in O(ρ̂, Δ) and are
/// ordered. Free parameters start at the seed magnitudes, are halved together
/// until that holds, and are then tuned one at a time so that the inequalities
/// hold at the largest ε of [`EXTENDED_LADDER`] reachable.
pub fn build_bounds(
    params: &ModelParams,
    label: &PhaseLabel,
    delta: f64,
) -> Result<(BoundConstruction, BoundConstruction)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("delta = {delta} must lie in (0, 1)")));
    }
    recipes::check_supported(label)?;
    let an = analyze(params)?;
    if an.label.regime != label.regime || an.label.index != label.index {
        return Err(Error::Consistency(format!(
            "parameters classify as {}, not {}",
            an.label.name(),
            label.name()
        )));
    }
    let limit = limit_profile_from(&an)?;
    let search = Search { params, an, limit, grid: DensityProfile::uniform_grid(SEARCH_CELLS), delta };
    let mut last_err = None;
    for h in 0..=MAX_HALVINGS {
        let s = 0.5f64.powi(h);
        let make = |kind: BoundKind| -> Result<(BoundConstruction, Vec<f64>)> {
            let free = recipes::scale(&recipes::seeds(&search.an, search.working(kind))?, s);
            search.admit(kind, free)
        };
        let ((u, uv), (l, lv)) = match make(BoundKind::Upper).and_then(|u| make(BoundKind::Lower).map(|l| (u, l))) {
            Ok(pair) => pair,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        if !uv.iter().zip(&lv).all(|(a, b)| a >= b) {
            last_err = Some(Error::Parameter("limit bounds are not ordered".into()));
            continue;
        }
        let up = Candidate { score: score(&u), c: u, vals: uv };
        let up = search.improve(up, &lv);
        let lo = Candidate { score: score(&l), c: l, vals: lv };
        let lo = search.improve(lo, &up.vals);
        return Ok((up.c, lo.c));
    }
    Err(last_err.unwrap_or_else(|| Error::Parameter("no admissible free parameters".into())))
}
