use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::CharacteristicCurve;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceKind {
    Constant { value: f64 },
    Affine { x0: f64, y0: f64, slope: f64 },
    Characteristic { curve: CharacteristicCurve },
    /// An isolated boundary value, e.g. ρ̂(0) = α next to a boundary layer.
    Point { value: f64 },
}

/// One smooth, monotone piece of a limit profile on an interval with
/// explicit endpoint ownership.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
    #[serde(flatten)]
    pub kind: PieceKind,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool, kind: PieceKind) -> Self {
        Piece { lo, hi, lo_closed, hi_closed, kind }
    }

    pub fn point(x: f64, value: f64) -> Self {
        Piece::new(x, x, true, true, PieceKind::Point { value })
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo || (self.hi == self.lo && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let left = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let right = if self.hi_closed { x <= self.hi } else { x < self.hi };
        left && right
    }

    /// Formula value; at open endpoints this is the one-sided limit.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            PieceKind::Constant { value } | PieceKind::Point { value } => *value,
            PieceKind::Affine { x0, y0, slope } => y0 + slope * (x - x0),
            PieceKind::Characteristic { curve } => curve.eval_clamped(x),
        }
    }

    fn hole_transform(&self) -> Piece {
        let kind = match &self.kind {
            PieceKind::Constant { value } => PieceKind::Constant { value: 1.0 - value },
            PieceKind::Point { value } => PieceKind::Point { value: 1.0 - value },
            PieceKind::Affine { x0, y0, slope } => {
                PieceKind::Affine { x0: 1.0 - x0, y0: 1.0 - y0, slope: *slope }
            }
            PieceKind::Characteristic { curve } => {
                PieceKind::Characteristic { curve: curve.hole_transform() }
            }
        };
        Piece::new(1.0 - self.hi, 1.0 - self.lo, self.hi_closed, self.lo_closed, kind)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakKind {
    LeftBoundaryLayer,
    RightBoundaryLayer,
    DomainWall,
    /// Jump of a standalone boundary-layer limit at its anchor.
    Layer,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub x: f64,
    pub kind: BreakKind,
}

/// The analytic ε→0 profile ρ̂: ordered monotone pieces tiling its domain
/// (normally [0,1]) plus tagged discontinuities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLimitProfile {
    pub domain: (f64, f64),
    pub pieces: Vec<Piece>,
    pub breakpoints: Vec<Breakpoint>,
}

impl PiecewiseLimitProfile {
    /// Drops empty pieces and checks that the rest tile the domain.
    pub fn new(domain: (f64, f64), pieces: Vec<Piece>, breakpoints: Vec<Breakpoint>) -> Result<Self> {
        let pieces: Vec<Piece> = pieces.into_iter().filter(|p| !p.is_empty()).collect();
        let out = PiecewiseLimitProfile { domain, pieces, breakpoints };
        out.check_tiling()?;
        Ok(out)
    }

    pub fn check_tiling(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Consistency(m));
        let (a, b) = self.domain;
        let first = match self.pieces.first() {
            Some(p) => p,
            None => return bad("limit profile has no pieces".into()),
        };
        if first.lo != a || !first.lo_closed {
            return bad(format!("first piece starts at {} instead of {a}", first.lo));
        }
        for w in self.pieces.windows(2) {
            let (p, q) = (&w[0], &w[1]);
            if p.hi != q.lo || p.hi_closed == q.lo_closed {
                return bad(format!("pieces do not tile at x = {} / {}", p.hi, q.lo));
            }
        }
        let last = self.pieces.last().unwrap();
        if last.hi != b || !last.hi_closed {
            return bad(format!("last piece ends at {} instead of {b}", last.hi));
        }
        for p in &self.pieces {
            if !(p.lo.is_finite() && p.hi.is_finite()) {
                return bad("non-finite piece bounds".into());
            }
        }
        Ok(())
    }

    pub fn piece_at(&self, x: f64) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.contains(x))
    }

    /// ρ̂(x); points outside the domain are clamped to it.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(self.domain.0, self.domain.1);
        match self.piece_at(x) {
            Some(p) => p.eval(x),
            None => f64::NAN,
        }
    }

    /// Left limit at `x` (value at the domain start for x = domain.0).
    pub fn left_limit(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.lo < x && x <= p.hi)
            .map(|p| p.eval(x))
            .unwrap_or_else(|| self.eval(x))
    }

    pub fn right_limit(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.lo <= x && x < p.hi)
            .map(|p| p.eval(x))
            .unwrap_or_else(|| self.eval(x))
    }

    /// Exact (inf, sup) of ρ̂ on [a,b] ∩ domain; every piece is monotone so
    /// the extremes sit at the clipped endpoints.
    pub fn inf_sup(&self, a: f64, b: f64) -> (f64, f64) {
        let a = a.max(self.domain.0);
        let b = b.min(self.domain.1);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.pieces {
            let l = p.lo.max(a);
            let r = p.hi.min(b);
            if l > r {
                continue;
            }
            if l == r && !p.contains(l) {
                continue;
            }
            for v in [p.eval(l), p.eval(r)] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// ρ̂ ↦ 1 − ρ̂(1 − x), mapping the profile of the hole-transformed parameters back.
    pub fn hole_transform(&self) -> PiecewiseLimitProfile {
        let pieces = self.pieces.iter().rev().map(Piece::hole_transform).collect();
        let mut breakpoints: Vec<Breakpoint> = self
            .breakpoints
            .iter()
            .rev()
            .map(|b| Breakpoint {
                x: 1.0 - b.x,
                kind: match b.kind {
                    BreakKind::LeftBoundaryLayer => BreakKind::RightBoundaryLayer,
                    BreakKind::RightBoundaryLayer => BreakKind::LeftBoundaryLayer,
                    k => k,
                },
            })
            .collect();
        breakpoints.sort_by(|a, b| a.x.total_cmp(&b.x));
        PiecewiseLimitProfile {
            domain: (1.0 - self.domain.1, 1.0 - self.domain.0),
            pieces,
            breakpoints,
        }
    }

    /// Samples ρ̂ on the uniform grid with `n_cells` cells.
    pub fn sample(&self, n_cells: usize) -> Vec<f64> {
        (0..=n_cells).map(|i| self.eval(i as f64 / n_cells as f64)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wall() -> PiecewiseLimitProfile {
        PiecewiseLimitProfile::new(
            (0.0, 1.0),
            vec![
                Piece::new(0.0, 0.25, true, true, PieceKind::Affine { x0: 0.0, y0: 0.25, slope: 0.25 }),
                Piece::new(0.25, 1.0, false, true, PieceKind::Affine { x0: 1.0, y0: 0.875, slope: 0.25 }),
            ],
            vec![Breakpoint { x: 0.25, kind: BreakKind::DomainWall }],
        )
        .unwrap()
    }

    #[test]
    fn evaluates_one_sided_limits() {
        let p = wall();
        assert!((p.eval(0.25) - 0.3125).abs() < 1e-15);
        assert!((p.left_limit(0.25) - 0.3125).abs() < 1e-15);
        assert!((p.right_limit(0.25) - 0.6875).abs() < 1e-15);
        assert!((p.eval(1.0) - 0.875).abs() < 1e-15);
    }

    #[test]
    fn inf_sup_spans_the_jump() {
        let (lo, hi) = wall().inf_sup(0.2, 0.3);
        assert!((lo - 0.3).abs() < 1e-15);
        assert!((hi - 0.7).abs() < 1e-15);
        let (lo, hi) = wall().inf_sup(0.25, 0.25);
        assert_eq!(lo, hi);
    }

    #[test]
    fn rejects_gaps_and_overlaps() {
        let gap = PiecewiseLimitProfile::new(
            (0.0, 1.0),
            vec![
                Piece::new(0.0, 0.4, true, true, PieceKind::Constant { value: 0.2 }),
                Piece::new(0.5, 1.0, false, true, PieceKind::Constant { value: 0.2 }),
            ],
            vec![],
        );
        assert!(gap.is_err());
        let overlap = PiecewiseLimitProfile::new(
            (0.0, 1.0),
            vec![
                Piece::new(0.0, 0.5, true, true, PieceKind::Constant { value: 0.2 }),
                Piece::new(0.5, 1.0, true, true, PieceKind::Constant { value: 0.2 }),
            ],
            vec![],
        );
        assert!(overlap.is_err());
    }

    #[test]
    fn hole_transform_is_involutive() {
        let p = wall();
        let q = p.hole_transform();
        q.check_tiling().unwrap();
        assert!((q.eval(0.0) - 0.125).abs() < 1e-15);
        assert_eq!(q.hole_transform(), p);
    }
}
