use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::layer::BoundaryLayer;
use super::recipes;
use crate::error::{Error, Result};
use crate::model::{DensityProfile, ModelParams};
use crate::phase::{analyze, Analysis, CharacteristicCurve, PhaseLabel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Upper,
    Lower,
}

impl BoundKind {
    pub fn flip(self) -> Self {
        match self {
            BoundKind::Upper => BoundKind::Lower,
            BoundKind::Lower => BoundKind::Upper,
        }
    }
}

/// One additive component of a bound on a smooth piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "term", rename_all = "snake_case")]
pub enum Term {
    Const { value: f64 },
    Affine { x0: f64, y0: f64, slope: f64 },
    Curve { curve: CharacteristicCurve },
    Layer { layer: BoundaryLayer },
    /// z + c (x − vertex)²
    Parabola { vertex: f64, z: f64, c: f64 },
}

impl Term {
    /// (v, v', v'') at x.
    pub fn jet(&self, x: f64) -> Result<(f64, f64, f64)> {
        Ok(match self {
            Term::Const { value } => (*value, 0.0, 0.0),
            Term::Affine { x0, y0, slope } => (y0 + slope * (x - x0), *slope, 0.0),
            Term::Curve { curve } => {
                let v = curve.eval(x)?;
                let d1 = curve.slope_of(v);
                (v, d1, curve.dslope_of(v) * d1)
            }
            Term::Layer { layer } => {
                let j = layer.jet(x);
                if !(j.0.is_finite() && j.1.is_finite() && j.2.is_finite()) {
                    let (lo, hi) = layer.validity();
                    let boundary = if x <= lo { lo } else { hi };
                    return Err(Error::Range { x, boundary });
                }
                j
            }
            Term::Parabola { vertex, z, c } => {
                let t = x - vertex;
                (z + c * t * t, 2.0 * c * t, 2.0 * c)
            }
        })
    }
}

/// A smooth piece of a bound: the sum of its terms on [lo, hi].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPiece {
    pub lo: f64,
    pub hi: f64,
    pub terms: Vec<Term>,
}

impl BoundPiece {
    pub fn new(lo: f64, hi: f64, terms: Vec<Term>) -> Self {
        BoundPiece { lo, hi, terms }
    }

    pub fn jet(&self, x: f64) -> Result<(f64, f64, f64)> {
        let mut s = (0.0, 0.0, 0.0);
        for t in &self.terms {
            let (a, b, c) = t.jet(x)?;
            s.0 += a;
            s.1 += b;
            s.2 += c;
        }
        Ok(s)
    }
}

/// A bound evaluated at one ε. Pieces live in the classification frame;
/// `mirrored` maps them back through x → 1 − x, ρ → 1 − ρ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub epsilon: f64,
    pub pieces: Vec<BoundPiece>,
    pub mirrored: bool,
}

impl Realization {
    pub fn n_pieces(&self) -> usize {
        self.pieces.len()
    }

    /// Interval of piece `i` in the original frame, ordered left to right.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        if self.mirrored {
            let p = &self.pieces[self.pieces.len() - 1 - i];
            (1.0 - p.hi, 1.0 - p.lo)
        } else {
            let p = &self.pieces[i];
            (p.lo, p.hi)
        }
    }

    /// (ρ, ρ', ρ'') of piece `i` at x, both in the original frame.
    pub fn jet(&self, i: usize, x: f64) -> Result<(f64, f64, f64)> {
        if self.mirrored {
            let p = &self.pieces[self.pieces.len() - 1 - i];
            let (v, d1, d2) = p.jet(1.0 - x)?;
            Ok((1.0 - v, d1, -d2))
        } else {
            self.pieces[i].jet(x)
        }
    }

    /// Interior piece junctions in the original frame.
    pub fn cusps(&self) -> Vec<f64> {
        (1..self.n_pieces()).map(|i| self.interval(i).0).collect()
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        let n = self.n_pieces();
        let i = (0..n).find(|&i| x <= self.interval(i).1).unwrap_or(n - 1);
        Ok(self.jet(i, x)?.0)
    }

    pub fn sample(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.value(x)).collect()
    }
}

/// Upper or lower solution recipe for one phase, with its free parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstruction {
    pub kind: BoundKind,
    pub phase: PhaseLabel,
    pub params: ModelParams,
    pub free: BTreeMap<String, f64>,
    /// Built in the hole-transformed frame and mirrored back.
    pub mirrored: bool,
}

impl BoundConstruction {
    /// Construction with explicit free parameters (see [`recipes::seeds`] for names).
    pub fn new(params: &ModelParams, kind: BoundKind, free: BTreeMap<String, f64>) -> Result<Self> {
        let an = analyze(params)?;
        recipes::check_supported(&an.label)?;
        Ok(BoundConstruction { kind, phase: an.label, params: *params, free, mirrored: an.label.applied_symmetry })
    }

    /// Kind in the frame where the recipe is written.
    pub fn working_kind(&self) -> BoundKind {
        if self.mirrored {
            self.kind.flip()
        } else {
            self.kind
        }
    }

    pub fn analysis(&self) -> Result<Analysis> {
        analyze(&self.params)
    }

    pub fn realize(&self, epsilon: f64) -> Result<Realization> {
        let an = self.analysis()?;
        self.realize_with(&an, epsilon)
    }

    pub(crate) fn realize_with(&self, an: &Analysis, epsilon: f64) -> Result<Realization> {
        if !(epsilon > 0.0) {
            return Err(Error::Parameter(format!("epsilon = {epsilon} must be positive")));
        }
        let pieces = recipes::pieces(an, self.working_kind(), &self.free, epsilon)?;
        Ok(Realization { epsilon, pieces, mirrored: self.mirrored })
    }

    pub fn profile(&self, epsilon: f64, n_cells: usize) -> Result<DensityProfile> {
        let grid = DensityProfile::uniform_grid(n_cells);
        let values = self.realize(epsilon)?.sample(&grid)?;
        Ok(DensityProfile::from_parts_unchecked(grid, values))
    }
}
