use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::construction::{BoundConstruction, BoundKind, Realization};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// ε values tried by [`verify_bound`].
pub const EPSILON_LADDER: [f64; 5] = [0.1, 0.05, 0.02, 0.01, 0.005];

/// Round-off allowance on every inequality.
pub const CHECK_SLACK: f64 = 1e-9;

const CONTINUITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceMargin {
    pub lo: f64,
    pub hi: f64,
    /// min of −Lρ (upper) or Lρ (lower) over the piece's nodes.
    pub margin: f64,
    pub worst_x: f64,
}

/// Outcome at one ε. Margins are signed so that ≥ 0 means the inequality holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCheck {
    pub epsilon: f64,
    pub defined: bool,
    pub passed: bool,
    pub reason: Option<String>,
    pub boundary_margin: f64,
    pub operator_margin: f64,
    pub cusp_margin: Option<f64>,
    pub continuity_error: f64,
    pub pieces: Vec<PieceMargin>,
}

impl EpsilonCheck {
    fn undefined(epsilon: f64, reason: String) -> Self {
        EpsilonCheck {
            epsilon,
            defined: false,
            passed: false,
            reason: Some(reason),
            boundary_margin: f64::NAN,
            operator_margin: f64::NAN,
            cusp_margin: None,
            continuity_error: f64::NAN,
            pieces: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub phase: String,
    pub free: BTreeMap<String, f64>,
    pub checks: Vec<EpsilonCheck>,
    pub passing: Vec<f64>,
    pub largest_passing: Option<f64>,
    pub smallest_passing: Option<f64>,
}

impl BoundReport {
    pub fn passes_at_or_below(&self, eps: f64) -> bool {
        self.passing.iter().any(|&e| e <= eps)
    }
}

/// Lρ = (ε/2)ρ'' + (2ρ − 1)ρ' + Ω_A(1 − ρ) − Ω_D ρ.
pub fn operator(params: &ModelParams, eps: f64, jet: (f64, f64, f64)) -> f64 {
    let (r, r1, r2) = jet;
    0.5 * eps * r2 + (2.0 * r - 1.0) * r1 + params.omega_a * (1.0 - r) - params.omega_d * r
}

/// Nodes on [lo, hi]: a uniform grid plus clusters around layer anchors.
fn nodes(lo: f64, hi: f64, n: usize, anchors: &[(f64, f64)]) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    for &(x0, width) in anchors {
        for j in -200i32..=200 {
            let x = x0 + width * j as f64 / 10.0;
            if x > lo && x < hi {
                xs.push(x);
            }
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

fn layer_anchors(real: &Realization) -> Vec<(f64, f64)> {
    use super::construction::Term;
    let mut out = Vec::new();
    for p in &real.pieces {
        for t in &p.terms {
            if let Term::Layer { layer } = t {
                let d = (1.0 - 2.0 * layer.a).max(0.05);
                let width = layer.epsilon / (2.0 * layer.slowdown * d);
                let x0 = if real.mirrored { 1.0 - layer.x0 } else { layer.x0 };
                out.push((x0, width));
            }
        }
    }
    out
}

/// Checks the upper/lower inequalities of `c` at a single ε.
pub fn verify_bound_at(c: &BoundConstruction, eps: f64, nodes_per_piece: usize) -> EpsilonCheck {
    let real = match c.realize(eps) {
        Ok(r) => r,
        Err(e) => return EpsilonCheck::undefined(eps, format!("construction undefined at ε = {eps}: {e}")),
    };
    match check_realization(c, &real, nodes_per_piece) {
        Ok(chk) => chk,
        Err(e) => EpsilonCheck::undefined(eps, format!("construction undefined at ε = {eps}: {e}")),
    }
}

fn check_realization(c: &BoundConstruction, real: &Realization, n: usize) -> Result<EpsilonCheck> {
    let p = &c.params;
    let eps = real.epsilon;
    let sign = match c.kind {
        BoundKind::Upper => 1.0,
        BoundKind::Lower => -1.0,
    };
    let np = real.n_pieces();
    let anchors = layer_anchors(real);

    let left = real.jet(0, real.interval(0).0)?.0;
    let right = real.jet(np - 1, real.interval(np - 1).1)?.0;
    let boundary_margin = (sign * (left - p.alpha)).min(sign * (right - p.beta_bar()));

    let mut pieces = Vec::with_capacity(np);
    for i in 0..np {
        let (lo, hi) = real.interval(i);
        let xs = nodes(lo, hi, n.max(2), &anchors);
        let vals: Vec<Result<(f64, f64)>> = xs
            .par_iter()
            .map(|&x| real.jet(i, x).map(|j| (-sign * operator(p, eps, j), x)))
            .collect();
        let mut worst = (f64::INFINITY, lo);
        for v in vals {
            let (m, x) = v?;
            if !m.is_finite() {
                return Err(Error::Range { x, boundary: x });
            }
            if m < worst.0 {
                worst = (m, x);
            }
        }
        pieces.push(PieceMargin { lo, hi, margin: worst.0, worst_x: worst.1 });
    }
    let operator_margin = pieces.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);

    let mut cusp_margin: Option<f64> = None;
    let mut continuity_error: f64 = 0.0;
    for i in 1..np {
        let x = real.interval(i).0;
        let (vl, dl, _) = real.jet(i - 1, x)?;
        let (vr, dr, _) = real.jet(i, x)?;
        continuity_error = continuity_error.max((vl - vr).abs());
        let m = sign * (dl - dr);
        cusp_margin = Some(cusp_margin.map_or(m, |c: f64| c.min(m)));
    }

    let mut reasons = Vec::new();
    if boundary_margin < -CHECK_SLACK {
        reasons.push(format!("boundary inequality violated by {:.3e}", -boundary_margin));
    }
    if operator_margin < -CHECK_SLACK {
        let w = pieces.iter().find(|m| m.margin == operator_margin).unwrap();
        reasons.push(format!("operator sign violated by {:.3e} at x = {:.6}", -operator_margin, w.worst_x));
    }
    if let Some(cm) = cusp_margin {
        if cm < -CHECK_SLACK {
            reasons.push(format!("cusp slope inequality violated by {:.3e}", -cm));
        }
    }
    if continuity_error > CONTINUITY_TOL {
        reasons.push(format!("discontinuity of {continuity_error:.3e} at a cusp"));
    }
    Ok(EpsilonCheck {
        epsilon: eps,
        defined: true,
        passed: reasons.is_empty(),
        reason: (!reasons.is_empty()).then(|| reasons.join("; ")),
        boundary_margin,
        operator_margin,
        cusp_margin,
        continuity_error,
        pieces,
    })
}

/// Runs [`verify_bound_at`] over [`EPSILON_LADDER`].
pub fn verify_bound(c: &BoundConstruction, nodes_per_piece: usize) -> BoundReport {
    verify_bound_on(c, &EPSILON_LADDER, nodes_per_piece)
}

pub fn verify_bound_on(c: &BoundConstruction, ladder: &[f64], nodes_per_piece: usize) -> BoundReport {
    let checks: Vec<EpsilonCheck> = ladder.iter().map(|&e| verify_bound_at(c, e, nodes_per_piece)).collect();
    let passing: Vec<f64> = checks.iter().filter(|k| k.passed).map(|k| k.epsilon).collect();
    BoundReport {
        kind: c.kind,
        phase: c.phase.name(),
        free: c.free.clone(),
        largest_passing: passing.iter().cloned().reduce(f64::max),
        smallest_passing: passing.iter().cloned().reduce(f64::min),
        checks,
        passing,
    }
}
