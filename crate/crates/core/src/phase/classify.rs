use std::cell::Cell;

use serde::{Deserialize, Serialize};

use super::characteristic::{domain_wall, Branch, CharacteristicCurve};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Comparisons closer than this are treated as ties on a phase boundary.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Ω_A = Ω_D
    Special,
    /// Ω_A/Ω_D > 1 (after the hole transform if needed)
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub regime: Regime,
    pub index: u8,
    /// Classified after the particle-hole transform (α < β in the special
    /// regime, or K < 1).
    pub applied_symmetry: bool,
    /// Parameters lie on a phase boundary; `index` is the lowest adjacent phase.
    pub boundary_flag: bool,
}

impl PhaseLabel {
    pub fn special(index: u8) -> Self {
        PhaseLabel { regime: Regime::Special, index, applied_symmetry: false, boundary_flag: false }
    }

    pub fn general(index: u8) -> Self {
        PhaseLabel { regime: Regime::General, index, applied_symmetry: false, boundary_flag: false }
    }

    pub fn name(&self) -> String {
        let r = match self.regime {
            Regime::Special => "special",
            Regime::General => "general",
        };
        format!("{r}-{}", self.index)
    }
}

/// Quantities that decide the phase, expressed in the frame where the
/// classification happened (after the hole transform when
/// `applied_symmetry` is set).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseFeatures {
    pub r_bar: f64,
    /// ρ^a(1), only when ρ^a stays off 1/2 on [0,1].
    pub y_a: Option<f64>,
    pub x_p: Option<f64>,
    pub x_p_beyond_domain: bool,
    pub x_q: Option<f64>,
    pub y_b: Option<f64>,
    pub ybar_b: Option<f64>,
    pub y_m: Option<f64>,
    pub ybar_m: Option<f64>,
    pub x_d: Option<f64>,
}

/// Classification plus the curves needed to assemble ρ̂.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub label: PhaseLabel,
    pub features: PhaseFeatures,
    /// Parameters of the frame in which `features` and the curves live.
    pub working: ModelParams,
    pub rho_a: CharacteristicCurve,
    pub rho_b: CharacteristicCurve,
    pub rho_m: Option<CharacteristicCurve>,
}

/// Runs `decide` over every resolution of the ties it meets and keeps the
/// lowest phase index.
fn resolve_ties(decide: impl Fn(&dyn Fn(f64, f64) -> bool) -> u8) -> (u8, bool) {
    let run = |mask: u32| {
        let count = Cell::new(0u32);
        let lt = |a: f64, b: f64| {
            if (a - b).abs() <= TIE_TOL {
                let k = count.get();
                count.set(k + 1);
                (mask >> k) & 1 == 1
            } else {
                a < b
            }
        };
        let idx = decide(&lt);
        (idx, count.get())
    };
    let (first, ties) = run(0);
    if ties == 0 {
        return (first, false);
    }
    let mut best = first;
    let mut max_ties = ties;
    let mut mask = 1u32;
    while mask < (1u32 << max_ties.min(16)) {
        let (idx, t) = run(mask);
        best = best.min(idx);
        max_ties = max_ties.max(t);
        mask += 1;
    }
    (best, true)
}

fn eval_opt(c: &CharacteristicCurve, x: f64) -> Option<f64> {
    c.eval(x).ok()
}

fn classify_special(p: &ModelParams) -> (PhaseLabel, PhaseFeatures, CharacteristicCurve, CharacteristicCurve) {
    let om = p.omega_a;
    let (a, b, bb) = (p.alpha, p.beta, p.beta_bar());
    let rho_a = CharacteristicCurve::new(0.0, a, om, om);
    let rho_b = CharacteristicCurve::new(1.0, bb, om, om);
    let y_b = b + om;
    let ybar_b = bb - om;
    let x_p = (a < 0.5 && om > 0.0).then(|| (0.5 - a) / om);
    let x_q = (b < 0.5 && om > 0.0).then(|| 1.0 - (0.5 - b) / om);
    let (idx, flag) = resolve_ties(|lt| {
        if lt(0.5, b) {
            6
        } else if lt(0.5, ybar_b) {
            if lt(a, y_b) {
                1
            } else if lt(a, ybar_b) {
                4
            } else {
                5
            }
        } else if lt(a, ybar_b) {
            1
        } else if lt(a, 0.5) {
            2
        } else {
            3
        }
    });
    let x_d = (idx == 1 && om > 0.0).then(|| (om + b - a) / (2.0 * om));
    let features = PhaseFeatures {
        r_bar: 0.5,
        y_a: (a + om < 0.5).then_some(a + om),
        x_p,
        x_p_beyond_domain: x_p.map_or(true, |x| x > 1.0),
        x_q,
        y_b: Some(y_b),
        ybar_b: Some(ybar_b),
        y_m: None,
        ybar_m: None,
        x_d,
    };
    let label = PhaseLabel { regime: Regime::Special, index: idx, applied_symmetry: false, boundary_flag: flag };
    (label, features, rho_a, rho_b)
}

fn classify_general(p: &ModelParams) -> Result<(PhaseLabel, PhaseFeatures, CharacteristicCurve, CharacteristicCurve, CharacteristicCurve)> {
    let (oa, od) = (p.omega_a, p.omega_d);
    let (a, bb) = (p.alpha, p.beta_bar());
    let b = p.beta;
    let r_bar = p.r_bar();
    let rho_a = CharacteristicCurve::new(0.0, a, oa, od);
    let rho_b = CharacteristicCurve::new(1.0, bb, oa, od);
    let rho_m = CharacteristicCurve::with_branch(1.0, 0.5, oa, od, Branch::AboveHalf);
    let x_p = rho_a.singular_point().filter(|&x| x >= 0.0);
    let beyond = x_p.map_or(true, |x| x > 1.0);
    let y_a = if beyond { eval_opt(&rho_a, 1.0) } else { None };
    let ybar_b = eval_opt(&rho_b, 0.0)
        .ok_or_else(|| Error::Classification("rho_b undefined at x = 0".into()))?;
    let ybar_m = eval_opt(&rho_m, 0.0)
        .ok_or_else(|| Error::Classification("rho_M undefined at x = 0".into()))?;
    let y_b = 1.0 - ybar_b;
    let y_m = 1.0 - ybar_m;
    let xp_val = x_p.unwrap_or(f64::INFINITY);
    let ya_val = y_a.unwrap_or(f64::NAN);
    let (idx, flag) = resolve_ties(|lt| {
        let (i1, i9, i3, i4);
        if lt(r_bar, bb) {
            (i1, i9, i3, i4) = (1, 9, 3, 4);
        } else if lt(0.5, bb) {
            (i1, i9, i3, i4) = (1, 10, 5, 6);
        } else {
            return if lt(a, y_m) {
                if lt(1.0, xp_val) {
                    if lt(ya_val, bb) {
                        1
                    } else {
                        2
                    }
                } else {
                    11
                }
            } else if lt(a, ybar_m) {
                7
            } else {
                8
            };
        }
        if lt(a, y_b) {
            if lt(1.0, xp_val) && lt(ya_val, b) {
                i1
            } else {
                i9
            }
        } else if lt(a, ybar_b) {
            i3
        } else {
            i4
        }
    });
    let x_d = match idx {
        9 | 10 => Some(domain_wall(&rho_a, &rho_b)?),
        11 => Some(domain_wall(&rho_a, &rho_m)?),
        _ => None,
    };
    let features = PhaseFeatures {
        r_bar,
        y_a,
        x_p,
        x_p_beyond_domain: beyond,
        x_q: None,
        y_b: (bb > 0.5).then_some(y_b),
        ybar_b: (bb > 0.5).then_some(ybar_b),
        y_m: Some(y_m),
        ybar_m: Some(ybar_m),
        x_d,
    };
    let label = PhaseLabel { regime: Regime::General, index: idx, applied_symmetry: false, boundary_flag: flag };
    Ok((label, features, rho_a, rho_b, rho_m))
}

/// Full analysis: hole transform if needed, features, phase and curves.
pub fn analyze(params: &ModelParams) -> Result<Analysis> {
    params.validate()?;
    let special = params.is_special();
    let flip = if special { params.alpha < params.beta } else { params.k() < 1.0 };
    let working = if flip { params.hole_transform() } else { *params };
    let mut out = if special {
        let (label, features, rho_a, rho_b) = classify_special(&working);
        Analysis { label, features, working, rho_a, rho_b, rho_m: None }
    } else {
        let (label, features, rho_a, rho_b, rho_m) = classify_general(&working)?;
        Analysis { label, features, working, rho_a, rho_b, rho_m: Some(rho_m) }
    };
    out.label.applied_symmetry = flip;
    Ok(out)
}

pub fn classify(params: &ModelParams) -> Result<(PhaseLabel, PhaseFeatures)> {
    let a = analyze(params)?;
    Ok((a.label, a.features))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(a: f64, b: f64, om: f64) -> PhaseLabel {
        classify(&ModelParams::special(a, b, om, 0.01).unwrap()).unwrap().0
    }

    fn gen(a: f64, b: f64, od: f64, k: f64) -> PhaseLabel {
        classify(&ModelParams::general(a, b, od, k, 0.01).unwrap()).unwrap().0
    }

    #[test]
    fn special_examples() {
        assert_eq!(sp(0.25, 0.125, 0.25).index, 1);
        assert_eq!(sp(0.75, 0.6667, 0.25).index, 6);
        let (_, f) = classify(&ModelParams::special(0.25, 0.125, 0.25, 0.01).unwrap()).unwrap();
        assert!((f.x_d.unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn general_example() {
        assert_eq!(gen(0.8184, 0.7140, 0.1, 2.0).index, 8);
    }

    #[test]
    fn symmetry_flag_set() {
        let l = sp(0.125, 0.25, 0.25);
        assert!(l.applied_symmetry);
        assert_eq!(l.index, 1);
        let g = gen(0.3, 0.3, 0.2, 0.5);
        assert!(g.applied_symmetry);
    }

    #[test]
    fn ties_resolve_to_lower_index() {
        // α = β + Ω: boundary between phases 1 and 4
        let l = sp(0.375, 0.125, 0.25);
        assert!(l.boundary_flag);
        assert_eq!(l.index, 1);
        // β = 0.5 exactly: boundary of phase 6
        let l = sp(0.75, 0.5, 0.25);
        assert!(l.boundary_flag);
        assert!(l.index < 6);
        assert!(!sp(0.25, 0.125, 0.25).boundary_flag);
    }

    #[test]
    fn zero_rates_reduce_to_tasep() {
        assert_eq!(sp(0.3, 0.2, 0.0).index, 4);
        assert_eq!(sp(0.9, 0.2, 0.0).index, 5);
        assert_eq!(sp(0.8, 0.7, 0.0).index, 6);
    }
}
