use super::characteristic::CharacteristicCurve;
use super::classify::{analyze, Analysis, Regime};
use crate::error::{Error, Result};
use crate::model::{BreakKind, Breakpoint, ModelParams, Piece, PieceKind, PiecewiseLimitProfile};

fn curve(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool, c: &CharacteristicCurve) -> Piece {
    Piece::new(lo, hi, lo_closed, hi_closed, PieceKind::Characteristic { curve: *c })
}

fn affine(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool, c: &CharacteristicCurve) -> Piece {
    let slope = c.slope_of(c.y0);
    Piece::new(lo, hi, lo_closed, hi_closed, PieceKind::Affine { x0: c.x0, y0: c.y0, slope })
}

fn constant(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool, v: f64) -> Piece {
    Piece::new(lo, hi, lo_closed, hi_closed, PieceKind::Constant { value: v })
}

fn check_position(name: &str, x: Option<f64>) -> Result<f64> {
    match x {
        Some(v) if (0.0..=1.0).contains(&v) => Ok(v),
        other => Err(Error::Consistency(format!("{name} = {other:?} outside [0,1]"))),
    }
}

fn layer_breaks(left: Option<(f64, f64)>, right: Option<(f64, f64)>) -> Vec<Breakpoint> {
    let mut out = Vec::new();
    if let Some((a, b)) = left {
        if (a - b).abs() > 1e-14 {
            out.push(Breakpoint { x: 0.0, kind: BreakKind::LeftBoundaryLayer });
        }
    }
    if let Some((a, b)) = right {
        if (a - b).abs() > 1e-14 {
            out.push(Breakpoint { x: 1.0, kind: BreakKind::RightBoundaryLayer });
        }
    }
    out
}

fn assemble_special(an: &Analysis) -> Result<PiecewiseLimitProfile> {
    let p = &an.working;
    let f = &an.features;
    let (a, bb) = (p.alpha, p.beta_bar());
    let (ra, rb) = (&an.rho_a, &an.rho_b);
    let (pieces, breaks) = match an.label.index {
        1 => {
            let xd = check_position("x_d", f.x_d)?;
            (
                vec![affine(0.0, xd, true, true, ra), affine(xd, 1.0, false, true, rb)],
                vec![Breakpoint { x: xd, kind: BreakKind::DomainWall }],
            )
        }
        2 => {
            let xp = check_position("x_p", f.x_p)?;
            let xq = check_position("x_q", f.x_q)?;
            (
                vec![
                    affine(0.0, xp, true, true, ra),
                    constant(xp, xq, false, true, 0.5),
                    affine(xq, 1.0, false, true, rb),
                ],
                vec![],
            )
        }
        3 => {
            let xq = check_position("x_q", f.x_q)?;
            (
                vec![Piece::point(0.0, a), constant(0.0, xq, false, true, 0.5), affine(xq, 1.0, false, true, rb)],
                layer_breaks(Some((a, 0.5)), None),
            )
        }
        4 | 5 => {
            let y0 = rb.eval_clamped(0.0);
            (vec![Piece::point(0.0, a), affine(0.0, 1.0, false, true, rb)], layer_breaks(Some((a, y0)), None))
        }
        6 => (
            vec![Piece::point(0.0, a), constant(0.0, 1.0, false, false, 0.5), Piece::point(1.0, bb)],
            layer_breaks(Some((a, 0.5)), Some((0.5, bb))),
        ),
        i => return Err(Error::Consistency(format!("special phase index {i}"))),
    };
    PiecewiseLimitProfile::new((0.0, 1.0), pieces, breaks)
}

fn assemble_general(an: &Analysis) -> Result<PiecewiseLimitProfile> {
    let p = &an.working;
    let f = &an.features;
    let (a, bb) = (p.alpha, p.beta_bar());
    let (ra, rb) = (&an.rho_a, &an.rho_b);
    let rm = an.rho_m.as_ref().ok_or_else(|| Error::Consistency("missing rho_M".into()))?;
    let (pieces, breaks) = match an.label.index {
        1 | 2 => {
            let ya = ra.eval(1.0).map_err(|_| Error::Consistency("rho_a undefined at 1".into()))?;
            (
                vec![curve(0.0, 1.0, true, false, ra), Piece::point(1.0, bb)],
                layer_breaks(None, Some((ya, bb))),
            )
        }
        3..=6 => {
            let y0 = rb.eval(0.0).map_err(|_| Error::Consistency("rho_b undefined at 0".into()))?;
            (vec![Piece::point(0.0, a), curve(0.0, 1.0, false, true, rb)], layer_breaks(Some((a, y0)), None))
        }
        7 | 8 => {
            let y0 = rm.eval_clamped(0.0);
            (
                vec![Piece::point(0.0, a), curve(0.0, 1.0, false, false, rm), Piece::point(1.0, bb)],
                layer_breaks(Some((a, y0)), Some((0.5, bb))),
            )
        }
        9 | 10 => {
            let xd = check_position("x_d", f.x_d)?;
            (
                vec![curve(0.0, xd, true, true, ra), curve(xd, 1.0, false, true, rb)],
                vec![Breakpoint { x: xd, kind: BreakKind::DomainWall }],
            )
        }
        11 => {
            let xd = check_position("x_d", f.x_d)?;
            let mut br = vec![Breakpoint { x: xd, kind: BreakKind::DomainWall }];
            br.extend(layer_breaks(None, Some((0.5, bb))));
            (
                vec![curve(0.0, xd, true, true, ra), curve(xd, 1.0, false, false, rm), Piece::point(1.0, bb)],
                br,
            )
        }
        i => return Err(Error::Consistency(format!("general phase index {i}"))),
    };
    PiecewiseLimitProfile::new((0.0, 1.0), pieces, breaks)
}

/// Assembles the limit profile ρ̂ of the phase selected by [`classify`](super::classify).
pub fn limit_profile(params: &ModelParams) -> Result<PiecewiseLimitProfile> {
    let an = analyze(params)?;
    limit_profile_from(&an)
}

pub fn limit_profile_from(an: &Analysis) -> Result<PiecewiseLimitProfile> {
    let prof = match an.label.regime {
        Regime::Special => assemble_special(an)?,
        Regime::General => assemble_general(an)?,
    };
    Ok(if an.label.applied_symmetry { prof.hole_transform() } else { prof })
}
