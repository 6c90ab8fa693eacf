//! Per-phase upper/lower solution recipes, written in the classification
//! frame (α > β for Ω_A = Ω_D, K > 1 otherwise).

use std::collections::BTreeMap;

use super::construction::{BoundKind, BoundPiece, Term};
use super::layer::BoundaryLayer;
use crate::error::{Error, Result};
use crate::phase::{Analysis, CharacteristicCurve, PhaseLabel, Regime};

pub type Free = BTreeMap<String, f64>;

pub fn check_supported(label: &PhaseLabel) -> Result<()> {
    match (label.regime, label.index) {
        (Regime::Special, 1..=6) | (Regime::General, 1..=6 | 9 | 10) => Ok(()),
        _ => Err(Error::Unsupported(format!(
            "no upper/lower construction for phase {}; check it by PDE convergence instead",
            label.name()
        ))),
    }
}

fn get(free: &Free, name: &str) -> Result<f64> {
    match free.get(name) {
        Some(v) if v.is_finite() && *v > 0.0 => Ok(*v),
        Some(v) => Err(Error::Parameter(format!("free parameter {name} = {v} must be positive"))),
        None => Err(Error::Parameter(format!("missing free parameter {name}"))),
    }
}

fn need(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Parameter(format!("free parameters too large: {what}")))
    }
}

fn map(entries: &[(&str, f64)]) -> Free {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Starting magnitudes for the free parameters (reference-set sizes, with
/// rate offsets taken relative to the working Ω_D).
pub fn seeds(an: &Analysis, kind: BoundKind) -> Result<Free> {
    check_supported(&an.label)?;
    let om = an.working.omega_d;
    let up = kind == BoundKind::Upper;
    let f = match (an.label.regime, an.label.index) {
        (Regime::Special, 1) if up => map(&[("delta_u", 0.1), ("d_omega_u", 0.064 * om)]),
        (Regime::Special, 1) => map(&[("delta_l", 0.1), ("d_omega_l", 0.064 * om)]),
        (Regime::Special, 2) if up => map(&[("delta_u", 3.0 / 32.0), ("c_u", 40.0), ("d_omega_u", 0.08 * om)]),
        (Regime::Special, 2) => map(&[("delta_l", 3.0 / 32.0), ("c_l", 40.0), ("d_omega_l", 0.08 * om)]),
        (Regime::Special, 3) if up => map(&[("delta_u", 3.0 / 32.0), ("c_u", 40.0), ("d_omega_u", 0.08 * om)]),
        (Regime::Special, 3) => map(&[("delta_l", 3.0 / 32.0)]),
        (Regime::Special, 4) if up => map(&[("delta_u", 1.0 / 16.0)]),
        (Regime::Special, 4) => map(&[]),
        (Regime::Special, 5) if up => map(&[]),
        (Regime::Special, 5) => map(&[("delta_l", 1.0 / 16.0)]),
        (Regime::Special, 6) if up => map(&[("delta_u", 1.0 / 16.0)]),
        (Regime::Special, 6) => map(&[("delta_l", 1.0 / 16.0)]),
        (Regime::General, 1) if up => map(&[("delta_u", 0.0249), ("delta_u1", 0.0498), ("d_omega_d_u", 0.1 * om)]),
        (Regime::General, 1) => map(&[("delta_l", 0.0249)]),
        (Regime::General, 2) if up => map(&[("delta_u", 0.0422), ("d_omega_d_u", 0.1 * om)]),
        (Regime::General, 2) => map(&[("delta_l", 0.0422), ("delta_l1", 0.0396)]),
        (Regime::General, 3) if up => map(&[("delta_u", 0.0457), ("d_omega_d_u", 0.1 * om)]),
        (Regime::General, 3) => map(&[("delta_l", 0.0457), ("delta_l1", 0.0407)]),
        (Regime::General, 4) if up => map(&[("delta_u", 0.0451), ("delta_u1", 0.0305), ("d_omega_d_u", 0.05 * om)]),
        (Regime::General, 4) => map(&[("delta_l", 0.0451)]),
        (Regime::General, 5) if up => map(&[("delta_u", 0.0926)]),
        (Regime::General, 5) => map(&[("delta_l", 0.0926), ("delta_l1", 0.0488), ("d_omega_d_l", 0.25 * om)]),
        (Regime::General, 6) if up => map(&[("delta_u", 0.0653)]),
        (Regime::General, 6) => map(&[("delta_l", 0.0653), ("d_omega_d_l", 0.077 * om)]),
        (Regime::General, 9 | 10) => {
            // δ_{·,1} is capped at a quarter of the gap between the two
            // branches at the shifted wall, which keeps δ_{·,2} ≥ gap / 4
            let nine = an.label.index == 9;
            let xd = an.features.x_d.ok_or_else(|| Error::Logic("domain-wall phase without x_d".into()))?;
            let d = 0.15;
            let x = if up { xd - d } else { xd + d };
            let gap = match (an.rho_a.eval(x), an.rho_b.eval(x)) {
                (Ok(a), Ok(b)) => (a + b - 1.0).abs(),
                _ => 0.0,
            };
            let cap = |c: f64| if gap > 0.0 { c.min(gap / 4.0) } else { c };
            match (nine, up) {
                (true, true) => map(&[
                    ("delta_u", d),
                    ("delta_u1", cap(0.0481)),
                    ("d_omega_d_ua", 0.1 * om),
                    ("d_omega_d_ub", 0.1667 * om),
                ]),
                (true, false) => map(&[("delta_l", d), ("delta_l1", cap(0.0562)), ("d_omega_d_la", 0.0667 * om)]),
                (false, true) => map(&[("delta_u", d), ("delta_u1", cap(0.031)), ("d_omega_d_ua", 0.0545 * om)]),
                (false, false) => map(&[
                    ("delta_l", d),
                    ("delta_l1", cap(0.0398)),
                    ("d_omega_d_la", 0.0364 * om),
                    ("d_omega_d_lb", 0.182 * om),
                ]),
            }
        }
        _ => unreachable!(),
    };
    Ok(f)
}

/// Shrinks every free parameter by `s` (curvatures C grow by 1/s).
pub fn scale(free: &Free, s: f64) -> Free {
    free.iter()
        .map(|(k, v)| (k.clone(), if k.starts_with("c_") { v / s } else { v * s }))
        .collect()
}

pub fn pieces(an: &Analysis, kind: BoundKind, free: &Free, eps: f64) -> Result<Vec<BoundPiece>> {
    check_supported(&an.label)?;
    let out = match an.label.regime {
        Regime::Special => special(an, kind, free, eps)?,
        Regime::General => general(an, kind, free, eps)?,
    };
    let out: Vec<BoundPiece> = out.into_iter().filter(|p| p.hi > p.lo).collect();
    need(!out.is_empty(), "construction has no pieces")?;
    Ok(out)
}

fn cst(value: f64) -> Term {
    Term::Const { value }
}

fn aff(x0: f64, y0: f64, slope: f64) -> Term {
    Term::Affine { x0, y0, slope }
}

fn lay(layer: BoundaryLayer) -> Term {
    Term::Layer { layer }
}

fn piece(lo: f64, hi: f64, terms: Vec<Term>) -> BoundPiece {
    BoundPiece::new(lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0), terms)
}

fn special(an: &Analysis, kind: BoundKind, free: &Free, eps: f64) -> Result<Vec<BoundPiece>> {
    let p = &an.working;
    let (al, be, om) = (p.alpha, p.beta, p.omega_d);
    let bb = 1.0 - be;
    let up = kind == BoundKind::Upper;
    Ok(match an.label.index {
        1 => {
            let xd = (om + be - al) / (2.0 * om);
            let yd = (om + be + al) / 2.0;
            if up {
                let (du, dom) = (get(free, "delta_u")?, get(free, "d_omega_u")?);
                need(dom < om, "Ω − Ω_u < Ω")?;
                let (xdu, xt) = (xd - du, xd - du / 2.0);
                let w = BoundaryLayer::new(yd, xdu, 0.5, eps)?;
                vec![
                    piece(0.0, xt, vec![lay(w), aff(xt, 0.0, om)]),
                    piece(xt, 1.0, vec![lay(w), aff(xt, 0.0, om - dom)]),
                ]
            } else {
                let (dl, dom) = (get(free, "delta_l")?, get(free, "d_omega_l")?);
                need(dom < om, "Ω − Ω_l < Ω")?;
                let (xdl, xt) = (xd + dl, xd + dl / 2.0);
                let w = BoundaryLayer::new(yd, xdl, 0.5, eps)?;
                vec![
                    piece(0.0, xt, vec![lay(w), aff(xt, 0.0, om - dom)]),
                    piece(xt, 1.0, vec![lay(w), aff(xt, 0.0, om)]),
                ]
            }
        }
        2 => {
            let xp = (0.5 - al) / om;
            let xq = 1.0 - (0.5 - be) / om;
            if up {
                let (du, c, dom) = (get(free, "delta_u")?, get(free, "c_u")?, get(free, "d_omega_u")?);
                need(dom < om, "Ω − Ω_u < Ω")?;
                let (yu, zu, omu) = (0.5 + du, 0.5 + du / 2.0, om - dom);
                let x1 = xq - (du / (2.0 * c)).sqrt();
                let x2 = xq + omu / (2.0 * c);
                need(x1 > xp, "parabolic cap overlaps the rising edge")?;
                let q2 = zu + c * (x2 - xq).powi(2);
                vec![
                    piece(0.0, xp, vec![aff(xp, yu, om)]),
                    piece(xp, x1, vec![cst(yu)]),
                    piece(x1, x2, vec![Term::Parabola { vertex: xq, z: zu, c }]),
                    piece(x2, 1.0, vec![aff(x2, q2, omu)]),
                ]
            } else {
                let (dl, c, dom) = (get(free, "delta_l")?, get(free, "c_l")?, get(free, "d_omega_l")?);
                need(dom < om, "Ω − Ω_l < Ω")?;
                let (yl, zl, oml) = (0.5 - dl, 0.5 - dl / 2.0, om - dom);
                let x1 = xp + (dl / (2.0 * c)).sqrt();
                let x2 = xp - oml / (2.0 * c);
                need(x1 < xq, "parabolic cap overlaps the rising edge")?;
                let q2 = zl - c * (x2 - xp).powi(2);
                vec![
                    piece(0.0, x2, vec![aff(x2, q2, oml)]),
                    piece(x2, x1, vec![Term::Parabola { vertex: xp, z: zl, c: -c }]),
                    piece(x1, xq, vec![cst(yl)]),
                    piece(xq, 1.0, vec![aff(xq, yl, om)]),
                ]
            }
        }
        3 => {
            let xq = 1.0 - (0.5 - be) / om;
            if up {
                let (du, c, dom) = (get(free, "delta_u")?, get(free, "c_u")?, get(free, "d_omega_u")?);
                need(dom < om, "Ω − Ω_u < Ω")?;
                need(du < al - 0.5, "δ_u < α − 1/2")?;
                let (yu, zu, omu) = (0.5 + du, 0.5 + du / 2.0, om - dom);
                let x1 = xq - (du / (2.0 * c)).sqrt();
                let x2 = xq + omu / (2.0 * c);
                need(x1 > 0.0, "parabolic cap reaches x = 0")?;
                let w = BoundaryLayer::new(1.0 - yu, 0.0, al, eps)?;
                let q = |x: f64| zu + c * (x - xq).powi(2);
                let x1e = cusp_root(|x| w.eval(x) - q(x), x1).ok_or_else(|| Error::Undefined {
                    epsilon: eps,
                    reason: "boundary layer does not meet the parabolic cap".into(),
                })?;
                let q2 = q(x2);
                vec![
                    piece(0.0, x1e, vec![lay(w)]),
                    piece(x1e, x2, vec![Term::Parabola { vertex: xq, z: zu, c }]),
                    piece(x2, 1.0, vec![aff(x2, q2, omu)]),
                ]
            } else {
                let dl = get(free, "delta_l")?;
                let yl = 0.5 - dl;
                vec![piece(0.0, xq, vec![cst(yl)]), piece(xq, 1.0, vec![aff(xq, yl, om)])]
            }
        }
        4 => {
            if up {
                let du = get(free, "delta_u")?;
                vec![piece(0.0, 1.0, vec![aff(0.0, bb + du - om, om)])]
            } else {
                let yb = be + om;
                need(yb <= 0.5, "β + Ω <= 1/2")?;
                let w = BoundaryLayer::new(yb, 0.0, al, eps)?;
                vec![piece(0.0, 1.0, vec![lay(w), aff(0.0, 0.0, om)])]
            }
        }
        5 => {
            if up {
                let yb = be + om;
                need(yb <= 0.5, "β + Ω <= 1/2")?;
                let w = BoundaryLayer::new(yb, 0.0, al, eps)?;
                vec![piece(0.0, 1.0, vec![lay(w), aff(0.0, 0.0, om)])]
            } else {
                let dl = get(free, "delta_l")?;
                vec![piece(0.0, 1.0, vec![aff(0.0, bb - dl - om, om)])]
            }
        }
        6 => {
            if up {
                let du = get(free, "delta_u")?;
                need(du < al - 0.5, "δ_u < α − 1/2")?;
                vec![piece(0.0, 1.0, vec![lay(BoundaryLayer::new(0.5 - du, 0.0, al, eps)?)])]
            } else {
                let dl = get(free, "delta_l")?;
                need(dl < be - 0.5, "δ_l < β − 1/2")?;
                vec![piece(0.0, 1.0, vec![lay(BoundaryLayer::new(0.5 - dl, 1.0, bb, eps)?)])]
            }
        }
        _ => unreachable!(),
    })
}

/// Largest root of g below `start` where g changes sign from − to +
/// (scanning left from `start`, where g > 0).
fn cusp_root(g: impl Fn(f64) -> f64, start: f64) -> Option<f64> {
    let n = 20_000;
    let h = start / n as f64;
    let g0 = g(start);
    if !(g0 > 0.0) {
        // the layer has already merged with its plateau to round-off
        return (g0 > -1e-12).then_some(start);
    }
    let mut hi = start;
    for i in 1..=n {
        let x = start - i as f64 * h;
        let v = g(x);
        if v.is_nan() {
            return None;
        }
        if v <= 0.0 {
            let mut lo = x;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(hi);
        }
        hi = x;
    }
    None
}

fn general(an: &Analysis, kind: BoundKind, free: &Free, eps: f64) -> Result<Vec<BoundPiece>> {
    let p = &an.working;
    let (al, be, od, k) = (p.alpha, p.beta, p.omega_d, p.k());
    let bb = 1.0 - be;
    let rb = p.r_bar();
    let curve = |x0: f64, y0: f64, omega_d: f64| CharacteristicCurve::from_k(x0, y0, omega_d, k);
    let cv = |c: CharacteristicCurve| Term::Curve { curve: c };
    let up = kind == BoundKind::Upper;
    let whole = |terms: Vec<Term>| vec![piece(0.0, 1.0, terms)];
    let defined = |c: &CharacteristicCurve, lo: f64, hi: f64| -> Result<()> {
        c.eval(lo)?;
        c.eval(hi)?;
        Ok(())
    };
    Ok(match an.label.index {
        1 => {
            if up {
                let (du, du1, dod) = (get(free, "delta_u")?, get(free, "delta_u1")?, get(free, "d_omega_d_u")?);
                let (au, bu) = (al + du, be - du1);
                let ra = curve(0.0, au, od + dod);
                let yau = ra.eval(1.0)?;
                need(yau < bu && bu < 1.0 - yau, "y_a^u < β_u < ȳ_a^u")?;
                let du2 = (bu - yau) / 4.0;
                let a = yau + du2;
                let w = BoundaryLayer::new(a, 1.0, 1.0 - bu + du2, eps)?;
                whole(vec![cv(ra), lay(w), cst(-a)])
            } else {
                let ra = curve(0.0, al - get(free, "delta_l")?, od);
                defined(&ra, 0.0, 1.0)?;
                whole(vec![cv(ra)])
            }
        }
        2 => {
            if up {
                let ra = curve(0.0, al + get(free, "delta_u")?, od + get(free, "d_omega_d_u")?);
                defined(&ra, 0.0, 1.0)?;
                need(ra.eval(1.0)? < 0.5, "ρ_u^a stays below 1/2")?;
                whole(vec![cv(ra)])
            } else {
                let (dl, dl1) = (get(free, "delta_l")?, get(free, "delta_l1")?);
                let ya = an.rho_a.eval(1.0)?;
                let ra = curve(0.0, al - dl, od);
                let yal = ra.eval(1.0)?;
                need(yal > bb && dl1 < ya - yal, "y_a^l > β̄ and δ_{l,1} < y_a − y_a^l")?;
                let a = yal + dl1;
                let w = BoundaryLayer::new(a, 1.0, bb, eps)?;
                whole(vec![cv(ra), lay(w), cst(-a)])
            }
        }
        3 | 5 => {
            let five = an.label.index == 5;
            if up {
                let od_u = if five { od } else { od - get(free, "d_omega_d_u")? };
                let rbu = curve(1.0, bb + get(free, "delta_u")?, od_u);
                defined(&rbu, 0.0, 1.0)?;
                whole(vec![cv(rbu)])
            } else {
                let (dl, dl1) = (get(free, "delta_l")?, get(free, "delta_l1")?);
                let od_l = if five { od - get(free, "d_omega_d_l")? } else { od };
                need(od_l > 0.0, "Ω_D^l > 0")?;
                let rbl = curve(1.0, bb - dl, od_l);
                let ybl_bar = rbl.eval(0.0)?;
                let ybl = 1.0 - ybl_bar;
                let all = al - dl1;
                need(ybl < all && all < ybl_bar, "y_b^l < α_l < ȳ_b^l")?;
                let dl2 = (all - ybl) / 4.0;
                let a = ybl + dl2;
                let w = BoundaryLayer::new(a, 0.0, all - dl2, eps)?;
                whole(vec![cv(rbl), lay(w), cst(-(1.0 - a))])
            }
        }
        4 => {
            if up {
                let (du, du1, dod) = (get(free, "delta_u")?, get(free, "delta_u1")?, get(free, "d_omega_d_u")?);
                need(dod < od, "Ω_D^u > 0")?;
                let rbu = curve(1.0, bb + du, od - dod);
                let ybu_bar = rbu.eval(0.0)?;
                need(ybu_bar - du1 > 0.5, "ȳ_b^u − δ_{u,1} > 1/2")?;
                let a = 1.0 - ybu_bar + du1;
                let w = BoundaryLayer::new(a, 0.0, al, eps)?;
                whole(vec![cv(rbu), lay(w), cst(-(1.0 - a))])
            } else {
                let rbl = curve(1.0, bb - get(free, "delta_l")?, od);
                defined(&rbl, 0.0, 1.0)?;
                whole(vec![cv(rbl)])
            }
        }
        6 => {
            if up {
                let rbu = curve(1.0, bb + get(free, "delta_u")?, od);
                let ybu_bar = rbu.eval(0.0)?;
                need(ybu_bar < al, "ȳ_b^u < α")?;
                need(be < 0.5, "β < 1/2")?;
                let a_bar = 1.0 - be;
                // anchor makes ρ_u(0) = α exactly
                let w = BoundaryLayer::new(be, 0.0, a_bar + al - ybu_bar, eps)?;
                whole(vec![cv(rbu), lay(w), cst(-a_bar)])
            } else {
                let dod = get(free, "d_omega_d_l")?;
                need(dod < od, "Ω_D^l > 0")?;
                let rbl = curve(1.0, bb - get(free, "delta_l")?, od - dod);
                defined(&rbl, 0.0, 1.0)?;
                whole(vec![cv(rbl)])
            }
        }
        9 | 10 => {
            let nine = an.label.index == 9;
            let xd = an.features.x_d.ok_or_else(|| Error::Logic("domain-wall phase without x_d".into()))?;
            if up {
                let (du, du1, dua) = (get(free, "delta_u")?, get(free, "delta_u1")?, get(free, "d_omega_d_ua")?);
                let od_b = if nine { od - get(free, "d_omega_d_ub")? } else { od };
                need(od_b > 0.0, "Ω_D^{u,b} > 0")?;
                let xdu = xd - du;
                need(xdu > 0.0, "x_d^u > 0")?;
                let ya = an.rho_a.eval(xdu)? + du1;
                let yb_bar = an.rho_b.eval(xdu)? + du1;
                need(ya + yb_bar < 1.0, "y_d^{u,a} + ȳ_d^{u,b} < 1")?;
                let rau = curve(xdu, ya, od + dua);
                let rbu = curve(xdu, yb_bar, od_b);
                defined(&rau, 0.0, xdu)?;
                defined(&rbu, xdu, 1.0)?;
                let au = (ya + 1.0 - yb_bar) / 2.0;
                let w = BoundaryLayer::new(au, xdu, 0.5, eps)?;
                vec![
                    piece(0.0, xdu, vec![cv(rau), lay(w), cst(-au)]),
                    piece(xdu, 1.0, vec![cv(rbu), lay(w), cst(-(1.0 - au))]),
                ]
            } else {
                let (dl, dl1, dla) = (get(free, "delta_l")?, get(free, "delta_l1")?, get(free, "d_omega_d_la")?);
                let od_b = if nine { od } else { od - get(free, "d_omega_d_lb")? };
                need(dla < od && od_b > 0.0, "Ω_D^{l,a}, Ω_D^{l,b} > 0")?;
                let xdl = xd + dl;
                need(xdl < 1.0, "x_d^l < 1")?;
                let (ra, rbv) = (an.rho_a.eval(xdl)?, an.rho_b.eval(xdl)?);
                need(ra + rbv < 2.0 * rb, "ρ^a(x_d^l) + ρ^b(x_d^l) < 2 r̄")?;
                let (ya, yb_bar) = (ra - dl1, rbv - dl1);
                need(ya + yb_bar > 1.0, "y_d^{l,a} + ȳ_d^{l,b} > 1")?;
                let ral = curve(xdl, ya, od - dla);
                let rbl = curve(xdl, yb_bar, od_b);
                defined(&ral, 0.0, xdl)?;
                defined(&rbl, xdl, 1.0)?;
                let al_ = (ya + 1.0 - yb_bar) / 2.0;
                let dl2 = ya - al_;
                let e = 1.0 - 0.9 * dl2 / (4.0 * (0.5 - al_));
                need(e > 0.0 && e < 1.0, "slowdown e in (0, 1)")?;
                let wa = BoundaryLayer::with_slowdown(al_, xdl, 0.5, eps, e)?;
                let wb = BoundaryLayer::new(al_, xdl, 0.5, eps)?;
                vec![
                    piece(0.0, xdl, vec![cv(ral), lay(wa), cst(-al_)]),
                    piece(xdl, 1.0, vec![cv(rbl), lay(wb), cst(-(1.0 - al_))]),
                ]
            }
        }
        _ => unreachable!(),
    })
}
