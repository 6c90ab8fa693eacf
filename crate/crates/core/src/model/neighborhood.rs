use super::{DensityProfile, PiecewiseLimitProfile};
use crate::error::{Error, Result};

/// Slack used for the strict inequalities of the membership test.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Smallest signed slack over the grid: positive means every grid point
/// sits strictly inside the Δ-neighborhood of ρ̂.
pub fn neighborhood_margin(profile: &DensityProfile, limit: &PiecewiseLimitProfile, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("delta = {delta} must be positive")));
    }
    let (a, b) = limit.domain;
    let mut margin = f64::INFINITY;
    for (&x, &v) in profile.grid().iter().zip(profile.values()) {
        if x < a || x > b {
            continue;
        }
        let (lo, hi) = limit.inf_sup(x - delta, x + delta);
        margin = margin.min(v - (lo - delta)).min((hi + delta) - v);
    }
    Ok(margin)
}

/// Membership ρ ∈ O(ρ̂, Δ) evaluated at the grid points of `profile`.
pub fn in_neighborhood(profile: &DensityProfile, limit: &PiecewiseLimitProfile, delta: f64) -> Result<bool> {
    Ok(neighborhood_margin(profile, limit, delta)? > -MEMBERSHIP_SLACK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Piece, PieceKind};
    use proptest::prelude::*;

    fn step() -> PiecewiseLimitProfile {
        PiecewiseLimitProfile::new(
            (0.0, 1.0),
            vec![
                Piece::new(0.0, 0.5, true, true, PieceKind::Constant { value: 0.2 }),
                Piece::new(0.5, 1.0, false, true, PieceKind::Constant { value: 0.8 }),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn sampled_limit_is_member() {
        let l = step();
        let p = DensityProfile::from_values(l.sample(200)).unwrap();
        assert!(in_neighborhood(&p, &l, 1e-3).unwrap());
    }

    #[test]
    fn shifted_constant_is_not_member() {
        let l = step();
        let d = 0.05;
        let p = DensityProfile::from_fn(200, |x| l.eval(x) + 2.0 * d).unwrap();
        assert!(!in_neighborhood(&p, &l, d).unwrap());
    }

    #[test]
    fn smeared_jump_is_member() {
        let l = step();
        let p = DensityProfile::from_fn(400, |x| 0.5 + 0.3 * ((x - 0.5) / 0.01).tanh()).unwrap();
        assert!(in_neighborhood(&p, &l, 0.05).unwrap());
        assert!(!in_neighborhood(&p, &l, 0.001).unwrap());
    }

    #[test]
    fn rejects_nonpositive_delta() {
        let l = step();
        let p = DensityProfile::from_values(l.sample(10)).unwrap();
        assert!(in_neighborhood(&p, &l, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_delta(noise in proptest::collection::vec(-0.2f64..0.2, 41), d1 in 0.01f64..0.2, extra in 0.0f64..0.2) {
            let l = step();
            let vals: Vec<f64> = (0..=40).map(|i| (l.eval(i as f64 / 40.0) + noise[i]).clamp(-0.1, 1.1)).collect();
            let p = DensityProfile::from_values(vals).unwrap();
            if in_neighborhood(&p, &l, d1).unwrap() {
                prop_assert!(in_neighborhood(&p, &l, d1 + extra).unwrap());
            }
        }

        #[test]
        fn sandwich_is_member(u in proptest::collection::vec(0.0f64..0.04, 41), w in proptest::collection::vec(0.0f64..1.0, 41)) {
            let l = step();
            let upper: Vec<f64> = (0..=40).map(|i| l.eval(i as f64 / 40.0) + u[i]).collect();
            let lower: Vec<f64> = (0..=40).map(|i| l.eval(i as f64 / 40.0) - u[40 - i]).collect();
            let mid: Vec<f64> = (0..=40).map(|i| lower[i] + w[i] * (upper[i] - lower[i])).collect();
            let pu = DensityProfile::from_values(upper).unwrap();
            let pl = DensityProfile::from_values(lower).unwrap();
            let pm = DensityProfile::from_values(mid).unwrap();
            let d = 0.05;
            prop_assert!(in_neighborhood(&pu, &l, d).unwrap() && in_neighborhood(&pl, &l, d).unwrap());
            prop_assert!(in_neighborhood(&pm, &l, d).unwrap());
        }
    }
}
