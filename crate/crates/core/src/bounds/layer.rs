use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BreakKind, Breakpoint, Piece, PieceKind, PiecewiseLimitProfile};

/// Solution of (ε/2) w' = −e (w − A)(w − Ā) through (x0, w0), with Ā = 1 − A.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLayer {
    pub a: f64,
    pub x0: f64,
    pub w0: f64,
    pub epsilon: f64,
    /// Slowdown factor e in (0, 1]; 1 gives the plain layer.
    pub slowdown: f64,
}

impl BoundaryLayer {
    pub fn new(a: f64, x0: f64, w0: f64, epsilon: f64) -> Result<Self> {
        Self::with_slowdown(a, x0, w0, epsilon, 1.0)
    }

    pub fn with_slowdown(a: f64, x0: f64, w0: f64, epsilon: f64, slowdown: f64) -> Result<Self> {
        if !(a.is_finite() && a <= 0.5) {
            return Err(Error::Parameter(format!("layer plateau A = {a} must satisfy A <= 1/2")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Parameter(format!("layer epsilon = {epsilon} must be positive")));
        }
        if !(slowdown > 0.0 && slowdown <= 1.0) {
            return Err(Error::Parameter(format!("slowdown e = {slowdown} must lie in (0, 1]")));
        }
        if !(x0.is_finite() && w0.is_finite()) {
            return Err(Error::Parameter("layer anchor must be finite".into()));
        }
        Ok(BoundaryLayer { a, x0, w0, epsilon, slowdown })
    }

    pub fn a_bar(&self) -> f64 {
        1.0 - self.a
    }

    fn k(&self) -> f64 {
        2.0 * self.slowdown / self.epsilon
    }

    fn d(&self) -> f64 {
        self.a_bar() - self.a
    }

    /// Open x-interval on which the solution stays finite.
    pub fn validity(&self) -> (f64, f64) {
        let (k, d) = (self.k(), self.d());
        let u0 = self.w0 - self.a;
        if d == 0.0 {
            if u0 == 0.0 {
                return (f64::NEG_INFINITY, f64::INFINITY);
            }
            let xs = self.x0 - 1.0 / (k * u0);
            return if u0 > 0.0 { (xs, f64::INFINITY) } else { (f64::NEG_INFINITY, xs) };
        }
        if self.w0 > self.a_bar() {
            let r = (self.w0 - self.a_bar()) / u0;
            (self.x0 + r.ln() / (k * d), f64::INFINITY)
        } else if self.w0 < self.a {
            let r = (self.w0 - self.a_bar()) / u0;
            (f64::NEG_INFINITY, self.x0 + r.ln() / (k * d))
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    }

    /// (w − A, w − Ā) computed without cancellation; NaN beyond blow-up.
    fn offsets(&self, x: f64) -> (f64, f64) {
        let (lo, hi) = self.validity();
        if !(x > lo && x < hi) && x != self.x0 {
            return (f64::NAN, f64::NAN);
        }
        let (k, d) = (self.k(), self.d());
        let u0 = self.w0 - self.a;
        if d == 0.0 {
            if u0 == 0.0 {
                return (0.0, 0.0);
            }
            let u = 1.0 / (k * (x - self.x0) + 1.0 / u0);
            return (u, u);
        }
        if self.w0 == self.a {
            return (0.0, -d);
        }
        if self.w0 == self.a_bar() {
            return (d, 0.0);
        }
        let r = (self.w0 - self.a_bar()) / u0;
        let z = k * d * (x - self.x0);
        if z >= 0.0 {
            let q = r * (-z).exp();
            let den = 1.0 - q;
            (d / den, d * q / den)
        } else {
            let ez = z.exp();
            let den = ez - r;
            (d * ez / den, d * r / den)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.a + self.offsets(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (u, v) = self.offsets(x);
        -self.k() * u * v
    }

    /// (w, w', w''), using w'' = −k (2w − 1) w'.
    pub fn jet(&self, x: f64) -> (f64, f64, f64) {
        let (u, v) = self.offsets(x);
        let w = self.a + u;
        let k = self.k();
        let w1 = -k * u * v;
        // 2w − 1 = u + v since A + Ā = 1
        (w, w1, -k * (u + v) * w1)
    }

    /// Three-case ε→0 limit ŵ.
    pub fn limit(&self) -> Result<PiecewiseLimitProfile> {
        let (a, ab, x0, w0) = (self.a, self.a_bar(), self.x0, self.w0);
        let cst = |value: f64| PieceKind::Constant { value };
        let mut bps = Vec::new();
        if w0 >= ab {
            let hi = x0.max(1.0);
            if w0 != ab {
                bps.push(Breakpoint { x: x0, kind: BreakKind::Layer });
            }
            let pieces = vec![Piece::point(x0, w0), Piece::new(x0, hi, false, true, cst(ab))];
            PiecewiseLimitProfile::new((x0, hi), pieces, bps)
        } else if w0 <= a {
            let lo = x0.min(0.0);
            if w0 != a {
                bps.push(Breakpoint { x: x0, kind: BreakKind::Layer });
            }
            let pieces = vec![Piece::new(lo, x0, true, false, cst(a)), Piece::point(x0, w0)];
            PiecewiseLimitProfile::new((lo, x0), pieces, bps)
        } else {
            let (lo, hi) = (x0.min(0.0), x0.max(1.0));
            bps.push(Breakpoint { x: x0, kind: BreakKind::Layer });
            let pieces = vec![
                Piece::new(lo, x0, true, false, cst(a)),
                Piece::point(x0, w0),
                Piece::new(x0, hi, false, true, cst(ab)),
            ];
            PiecewiseLimitProfile::new((lo, hi), pieces, bps)
        }
    }
}

/// Closed-form w at x; a range error past the blow-up point of an
/// outside-the-plateaus anchor.
pub fn w_closed_form(layer: &BoundaryLayer, x: f64) -> Result<f64> {
    let (lo, hi) = layer.validity();
    if x <= lo {
        return Err(Error::Range { x, boundary: lo });
    }
    if x >= hi {
        return Err(Error::Range { x, boundary: hi });
    }
    Ok(layer.eval(x))
}

pub fn w_limit(layer: &BoundaryLayer) -> Result<PiecewiseLimitProfile> {
    layer.limit()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{in_neighborhood, DensityProfile};
    use proptest::prelude::*;

    fn rk4(layer: &BoundaryLayer, x_end: f64, h: f64) -> f64 {
        let f = |w: f64| -2.0 * layer.slowdown / layer.epsilon * (w - layer.a) * (w - layer.a_bar());
        let n = ((x_end - layer.x0).abs() / h).round() as usize;
        let h = (x_end - layer.x0) / n as f64;
        let mut w = layer.w0;
        for _ in 0..n {
            let k1 = f(w);
            let k2 = f(w + 0.5 * h * k1);
            let k3 = f(w + 0.5 * h * k2);
            let k4 = f(w + h * k3);
            w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        w
    }

    #[test]
    fn matches_rk4_reference() {
        let l = BoundaryLayer::new(0.25, 0.5, 0.5, 0.05).unwrap();
        for x in [0.4, 0.6] {
            assert!((l.eval(x) - rk4(&l, x, 1e-6)).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn matches_rk4_outside_plateaus_and_slowed() {
        let cases = [
            BoundaryLayer::new(0.3, 0.0, 0.9, 0.02).unwrap(),
            BoundaryLayer::new(0.3, 1.0, 0.1, 0.02).unwrap(),
            BoundaryLayer::with_slowdown(0.2, 0.4, 0.5, 0.05, 0.7).unwrap(),
            BoundaryLayer::new(0.5, 0.0, 0.8, 0.1).unwrap(),
        ];
        for l in cases {
            for x in [0.0, 0.05, 0.3, 0.7, 1.0] {
                let (lo, hi) = l.validity();
                if x <= lo || x >= hi {
                    continue;
                }
                let e = (l.eval(x) - rk4(&l, x, 1e-5)).abs();
                assert!(e < 1e-8, "{l:?} at {x}: {e}");
            }
        }
    }

    #[test]
    fn equilibria_and_anchor() {
        let l = BoundaryLayer::new(0.2, 0.3, 0.8, 0.01).unwrap();
        assert_eq!(l.eval(0.9), 0.8);
        assert_eq!(l.derivative(0.1), 0.0);
        let m = BoundaryLayer::new(0.2, 0.3, 0.45, 0.01).unwrap();
        assert!((m.eval(0.3) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn blow_up_is_reported() {
        let l = BoundaryLayer::new(0.3, 1.0, 0.1, 0.02).unwrap();
        let (_, hi) = l.validity();
        assert!(hi > 1.0);
        assert!(matches!(w_closed_form(&l, hi + 0.1), Err(Error::Range { .. })));
        assert!(w_closed_form(&l, 0.5).is_ok());
    }

    #[test]
    fn limit_cases() {
        let mid = BoundaryLayer::new(0.25, 0.5, 0.5, 1e-4).unwrap();
        let lim = w_limit(&mid).unwrap();
        assert_eq!(lim.eval(0.2), 0.25);
        assert_eq!(lim.eval(0.8), 0.75);
        assert_eq!(lim.breakpoints.len(), 1);
        for l in [
            mid,
            BoundaryLayer::new(0.25, 0.0, 0.9, 1e-4).unwrap(),
            BoundaryLayer::new(0.25, 1.0, 0.1, 1e-4).unwrap(),
            BoundaryLayer::new(0.3, 0.0, 0.7, 1e-4).unwrap(),
        ] {
            let lim = w_limit(&l).unwrap();
            let p = DensityProfile::from_fn(2000, |x| l.eval(x)).unwrap();
            assert!(in_neighborhood(&p, &lim, 0.02).unwrap(), "{l:?}");
        }
        let eq = BoundaryLayer::new(0.3, 0.0, 0.7, 1e-4).unwrap();
        assert!(w_limit(&eq).unwrap().breakpoints.is_empty());
    }

    proptest! {
        #[test]
        fn satisfies_its_ode(a in 0.0f64..0.5, w0 in 0.0f64..1.0, eps in 0.005f64..0.2, x in 0.0f64..1.0) {
            let l = BoundaryLayer::new(a, 0.5, w0, eps).unwrap();
            let (lo, hi) = l.validity();
            let h = 1e-6;
            prop_assume!(x - h > lo && x + h < hi);
            let fd = (l.eval(x + h) - l.eval(x - h)) / (2.0 * h);
            let w = l.eval(x);
            prop_assume!((-1.0..=2.0).contains(&w));
            let rhs = -2.0 / eps * (w - a) * (w - (1.0 - a));
            prop_assert!((fd - rhs).abs() <= 1e-6 / eps * (1.0 + rhs.abs()), "fd {} rhs {}", fd, rhs);
        }

        #[test]
        fn monotone_between_and_above(a in 0.0f64..0.49, t in 0.01f64..0.99, above in 0.0f64..0.5, x in -1.0f64..2.0) {
            let ab = 1.0 - a;
            let inside = BoundaryLayer::new(a, 0.5, a + t * (ab - a), 0.05).unwrap();
            prop_assert!(inside.derivative(x) >= 0.0);
            let w = inside.eval(x);
            prop_assert!(w >= a - 1e-15 && w <= ab + 1e-15);
            let high = BoundaryLayer::new(a, 0.5, ab + above + 1e-3, 0.05).unwrap();
            if x > high.validity().0 {
                prop_assert!(high.derivative(x) <= 0.0);
                prop_assert!(high.eval(x) >= ab - 1e-15);
            }
        }
    }
}
