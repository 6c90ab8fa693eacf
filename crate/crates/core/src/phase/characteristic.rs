use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    BelowHalf,
    AboveHalf,
}

/// Solution of the limiting first-order equation
/// ρ' = (Ω_A + Ω_D)(ρ − r̄)/(2(ρ − 1/2)) through the anchor (x0, y0),
/// evaluated through its implicit first integral
/// G(ρ) = 2ρ/s + (2r̄ − 1)/s · ln|ρ − r̄| = x + C, with s = Ω_A + Ω_D.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicCurve {
    pub x0: f64,
    pub y0: f64,
    pub omega_a: f64,
    pub omega_d: f64,
    pub branch: Branch,
}

enum Shape {
    Constant,
    Affine(f64),
    Implicit,
}

impl CharacteristicCurve {
    /// Branch chosen from the anchor value; an anchor at 1/2 takes the upper branch.
    pub fn new(x0: f64, y0: f64, omega_a: f64, omega_d: f64) -> Self {
        let branch = if y0 < 0.5 { Branch::BelowHalf } else { Branch::AboveHalf };
        CharacteristicCurve { x0, y0, omega_a, omega_d, branch }
    }

    pub fn with_branch(x0: f64, y0: f64, omega_a: f64, omega_d: f64, branch: Branch) -> Self {
        CharacteristicCurve { x0, y0, omega_a, omega_d, branch }
    }

    pub fn from_k(x0: f64, y0: f64, omega_d: f64, k: f64) -> Self {
        Self::new(x0, y0, k * omega_d, omega_d)
    }

    fn s(&self) -> f64 {
        self.omega_a + self.omega_d
    }

    pub fn r_bar(&self) -> f64 {
        let s = self.s();
        if s == 0.0 {
            0.5
        } else {
            self.omega_a / s
        }
    }

    fn shape(&self) -> Shape {
        let s = self.s();
        if s == 0.0 || self.y0 == self.r_bar() && self.y0 != 0.5 {
            Shape::Constant
        } else if (self.omega_a - self.omega_d).abs() <= 1e-14 * s {
            Shape::Affine(s / 2.0)
        } else {
            Shape::Implicit
        }
    }

    /// The first integral G (defined up to a constant).
    pub fn g(&self, rho: f64) -> f64 {
        let s = self.s();
        let rb = self.r_bar();
        2.0 * rho / s + (2.0 * rb - 1.0) / s * (rho - rb).abs().ln()
    }

    /// Right-hand side f(ρ) of the limiting equation.
    pub fn slope_of(&self, rho: f64) -> f64 {
        match self.shape() {
            Shape::Constant => 0.0,
            Shape::Affine(m) => m,
            Shape::Implicit => self.s() * (rho - self.r_bar()) / (2.0 * (rho - 0.5)),
        }
    }

    /// f'(ρ), so that ρ'' = f'(ρ) f(ρ).
    pub fn dslope_of(&self, rho: f64) -> f64 {
        match self.shape() {
            Shape::Implicit => self.s() / 2.0 * (self.r_bar() - 0.5) / ((rho - 0.5) * (rho - 0.5)),
            _ => 0.0,
        }
    }

    /// Open ρ-interval swept by the branch through the anchor.
    fn rho_interval(&self) -> (f64, f64) {
        let rb = self.r_bar();
        let y = self.y0;
        match self.branch {
            Branch::BelowHalf => {
                if rb < 0.5 && y > rb {
                    (rb, 0.5)
                } else if rb < 0.5 {
                    (f64::NEG_INFINITY, rb)
                } else {
                    (f64::NEG_INFINITY, 0.5)
                }
            }
            Branch::AboveHalf => {
                if rb > 0.5 && y < rb {
                    (0.5, rb)
                } else if rb > 0.5 {
                    (rb, f64::INFINITY)
                } else {
                    (0.5, f64::INFINITY)
                }
            }
        }
    }

    /// Position where the curve reaches ρ = 1/2, if its branch ends there.
    pub fn singular_point(&self) -> Option<f64> {
        match self.shape() {
            Shape::Constant => (self.y0 == 0.5).then_some(self.x0),
            Shape::Affine(m) => Some(self.x0 + (0.5 - self.y0) / m),
            Shape::Implicit => {
                if self.y0 == 0.5 {
                    return Some(self.x0);
                }
                let (lo, hi) = self.rho_interval();
                (lo == 0.5 || hi == 0.5).then(|| self.x0 + self.g(0.5) - self.g(self.y0))
            }
        }
    }

    /// Like [`singular_point`](Self::singular_point) but errors if the branch is repelled from 1/2.
    pub fn singular_point_checked(&self) -> Result<f64> {
        self.singular_point()
            .ok_or_else(|| Error::Logic(format!("curve anchored at {} never reaches 0.5", self.y0)))
    }

    /// Validity interval in x (closed at a singular endpoint).
    pub fn validity(&self) -> (f64, f64) {
        match self.singular_point() {
            None => (f64::NEG_INFINITY, f64::INFINITY),
            Some(xs) if self.y0 == 0.5 => {
                // Anchored at the singular value: the branch leaves 1/2 in one direction only.
                let dir = self.direction_from_half();
                if dir > 0.0 {
                    (xs, f64::INFINITY)
                } else {
                    (f64::NEG_INFINITY, xs)
                }
            }
            Some(xs) if xs >= self.x0 => (f64::NEG_INFINITY, xs),
            Some(xs) => (xs, f64::INFINITY),
        }
    }

    /// For an anchor at 1/2: +1 if the branch exists for x > x0, −1 if for x < x0.
    fn direction_from_half(&self) -> f64 {
        let probe = match self.branch {
            Branch::AboveHalf => 0.5 + 1e-9,
            Branch::BelowHalf => 0.5 - 1e-9,
        };
        // moving away from 1/2 means dρ/dx has the sign of (probe − 1/2) when x increases
        let f = self.slope_of(probe);
        if (probe - 0.5) * f > 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (a, b) = self.validity();
        if x < a {
            return Err(Error::Range { x, boundary: a });
        }
        if x > b {
            return Err(Error::Range { x, boundary: b });
        }
        Ok(match self.shape() {
            Shape::Constant => self.y0,
            Shape::Affine(m) => self.y0 + m * (x - self.x0),
            Shape::Implicit => {
                if x == self.x0 {
                    self.y0
                } else if Some(x) == self.singular_point() {
                    0.5
                } else {
                    self.invert(self.g(self.y0) + (x - self.x0))
                }
            }
        })
    }

    /// Evaluation that saturates at 1/2 beyond the singular point (for round-off at piece ends).
    pub fn eval_clamped(&self, x: f64) -> f64 {
        let (a, b) = self.validity();
        self.eval(x.clamp(a, b)).unwrap_or(0.5)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        Ok(self.slope_of(self.eval(x)?))
    }

    /// Solves G(ρ) = target on the anchor's branch by bracketed bisection.
    fn invert(&self, target: f64) -> f64 {
        let (ilo, ihi) = self.rho_interval();
        let rb = self.r_bar();
        let h = |r: f64| self.g(r) - target;
        let y0 = if self.y0 == 0.5 {
            match self.branch {
                Branch::AboveHalf => 0.5 + 1e-15,
                Branch::BelowHalf => 0.5 - 1e-15,
            }
        } else {
            self.y0
        };
        let tiny = |v: f64| 4.0 * f64::EPSILON * v.abs().max(1.0);
        let inner = |end: f64, toward: f64| -> f64 {
            if end == rb && end != 0.5 {
                end + (toward - end).signum() * tiny(end)
            } else {
                end
            }
        };
        let h0 = h(y0);
        if h0 == 0.0 {
            return y0;
        }
        let mut other = f64::NAN;
        for &end in &[ilo, ihi] {
            let e = if end.is_finite() {
                inner(end, y0)
            } else {
                let mut step = 1.0_f64.max(y0.abs());
                let mut e = y0 + end.signum() * step;
                for _ in 0..200 {
                    if h(e).signum() != h0.signum() {
                        break;
                    }
                    step *= 2.0;
                    e = y0 + end.signum() * step;
                }
                e
            };
            if h(e).signum() != h0.signum() {
                other = e;
                break;
            }
        }
        if !other.is_finite() {
            // the root is closer to r̄ than round-off resolves
            return inner(rb, y0);
        }
        // Bisection: G is monotone on the bracket but logarithmically steep
        // near r̄, where Newton steps stall.
        let (mut a, mut b) = (y0, other);
        let ha = h0;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            let hm = h(m);
            if hm == 0.0 {
                return m;
            }
            if hm.signum() == ha.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    /// The curve of the hole-transformed rates through (1 − x0, 1 − y0).
    pub fn hole_transform(&self) -> CharacteristicCurve {
        CharacteristicCurve {
            x0: 1.0 - self.x0,
            y0: 1.0 - self.y0,
            omega_a: self.omega_d,
            omega_d: self.omega_a,
            branch: match self.branch {
                Branch::AboveHalf => Branch::BelowHalf,
                Branch::BelowHalf => Branch::AboveHalf,
            },
        }
    }
}

/// Infimum root of ρ^a + ρ^b − 1 on the common validity interval within [0,1].
pub fn domain_wall(curve_a: &CharacteristicCurve, curve_b: &CharacteristicCurve) -> Result<f64> {
    let affine = |c: &CharacteristicCurve| matches!(c.shape(), Shape::Affine(_) | Shape::Constant);
    if affine(curve_a) && affine(curve_b) {
        let (ma, mb) = (curve_a.slope_of(0.0), curve_b.slope_of(0.0));
        let c0 = curve_a.y0 - ma * curve_a.x0 + curve_b.y0 - mb * curve_b.x0 - 1.0;
        if ma + mb > 0.0 {
            return Ok(-c0 / (ma + mb));
        }
        return Err(Error::Classification("flat curves have no domain wall".into()));
    }
    let (va, vb) = (curve_a.validity(), curve_b.validity());
    let lo = va.0.max(vb.0).max(0.0);
    let hi = va.1.min(vb.1).min(1.0);
    if lo > hi {
        return Err(Error::Classification("curves share no validity interval".into()));
    }
    let g = |x: f64| curve_a.eval_clamped(x) + curve_b.eval_clamped(x) - 1.0;
    let n = 1000;
    let mut x_prev = lo;
    let mut g_prev = g(lo);
    if g_prev == 0.0 {
        return Ok(lo);
    }
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let gx = g(x);
        if gx.signum() != g_prev.signum() || gx == 0.0 {
            let (mut a, mut b) = (x_prev, x);
            let ga = g_prev;
            while b - a > 1e-13 {
                let m = 0.5 * (a + b);
                let gm = g(m);
                if gm.signum() == ga.signum() && gm != 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(0.5 * (a + b));
        }
        x_prev = x;
        g_prev = gx;
    }
    Err(Error::Classification("rho_a + rho_b - 1 has no sign change".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rk4(c: &CharacteristicCurve, x_end: f64, h: f64) -> f64 {
        let mut y = c.y0;
        let n = ((x_end - c.x0).abs() / h).round() as usize;
        let h = (x_end - c.x0) / n as f64;
        let f = |y: f64| c.slope_of(y);
        for _ in 0..n {
            let k1 = f(y);
            let k2 = f(y + 0.5 * h * k1);
            let k3 = f(y + 0.5 * h * k2);
            let k4 = f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        y
    }

    #[test]
    fn fixed_point_curve_is_constant() {
        let c = CharacteristicCurve::from_k(0.3, 2.0 / 3.0, 0.1, 2.0);
        for x in [-1.0, 0.0, 0.7, 5.0] {
            assert_eq!(c.eval(x).unwrap(), 2.0 / 3.0);
        }
    }

    #[test]
    fn special_case_is_affine() {
        let (beta, om) = (0.125, 0.25);
        let c = CharacteristicCurve::new(0.0, 1.0 - beta - om, om, om);
        for x in [0.0, 0.3, 0.9] {
            assert!((c.eval(x).unwrap() - (1.0 - beta - om + om * x)).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_backward_rk4() {
        let c = CharacteristicCurve::from_k(1.0, 0.726, 0.1, 2.0);
        let exact = c.eval(0.0).unwrap();
        let oracle = rk4(&c, 0.0, 1e-5);
        assert!((exact - oracle).abs() < 1e-8, "{exact} vs {oracle}");
    }

    #[test]
    fn first_integral_is_preserved() {
        let c = CharacteristicCurve::from_k(0.0, 0.1124, 0.1, 2.0);
        let c0 = c.g(c.y0) - c.x0;
        for i in 0..=20 {
            let x = i as f64 * 0.05;
            if x > c.validity().1 {
                break;
            }
            let r = c.eval(x).unwrap();
            assert!((c.g(r) - x - c0).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_points_special() {
        let a = CharacteristicCurve::new(0.0, 0.4583, 0.25, 0.25);
        assert!((a.singular_point().unwrap() - 0.1668).abs() < 1e-12);
        let b = CharacteristicCurve::new(1.0, 1.0 - 0.3333, 0.25, 0.25);
        assert!((b.singular_point().unwrap() - 0.3332).abs() < 1e-12);
        let h = CharacteristicCurve::from_k(0.4, 0.5, 0.1, 2.0);
        assert_eq!(h.singular_point(), Some(0.4));
    }

    #[test]
    fn range_error_beyond_singular_point() {
        let a = CharacteristicCurve::from_k(0.0, 0.3, 0.1, 2.0);
        let xp = a.singular_point().unwrap();
        assert!(xp > 0.0);
        assert_eq!(a.eval(xp).unwrap(), 0.5);
        match a.eval(xp + 0.1) {
            Err(Error::Range { boundary, .. }) => assert_eq!(boundary, xp),
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn repelled_branch_has_no_singular_point() {
        let c = CharacteristicCurve::from_k(0.0, 0.8, 0.1, 2.0);
        assert!(c.singular_point_checked().is_err());
    }

    #[test]
    fn rho_m_from_half_goes_left() {
        let m = CharacteristicCurve::with_branch(1.0, 0.5, 0.2, 0.1, Branch::AboveHalf);
        let v = m.validity();
        assert_eq!(v.1, 1.0);
        let y = m.eval(0.0).unwrap();
        assert!(y > 0.5 && y < 2.0 / 3.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let c = CharacteristicCurve::from_k(1.0, 0.9, 0.1, 2.0);
        for x in [0.1, 0.5, 0.9] {
            let h = 1e-6;
            let fd = (c.eval(x + h).unwrap() - c.eval(x - h).unwrap()) / (2.0 * h);
            assert!((fd - c.derivative(x).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn wall_closed_form_special() {
        let a = CharacteristicCurve::new(0.0, 0.25, 0.25, 0.25);
        let b = CharacteristicCurve::new(1.0, 0.875, 0.25, 0.25);
        assert!((domain_wall(&a, &b).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn wall_general_matches_scan() {
        let a = CharacteristicCurve::from_k(0.0, 0.1124, 0.1, 2.0);
        let b = CharacteristicCurve::from_k(1.0, 1.0 - 0.2740, 0.1, 2.0);
        let xd = domain_wall(&a, &b).unwrap();
        let g = |x: f64| a.eval_clamped(x) + b.eval_clamped(x) - 1.0;
        assert!(g(xd).abs() < 1e-10);
        // dense scan oracle for the first sign change
        let n = 200_000;
        let hi = a.validity().1.min(1.0);
        let first = (0..=n).map(|i| hi * i as f64 / n as f64).find(|&x| g(x) >= 0.0).unwrap();
        assert!((first - xd).abs() < 2.0 * hi / n as f64);
    }
}
