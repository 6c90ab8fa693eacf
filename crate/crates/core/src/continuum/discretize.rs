use serde::{Deserialize, Serialize};

use crate::model::{DensityProfile, ModelParams};

/// Interface flux for the conservative advection term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flux {
    /// Second-order central flux; monotone while the cell Péclet number h/ε stays below 1.
    #[default]
    Central,
    /// Local Lax–Friedrichs.
    Llf,
}

/// Grid rule n = max(256, ⌈20/ε⌉), i.e. at least ten cells per layer of width ε/2.
pub fn n_cells_for(epsilon: f64) -> usize {
    256usize.max((20.0 / epsilon).ceil() as usize)
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Operator {
    pub eps: f64,
    pub omega_a: f64,
    pub omega_d: f64,
    pub h: f64,
    pub flux: Flux,
}

#[inline]
fn g(u: f64) -> f64 {
    u - u * u
}

impl Operator {
    pub fn new(params: &ModelParams, n_cells: usize, flux: Flux) -> Self {
        Operator {
            eps: params.epsilon,
            omega_a: params.omega_a,
            omega_d: params.omega_d,
            h: 1.0 / n_cells as f64,
            flux,
        }
    }

    #[inline]
    fn speed(&self, ul: f64, ur: f64) -> f64 {
        match self.flux {
            Flux::Central => 0.0,
            Flux::Llf => (1.0 - 2.0 * ul).abs().max((1.0 - 2.0 * ur).abs()),
        }
    }

    /// Numerical flux of g(u) = u − u² at the interface between `ul` and `ur`.
    #[inline]
    fn interface(&self, ul: f64, ur: f64) -> f64 {
        0.5 * (g(ul) + g(ur)) - 0.5 * self.speed(ul, ur) * (ur - ul)
    }

    /// (∂/∂ul, ∂/∂ur) of the interface flux.
    #[inline]
    fn interface_grad(&self, ul: f64, ur: f64) -> (f64, f64) {
        let (gl, gr) = (0.5 * (1.0 - 2.0 * ul), 0.5 * (1.0 - 2.0 * ur));
        match self.flux {
            Flux::Central => (gl, gr),
            Flux::Llf => {
                let (al, ar) = ((1.0 - 2.0 * ul).abs(), (1.0 - 2.0 * ur).abs());
                let s = al.max(ar);
                let jump = ur - ul;
                let (dsl, dsr) = if al >= ar {
                    (-2.0 * (1.0 - 2.0 * ul).signum(), 0.0)
                } else {
                    (0.0, -2.0 * (1.0 - 2.0 * ur).signum())
                };
                (gl + 0.5 * s - 0.5 * dsl * jump, gr - 0.5 * s - 0.5 * dsr * jump)
            }
        }
    }

    /// Discrete Lu at interior nodes; boundary entries are set to zero.
    pub fn residual(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len() - 1;
        let d = self.eps / (2.0 * self.h * self.h);
        let s = self.omega_a + self.omega_d;
        out[0] = 0.0;
        out[n] = 0.0;
        let mut f_left = self.interface(u[0], u[1]);
        for i in 1..n {
            let f_right = self.interface(u[i], u[i + 1]);
            out[i] = d * (u[i + 1] - 2.0 * u[i] + u[i - 1]) - (f_right - f_left) / self.h + self.omega_a
                - s * u[i];
            f_left = f_right;
        }
    }

    /// Tridiagonal Jacobian of [`residual`](Self::residual) for interior rows 1..n-1,
    /// stored at indices 0..n-2.
    pub fn jacobian(&self, u: &[f64], sub: &mut [f64], diag: &mut [f64], sup: &mut [f64]) {
        let n = u.len() - 1;
        let d = self.eps / (2.0 * self.h * self.h);
        let s = self.omega_a + self.omega_d;
        for i in 1..n {
            let (dm_l, dm_r) = self.interface_grad(u[i - 1], u[i]);
            let (dp_l, dp_r) = self.interface_grad(u[i], u[i + 1]);
            let k = i - 1;
            sub[k] = d + dm_l / self.h;
            sup[k] = d - dp_r / self.h;
            diag[k] = -2.0 * d - (dp_l - dm_r) / self.h - s;
        }
    }

    /// Coefficients (c_{i-1}, c_i, c_{i+1}) of the operator with the
    /// advection flux frozen as g(u) ≈ (1 − uⁿ)u and the Lax–Friedrichs speed
    /// frozen at uⁿ; the constant term is Ω_A.
    pub fn frozen_row(&self, un: &[f64], i: usize) -> (f64, f64, f64) {
        let d = self.eps / (2.0 * self.h * self.h);
        let sp = self.speed(un[i], un[i + 1]);
        let sm = self.speed(un[i - 1], un[i]);
        let cm = d + (0.5 * (1.0 - un[i - 1]) + 0.5 * sm) / self.h;
        let cp = d - (0.5 * (1.0 - un[i + 1]) - 0.5 * sp) / self.h;
        let c0 = -2.0 * d - 0.5 * (sp + sm) / self.h - (self.omega_a + self.omega_d);
        (cm, c0, cp)
    }
}

/// Sup-norm of the discrete Lρ over interior nodes (central flux).
pub fn steady_residual(profile: &DensityProfile, params: &ModelParams) -> f64 {
    steady_residual_with(profile, params, Flux::Central)
}

pub fn steady_residual_with(profile: &DensityProfile, params: &ModelParams, flux: Flux) -> f64 {
    let u = profile.values();
    let op = Operator::new(params, profile.n_cells(), flux);
    let mut r = vec![0.0; u.len()];
    op.residual(u, &mut r);
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_jacobian(flux: Flux) {
        let p = ModelParams::general(0.2, 0.3, 0.2, 2.0, 0.05).unwrap();
        let n = 24;
        let u: Vec<f64> = (0..=n).map(|i| 0.2 + 0.5 * (i as f64 / n as f64) + 0.05 * (7.0 * i as f64).sin()).collect();
        let op = Operator::new(&p, n, flux);
        let (mut a, mut b, mut c) = (vec![0.0; n - 1], vec![0.0; n - 1], vec![0.0; n - 1]);
        op.jacobian(&u, &mut a, &mut b, &mut c);
        let mut r0 = vec![0.0; n + 1];
        let mut r1 = vec![0.0; n + 1];
        let hh = 1e-7;
        for j in 1..n {
            let mut v = u.clone();
            v[j] += hh;
            op.residual(&v, &mut r1);
            v[j] -= 2.0 * hh;
            op.residual(&v, &mut r0);
            for i in 1..n {
                let fd = (r1[i] - r0[i]) / (2.0 * hh);
                let exact = if i == j {
                    b[i - 1]
                } else if i + 1 == j {
                    c[i - 1]
                } else if j + 1 == i {
                    a[i - 1]
                } else {
                    0.0
                };
                assert!((fd - exact).abs() < 1e-4 * (1.0 + exact.abs()), "{flux:?} i={i} j={j} {fd} {exact}");
            }
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        check_jacobian(Flux::Central);
        check_jacobian(Flux::Llf);
    }

    #[test]
    fn half_profile_has_zero_residual() {
        let p = ModelParams::special(0.5, 0.5, 0.25, 0.1).unwrap();
        let r = DensityProfile::from_fn(64, |_| 0.5).unwrap();
        assert!(steady_residual(&r, &p) < 1e-14);
        assert!(steady_residual_with(&r, &p, Flux::Llf) < 1e-14);
    }

    #[test]
    fn frozen_operator_agrees_at_fixed_point() {
        let p = ModelParams::general(0.2, 0.3, 0.2, 2.0, 0.05).unwrap();
        let n = 16;
        let u: Vec<f64> = (0..=n).map(|i| 0.2 + 0.5 * (i as f64 / n as f64).powi(2)).collect();
        for flux in [Flux::Central, Flux::Llf] {
            let op = Operator::new(&p, n, flux);
            let mut r = vec![0.0; n + 1];
            op.residual(&u, &mut r);
            for i in 1..n {
                let (cm, c0, cp) = op.frozen_row(&u, i);
                let lin = cm * u[i - 1] + c0 * u[i] + cp * u[i + 1] + p.omega_a;
                assert!((lin - r[i]).abs() < 1e-9 * (1.0 + r[i].abs()));
            }
        }
    }

    #[test]
    fn grid_rule() {
        assert_eq!(n_cells_for(0.1), 256);
        assert_eq!(n_cells_for(0.01), 2000);
    }
}
