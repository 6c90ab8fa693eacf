use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::model::{DensityProfile, ModelParams, Tolerance};

/// Bulk densities φ₁..φ_N at time `time`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub phi: Vec<f64>,
    pub time: f64,
}

fn rates(params: &ModelParams) -> (f64, f64) {
    (params.epsilon * params.omega_a, params.epsilon * params.omega_d)
}

fn rhs_into(phi: &[f64], a: f64, bb: f64, wa: f64, wd: f64, out: &mut [f64]) {
    let n = phi.len();
    for i in 0..n {
        let left = if i == 0 { a } else { phi[i - 1] };
        let right = if i + 1 == n { bb } else { phi[i + 1] };
        let p = phi[i];
        out[i] = left * (1.0 - p) - p * (1.0 - right) + wa * (1.0 - p) - wd * p;
    }
}

/// dφᵢ/dt = φᵢ₋₁(1−φᵢ) − φᵢ(1−φᵢ₊₁) + ω_A(1−φᵢ) − ω_Dφᵢ with φ₀ = α, φ_{N+1} = 1−β.
pub fn meanfield_rhs(state: &MeanFieldState, params: &ModelParams) -> Vec<f64> {
    let (wa, wd) = rates(params);
    let mut out = vec![0.0; state.phi.len()];
    rhs_into(&state.phi, params.alpha, params.beta_bar(), wa, wd, &mut out);
    out
}

fn check_sites(params: &ModelParams) -> Result<usize> {
    params.validate()?;
    let n = params.n_sites();
    if n < 1 {
        return Err(Error::Parameter("lattice needs N >= 1".into()));
    }
    Ok(n)
}

fn to_profile(params: &ModelParams, phi: &[f64]) -> Result<DensityProfile> {
    let mut v = Vec::with_capacity(phi.len() + 2);
    v.push(params.alpha);
    v.extend_from_slice(phi);
    v.push(params.beta_bar());
    DensityProfile::from_values(v)
}

/// RK4 with dt = min(0.1, 0.5/(2 + ω_A + ω_D)); densities must stay in [0,1].
pub fn meanfield_integrate(params: &ModelParams, state: &MeanFieldState, t_end: f64) -> Result<MeanFieldState> {
    let n = check_sites(params)?;
    if state.phi.len() != n {
        return Err(Error::Structure(format!("state has {} sites, params imply {n}", state.phi.len())));
    }
    let (wa, wd) = rates(params);
    let (a, bb) = (params.alpha, params.beta_bar());
    let dt0 = 0.1f64.min(0.5 / (2.0 + wa + wd));
    let mut phi = state.phi.clone();
    let mut t = state.time;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    while t < t_end {
        let dt = dt0.min(t_end - t);
        rhs_into(&phi, a, bb, wa, wd, &mut k1);
        for i in 0..n {
            tmp[i] = phi[i] + 0.5 * dt * k1[i];
        }
        rhs_into(&tmp, a, bb, wa, wd, &mut k2);
        for i in 0..n {
            tmp[i] = phi[i] + 0.5 * dt * k2[i];
        }
        rhs_into(&tmp, a, bb, wa, wd, &mut k3);
        for i in 0..n {
            tmp[i] = phi[i] + dt * k3[i];
        }
        rhs_into(&tmp, a, bb, wa, wd, &mut k4);
        for i in 0..n {
            phi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if !(phi[i] >= -1e-12 && phi[i] <= 1.0 + 1e-12) {
                return Err(Error::solver(format!("site {} left [0,1]: {}", i + 1, phi[i]), phi[i]));
            }
        }
        t += dt;
    }
    Ok(MeanFieldState { phi, time: t })
}

/// Residual and tridiagonal Jacobian of the steady mean-field equations.
fn jacobian(phi: &[f64], a: f64, bb: f64, wa: f64, wd: f64, sub: &mut [f64], diag: &mut [f64], sup: &mut [f64]) {
    let n = phi.len();
    for i in 0..n {
        let left = if i == 0 { a } else { phi[i - 1] };
        let right = if i + 1 == n { bb } else { phi[i + 1] };
        sub[i] = 1.0 - phi[i];
        sup[i] = phi[i];
        diag[i] = -left - (1.0 - right) - wa - wd;
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Steady state of the mean-field lattice by damped Newton, with
/// pseudo-transient continuation as fallback.
pub fn meanfield_steady(params: &ModelParams, tol: &Tolerance) -> Result<DensityProfile> {
    let n = check_sites(params)?;
    tol.validate()?;
    let (wa, wd) = rates(params);
    let (a, bb) = (params.alpha, params.beta_bar());
    let mut phi: Vec<f64> = (1..=n).map(|i| a + (bb - a) * i as f64 / (n + 1) as f64).collect();
    let (mut s, mut d, mut u) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut r = vec![0.0; n];
    let mut rt = vec![0.0; n];
    let mut trial = phi.clone();
    rhs_into(&phi, a, bb, wa, wd, &mut r);
    let mut res = sup_norm(&r);
    let mut converged = res < tol.eps_resid;
    for _ in 0..100 {
        if converged {
            break;
        }
        jacobian(&phi, a, bb, wa, wd, &mut s, &mut d, &mut u);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let Some(delta) = solve_tridiagonal(&s, &d, &u, &rhs) else { break };
        let mut lam = 1.0;
        let mut ok = false;
        while lam > 1e-4 {
            for i in 0..n {
                trial[i] = phi[i] + lam * delta[i];
            }
            rhs_into(&trial, a, bb, wa, wd, &mut rt);
            let rn = sup_norm(&rt);
            if rn < (1.0 - 1e-4 * lam) * res {
                phi.copy_from_slice(&trial);
                r.copy_from_slice(&rt);
                res = rn;
                ok = true;
                break;
            }
            lam *= 0.5;
        }
        if !ok {
            break;
        }
        converged = res < tol.eps_resid;
    }
    if !converged {
        // Pseudo-transient continuation: implicit Euler with growing steps.
        let mut dt = 1.0;
        for _ in 0..5000 {
            jacobian(&phi, a, bb, wa, wd, &mut s, &mut d, &mut u);
            let (ms, md, mu): (Vec<f64>, Vec<f64>, Vec<f64>) = (
                s.iter().map(|v| -v).collect(),
                d.iter().map(|v| 1.0 / dt - v).collect(),
                u.iter().map(|v| -v).collect(),
            );
            let Some(delta) = solve_tridiagonal(&ms, &md, &mu, &r) else { break };
            for i in 0..n {
                phi[i] = (phi[i] + delta[i]).clamp(0.0, 1.0);
            }
            rhs_into(&phi, a, bb, wa, wd, &mut r);
            res = sup_norm(&r);
            if res < tol.eps_resid {
                converged = true;
                break;
            }
            dt = (dt * 1.5).min(1e12);
        }
    }
    if !converged {
        return Err(Error::solver("mean-field Newton did not converge", res));
    }
    to_profile(params, &phi)
}
