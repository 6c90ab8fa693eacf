use serde::{Deserialize, Serialize};

use super::discretize::{n_cells_for, Flux, Operator};
use super::evolve::{Scheme, Stepper};
use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::model::{DensityProfile, ModelParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyConfig {
    pub continuation_eps_start: f64,
    /// Number of geometric continuation steps; 0 picks a ratio of about 1.3.
    pub continuation_steps: usize,
    pub newton_max_iter: usize,
    pub damping_min: f64,
    /// Grid size; `None` applies [`n_cells_for`].
    pub n_cells: Option<usize>,
    pub flux: Flux,
    pub tol: f64,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        SteadyConfig {
            continuation_eps_start: 0.2,
            continuation_steps: 0,
            newton_max_iter: 60,
            damping_min: 1.0 / 1024.0,
            n_cells: None,
            flux: Flux::Central,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepTelemetry {
    pub epsilon: f64,
    pub iterations: usize,
    pub residual: f64,
    pub min_damping: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SteadyTelemetry {
    pub n_cells: usize,
    pub steps: Vec<StepTelemetry>,
    pub used_time_marching: bool,
    pub final_residual: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Round-off floor of the discrete operator: the second difference carries
/// errors of order ε/h² times machine epsilon.
fn residual_floor(op: &Operator) -> f64 {
    64.0 * f64::EPSILON * (op.eps / (op.h * op.h) + 1.0 / op.h)
}

/// Damped Newton on the interior unknowns; `u` holds the boundary values.
fn newton(op: &Operator, u: &mut [f64], cfg: &SteadyConfig) -> StepTelemetry {
    let n = u.len() - 1;
    let m = n - 1;
    let (mut a, mut b, mut c) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut r = vec![0.0; n + 1];
    let mut trial = u.to_vec();
    let mut rt = vec![0.0; n + 1];
    op.residual(u, &mut r);
    let mut res = sup(&r);
    let tol = cfg.tol.max(residual_floor(op));
    let mut min_damp = 1.0f64;
    let mut it = 0;
    while it < cfg.newton_max_iter && res > tol {
        it += 1;
        op.jacobian(u, &mut a, &mut b, &mut c);
        let rhs: Vec<f64> = r[1..n].iter().map(|v| -v).collect();
        let Some(delta) = solve_tridiagonal(&a, &b, &c, &rhs) else { break };
        let mut lam = 1.0;
        let mut accepted = false;
        while lam >= cfg.damping_min {
            for i in 1..n {
                trial[i] = u[i] + lam * delta[i - 1];
            }
            op.residual(&trial, &mut rt);
            let rn = sup(&rt);
            if rn.is_finite() && rn < (1.0 - 1e-4 * lam) * res {
                u.copy_from_slice(&trial);
                r.copy_from_slice(&rt);
                res = rn;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        min_damp = min_damp.min(lam);
        if !accepted {
            // accept a full step anyway once the update is at round-off level
            if sup(&delta) < 1e-13 {
                break;
            }
            return StepTelemetry { epsilon: op.eps, iterations: it, residual: res, min_damping: lam, converged: false };
        }
    }
    StepTelemetry { epsilon: op.eps, iterations: it, residual: res, min_damping: min_damp, converged: res <= tol }
}

/// Pseudo-time marching with the linearly implicit scheme, whose fixed
/// points are the discrete steady states.
fn time_march(op: &Operator, u: &mut [f64]) -> Result<()> {
    let n = u.len() - 1;
    let mut stepper = Stepper::new(*op, n, Scheme::Imex);
    let mut dt = op.h / op.eps;
    let mut prev = u.to_vec();
    for _ in 0..200_000 {
        stepper.step(u, dt)?;
        let change = u.iter().zip(&prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if change < 1e-13 {
            return Ok(());
        }
        prev.copy_from_slice(u);
        dt = (dt * 1.05).min(10.0 / op.eps);
    }
    Err(Error::solver("pseudo-time marching did not settle", f64::NAN))
}

pub fn steady_solve(params: &ModelParams, config: &SteadyConfig) -> Result<DensityProfile> {
    steady_solve_with_telemetry(params, config).map(|(p, _)| p)
}

/// Solves Lρ = 0 by damped Newton with continuation in ε, falling back to
/// pseudo-time marching.
pub fn steady_solve_with_telemetry(params: &ModelParams, config: &SteadyConfig) -> Result<(DensityProfile, SteadyTelemetry)> {
    params.validate()?;
    if config.continuation_eps_start < params.epsilon && config.continuation_steps > 0 {
        return Err(Error::Parameter("continuation must start at or above the target epsilon".into()));
    }
    let n = config.n_cells.unwrap_or_else(|| n_cells_for(params.epsilon));
    if n < 16 {
        return Err(Error::Parameter(format!("n_cells = {n} < 16")));
    }
    let target = params.epsilon;
    let e0 = config.continuation_eps_start.max(target);
    let steps = if config.continuation_steps > 0 {
        config.continuation_steps
    } else {
        ((e0 / target).ln() / 1.3f64.ln()).ceil().max(1.0) as usize
    };
    let schedule: Vec<f64> = (0..=steps)
        .map(|k| if k == steps { target } else { e0 * (target / e0).powf(k as f64 / steps as f64) })
        .collect();

    let (a, bb) = (params.alpha, params.beta_bar());
    let mut u: Vec<f64> = (0..=n).map(|i| a + (bb - a) * i as f64 / n as f64).collect();
    let mut tele = SteadyTelemetry { n_cells: n, ..Default::default() };
    let mut fallback = false;

    // Continuation; a failed step is retried through a geometric midpoint.
    let mut current = schedule[0];
    let mut first = true;
    let mut queue: Vec<f64> = schedule.iter().rev().copied().collect();
    let mut depth = 0;
    while let Some(eps) = queue.pop() {
        let op = Operator::new(&params.with_epsilon(eps), n, config.flux);
        let mut trial = u.clone();
        let st = newton(&op, &mut trial, config);
        let ok = st.converged;
        tele.steps.push(st);
        if ok {
            u = trial;
            current = eps;
            first = false;
            depth = 0;
        } else if !first && depth < 8 {
            depth += 1;
            queue.push(eps);
            queue.push((current * eps).sqrt());
        } else {
            fallback = true;
            break;
        }
    }
    let op = Operator::new(params, n, config.flux);
    if fallback || current != target {
        tele.used_time_marching = true;
        time_march(&op, &mut u)?;
        let st = newton(&op, &mut u, config);
        let ok = st.converged;
        tele.steps.push(st);
        if !ok {
            let res = tele.steps.last().map_or(f64::NAN, |s| s.residual);
            return Err(Error::solver("steady solve failed after time marching", res));
        }
    }
    let mut r = vec![0.0; n + 1];
    op.residual(&u, &mut r);
    tele.final_residual = sup(&r);
    if u.iter().any(|v| !v.is_finite() || *v < -0.1 || *v > 1.1) {
        return Err(Error::solver("steady iterate left the physical range", tele.final_residual));
    }
    let profile = DensityProfile::new(DensityProfile::uniform_grid(n), u)?;
    Ok((profile, tele))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::{pde_evolve, steady_residual, PdeConfig};
    use crate::model::sup_distance;

    #[test]
    fn half_state_is_exact() {
        let p = ModelParams::special(0.5, 0.5, 0.25, 0.1).unwrap();
        let (r, t) = steady_solve_with_telemetry(&p, &SteadyConfig::default()).unwrap();
        assert!(r.values().iter().all(|v| (v - 0.5).abs() < 1e-14));
        assert!(t.final_residual < 1e-12);
    }

    #[test]
    fn phase1_profile_shape() {
        let p = ModelParams::special(0.25, 0.125, 0.25, 0.01).unwrap();
        let (r, t) = steady_solve_with_telemetry(&p, &SteadyConfig::default()).unwrap();
        assert!(t.final_residual < 1e-8, "{}", t.final_residual);
        assert_eq!(r.values()[0], 0.25);
        assert_eq!(*r.values().last().unwrap(), 0.875);
        let l = crate::phase::limit_profile(&p).unwrap();
        assert!(crate::model::in_neighborhood(&r, &l, 0.05).unwrap());
        assert!(steady_residual(&r, &p) < 1e-8);
    }

    #[test]
    fn agrees_with_long_time_evolution() {
        let p = ModelParams::general(0.42, 0.1, 0.1, 2.0, 0.05).unwrap();
        let r = steady_solve(&p, &SteadyConfig::default()).unwrap();
        let s = DensityProfile::from_fn(r.n_cells(), |x| 0.42 + (0.9 - 0.42) * x).unwrap();
        let snaps = pde_evolve(&p, &s, &PdeConfig::for_params(&p, 100.0 / p.epsilon)).unwrap();
        assert!(sup_distance(&snaps[0].profile, &r).unwrap() < 1e-6);
    }
}
