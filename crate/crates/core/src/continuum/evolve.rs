use serde::{Deserialize, Serialize};

use super::discretize::{n_cells_for, Flux, Operator};
use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::model::{DensityProfile, ModelParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Explicit,
    /// Linearly implicit: diffusion and reaction implicit, advection with
    /// the flux frozen as (1 − uⁿ)uⁿ⁺¹. Its fixed points are exactly the
    /// discrete steady states for every dt.
    #[default]
    Imex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeConfig {
    pub n_cells: usize,
    /// `None` selects the step automatically.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub scheme: Scheme,
    #[serde(default)]
    pub flux: Flux,
    /// Output times in (0, t_end]; t_end is always included.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

impl PdeConfig {
    pub fn for_params(params: &ModelParams, t_end: f64) -> Self {
        PdeConfig {
            n_cells: n_cells_for(params.epsilon),
            dt: None,
            t_end,
            scheme: Scheme::Imex,
            flux: Flux::Central,
            snapshot_times: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 16 {
            return Err(Error::Parameter(format!("n_cells = {} < 16", self.n_cells)));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Parameter("t_end must be positive".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::Parameter("dt must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub profile: DensityProfile,
}

fn explicit_dt(op: &Operator, u: &[f64]) -> f64 {
    let amax = u.iter().fold(0.0f64, |m, v| m.max((2.0 * v - 1.0).abs())).max(1e-12);
    let e = op.eps;
    0.4 * (op.h * op.h / (e * e)).min(op.h / (e * amax))
}

pub(crate) struct Stepper {
    op: Operator,
    scheme: Scheme,
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    rhs: Vec<f64>,
    r: Vec<f64>,
}

impl Stepper {
    pub fn new(op: Operator, n: usize, scheme: Scheme) -> Self {
        Stepper {
            op,
            scheme,
            sub: vec![0.0; n - 1],
            diag: vec![0.0; n - 1],
            sup: vec![0.0; n - 1],
            rhs: vec![0.0; n - 1],
            r: vec![0.0; n + 1],
        }
    }

    /// Largest stable step for the explicit scheme; `None` for IMEX.
    pub fn stable_dt(&self, u: &[f64]) -> Option<f64> {
        match self.scheme {
            Scheme::Explicit => Some(explicit_dt(&self.op, u)),
            Scheme::Imex => None,
        }
    }

    /// Advances u by dt in place (time variable of φ_t = ε Lφ).
    pub fn step(&mut self, u: &mut [f64], dt: f64) -> Result<()> {
        let n = u.len() - 1;
        let e = self.op.eps;
        match self.scheme {
            Scheme::Explicit => {
                self.op.residual(u, &mut self.r);
                for i in 1..n {
                    u[i] += dt * e * self.r[i];
                }
            }
            Scheme::Imex => {
                for i in 1..n {
                    let (cm, c0, cp) = self.op.frozen_row(u, i);
                    let k = i - 1;
                    self.sub[k] = -dt * e * cm;
                    self.diag[k] = 1.0 - dt * e * c0;
                    self.sup[k] = -dt * e * cp;
                    self.rhs[k] = u[i] + dt * e * self.op.omega_a;
                }
                self.rhs[0] -= self.sub[0] * u[0];
                self.rhs[n - 2] -= self.sup[n - 2] * u[n];
                let x = solve_tridiagonal(&self.sub, &self.diag, &self.sup, &self.rhs)
                    .ok_or_else(|| Error::solver("singular IMEX matrix", f64::NAN))?;
                u[1..n].copy_from_slice(&x);
            }
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::solver("non-finite value in time integration", f64::NAN));
        }
        Ok(())
    }
}

/// Integrates φ_t = ε Lφ from `sigma` and returns profiles at the requested times.
pub fn pde_evolve(params: &ModelParams, sigma: &DensityProfile, config: &PdeConfig) -> Result<Vec<Snapshot>> {
    params.validate()?;
    config.validate()?;
    let vals = sigma.values();
    if (vals[0] - params.alpha).abs() > 1e-12 || (vals[vals.len() - 1] - params.beta_bar()).abs() > 1e-12 {
        return Err(Error::Parameter("initial profile does not match the boundary data".into()));
    }
    let n = config.n_cells;
    let mut u = sigma.resample(n).values().to_vec();
    u[0] = params.alpha;
    u[n] = params.beta_bar();
    let op = Operator::new(params, n, config.flux);
    let mut stepper = Stepper::new(op, n, config.scheme);
    let auto_imex = (op.h / op.eps).min(1.0);

    let mut times: Vec<f64> = config.snapshot_times.iter().copied().filter(|&t| t > 0.0 && t < config.t_end).collect();
    times.push(config.t_end);
    times.sort_by(|a, b| a.total_cmp(b));
    times.dedup();

    let grid = DensityProfile::uniform_grid(n);
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    for &target in &times {
        while t < target {
            let mut dt = match config.scheme {
                Scheme::Imex => config.dt.unwrap_or(auto_imex),
                Scheme::Explicit => {
                    let stable = stepper.stable_dt(&u).unwrap();
                    config.dt.map_or(stable, |d| d.min(stable))
                }
            };
            if t + dt >= target * (1.0 - 1e-14) {
                dt = target - t;
            }
            stepper.step(&mut u, dt)?;
            t = if dt == target - t { target } else { t + dt };
        }
        out.push(Snapshot { t: target, profile: DensityProfile::from_parts_unchecked(grid.clone(), u.clone()) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sup_distance;

    #[test]
    fn relaxes_bump_to_half() {
        let p = ModelParams::special(0.5, 0.5, 0.25, 0.05).unwrap();
        let s = DensityProfile::from_fn(256, |x| 0.5 + 0.3 * (std::f64::consts::PI * x).sin()).unwrap();
        let mut cfg = PdeConfig::for_params(&p, 20.0 / p.epsilon);
        cfg.n_cells = 256;
        let snaps = pde_evolve(&p, &s, &cfg).unwrap();
        let end = &snaps.last().unwrap().profile;
        let half = DensityProfile::from_fn(256, |_| 0.5).unwrap();
        assert!(sup_distance(end, &half).unwrap() < 1e-4);
    }

    #[test]
    fn explicit_and_imex_agree_at_long_times() {
        let p = ModelParams::special(0.3, 0.2, 0.25, 0.1).unwrap();
        let s = DensityProfile::from_fn(64, |x| 0.3 + 0.5 * x).unwrap();
        let mut cfg = PdeConfig::for_params(&p, 400.0);
        cfg.n_cells = 64;
        let a = pde_evolve(&p, &s, &cfg).unwrap();
        cfg.scheme = Scheme::Explicit;
        let b = pde_evolve(&p, &s, &cfg).unwrap();
        assert!(sup_distance(&a[0].profile, &b[0].profile).unwrap() < 1e-6);
    }

    #[test]
    fn snapshots_at_requested_times() {
        let p = ModelParams::special(0.3, 0.2, 0.25, 0.1).unwrap();
        let s = DensityProfile::from_fn(32, |x| 0.3 + 0.5 * x).unwrap();
        let mut cfg = PdeConfig::for_params(&p, 2.0);
        cfg.n_cells = 32;
        cfg.snapshot_times = vec![0.5, 1.0, 5.0];
        let snaps = pde_evolve(&p, &s, &cfg).unwrap();
        let ts: Vec<f64> = snaps.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0.5, 1.0, 2.0]);
    }

    #[test]
    fn rejects_mismatched_boundary() {
        let p = ModelParams::special(0.3, 0.2, 0.25, 0.1).unwrap();
        let s = DensityProfile::from_fn(32, |_| 0.5).unwrap();
        assert!(pde_evolve(&p, &s, &PdeConfig::for_params(&p, 1.0)).is_err());
    }
}
