//! Scenario config: one flat JSON object. Flags override keys.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use taseplk::continuum::{Flux, Scheme};
use taseplk::ModelParams;

pub const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Ω_A = Ω_D.
    pub omega: Option<f64>,
    pub omega_a: Option<f64>,
    pub omega_d: Option<f64>,
    /// Ω_A = K·Ω_D, used with `omega_d`.
    pub k: Option<f64>,
    pub epsilon: Option<f64>,

    pub n_cells: Option<usize>,
    pub flux: Option<Flux>,
    pub scheme: Option<Scheme>,
    pub t_end: Option<f64>,
    pub snapshots: Option<usize>,
    /// `linear`, `half`, or a path to an `x,rho` CSV.
    pub initial: Option<String>,

    pub seed: Option<u64>,
    pub t_burn: Option<f64>,
    pub t_sample: Option<f64>,
    pub replicas: Option<usize>,

    pub res: Option<usize>,
    pub steady_res: Option<usize>,

    pub suite: Option<String>,
    pub delta: Option<f64>,
    pub pairs: Option<usize>,
    pub tol: Option<f64>,
    pub limit: Option<bool>,
}

/// Reads a config file. A run manifest is accepted too; its `config` member is used.
pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(inner) = v.get_mut("config") {
        v = inner.take();
    }
    serde_json::from_value(v).map_err(|e| format!("{}: {e}", path.display()))
}

/// Copies every `Some` field of `over` into `self`.
macro_rules! overlay {
    ($dst:expr, $src:expr, $($f:ident),*) => { $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )* };
}

impl RunConfig {
    pub fn overlay(&mut self, over: &RunConfig) {
        overlay!(
            self, over, alpha, beta, omega, omega_a, omega_d, k, epsilon, n_cells, flux, scheme, t_end, snapshots,
            initial, seed, t_burn, t_sample, replicas, res, steady_res, suite, delta, pairs, tol, limit
        );
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(DEFAULT_EPSILON)
    }

    /// (Ω_A, Ω_D) from exactly one of `omega`, `omega_a`+`omega_d`, `omega_d`+`k`.
    pub fn rates(&self) -> Result<(f64, f64), String> {
        match (self.omega, self.omega_a, self.omega_d, self.k) {
            (Some(w), None, None, None) => Ok((w, w)),
            (None, Some(a), Some(d), None) => Ok((a, d)),
            (None, None, Some(d), Some(k)) => Ok((k * d, d)),
            (None, None, None, None) => Err("rates missing: give --omega, --omega-a with --omega-d, or --omega-d with --k".into()),
            _ => Err("conflicting rates: give exactly one of --omega, --omega-a with --omega-d, or --omega-d with --k".into()),
        }
    }

    pub fn params(&self) -> Result<ModelParams, String> {
        let (oa, od) = self.rates()?;
        let alpha = self.alpha.ok_or("--alpha is required")?;
        let beta = self.beta.ok_or("--beta is required")?;
        ModelParams::new(alpha, beta, oa, od, self.epsilon()).map_err(|e| e.to_string())
    }

    pub fn has_params(&self) -> bool {
        self.alpha.is_some() || self.beta.is_some()
    }
}
