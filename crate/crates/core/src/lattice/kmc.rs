use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DensityProfile, ModelParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmcConfig {
    pub seed: u64,
    pub t_burn: f64,
    pub t_sample: f64,
    pub n_replicas: usize,
    /// Bulk hopping plus boundary entry/exit; off leaves pure Langmuir kinetics.
    #[serde(default = "yes")]
    pub hopping: bool,
    /// Initial occupancy drawn site-wise from this density; empty lattice otherwise.
    #[serde(default)]
    pub initial_density: Option<DensityProfile>,
}

fn yes() -> bool {
    true
}

impl KmcConfig {
    pub fn new(seed: u64, t_burn: f64, t_sample: f64, n_replicas: usize) -> Self {
        KmcConfig { seed, t_burn, t_sample, n_replicas, hopping: true, initial_density: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_burn > 0.0 && self.t_sample > 0.0) || self.n_replicas < 1 {
            return Err(Error::Parameter("t_burn, t_sample must be > 0 and n_replicas >= 1".into()));
        }
        Ok(())
    }
}

/// Occupancy of sites 0..N+1; the reservoir sites 0 and N+1 are implicit
/// in the entry/exit rates and never stored as particles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeState {
    pub occupancy: Vec<u8>,
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmcOutput {
    pub mean: DensityProfile,
    /// Standard error per grid point (zero at the fixed boundary values).
    pub stderr: Vec<f64>,
    pub events: u64,
}

/// Set of site indices with O(1) insert, remove and uniform sampling.
struct IndexSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl IndexSet {
    fn new(n: usize) -> Self {
        IndexSet { items: Vec::with_capacity(n), pos: vec![ABSENT; n] }
    }
    fn insert(&mut self, i: usize) {
        if self.pos[i] == ABSENT {
            self.pos[i] = self.items.len() as u32;
            self.items.push(i as u32);
        }
    }
    fn remove(&mut self, i: usize) {
        let p = self.pos[i];
        if p != ABSENT {
            let last = self.items.pop().unwrap();
            if last as usize != i {
                self.items[p as usize] = last;
                self.pos[last as usize] = p;
            }
            self.pos[i] = ABSENT;
        }
    }
    fn len(&self) -> usize {
        self.items.len()
    }
    fn get(&self, k: usize) -> usize {
        self.items[k] as usize
    }
}

struct Sim {
    occ: Vec<u8>,
    hops: IndexSet,
    empty: IndexSet,
    full: IndexSet,
}

impl Sim {
    fn new(occ: Vec<u8>) -> Self {
        let n = occ.len();
        let mut s = Sim { occ, hops: IndexSet::new(n), empty: IndexSet::new(n), full: IndexSet::new(n) };
        for i in 0..n {
            s.refresh_site(i);
            s.refresh_bond(i);
        }
        s
    }

    fn refresh_site(&mut self, i: usize) {
        if self.occ[i] == 1 {
            self.empty.remove(i);
            self.full.insert(i);
        } else {
            self.full.remove(i);
            self.empty.insert(i);
        }
    }

    /// Bond i → i+1.
    fn refresh_bond(&mut self, i: usize) {
        if i + 1 >= self.occ.len() {
            return;
        }
        if self.occ[i] == 1 && self.occ[i + 1] == 0 {
            self.hops.insert(i);
        } else {
            self.hops.remove(i);
        }
    }

    fn set(&mut self, i: usize, v: u8) {
        self.occ[i] = v;
        self.refresh_site(i);
        self.refresh_bond(i);
        if i > 0 {
            self.refresh_bond(i - 1);
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct ReplicaResult {
    occupancy: Vec<f64>,
    blocks: Vec<Vec<f64>>,
    events: u64,
}

const N_BLOCKS: usize = 10;

fn run_replica(params: &ModelParams, cfg: &KmcConfig, replica: u64) -> ReplicaResult {
    let n = params.n_sites();
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(cfg.seed ^ splitmix64(replica)));
    let occ: Vec<u8> = match &cfg.initial_density {
        Some(d) => (1..=n).map(|i| rng.gen_bool(d.interpolate(i as f64 / (n + 1) as f64).clamp(0.0, 1.0)) as u8).collect(),
        None => vec![0; n],
    };
    let mut sim = Sim::new(occ);
    let (wa, wd) = (params.epsilon * params.omega_a, params.epsilon * params.omega_d);
    let (alpha, beta) = if cfg.hopping { (params.alpha, params.beta) } else { (0.0, 0.0) };
    let hop_rate = if cfg.hopping { 1.0 } else { 0.0 };
    let t_start = cfg.t_burn;
    let t_end = cfg.t_burn + cfg.t_sample;
    let block_len = cfg.t_sample / N_BLOCKS as f64;
    let mut acc = vec![0.0; n];
    let mut since = vec![t_start; n];
    let mut blocks: Vec<Vec<f64>> = Vec::with_capacity(N_BLOCKS);
    let mut block_acc = vec![0.0; n];
    let mut next_block = t_start + block_len;
    let mut t = 0.0;
    let mut sampling = false;
    let mut events = 0u64;

    // Flushes time-weighted occupancy of site i up to time `now`.
    let flush = |i: usize, now: f64, occ: &[u8], since: &mut [f64], acc: &mut [f64], block_acc: &mut [f64]| {
        if occ[i] == 1 {
            let dt = now - since[i];
            acc[i] += dt;
            block_acc[i] += dt;
        }
        since[i] = now;
    };

    loop {
        let r_hop = hop_rate * sim.hops.len() as f64;
        let r_att = wa * sim.empty.len() as f64;
        let r_det = wd * sim.full.len() as f64;
        let r_in = if sim.occ[0] == 0 { alpha } else { 0.0 };
        let r_out = if sim.occ[n - 1] == 1 { beta } else { 0.0 };
        let total = r_hop + r_att + r_det + r_in + r_out;
        debug_assert!(total >= 0.0);
        let dt = if total > 0.0 { -(1.0 - rng.gen::<f64>()).ln() / total } else { f64::INFINITY };
        let t_next = t + dt;
        if !sampling && t_next >= t_start {
            sampling = true;
        }
        // close finished blocks before applying the event
        while sampling && next_block <= t_end && t_next >= next_block {
            for i in 0..n {
                flush(i, next_block, &sim.occ, &mut since, &mut acc, &mut block_acc);
            }
            blocks.push(block_acc.iter().map(|v| v / block_len).collect());
            block_acc.iter_mut().for_each(|v| *v = 0.0);
            next_block += block_len;
        }
        if t_next >= t_end {
            break;
        }
        t = t_next;
        events += 1;
        let mut u = rng.gen::<f64>() * total;
        let site;
        let value;
        if u < r_hop {
            let k = ((u / hop_rate) as usize).min(sim.hops.len() - 1);
            let i = sim.hops.get(k);
            if t >= t_start {
                flush(i, t, &sim.occ, &mut since, &mut acc, &mut block_acc);
                flush(i + 1, t, &sim.occ, &mut since, &mut acc, &mut block_acc);
            }
            sim.set(i, 0);
            sim.set(i + 1, 1);
            continue;
        }
        u -= r_hop;
        if u < r_att {
            let k = ((u / wa) as usize).min(sim.empty.len() - 1);
            site = sim.empty.get(k);
            value = 1;
        } else {
            u -= r_att;
            if u < r_det {
                let k = ((u / wd) as usize).min(sim.full.len() - 1);
                site = sim.full.get(k);
                value = 0;
            } else if u - r_det < r_in {
                site = 0;
                value = 1;
            } else {
                site = n - 1;
                value = 0;
            }
        }
        if t >= t_start {
            flush(site, t, &sim.occ, &mut since, &mut acc, &mut block_acc);
        }
        sim.set(site, value);
    }
    for i in 0..n {
        flush(i, t_end, &sim.occ, &mut since, &mut acc, &mut block_acc);
    }
    while blocks.len() < N_BLOCKS {
        blocks.push(block_acc.iter().map(|v| v / block_len).collect());
        block_acc.iter_mut().for_each(|v| *v = 0.0);
    }
    ReplicaResult { occupancy: acc.iter().map(|v| v / cfg.t_sample).collect(), blocks, events }
}

/// Time-averaged occupancy on the grid xᵢ = i/(N+1), with boundary values α and 1 − β.
pub fn kmc_run(params: &ModelParams, config: &KmcConfig) -> Result<DensityProfile> {
    kmc_run_detailed(params, config).map(|o| o.mean)
}

/// Gillespie simulation over independent replicas; the standard error is
/// taken across replicas, or across time blocks for a single replica.
pub fn kmc_run_detailed(params: &ModelParams, config: &KmcConfig) -> Result<KmcOutput> {
    params.validate()?;
    config.validate()?;
    let n = params.n_sites();
    if n < 1 {
        return Err(Error::Parameter("lattice needs N >= 1".into()));
    }
    let runs: Vec<ReplicaResult> =
        (0..config.n_replicas as u64).into_par_iter().map(|r| run_replica(params, config, r)).collect();
    let nr = runs.len() as f64;
    let mut mean = vec![0.0; n];
    for r in &runs {
        for i in 0..n {
            mean[i] += r.occupancy[i] / nr;
        }
    }
    let samples: Vec<&Vec<f64>> = if runs.len() >= 2 {
        runs.iter().map(|r| &r.occupancy).collect()
    } else {
        runs[0].blocks.iter().collect()
    };
    let m = samples.len() as f64;
    let stderr_bulk: Vec<f64> = (0..n)
        .map(|i| {
            let var = samples.iter().map(|s| (s[i] - mean[i]).powi(2)).sum::<f64>() / (m - 1.0);
            (var / m).sqrt()
        })
        .collect();
    let mut values = Vec::with_capacity(n + 2);
    values.push(params.alpha);
    values.extend_from_slice(&mean);
    values.push(params.beta_bar());
    let mut stderr = Vec::with_capacity(n + 2);
    stderr.push(0.0);
    stderr.extend_from_slice(&stderr_bulk);
    stderr.push(0.0);
    Ok(KmcOutput {
        mean: DensityProfile::from_values(values)?,
        stderr,
        events: runs.iter().map(|r| r.events).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_set_operations() {
        let mut s = IndexSet::new(5);
        s.insert(3);
        s.insert(1);
        s.insert(3);
        assert_eq!(s.len(), 2);
        s.remove(3);
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(0), 1);
        s.remove(4);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn deterministic_given_seed() {
        let p = ModelParams::special(0.3, 0.2, 0.25, 0.02).unwrap();
        let c = KmcConfig::new(7, 50.0, 100.0, 2);
        let a = kmc_run_detailed(&p, &c).unwrap();
        let b = kmc_run_detailed(&p, &c).unwrap();
        assert_eq!(a, b);
        let c2 = KmcConfig::new(8, 50.0, 100.0, 2);
        assert_ne!(kmc_run_detailed(&p, &c2).unwrap().mean, a.mean);
    }

    #[test]
    fn pure_langmuir_reaches_isotherm() {
        let p = ModelParams::general(0.5, 0.5, 2.0, 3.0, 0.02).unwrap();
        let mut c = KmcConfig::new(1, 200.0, 2000.0, 4);
        c.hopping = false;
        let o = kmc_run_detailed(&p, &c).unwrap();
        let n = p.n_sites();
        let avg: f64 = o.mean.values()[1..=n].iter().sum::<f64>() / n as f64;
        let rbar = p.r_bar();
        // site occupations are i.i.d.; the lattice mean has a small standard error
        let se: f64 = (o.stderr[1..=n].iter().map(|s| s * s).sum::<f64>()).sqrt() / n as f64;
        assert!((avg - rbar).abs() < 3.0 * se.max(1e-3), "{avg} vs {rbar} (se {se})");
    }

    #[test]
    fn occupancies_stay_binary() {
        let p = ModelParams::special(0.6, 0.7, 0.5, 0.05).unwrap();
        let c = KmcConfig::new(3, 10.0, 10.0, 1);
        let o = kmc_run_detailed(&p, &c).unwrap();
        assert!(o.mean.values().iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(o.events > 0);
    }
}
