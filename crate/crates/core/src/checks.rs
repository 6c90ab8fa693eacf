//! Numerical checks of the qualitative theory: particle-hole symmetry,
//! agreement of the three solvers, global attractivity with order
//! preservation, and the upper/lower bracket around the steady solution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{build_bounds, verify_bound_on, BoundReport, EXTENDED_LADDER};
use crate::continuum::{pde_evolve, steady_solve, steady_solve_with_telemetry, PdeConfig, SteadyConfig};
use crate::error::{Error, Result};
use crate::lattice::meanfield_steady;
use crate::model::{particle_hole_transform, sup_distance, DensityProfile, ModelParams, Tolerance};
use crate::phase::classify;

/// Random admissible parameters: α, β ∈ [0.05, 0.95], Ω_D ∈ [0.05, 0.4],
/// K ∈ [0.5, 3].
pub fn random_params(n: usize, seed: u64, epsilon: f64) -> Result<Vec<ModelParams>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (a, b) = (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
            let od = rng.gen_range(0.05..0.4);
            let k = rng.gen_range(0.5..3.0);
            ModelParams::general(a, b, od, k, epsilon)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetryCase {
    pub params: ModelParams,
    pub involution_error: f64,
    /// sup |steady(T p) − T steady(p)|
    pub transform_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub tolerance: f64,
    pub cases: Vec<SymmetryCase>,
    pub passed: bool,
}

pub fn symmetry_check(params: &[ModelParams], cfg: &SteadyConfig, tol: f64) -> Result<SymmetryReport> {
    let mut cases = Vec::with_capacity(params.len());
    for p in params {
        let rho = steady_solve(p, cfg)?;
        let (tp, trho) = particle_hole_transform(p, &rho);
        let (pp, prho) = particle_hole_transform(&tp, &trho);
        let par = [
            (pp.alpha - p.alpha).abs(),
            (pp.beta - p.beta).abs(),
            (pp.omega_a - p.omega_a).abs(),
            (pp.omega_d - p.omega_d).abs(),
        ];
        let involution_error = par.into_iter().fold(sup_distance(&prho, &rho)?, f64::max);
        let direct = steady_solve(&tp, cfg)?;
        let transform_error = sup_distance(&direct, &trho)?;
        cases.push(SymmetryCase {
            params: *p,
            involution_error,
            transform_error,
            passed: involution_error <= 1e-15 && transform_error <= tol,
        });
    }
    let passed = cases.iter().all(|c| c.passed);
    Ok(SymmetryReport { tolerance: tol, cases, passed })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub params: ModelParams,
    pub phase: String,
    pub t_end: f64,
    pub steady_vs_pde: f64,
    pub steady_vs_meanfield: f64,
    pub pde_vs_meanfield: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn linear_initial(p: &ModelParams, n: usize) -> Result<DensityProfile> {
    let (a, b) = (p.alpha, p.beta_bar());
    DensityProfile::from_fn(n, |x| a + (b - a) * x)
}

/// Steady solver, PDE at t = `horizon`/ε from the linear profile, and the
/// mean-field lattice, compared on the lattice grid xᵢ = i/(N+1).
pub fn uniqueness_check(p: &ModelParams, horizon: f64, tol: f64) -> Result<UniquenessReport> {
    let steady = steady_solve(p, &SteadyConfig::default())?;
    let t_end = horizon / p.epsilon;
    let cfg = PdeConfig::for_params(p, t_end);
    let pde = pde_evolve(p, &linear_initial(p, cfg.n_cells)?, &cfg)?.pop().unwrap().profile;
    let mf = meanfield_steady(p, &Tolerance::default())?;
    let m = mf.n_cells();
    let (s, e) = (steady.resample(m), pde.resample(m));
    let d = [sup_distance(&s, &e)?, sup_distance(&s, &mf)?, sup_distance(&e, &mf)?];
    Ok(UniquenessReport {
        params: *p,
        phase: classify(p)?.0.name(),
        t_end,
        steady_vs_pde: d[0],
        steady_vs_meanfield: d[1],
        pde_vs_meanfield: d[2],
        tolerance: tol,
        passed: d.iter().all(|&v| v < tol),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttractivityRun {
    pub initial: String,
    /// (t, sup distance to the steady solution)
    pub distances: Vec<(f64, f64)>,
    pub final_distance: f64,
    pub monotone_after: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttractivityReport {
    pub params: ModelParams,
    pub phase: String,
    pub runs: Vec<AttractivityRun>,
    pub ordered_pairs: usize,
    /// Most negative value of φ₁ − φ₂ over all pairs and snapshots.
    pub worst_order_gap: f64,
    pub passed: bool,
}

/// Smooth profile with the right boundary values:
/// linear interpolant plus a few damped sine modes.
fn random_smooth(p: &ModelParams, n: usize, rng: &mut ChaCha8Rng) -> Result<DensityProfile> {
    let (a, b) = (p.alpha, p.beta_bar());
    let coef: Vec<f64> = (1..=4).map(|k| rng.gen_range(-0.3..0.3) / k as f64).collect();
    DensityProfile::from_fn(n, |x| {
        let s: f64 = coef.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * x).sin()).sum();
        (a + (b - a) * x + s).clamp(0.0, 1.0)
    })
}

const ORDER_SLACK: f64 = 1e-12;
const MONOTONE_SLACK: f64 = 1e-10;

/// Three initial profiles (linear, constant 1/2, random smooth) evolved to
/// t = 50/ε with snapshots every 1/ε, plus `pairs` ordered initial pairs
/// whose order must persist at every snapshot.
pub fn attractivity_check(p: &ModelParams, pairs: usize, seed: u64, tol: f64) -> Result<AttractivityReport> {
    let steady = steady_solve(p, &SteadyConfig::default())?;
    let eps = p.epsilon;
    let mut cfg = PdeConfig::for_params(p, 50.0 / eps);
    cfg.snapshot_times = (1..50).map(|k| k as f64 / eps).collect();
    let n = cfg.n_cells;
    let steady = steady.resample(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = DensityProfile::from_fn(n, |x| {
        if x == 0.0 {
            p.alpha
        } else if x == 1.0 {
            p.beta_bar()
        } else {
            0.5
        }
    })?;
    let inits = [
        ("linear".to_string(), linear_initial(p, n)?),
        ("constant_half".to_string(), half),
        ("random_smooth".to_string(), random_smooth(p, n, &mut rng)?),
    ];
    let mut runs = Vec::new();
    for (name, s) in inits {
        let snaps = pde_evolve(p, &s, &cfg)?;
        let distances: Vec<(f64, f64)> =
            snaps.iter().map(|sn| Ok((sn.t, sup_distance(&sn.profile, &steady)?))).collect::<Result<_>>()?;
        let late: Vec<f64> = distances.iter().filter(|(t, _)| *t >= 5.0 / eps - 1e-9).map(|d| d.1).collect();
        let monotone_after = late.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK);
        let final_distance = distances.last().unwrap().1;
        runs.push(AttractivityRun {
            initial: name,
            passed: monotone_after && final_distance < tol,
            distances,
            final_distance,
            monotone_after,
        });
    }
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let lo = random_smooth(p, n, &mut rng)?;
        let amp = rng.gen_range(0.01..0.3);
        let hi = DensityProfile::from_fn(n, |x| {
            (lo.interpolate(x) + amp * (std::f64::consts::PI * x).sin()).min(1.0)
        })?;
        let a = pde_evolve(p, &hi, &cfg)?;
        let b = pde_evolve(p, &lo, &cfg)?;
        for (sa, sb) in a.iter().zip(&b) {
            let gap = sa.profile.values().iter().zip(sb.profile.values()).map(|(x, y)| x - y).fold(f64::INFINITY, f64::min);
            worst = worst.min(gap);
        }
    }
    let order_ok = pairs == 0 || worst >= -ORDER_SLACK;
    Ok(AttractivityReport {
        params: *p,
        phase: classify(p)?.0.name(),
        passed: order_ok && runs.iter().all(|r| r.passed),
        runs,
        ordered_pairs: pairs,
        worst_order_gap: worst,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketReport {
    pub params: ModelParams,
    pub phase: String,
    pub delta: f64,
    pub upper: BoundReport,
    pub lower: BoundReport,
    /// Largest ε ≤ 0.05 at which both bounds verify.
    pub epsilon: Option<f64>,
    pub n_cells: usize,
    /// min over the grid of (ρ_u − ρ) and (ρ − ρ_l); ≥ −slack means bracketed.
    pub upper_gap: f64,
    pub lower_gap: f64,
    pub slack: f64,
    pub passed: bool,
}

/// Builds the bounds, verifies them over [`EXTENDED_LADDER`], and at the
/// largest ε ≤ 0.05 where both hold checks ρ_l ≤ ρ ≤ ρ_u for the steady solution.
pub fn bracket_check(p: &ModelParams, delta: f64, nodes: usize, slack: f64) -> Result<BracketReport> {
    let (label, _) = classify(p)?;
    let (u, l) = build_bounds(p, &label, delta)?;
    let upper = verify_bound_on(&u, &EXTENDED_LADDER, nodes);
    let lower = verify_bound_on(&l, &EXTENDED_LADDER, nodes);
    let epsilon = EXTENDED_LADDER
        .iter()
        .copied()
        .filter(|&e| e <= 0.05)
        .find(|e| upper.passing.contains(e) && lower.passing.contains(e));
    let mut report = BracketReport {
        params: *p,
        phase: label.name(),
        delta,
        upper,
        lower,
        epsilon,
        n_cells: 0,
        upper_gap: f64::NAN,
        lower_gap: f64::NAN,
        slack,
        passed: false,
    };
    let Some(eps) = epsilon else { return Ok(report) };
    let pe = p.with_epsilon(eps);
    let (rho, tel) = steady_solve_with_telemetry(&pe, &SteadyConfig::default())?;
    let xs = rho.grid();
    let ru = u.realize(eps)?.sample(xs)?;
    let rl = l.realize(eps)?.sample(xs)?;
    let v = rho.values();
    let gap = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).fold(f64::INFINITY, f64::min);
    report.n_cells = tel.n_cells;
    report.upper_gap = gap(&ru, v);
    report.lower_gap = gap(v, &rl);
    report.passed = report.upper_gap >= -slack && report.lower_gap >= -slack;
    Ok(report)
}

/// Plot data (x, ρ_l, ρ, ρ_u) at the ε of a bracket report.
pub fn bracket_columns(p: &ModelParams, delta: f64, eps: f64) -> Result<[Vec<f64>; 4]> {
    let (label, _) = classify(p)?;
    let (u, l) = build_bounds(p, &label, delta)?;
    let rho = steady_solve(&p.with_epsilon(eps), &SteadyConfig::default())?;
    let xs = rho.grid().to_vec();
    let ru = u.realize(eps)?.sample(&xs)?;
    let rl = l.realize(eps)?.sample(&xs)?;
    if ru.len() != xs.len() {
        return Err(Error::Logic("bound sampling changed length".into()));
    }
    Ok([xs, rl, rho.values().to_vec(), ru])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_params_are_reproducible() {
        let a = random_params(5, 7, 0.02).unwrap();
        let b = random_params(5, 7, 0.02).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.validate().is_ok()));
    }

    #[test]
    fn symmetry_on_one_case() {
        let p = ModelParams::general(0.3, 0.6, 0.2, 1.7, 0.05).unwrap();
        let r = symmetry_check(&[p], &SteadyConfig::default(), 1e-6).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn bracket_on_special_phase6() {
        let p = ModelParams::special(0.75, 0.6667, 0.25, 0.01).unwrap();
        let r = bracket_check(&p, 0.05, 400, 1e-8).unwrap();
        assert_eq!(r.epsilon, Some(0.05));
        assert!(r.passed, "{} {}", r.upper_gap, r.lower_gap);
    }
}
