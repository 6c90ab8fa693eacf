use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{classify, Regime};
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub beta: f64,
    pub phase_index: u8,
    pub boundary_flag: bool,
}

/// A chain of cell edges separating two labels, in (α, β) coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub labels: (u8, u8),
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseMap {
    pub omega_a: f64,
    pub omega_d: f64,
    pub resolution: usize,
    pub regime: Regime,
    /// Cell (i, j) at index j·res + i, centred at ((i+½)/res, (j+½)/res).
    pub cells: Vec<SweepCell>,
    pub boundaries: Vec<Polyline>,
}

impl PhaseMap {
    /// Phase indices present among cells that are not on a boundary.
    pub fn labels_present(&self) -> BTreeSet<u8> {
        self.cells.iter().filter(|c| !c.boundary_flag).map(|c| c.phase_index).collect()
    }

    pub fn cell(&self, i: usize, j: usize) -> &SweepCell {
        &self.cells[j * self.resolution + i]
    }
}

/// Classifies every cell of a res × res grid over (α, β) ∈ (0,1)².
pub fn phase_sweep(omega_a: f64, omega_d: f64, resolution: usize) -> Result<PhaseMap> {
    if resolution < 2 {
        return Err(Error::Parameter(format!("resolution {resolution} too small")));
    }
    let res = resolution;
    let centre = |i: usize| (i as f64 + 0.5) / res as f64;
    let probe = ModelParams::new(0.5, 0.5, omega_a, omega_d, 0.01)?;
    let rows: Vec<Vec<SweepCell>> = (0..res)
        .into_par_iter()
        .map(|j| {
            (0..res)
                .map(|i| {
                    let (alpha, beta) = (centre(i), centre(j));
                    let p = ModelParams { alpha, beta, ..probe };
                    let (label, _) = classify(&p)?;
                    Ok(SweepCell { alpha, beta, phase_index: label.index, boundary_flag: label.boundary_flag })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<SweepCell> = rows.into_iter().flatten().collect();
    let regime = if probe.is_special() { Regime::Special } else { Regime::General };
    let boundaries = extract_boundaries(&cells, res);
    Ok(PhaseMap { omega_a, omega_d, resolution: res, regime, cells, boundaries })
}

type Node = (u32, u32);

/// Cell edges between differing labels, chained into polylines per label pair.
fn extract_boundaries(cells: &[SweepCell], res: usize) -> Vec<Polyline> {
    let label = |i: usize, j: usize| cells[j * res + i].phase_index;
    let mut segs: BTreeMap<(u8, u8), Vec<(Node, Node)>> = BTreeMap::new();
    let key = |a: u8, b: u8| (a.min(b), a.max(b));
    for j in 0..res {
        for i in 0..res {
            let l = label(i, j);
            if i + 1 < res && label(i + 1, j) != l {
                let x = (i + 1) as u32;
                segs.entry(key(l, label(i + 1, j))).or_default().push(((x, j as u32), (x, j as u32 + 1)));
            }
            if j + 1 < res && label(i, j + 1) != l {
                let y = (j + 1) as u32;
                segs.entry(key(l, label(i, j + 1))).or_default().push(((i as u32, y), (i as u32 + 1, y)));
            }
        }
    }
    let to_xy = |n: Node| (n.0 as f64 / res as f64, n.1 as f64 / res as f64);
    let mut out = Vec::new();
    for (labels, list) in segs {
        let mut adj: HashMap<Node, Vec<usize>> = HashMap::new();
        for (k, (a, b)) in list.iter().enumerate() {
            adj.entry(*a).or_default().push(k);
            adj.entry(*b).or_default().push(k);
        }
        let mut used = vec![false; list.len()];
        // Start chains at odd-degree nodes first so open curves come out whole.
        let mut starts: Vec<usize> = (0..list.len()).collect();
        starts.sort_by_key(|&k| {
            let (a, b) = list[k];
            let odd = adj[&a].len() % 2 == 1 || adj[&b].len() % 2 == 1;
            (!odd, a, b)
        });
        for s in starts {
            if used[s] {
                continue;
            }
            used[s] = true;
            let (a, b) = list[s];
            let (mut start, mut end) = (a, b);
            if adj[&b].len() % 2 == 1 && adj[&a].len() % 2 == 0 {
                std::mem::swap(&mut start, &mut end);
            }
            let mut pts = vec![start, end];
            let mut cur = end;
            while let Some(&k) = adj[&cur].iter().find(|&&k| !used[k]) {
                used[k] = true;
                let (p, q) = list[k];
                cur = if p == cur { q } else { p };
                pts.push(cur);
            }
            out.push(Polyline { labels, points: pts.into_iter().map(to_xy).collect() });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_sweep_has_six_labels() {
        let m = phase_sweep(0.25, 0.25, 60).unwrap();
        assert_eq!(m.labels_present().into_iter().collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 6]);
        assert!(!m.boundaries.is_empty());
    }

    #[test]
    fn large_omega_lacks_1_4_5() {
        let m = phase_sweep(1.0, 1.0, 60).unwrap();
        let l = m.labels_present();
        assert!(!l.contains(&1) && !l.contains(&4) && !l.contains(&5));
    }

    #[test]
    fn polylines_cover_all_edges() {
        let m = phase_sweep(0.25, 0.25, 30).unwrap();
        let mut edges = 0usize;
        for j in 0..30 {
            for i in 0..30 {
                let l = m.cell(i, j).phase_index;
                edges += (i + 1 < 30 && m.cell(i + 1, j).phase_index != l) as usize;
                edges += (j + 1 < 30 && m.cell(i, j + 1).phase_index != l) as usize;
            }
        }
        let total: usize = m.boundaries.iter().map(|p| p.points.len() - 1).sum();
        assert_eq!(total, edges);
    }
}
