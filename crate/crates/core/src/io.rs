//! CSV and JSON interchange. Profiles are CSV, reports are JSON.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::continuum::Snapshot;
use crate::error::{Error, Result};
use crate::lattice::KmcOutput;
use crate::model::DensityProfile;
use crate::phase::PhaseMap;

#[derive(Serialize, Deserialize)]
struct ProfileRow {
    x: f64,
    rho: f64,
}

#[derive(Serialize)]
struct KmcRow {
    x: f64,
    rho_mean: f64,
    rho_stderr: f64,
}

#[derive(Serialize)]
struct SnapshotRow {
    t: f64,
    x: f64,
    rho: f64,
}

#[derive(Serialize)]
struct CellRow {
    alpha: f64,
    beta: f64,
    phase_index: u8,
    boundary_flag: bool,
}

#[derive(Serialize)]
struct PolylineRow {
    polyline: usize,
    label_a: u8,
    label_b: u8,
    alpha: f64,
    beta: f64,
}

#[derive(Serialize)]
struct BracketRow {
    x: f64,
    rho_l: f64,
    rho: f64,
    rho_u: f64,
}

fn rows<W: Write, T: Serialize>(w: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// `x,rho`
pub fn write_profile<W: Write>(w: W, p: &DensityProfile) -> Result<()> {
    rows(w, p.grid().iter().zip(p.values()).map(|(&x, &rho)| ProfileRow { x, rho }))
}

pub fn read_profile<R: Read>(r: R) -> Result<DensityProfile> {
    let mut rd = csv::Reader::from_reader(r);
    let (mut grid, mut values) = (Vec::new(), Vec::new());
    for row in rd.deserialize::<ProfileRow>() {
        let row = row?;
        grid.push(row.x);
        values.push(row.rho);
    }
    DensityProfile::new(grid, values)
}

/// `x,rho_mean,rho_stderr`
pub fn write_kmc<W: Write>(w: W, out: &KmcOutput) -> Result<()> {
    let m = &out.mean;
    rows(
        w,
        m.grid().iter().zip(m.values()).zip(&out.stderr).map(|((&x, &rho_mean), &rho_stderr)| KmcRow {
            x,
            rho_mean,
            rho_stderr,
        }),
    )
}

/// `t,x,rho`, one block per snapshot.
pub fn write_snapshots<W: Write>(w: W, snaps: &[Snapshot]) -> Result<()> {
    rows(
        w,
        snaps.iter().flat_map(|s| {
            s.profile.grid().iter().zip(s.profile.values()).map(move |(&x, &rho)| SnapshotRow { t: s.t, x, rho })
        }),
    )
}

/// `alpha,beta,phase_index,boundary_flag`
pub fn write_phase_map<W: Write>(w: W, map: &PhaseMap) -> Result<()> {
    rows(
        w,
        map.cells.iter().map(|c| CellRow {
            alpha: c.alpha,
            beta: c.beta,
            phase_index: c.phase_index,
            boundary_flag: c.boundary_flag,
        }),
    )
}

/// `polyline,label_a,label_b,alpha,beta`
pub fn write_polylines<W: Write>(w: W, map: &PhaseMap) -> Result<()> {
    rows(
        w,
        map.boundaries.iter().enumerate().flat_map(|(k, pl)| {
            pl.points.iter().map(move |&(alpha, beta)| PolylineRow {
                polyline: k,
                label_a: pl.labels.0,
                label_b: pl.labels.1,
                alpha,
                beta,
            })
        }),
    )
}

/// `x,rho_l,rho,rho_u`
pub fn write_bracket<W: Write>(w: W, x: &[f64], lower: &[f64], rho: &[f64], upper: &[f64]) -> Result<()> {
    let n = x.len();
    if lower.len() != n || rho.len() != n || upper.len() != n {
        return Err(Error::Structure("bracket columns differ in length".into()));
    }
    rows(w, (0..n).map(|i| BracketRow { x: x[i], rho_l: lower[i], rho: rho[i], rho_u: upper[i] }))
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(w: W, value: &T) -> Result<()> {
    let mut w = w;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_json<R: Read, T: DeserializeOwned>(r: R) -> Result<T> {
    Ok(serde_json::from_reader(r)?)
}

/// Creates `path` (and its parent directories) and hands a buffered writer to `f`.
pub fn to_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::phase::{limit_profile, phase_sweep};

    #[test]
    fn profile_round_trip() {
        let p = DensityProfile::from_fn(64, |x| 0.2 + 0.5 * x * x).unwrap();
        let mut buf = Vec::new();
        write_profile(&mut buf, &p).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x,rho\n"));
        let q = read_profile(buf.as_slice()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn headers() {
        let map = phase_sweep(0.25, 0.25, 8).unwrap();
        let mut buf = Vec::new();
        write_phase_map(&mut buf, &map).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("alpha,beta,phase_index,boundary_flag\n"));
        assert_eq!(s.lines().count(), 65);

        let p = DensityProfile::from_fn(4, |x| x).unwrap();
        let snaps = vec![Snapshot { t: 1.0, profile: p.clone() }, Snapshot { t: 2.0, profile: p }];
        let mut buf = Vec::new();
        write_snapshots(&mut buf, &snaps).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("t,x,rho\n"));
        assert_eq!(s.lines().count(), 11);

        let mut buf = Vec::new();
        write_bracket(&mut buf, &[0.0, 1.0], &[0.1, 0.2], &[0.2, 0.3], &[0.3, 0.4]).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("x,rho_l,rho,rho_u\n"));
        assert!(write_bracket(Vec::new(), &[0.0], &[], &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn limit_profile_json_round_trip() {
        let p = ModelParams::special(0.25, 0.125, 0.25, 0.01).unwrap();
        let lim = limit_profile(&p).unwrap();
        let mut buf = Vec::new();
        write_json(&mut buf, &lim).unwrap();
        let back: crate::model::PiecewiseLimitProfile = read_json(buf.as_slice()).unwrap();
        assert_eq!(back, lim);
    }
}
