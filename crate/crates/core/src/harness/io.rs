//! Snapshot, mesh and diagnostics files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::ExperimentConfig;
use crate::diagnostics::{write_csv, DiagnosticsRecord};
use crate::dynamics::State;
use crate::error::{Result, VflError};
use crate::geometry::{SiteState, Vec2};
use crate::integrator::Simulation;

pub const SNAPSHOT_COLUMNS: &str = "label x y u v m hbar htilde";

/// Baseline quantities stored in snapshot headers.
const BASELINE_KEYS: [&str; 4] = ["ref_energy", "ref_total_pv", "ref_enstrophy", "ref_total_vorticity"];

/// Parsed snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    /// Every `# key=value` header line, including the run configuration.
    pub meta: BTreeMap<String, String>,
    pub sites: Vec<SiteState>,
    pub hbar: Vec<f64>,
    pub htilde: Vec<f64>,
}

impl Snapshot {
    /// Configuration echoed in the header.
    pub fn config(&self) -> Result<ExperimentConfig> {
        let exp = self.meta.get("experiment").ok_or_else(|| VflError::Parse("snapshot has no experiment key".into()))?;
        let exp: u8 = exp.parse().map_err(|_| VflError::Parse(format!("bad experiment {exp:?}")))?;
        let mut cfg = ExperimentConfig::defaults(exp)?;
        let known = cfg.to_pairs();
        for (k, v) in &self.meta {
            if known.contains_key(k.as_str()) || k == "out-dir" {
                cfg.set(k, v)?;
            }
        }
        Ok(cfg)
    }

    /// Relative-error baseline of the run that wrote this snapshot.
    pub fn baseline(&self) -> Result<DiagnosticsRecord> {
        let mut vals = [0.0; 4];
        for (v, k) in vals.iter_mut().zip(BASELINE_KEYS) {
            let s = self.meta.get(k).ok_or_else(|| VflError::Parse(format!("snapshot has no {k}")))?;
            *v = parse_f64(s)?;
        }
        Ok(DiagnosticsRecord {
            step: 0,
            time: 0.0,
            energy: vals[0],
            rel_energy_err: 0.0,
            total_pv: vals[1],
            rel_pv_err: 0.0,
            enstrophy: vals[2],
            rel_enstrophy_err: 0.0,
            mass: 0.0,
            momentum: Vec2::zeros(),
            h_min: 0.0,
            h_max: 0.0,
            total_vorticity: vals[3],
            rel_tv_err: 0.0,
            htilde_min: 0.0,
            htilde_max: 0.0,
        })
    }

    /// Simulation resumed at the snapshot's step and time.
    pub fn resume(&self, cfg: &ExperimentConfig) -> Result<Simulation> {
        cfg.validate()?;
        let state = State::from_sites(cfg.domain()?, &self.sites)?;
        let mut sim = Simulation::new(state, cfg.params()?, crate::geometry::collision_threshold(cfg.dx()))?;
        sim.step = self.step;
        sim.time = self.time;
        Ok(sim)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| VflError::Parse(format!("bad number {s:?}")))
}

pub fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("snap_{step:06}.txt"))
}

pub fn mesh_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("mesh_{step:06}.txt"))
}

pub fn write_snapshot(out: &mut dyn Write, cfg: &ExperimentConfig, sim: &Simulation, baseline: &DiagnosticsRecord) -> Result<()> {
    writeln!(out, "# vfl snapshot")?;
    writeln!(out, "# step={}", sim.step)?;
    writeln!(out, "# time={:.16e}", sim.time)?;
    let refs = [baseline.energy, baseline.total_pv, baseline.enstrophy, baseline.total_vorticity];
    for (k, v) in BASELINE_KEYS.iter().zip(refs) {
        writeln!(out, "# {k}={v:.16e}")?;
    }
    for (k, v) in cfg.to_pairs() {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "# {SNAPSHOT_COLUMNS}")?;
    let reg = &sim.evaluation().regularized;
    let s = &sim.state;
    for i in 0..s.len() {
        let p = s.positions[i];
        let u = s.velocities[i];
        writeln!(
            out,
            "{i} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            p.x, p.y, u.x, u.y, s.masses[i], reg.hbar[i], reg.htilde[i]
        )?;
    }
    Ok(())
}

pub fn write_snapshot_file(dir: &Path, cfg: &ExperimentConfig, sim: &Simulation, baseline: &DiagnosticsRecord) -> Result<PathBuf> {
    let path = snapshot_path(dir, sim.step);
    let mut w = BufWriter::new(File::create(&path)?);
    write_snapshot(&mut w, cfg, sim, baseline)?;
    w.flush()?;
    Ok(path)
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    parse_snapshot(BufReader::new(File::open(path)?))
}

pub fn parse_snapshot(reader: impl BufRead) -> Result<Snapshot> {
    let mut meta = BTreeMap::new();
    let mut sites = Vec::new();
    let mut hbar = Vec::new();
    let mut htilde = Vec::new();
    for (ln, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 8 {
            return Err(VflError::Parse(format!("line {}: expected 8 columns, got {}", ln + 1, cols.len())));
        }
        let label: usize = cols[0].parse().map_err(|_| VflError::Parse(format!("line {}: bad label", ln + 1)))?;
        let v = cols[1..].iter().map(|c| parse_f64(c)).collect::<Result<Vec<f64>>>()?;
        sites.push(SiteState {
            label,
            position: Vec2::new(v[0], v[1]),
            velocity: Vec2::new(v[2], v[3]),
            mass: v[4],
        });
        hbar.push(v[5]);
        htilde.push(v[6]);
    }
    let step = meta
        .get("step")
        .ok_or_else(|| VflError::Parse("snapshot has no step".into()))?
        .parse()
        .map_err(|_| VflError::Parse("bad step".into()))?;
    let time = parse_f64(meta.get("time").ok_or_else(|| VflError::Parse("snapshot has no time".into()))?)?;
    Ok(Snapshot { step, time, meta, sites, hbar, htilde })
}

/// One line per cell: label, then the absolute coordinates of the cell's
/// vertices in counterclockwise order (the interval ends in 1D).
pub fn write_mesh(out: &mut dyn Write, sim: &Simulation) -> Result<()> {
    let geom = &sim.evaluation().geometry;
    writeln!(out, "# step={}", sim.step)?;
    writeln!(out, "# time={:.16e}", sim.time)?;
    for (i, cell) in geom.cells.iter().enumerate() {
        let x = sim.state.positions[i];
        let mut line = i.to_string();
        for v in cell.vertices() {
            let p = x + v;
            line.push_str(&format!(" {:.16e} {:.16e}", p.x, p.y));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_mesh_file(dir: &Path, sim: &Simulation) -> Result<PathBuf> {
    let path = mesh_path(dir, sim.step);
    let mut w = BufWriter::new(File::create(&path)?);
    write_mesh(&mut w, sim)?;
    w.flush()?;
    Ok(path)
}

pub fn write_diagnostics_file(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csv(records, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Header and numeric rows of a diagnostics CSV.
pub fn read_diagnostics(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header: Vec<String> = match lines.next() {
        Some(h) => h?.split(',').map(str::to_string).collect(),
        None => return Err(VflError::Parse("empty diagnostics file".into())),
    };
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line.split(',').map(parse_f64).collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(VflError::Parse(format!("row has {} fields, header {}", row.len(), header.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let mut cfg = ExperimentConfig::defaults(1).unwrap();
        cfg.n = 16;
        let sim = super::super::build_simulation(&cfg).unwrap();
        let base = crate::diagnostics::compute_record(&sim, &sim.params, None).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &cfg, &sim, &base).unwrap();
        let snap = parse_snapshot(&buf[..]).unwrap();
        assert_eq!(snap.step, 0);
        assert_eq!(snap.sites, sim.state.sites());
        assert_eq!(snap.htilde, sim.evaluation().regularized.htilde);
        assert_eq!(snap.config().unwrap(), cfg);
        assert_eq!(snap.baseline().unwrap().energy, base.energy);
    }

    #[test]
    fn rejects_short_rows() {
        let text = "# step=0\n# time=0\n0 1 2 3\n";
        assert!(matches!(parse_snapshot(text.as_bytes()), Err(VflError::Parse(_))));
    }
}
