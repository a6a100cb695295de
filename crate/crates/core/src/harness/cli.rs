//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;

use super::io::read_snapshot;
use super::{run_simulation, build_simulation, ExperimentConfig, RunOutput};
use crate::error::{Result, VflError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

/// Variational Lagrangian shallow-water experiments on periodic domains.
#[derive(Debug, Parser)]
#[command(name = "vfl", version)]
pub struct Args {
    /// Experiment number: 1 (adjustment), 2 (frontal balance), 3 (vortex).
    #[arg(long)]
    pub experiment: Option<u8>,
    /// Sites per axis.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final step index.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Smoothing length in units of the lattice spacing.
    #[arg(long)]
    pub alpha_mult: Option<f64>,
    /// Gaussian sharpness of the initial bump.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub f0: Option<f64>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Diagnostics cadence in steps (0 disables).
    #[arg(long)]
    pub diag_every: Option<usize>,
    /// Snapshot cadence in steps (0 disables).
    #[arg(long)]
    pub snap_every: Option<usize>,
    /// Also dump Voronoi meshes at the snapshot cadence.
    #[arg(long)]
    pub mesh: bool,
    /// `exact` or `edge-average`.
    #[arg(long)]
    pub force: Option<String>,
    /// `consistent` or `lumped`.
    #[arg(long)]
    pub mass: Option<String>,
    /// Flat key=value file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Resume from a snapshot file.
    #[arg(long)]
    pub restart: Option<PathBuf>,
}

/// `key=value` pairs from a config file; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| VflError::Config(format!("config line {}: expected key=value", i + 1)))?;
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| VflError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

impl Args {
    fn flag_pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut push = |k: &'static str, s: Option<String>| {
            if let Some(s) = s {
                v.push((k, s));
            }
        };
        push("n", self.n.map(|x| x.to_string()));
        push("dt", self.dt.map(|x| x.to_string()));
        push("steps", self.steps.map(|x| x.to_string()));
        push("alpha-mult", self.alpha_mult.map(|x| x.to_string()));
        push("beta", self.beta.map(|x| x.to_string()));
        push("amplitude", self.amplitude.map(|x| x.to_string()));
        push("f0", self.f0.map(|x| x.to_string()));
        push("g", self.g.map(|x| x.to_string()));
        push("out-dir", self.out_dir.as_ref().map(|p| p.display().to_string()));
        push("diag-every", self.diag_every.map(|x| x.to_string()));
        push("snap-every", self.snap_every.map(|x| x.to_string()));
        push("force", self.force.clone());
        push("mass", self.mass.clone());
        if self.mesh {
            push("mesh", Some("true".into()));
        }
        v
    }
}

/// Resolved configuration plus the snapshot to resume from, if any.
pub fn resolve(args: &Args) -> Result<(ExperimentConfig, Option<super::io::Snapshot>)> {
    let file = match &args.config {
        Some(p) => read_config_file(p)?,
        None => Vec::new(),
    };
    let snapshot = match &args.restart {
        Some(p) => Some(read_snapshot(p).map_err(|e| VflError::Config(format!("cannot restart from {}: {e}", p.display())))?),
        None => None,
    };
    let file_exp = file.iter().rev().find(|(k, _)| k == "experiment").map(|(_, v)| v.clone());
    let mut cfg = match (&snapshot, args.experiment, file_exp) {
        (Some(s), None, None) => s.config()?,
        (Some(s), Some(e), _) if s.config()?.experiment != e => {
            return Err(VflError::Config("restart snapshot belongs to a different experiment".into()))
        }
        (Some(s), _, _) => s.config()?,
        (None, Some(e), _) => ExperimentConfig::defaults(e)?,
        (None, None, Some(e)) => {
            let e: u8 = e.parse().map_err(|_| VflError::Config(format!("bad experiment {e:?}")))?;
            ExperimentConfig::defaults(e)?
        }
        (None, None, None) => ExperimentConfig::defaults(1)?,
    };
    for (k, v) in &file {
        if k != "experiment" {
            cfg.set(k, v)?;
        }
    }
    for (k, v) in args.flag_pairs() {
        cfg.set(k, &v)?;
    }
    cfg.validate()?;
    Ok((cfg, snapshot))
}

pub fn execute(args: &Args) -> Result<RunOutput> {
    let (cfg, snapshot) = resolve(args)?;
    match snapshot {
        Some(s) => {
            let sim = s.resume(&cfg)?;
            run_simulation(&cfg, sim, Some(s.baseline()?))
        }
        None => run_simulation(&cfg, build_simulation(&cfg)?, None),
    }
}

pub fn exit_code(err: &VflError) -> i32 {
    if err.is_simulation_abort() {
        EXIT_ABORT
    } else {
        EXIT_CONFIG
    }
}

/// Parse `args` (program name first), run, and return the process exit code.
pub fn main_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(out) => {
            let sim = &out.simulation;
            match out.records.last() {
                Some(r) => println!(
                    "step {} time {:.6e} rel_energy_err {:.6e} rel_pv_err {:.6e}",
                    sim.step, sim.time, r.rel_energy_err, r.rel_pv_err
                ),
                None => println!("step {} time {:.6e}", sim.step, sim.time),
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
