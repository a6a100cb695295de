//! Experiment configuration, initial conditions and drivers.

pub mod cli;
pub mod io;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use crate::diagnostics::{compute_record, DiagnosticsRecord, Recorder};
use crate::dynamics::{evaluate, ForceModel, ModelParams, State};
use crate::error::{Result, VflError};
use crate::geometry::{collision_threshold, Domain, Geometry, Vec2};
use crate::integrator::{run, Observer, Simulation, StepConfig};
use crate::operators::{edge_average, grad_cell, perp};
use crate::regularization::{cell_thickness, MassMatrix};

/// Full parameter set for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: u8,
    /// Sites per axis.
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub length: f64,
    pub g: f64,
    /// Reference thickness `H`.
    pub h0: f64,
    pub f0: f64,
    /// `α̂ / dx_ref`.
    pub alpha_mult: f64,
    /// Relative thickness perturbation.
    pub amplitude: f64,
    /// Gaussian sharpness `β` in `exp(−β (X − L/2)² / L²)`.
    pub beta: f64,
    /// Vortex width as a fraction of `L`.
    pub sigma: f64,
    pub out_dir: Option<PathBuf>,
    pub diag_every: usize,
    pub snap_every: usize,
    pub mesh: bool,
    pub force: ForceModel,
    pub mass: MassMatrix,
    /// Carried for completeness; every initial condition is deterministic.
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn defaults(experiment: u8) -> Result<Self> {
        let base = Self {
            experiment,
            n: 128,
            dt: 0.01,
            steps: 10_000,
            length: 2.0 * PI,
            g: 4.0 * PI * PI,
            h0: 1.0,
            f0: 2.0 * PI,
            alpha_mult: 1.0,
            amplitude: 0.1,
            beta: 800.0,
            sigma: 0.1,
            out_dir: None,
            diag_every: 10,
            snap_every: 0,
            mesh: false,
            force: ForceModel::Exact,
            mass: MassMatrix::Consistent,
            seed: 0,
        };
        match experiment {
            1 => Ok(base),
            2 => Ok(Self { n: 512, steps: 200, amplitude: 0.01, beta: 1000.0, diag_every: 1, ..base }),
            3 => Ok(Self {
                n: 32,
                dt: 0.05,
                g: 100.0,
                alpha_mult: 4.0,
                amplitude: 0.1,
                diag_every: 10,
                mass: MassMatrix::Lumped,
                ..base
            }),
            e => Err(VflError::Config(format!("experiment must be 1, 2 or 3, got {e}"))),
        }
    }

    pub fn dim(&self) -> usize {
        if self.experiment == 3 {
            2
        } else {
            1
        }
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::new(self.dim(), self.length)
    }

    /// `ρ = 1 / dx^d`: a unit mass fills one reference cell to unit depth.
    pub fn density(&self) -> f64 {
        1.0 / self.dx().powi(self.dim() as i32)
    }

    pub fn params(&self) -> Result<ModelParams> {
        let mut p = ModelParams::new(self.g, self.f0, self.alpha_mult * self.dx(), self.density())?;
        p.force = self.force;
        p.mass = self.mass;
        Ok(p)
    }

    pub fn step_config(&self) -> StepConfig {
        StepConfig { dt: self.dt, steps: self.steps, diag_every: self.diag_every, snap_every: self.snap_every }
    }

    pub fn validate(&self) -> Result<()> {
        Self::defaults(self.experiment)?;
        let min_n = if self.dim() == 1 { 2 } else { 3 };
        let bad = |msg: String| Err(VflError::Config(msg));
        if self.n < min_n {
            return bad(format!("n must be at least {min_n}, got {}", self.n));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad(format!("length must be positive, got {}", self.length));
        }
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return bad(format!("h0 must be positive, got {}", self.h0));
        }
        if !(self.alpha_mult >= 1.0 && self.alpha_mult.is_finite()) {
            return bad(format!("alpha-mult must be at least 1, got {}", self.alpha_mult));
        }
        if !(self.amplitude > -1.0 && self.amplitude.is_finite()) {
            return bad(format!("amplitude must exceed -1, got {}", self.amplitude));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        self.params().map(|_| ())
    }

    /// `key=value` pairs in the config-file vocabulary.
    pub fn to_pairs(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("experiment", self.experiment.to_string());
        m.insert("n", self.n.to_string());
        m.insert("dt", format!("{:e}", self.dt));
        m.insert("steps", self.steps.to_string());
        m.insert("length", format!("{:e}", self.length));
        m.insert("g", format!("{:e}", self.g));
        m.insert("h0", format!("{:e}", self.h0));
        m.insert("f0", format!("{:e}", self.f0));
        m.insert("alpha-mult", format!("{:e}", self.alpha_mult));
        m.insert("amplitude", format!("{:e}", self.amplitude));
        m.insert("beta", format!("{:e}", self.beta));
        m.insert("sigma", format!("{:e}", self.sigma));
        m.insert("diag-every", self.diag_every.to_string());
        m.insert("snap-every", self.snap_every.to_string());
        m.insert("mesh", self.mesh.to_string());
        m.insert("force", match self.force {
            ForceModel::Exact => "exact".into(),
            ForceModel::EdgeAverage => "edge-average".into(),
        });
        m.insert("mass", match self.mass {
            MassMatrix::Consistent => "consistent".into(),
            MassMatrix::Lumped => "lumped".into(),
        });
        m.insert("seed", self.seed.to_string());
        if let Some(d) = &self.out_dir {
            m.insert("out-dir", d.display().to_string());
        }
        m
    }

    /// Apply one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim().parse().map_err(|_| VflError::Config(format!("bad value for {key}: {v:?}")))
        }
        match key {
            "experiment" => self.experiment = num(key, value)?,
            "n" => self.n = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "steps" => self.steps = num(key, value)?,
            "length" => self.length = num(key, value)?,
            "g" => self.g = num(key, value)?,
            "c0" => {
                let c0: f64 = num(key, value)?;
                self.g = c0 * c0 / self.h0;
            }
            "h0" => self.h0 = num(key, value)?,
            "f0" => self.f0 = num(key, value)?,
            "alpha-mult" => self.alpha_mult = num(key, value)?,
            "amplitude" => self.amplitude = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "out-dir" => self.out_dir = Some(PathBuf::from(value.trim())),
            "diag-every" => self.diag_every = num(key, value)?,
            "snap-every" => self.snap_every = num(key, value)?,
            "mesh" => self.mesh = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "mass" => {
                self.mass = match value.trim() {
                    "consistent" => MassMatrix::Consistent,
                    "lumped" => MassMatrix::Lumped,
                    v => return Err(VflError::Config(format!("unknown mass matrix {v:?}"))),
                }
            }
            "force" => {
                self.force = match value.trim() {
                    "exact" => ForceModel::Exact,
                    "edge-average" => ForceModel::EdgeAverage,
                    v => return Err(VflError::Config(format!("unknown force model {v:?}"))),
                }
            }
            _ => return Err(VflError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }
}

fn lattice_1d(cfg: &ExperimentConfig) -> Vec<Vec2> {
    let dx = cfg.dx();
    (0..cfg.n).map(|i| Vec2::new(i as f64 * dx, 0.0)).collect()
}

fn gaussian_1d(cfg: &ExperimentConfig, x: f64) -> f64 {
    let l = cfg.length;
    let d = x - 0.5 * l;
    cfg.amplitude * (-cfg.beta * d * d / (l * l)).exp()
}

/// Experiment 1: Gaussian mass bump on a uniform 1D lattice, at rest.
pub fn init_experiment1(cfg: &ExperimentConfig) -> Result<State> {
    let positions = lattice_1d(cfg);
    let masses = positions.iter().map(|p| 1.0 + gaussian_1d(cfg, p.x)).collect();
    Ok(State { domain: cfg.domain()?, velocities: vec![Vec2::zeros(); cfg.n], positions, masses })
}

/// Experiment 2: Gaussian mass bump with `V = −(g/f₀) grad(H̄⁰)`, using the
/// weak cellwise gradient of the initial thickness.
pub fn init_experiment2(cfg: &ExperimentConfig) -> Result<State> {
    let domain = cfg.domain()?;
    let positions = lattice_1d(cfg);
    let masses: Vec<f64> = positions.iter().map(|p| 1.0 + gaussian_1d(cfg, p.x)).collect();
    let geom = Geometry::build(domain, &positions, 0.0)?;
    let hbar = cell_thickness(&masses, &geom, cfg.density())?;
    let grad = grad_cell(&edge_average(&hbar, &masses, &geom.cells), &geom.cells);
    let scale = if cfg.f0 == 0.0 { 0.0 } else { -cfg.g / cfg.f0 };
    let velocities = grad.iter().map(|g| Vec2::new(0.0, scale * g.x)).collect();
    Ok(State { domain, positions, velocities, masses })
}

/// Initial thickness of experiment 3 at lattice node `(i, j)`.
pub fn vortex_thickness(cfg: &ExperimentConfig, i: usize, j: usize) -> f64 {
    let dx = cfg.dx();
    let half = cfg.n as f64 / 2.0;
    let wrap = |k: usize| {
        let d = k as f64 - half;
        // periodic distance to the centre, exact under k -> n - k
        if d.abs() > half {
            cfg.n as f64 - d.abs()
        } else {
            d.abs()
        }
    };
    let (rx, ry) = (wrap(i) * dx, wrap(j) * dx);
    let sigma = cfg.sigma * cfg.length;
    cfg.h0 * (1.0 + cfg.amplitude * (-(rx * rx + ry * ry) / (2.0 * sigma * sigma)).exp())
}

/// Experiment 3: Gaussian vortex on the 2D lattice, in discrete geostrophic
/// balance `f₀ k × U = a` with the model's own pressure acceleration `a`.
pub fn init_experiment3(cfg: &ExperimentConfig) -> Result<State> {
    let domain = cfg.domain()?;
    let n = cfg.n;
    let dx = cfg.dx();
    let mut positions = Vec::with_capacity(n * n);
    let mut masses = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            positions.push(Vec2::new(i as f64 * dx, j as f64 * dx));
            // m = ρ h A_ref with ρ A_ref = 1
            masses.push(vortex_thickness(cfg, i, j));
        }
    }
    let mut state = State { domain, velocities: vec![Vec2::zeros(); n * n], positions, masses };
    if cfg.f0 > 0.0 {
        let params = cfg.params()?;
        let ev = evaluate(domain, &state.positions, &state.masses, &params, 0.0)?;
        state.velocities = ev.acceleration.iter().map(|a| -perp(*a) / cfg.f0).collect();
    }
    Ok(state)
}

pub fn initial_state(cfg: &ExperimentConfig) -> Result<State> {
    match cfg.experiment {
        1 => init_experiment1(cfg),
        2 => init_experiment2(cfg),
        3 => init_experiment3(cfg),
        e => Err(VflError::Config(format!("experiment must be 1, 2 or 3, got {e}"))),
    }
}

/// Validated configuration to a ready-to-step simulation.
pub fn build_simulation(cfg: &ExperimentConfig) -> Result<Simulation> {
    cfg.validate()?;
    Simulation::new(initial_state(cfg)?, cfg.params()?, collision_threshold(cfg.dx()))
}

/// Result of [`run_experiment`].
#[derive(Debug)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub simulation: Simulation,
}

struct FileObserver<'a> {
    recorder: Recorder,
    baseline: DiagnosticsRecord,
    cfg: &'a ExperimentConfig,
}

impl Observer for FileObserver<'_> {
    fn diagnostics(&mut self, sim: &Simulation) -> Result<()> {
        self.recorder.record(sim)
    }

    fn snapshot(&mut self, sim: &Simulation) -> Result<()> {
        if let Some(dir) = &self.cfg.out_dir {
            io::write_snapshot_file(dir, self.cfg, sim, &self.baseline)?;
            if self.cfg.mesh {
                io::write_mesh_file(dir, sim)?;
            }
        }
        Ok(())
    }
}

/// Run `sim` up to step `cfg.steps`, writing outputs when `cfg.out_dir` is
/// set. Relative errors are measured against `baseline`, defaulting to the
/// diagnostics of `sim` itself. The diagnostics file is written even if the
/// run aborts part-way.
pub fn run_simulation(cfg: &ExperimentConfig, mut sim: Simulation, baseline: Option<DiagnosticsRecord>) -> Result<RunOutput> {
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let baseline = match baseline {
        Some(b) => b,
        None => compute_record(&sim, &sim.params, None)?,
    };
    let recorder = Recorder::with_baseline(baseline.clone());
    let mut obs = FileObserver { recorder, baseline, cfg };
    let mut step_cfg = cfg.step_config();
    step_cfg.steps = cfg.steps.saturating_sub(sim.step);
    let outcome = run(&mut sim, &step_cfg, &mut obs);
    let records = obs.recorder.records;
    if let Some(dir) = &cfg.out_dir {
        io::write_diagnostics_file(&dir.join("diagnostics.csv"), &records)?;
    }
    outcome?;
    Ok(RunOutput { records, simulation: sim })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let sim = build_simulation(cfg)?;
    run_simulation(cfg, sim, None)
}
