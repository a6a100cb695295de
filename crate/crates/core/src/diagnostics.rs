//! Conservation and consistency diagnostics.

use std::io::Write;

use crate::dynamics::{State, ModelParams};
use crate::error::{Result, VflError};
use crate::geometry::{Geometry, Vec2, VoronoiCell};
use crate::integrator::{Observer, Simulation};
use crate::operators::{curl_cell_z, div_cell, div_field, edge_average_vec, grad_edge, loop_stencil, perp};

/// Relative tolerance below which an edge counts as degenerate in the
/// closed-loop stencil.
pub const DEGENERATE_EDGE: f64 = 1e-9;

/// One row of the diagnostics time series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub rel_energy_err: f64,
    pub total_pv: f64,
    pub rel_pv_err: f64,
    pub enstrophy: f64,
    pub rel_enstrophy_err: f64,
    pub mass: f64,
    pub momentum: Vec2,
    pub h_min: f64,
    pub h_max: f64,
    /// `Σ_α (ζ_α + f₀)`.
    pub total_vorticity: f64,
    pub rel_tv_err: f64,
    pub htilde_min: f64,
    pub htilde_max: f64,
}

pub const CSV_HEADER: &str =
    "step,time,energy,rel_energy_err,total_pv,rel_pv_err,enstrophy,rel_enstrophy_err,mass,mom_x,mom_y,h_min,h_max";

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        let vals = [
            self.time,
            self.energy,
            self.rel_energy_err,
            self.total_pv,
            self.rel_pv_err,
            self.enstrophy,
            self.rel_enstrophy_err,
            self.mass,
            self.momentum.x,
            self.momentum.y,
            self.h_min,
            self.h_max,
        ];
        let mut s = self.step.to_string();
        for v in vals {
            s.push_str(&format!(",{v:.16e}"));
        }
        s
    }
}

pub fn write_csv(records: &[DiagnosticsRecord], out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Relative vorticity per cell. In 2D the curl of the edge-averaged velocity;
/// in 1D the centered difference `(V_{α+1} − V_{α−1}) / (X_{α+1} − X_{α−1})`.
pub fn relative_vorticity(state: &State, geom: &Geometry) -> Vec<f64> {
    if geom.domain.dim == 1 {
        return geom
            .cells
            .iter()
            .map(|c| {
                let (r, l) = (&c.edges[0], &c.edges[1]);
                (state.velocities[r.neighbor].y - state.velocities[l.neighbor].y) / (r.distance + l.distance)
            })
            .collect();
    }
    let v = edge_average_vec(&state.velocities, &state.masses, &geom.cells);
    geom.cells.iter().zip(&v.values).map(|(c, vals)| curl_cell_z(vals, c)).collect()
}

/// `q = (ζ + f₀) / h̄`.
pub fn potential_vorticity(zeta: &[f64], hbar: &[f64], f0: f64) -> Result<Vec<f64>> {
    zeta.iter()
        .zip(hbar)
        .enumerate()
        .map(|(a, (z, h))| if *h > 0.0 { Ok((z + f0) / h) } else { Err(VflError::NonpositiveThickness(a, *h)) })
        .collect()
}

/// Divergence of the edge-averaged velocity per cell.
pub fn divergence_diag(state: &State, geom: &Geometry) -> Vec<f64> {
    let mut vel = state.velocities.clone();
    if geom.domain.dim == 1 {
        vel.iter_mut().for_each(|u| u.y = 0.0);
    }
    div_field(&edge_average_vec(&vel, &state.masses, &geom.cells), &geom.cells)
}

/// `(1/A) Σ_i u_i · (w_{i+1} − w_{i−1})` over the non-degenerate edges of a
/// cell, with `w = u × k`.
pub fn gamma_cell(u_edge: &[Vec2], cell: &VoronoiCell) -> f64 {
    let tol = DEGENERATE_EDGE * cell.perimeter();
    let u: Vec<Vec2> = cell.edges.iter().zip(u_edge).filter(|(e, _)| e.length > tol).map(|(_, u)| *u).collect();
    let w: Vec<Vec2> = u.iter().map(|&v| -perp(v)).collect();
    loop_stencil(&u, &w, |a, b| a.dot(&b)) / cell.area
}

/// `Γ_α` for every cell (2D only).
pub fn gamma_term(state: &State, geom: &Geometry) -> Result<Vec<f64>> {
    if geom.domain.dim != 2 {
        return Err(VflError::Unsupported(geom.domain.dim));
    }
    let v = edge_average_vec(&state.velocities, &state.masses, &geom.cells);
    Ok(geom.cells.iter().zip(&v.values).map(|(c, vals)| gamma_cell(vals, c)).collect())
}

/// Cellwise fields entering the vorticity and divergence equations at one
/// instant (2D).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub time: f64,
    pub zeta: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// `div(grad_edge h̃)`.
    pub div_grad_h: Vec<f64>,
    /// `div(k × U)` of the edge-averaged velocity.
    pub div_perp: Vec<f64>,
}

pub fn sample_fields(time: f64, state: &State, geom: &Geometry, htilde: &[f64]) -> Result<FieldSample> {
    let gamma = gamma_term(state, geom)?;
    let v = edge_average_vec(&state.velocities, &state.masses, &geom.cells);
    let gh = grad_edge(htilde, &geom.cells);
    let cells = &geom.cells;
    Ok(FieldSample {
        time,
        zeta: cells.iter().zip(&v.values).map(|(c, vals)| curl_cell_z(vals, c)).collect(),
        delta: cells.iter().zip(&v.values).map(|(c, vals)| div_cell(vals, c)).collect(),
        gamma,
        div_grad_h: div_field(&gh, cells),
        div_perp: div_field(&v.map(perp), cells),
    })
}

/// `[(ζ+f₀)^{n+1} − (ζ+f₀)^n]/Δt + (ζ+f₀)δ` with the product at the half step.
pub fn vorticity_residual(a: &FieldSample, b: &FieldSample, dt: f64, f0: f64) -> Vec<f64> {
    (0..a.zeta.len())
        .map(|i| {
            let abs_half = 0.5 * (a.zeta[i] + b.zeta[i]) + f0;
            let delta_half = 0.5 * (a.delta[i] + b.delta[i]);
            (b.zeta[i] - a.zeta[i]) / dt + abs_half * delta_half
        })
        .collect()
}

/// `Dδ/Dt + δ² − Γ + g div(grad h̃) + f₀ div(k × U)`, centered in time.
pub fn divergence_residual(a: &FieldSample, b: &FieldSample, dt: f64, g: f64, f0: f64) -> Vec<f64> {
    (0..a.delta.len())
        .map(|i| {
            let mid = |x: &[f64], y: &[f64]| 0.5 * (x[i] + y[i]);
            let d = mid(&a.delta, &b.delta);
            (b.delta[i] - a.delta[i]) / dt + d * d - mid(&a.gamma, &b.gamma)
                + g * mid(&a.div_grad_h, &b.div_grad_h)
                + f0 * mid(&a.div_perp, &b.div_perp)
        })
        .collect()
}

/// Geostrophic imbalance `V + a_x / f₀` per site, with `a` the model's
/// pressure acceleration (so `−a_x/f₀` plays the role of `(g/f₀) ∂h/∂x`).
pub fn balance_residual(state: &State, acceleration: &[Vec2], f0: f64) -> Vec<f64> {
    state.velocities.iter().zip(acceleration).map(|(u, a)| u.y + a.x / f0).collect()
}

fn relative(x: f64, x0: f64) -> f64 {
    if x0 == 0.0 {
        x - x0
    } else {
        (x - x0) / x0.abs()
    }
}

/// Collects a [`DiagnosticsRecord`] at each diagnostics call. Relative errors
/// are taken against `baseline`, or the first record when it is unset.
#[derive(Debug, Default)]
pub struct Recorder {
    pub records: Vec<DiagnosticsRecord>,
    pub baseline: Option<DiagnosticsRecord>,
}

impl Recorder {
    pub fn with_baseline(baseline: DiagnosticsRecord) -> Self {
        Self { records: Vec::new(), baseline: Some(baseline) }
    }

    pub fn record(&mut self, sim: &Simulation) -> Result<()> {
        let first = self.baseline.as_ref().or(self.records.first());
        let rec = compute_record(sim, &sim.params, first)?;
        self.records.push(rec);
        Ok(())
    }
}

impl Observer for Recorder {
    fn diagnostics(&mut self, sim: &Simulation) -> Result<()> {
        self.record(sim)
    }
}

/// Diagnostics for the current state; relative errors are taken against
/// `first` (or are zero when `first` is `None`).
pub fn compute_record(sim: &Simulation, params: &ModelParams, first: Option<&DiagnosticsRecord>) -> Result<DiagnosticsRecord> {
    let eval = sim.evaluation();
    let state = &sim.state;
    let geom = &eval.geometry;
    let hbar = &eval.regularized.hbar;
    let ht = &eval.regularized.htilde;
    let zeta = relative_vorticity(state, geom);
    let q = potential_vorticity(&zeta, hbar, params.f0)?;
    let energy = sim.energy();
    let total_pv: f64 = q.iter().zip(&state.masses).map(|(q, m)| q * m).sum();
    let enstrophy: f64 = q.iter().map(|q| q * q).sum();
    let total_vorticity: f64 = zeta.iter().map(|z| z + params.f0).sum();
    let fold = |v: &[f64]| (v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let (h_min, h_max) = fold(hbar);
    let (htilde_min, htilde_max) = fold(ht);
    let base = first.map(|f| (f.energy, f.total_pv, f.enstrophy, f.total_vorticity));
    let (e0, pv0, en0, tv0) = base.unwrap_or((energy, total_pv, enstrophy, total_vorticity));
    Ok(DiagnosticsRecord {
        step: sim.step,
        time: sim.time,
        energy,
        rel_energy_err: relative(energy, e0),
        total_pv,
        rel_pv_err: relative(total_pv, pv0),
        enstrophy,
        rel_enstrophy_err: relative(enstrophy, en0),
        mass: state.total_mass(),
        momentum: state.momentum(),
        h_min,
        h_max,
        total_vorticity,
        rel_tv_err: relative(total_vorticity, tv0),
        htilde_min,
        htilde_max,
    })
}
