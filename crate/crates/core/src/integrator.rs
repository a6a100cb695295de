//! Störmer–Verlet time stepping with an exact Coriolis rotation split
//! symmetrically around the kick–drift–kick core.

use crate::dynamics::{evaluate, Evaluation, ModelParams, State};
use crate::error::{Result, VflError};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub steps: usize,
    /// Steps between diagnostics records; 0 disables them.
    pub diag_every: usize,
    /// Steps between snapshots; 0 disables them.
    pub snap_every: usize,
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(VflError::Config(format!("time step must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Rotate velocities by the exact solution of `dU/dt = −f₀ k × U` over `t`.
pub fn coriolis_rotation(velocities: &mut [Vec2], f0: f64, t: f64) {
    if f0 == 0.0 {
        return;
    }
    let (s, c) = (f0 * t).sin_cos();
    for u in velocities {
        *u = Vec2::new(c * u.x + s * u.y, -s * u.x + c * u.y);
    }
}

/// A running simulation: particle state plus the force evaluation at the
/// current positions, reused by the next step's first kick.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub state: State,
    pub params: ModelParams,
    pub min_separation: f64,
    pub step: usize,
    pub time: f64,
    eval: Evaluation,
}

impl Simulation {
    pub fn new(state: State, params: ModelParams, min_separation: f64) -> Result<Self> {
        params.validate()?;
        let eval = evaluate(state.domain, &state.positions, &state.masses, &params, min_separation)?;
        Ok(Self { state, params, min_separation, step: 0, time: 0.0, eval })
    }

    /// Geometry, thickness and acceleration at the current positions.
    pub fn evaluation(&self) -> &Evaluation {
        &self.eval
    }

    pub fn energy(&self) -> f64 {
        self.state.kinetic_energy() + self.eval.potential
    }

    /// One step of size `dt`. On error the simulation is left unchanged.
    pub fn verlet_step(&mut self, dt: f64) -> Result<()> {
        let f0 = self.params.f0;
        let dim = self.state.domain.dim;
        let mut vel = self.state.velocities.clone();
        coriolis_rotation(&mut vel, f0, 0.5 * dt);
        for (u, a) in vel.iter_mut().zip(&self.eval.acceleration) {
            *u += 0.5 * dt * a;
        }
        let domain = self.state.domain;
        let pos: Vec<Vec2> = self
            .state
            .positions
            .iter()
            .zip(&vel)
            .map(|(x, u)| {
                let step = if dim == 1 { Vec2::new(u.x, 0.0) } else { *u };
                domain.wrap(x + dt * step)
            })
            .collect();
        if let Some(i) = pos.iter().position(|x| !(x.x.is_finite() && x.y.is_finite())) {
            return Err(VflError::NonFinite(i));
        }
        let eval = evaluate(domain, &pos, &self.state.masses, &self.params, self.min_separation)?;
        for (u, a) in vel.iter_mut().zip(&eval.acceleration) {
            *u += 0.5 * dt * a;
        }
        coriolis_rotation(&mut vel, f0, 0.5 * dt);
        if let Some(i) = vel.iter().position(|u| !(u.x.is_finite() && u.y.is_finite())) {
            return Err(VflError::NonFinite(i));
        }
        self.state.positions = pos;
        self.state.velocities = vel;
        self.eval = eval;
        self.step += 1;
        self.time = self.step as f64 * dt;
        Ok(())
    }
}

/// Receives the simulation at the configured cadences.
pub trait Observer {
    fn diagnostics(&mut self, _sim: &Simulation) -> Result<()> {
        Ok(())
    }
    fn snapshot(&mut self, _sim: &Simulation) -> Result<()> {
        Ok(())
    }
}

impl Observer for () {}

/// Advance `cfg.steps` steps, notifying `obs` at step 0 and at every multiple
/// of each cadence.
pub fn run(sim: &mut Simulation, cfg: &StepConfig, obs: &mut dyn Observer) -> Result<()> {
    cfg.validate()?;
    let notify = |sim: &Simulation, obs: &mut dyn Observer| -> Result<()> {
        if cfg.diag_every > 0 && sim.step.is_multiple_of(cfg.diag_every) {
            obs.diagnostics(sim)?;
        }
        if cfg.snap_every > 0 && sim.step.is_multiple_of(cfg.snap_every) {
            obs.snapshot(sim)?;
        }
        Ok(())
    };
    notify(sim, obs)?;
    for _ in 0..cfg.steps {
        sim.verlet_step(cfg.dt)?;
        notify(sim, obs)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_preserves_speed() {
        let mut v = vec![Vec2::new(0.3, -1.1), Vec2::new(2.0, 0.5)];
        let before: Vec<f64> = v.iter().map(|u| u.norm()).collect();
        coriolis_rotation(&mut v, 2.0, 0.37);
        for (u, b) in v.iter().zip(before) {
            assert!((u.norm() - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rotation_matches_coriolis_direction() {
        // dU/dt = f V, dV/dt = −f U
        let mut v = vec![Vec2::new(0.0, 1.0)];
        coriolis_rotation(&mut v, 1.0, 1e-6);
        assert!((v[0].x - 1e-6).abs() < 1e-15);
    }
}
