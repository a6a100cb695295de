use std::f64::consts::PI;

use nalgebra::DMatrix;
use vfl::diagnostics::Recorder;
use vfl::dynamics::{ModelParams, State};
use vfl::geometry::{collision_threshold, Domain, Vec2};
use vfl::harness::{build_simulation, ExperimentConfig};
use vfl::integrator::{run, Simulation, StepConfig};

fn lattice_1d(n: usize, l: f64) -> Vec<Vec2> {
    let dx = l / n as f64;
    (0..n).map(|i| Vec2::new(i as f64 * dx, 0.0)).collect()
}

fn bump_state(n: usize, amp: f64) -> State {
    let l = 2.0 * PI;
    let positions = lattice_1d(n, l);
    let masses = positions.iter().map(|p| 1.0 + amp * (-20.0 * (p.x - PI).powi(2) / (l * l)).exp()).collect();
    State { domain: Domain::new(1, l).unwrap(), velocities: vec![Vec2::zeros(); n], positions, masses }
}

fn sim_1d(state: State, f0: f64) -> Simulation {
    let dx = state.domain.length / state.len() as f64;
    let params = ModelParams::new(4.0 * PI * PI, f0, dx, 1.0 / dx).unwrap();
    Simulation::new(state, params, collision_threshold(dx)).unwrap()
}

#[test]
fn free_drift_on_uniform_lattice() {
    let mut state = bump_state(32, 0.0);
    state.velocities.iter_mut().for_each(|u| *u = Vec2::new(0.3, 0.7));
    let x0 = state.positions.clone();
    let mut sim = sim_1d(state, 0.0);
    let dt = 0.01;
    sim.verlet_step(dt).unwrap();
    for (x, x0) in sim.state.positions.iter().zip(&x0) {
        let d = sim.state.domain.displacement(*x0, *x);
        assert!((d.x - 0.003).abs() < 1e-12 && d.y == 0.0);
    }
    for u in &sim.state.velocities {
        assert!((u - Vec2::new(0.3, 0.7)).norm() < 1e-12);
    }
}

#[test]
fn inertial_circles_second_order() {
    let l = 4.0;
    let n = 4;
    let dx = l / n as f64;
    let positions: Vec<Vec2> = (0..n * n).map(|k| Vec2::new((k % n) as f64 * dx, (k / n) as f64 * dx)).collect();
    let u0 = 0.5;
    let f0 = 2.0;
    let err = |dt: f64| {
        let state = State {
            domain: Domain::new(2, l).unwrap(),
            velocities: vec![Vec2::new(u0, 0.0); n * n],
            masses: vec![1.0; n * n],
            positions: positions.clone(),
        };
        let params = ModelParams::new(1.0, f0, dx, 1.0 / (dx * dx)).unwrap();
        let mut sim = Simulation::new(state, params, 0.0).unwrap();
        let steps = (1.0 / dt).round() as usize;
        let mut worst: f64 = 0.0;
        for _ in 0..steps {
            sim.verlet_step(dt).unwrap();
            let t = sim.time;
            let off = Vec2::new(u0 / f0 * (f0 * t).sin(), u0 / f0 * ((f0 * t).cos() - 1.0));
            for (x, x0) in sim.state.positions.iter().zip(&positions) {
                worst = worst.max(sim.state.domain.displacement(x0 + off, *x).norm());
            }
            for u in &sim.state.velocities {
                assert!((u.norm() - u0).abs() < 1e-12);
            }
        }
        worst
    };
    let (e1, e2) = (err(0.02), err(0.01));
    assert!(e1 < 1e-3, "{e1}");
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn one_step_map_has_unit_jacobian() {
    let n = 8;
    let state = bump_state(n, 1e-3);
    // no smoothing: every solve is then exact and the map is smooth to
    // rounding
    let dx = state.domain.length / n as f64;
    let params = ModelParams::new(4.0 * PI * PI, 0.0, 0.0, 1.0 / dx).unwrap();
    let base = Simulation::new(state, params, 0.0).unwrap();
    let dt = 0.01;
    let x0: Vec<f64> = base.state.positions.iter().map(|p| p.x).collect();
    let p0: Vec<f64> = base.state.velocities.iter().zip(&base.state.masses).map(|(u, m)| u.x * m).collect();
    let map = |z: &[f64]| -> Vec<f64> {
        let mut s = base.state.clone();
        for i in 0..n {
            s.positions[i].x = z[i];
            s.velocities[i].x = z[n + i] / s.masses[i];
        }
        let mut sim = Simulation::new(s, base.params.clone(), 0.0).unwrap();
        sim.verlet_step(dt).unwrap();
        let mut out: Vec<f64> = Vec::with_capacity(2 * n);
        for i in 0..n {
            // unwrap relative to the input position
            let d = sim.state.domain.displacement(Vec2::new(z[i], 0.0), sim.state.positions[i]);
            out.push(z[i] + d.x);
        }
        for i in 0..n {
            out.push(sim.state.velocities[i].x * sim.state.masses[i]);
        }
        out
    };
    let z0: Vec<f64> = x0.iter().chain(&p0).copied().collect();
    // fourth-order central differences
    let h = 1e-3;
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..2 * n {
        let at = |k: f64| {
            let mut z = z0.clone();
            z[j] += k * h;
            map(&z)
        };
        let (p1, m1, p2, m2) = (at(1.0), at(-1.0), at(2.0), at(-2.0));
        for i in 0..2 * n {
            jac[(i, j)] = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h);
        }
    }
    let det = jac.determinant();
    assert!((det - 1.0).abs() < 1e-10, "det {det}");
}

#[test]
fn reversible_without_rotation() {
    let mut cfg = ExperimentConfig::defaults(1).unwrap();
    cfg.f0 = 0.0;
    cfg.n = 64;
    let mut sim = build_simulation(&cfg).unwrap();
    let x0 = sim.state.positions.clone();
    for _ in 0..200 {
        sim.verlet_step(cfg.dt).unwrap();
    }
    sim.state.velocities.iter_mut().for_each(|u| *u = -*u);
    for _ in 0..200 {
        sim.verlet_step(cfg.dt).unwrap();
    }
    for (x, x0) in sim.state.positions.iter().zip(&x0) {
        assert!(sim.state.domain.displacement(*x0, *x).norm() < 1e-8 * cfg.length);
    }
}

#[test]
fn second_order_against_reference() {
    let mut cfg = ExperimentConfig::defaults(1).unwrap();
    cfg.n = 64;
    let t_end = 0.5;
    let run_to = |dt: f64| {
        let mut sim = build_simulation(&cfg).unwrap();
        for _ in 0..(t_end / dt).round() as usize {
            sim.verlet_step(dt).unwrap();
        }
        sim.state
    };
    let reference = run_to(0.02 / 64.0);
    let err = |s: &State| {
        s.positions
            .iter()
            .zip(&reference.positions)
            .map(|(a, b)| s.domain.displacement(*b, *a).norm())
            .fold(0.0, f64::max)
    };
    let e1 = err(&run_to(0.02));
    let e2 = err(&run_to(0.01));
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio} ({e1} vs {e2})");
}

#[test]
fn zero_steps_is_identity_and_runs_are_deterministic() {
    let mut cfg = ExperimentConfig::defaults(1).unwrap();
    cfg.n = 32;
    let mut sim = build_simulation(&cfg).unwrap();
    let before = sim.state.clone();
    run(&mut sim, &StepConfig { dt: 0.01, steps: 0, diag_every: 1, snap_every: 0 }, &mut ()).unwrap();
    assert_eq!(sim.state, before);

    let series = || {
        let mut sim = build_simulation(&cfg).unwrap();
        let mut rec = Recorder::default();
        run(&mut sim, &StepConfig { dt: 0.01, steps: 50, diag_every: 5, snap_every: 0 }, &mut rec).unwrap();
        rec.records
    };
    assert_eq!(series(), series());
}

#[test]
fn rotation_stage_keeps_kinetic_energy() {
    let mut state = bump_state(16, 0.0);
    state.velocities.iter_mut().enumerate().for_each(|(i, u)| *u = Vec2::new(0.0, (i as f64).sin()));
    let mut sim = sim_1d(state, 2.0 * PI);
    let ke0 = sim.state.kinetic_energy();
    for _ in 0..10 {
        sim.verlet_step(0.01).unwrap();
    }
    // lattice at rest in x: only the rotation acts until U builds up
    assert!(sim.state.kinetic_energy() > 0.0);
    let mut v = sim.state.velocities.clone();
    let ke = sim.state.kinetic_energy();
    vfl::integrator::coriolis_rotation(&mut v, 2.0 * PI, 0.123);
    let ke_rot: f64 = v.iter().zip(&sim.state.masses).map(|(u, m)| 0.5 * m * u.norm_squared()).sum();
    assert!((ke_rot - ke).abs() < 1e-14 * ke);
    assert!(ke0 > 0.0);
}
