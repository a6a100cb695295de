//! Semi-discrete equations of motion: cell mass conservation, pressure force
//! and total energy.

use crate::error::{Result, VflError};
use crate::geometry::{Domain, Elements, Geometry, SiteState, Vec2, VoronoiCell};
use crate::operators::edge_average;
use crate::regularization::{
    conjugate_residual, regularize_thickness_with, scaled_basis_gradients, triangle_vertices, MassMatrix,
    Regularized, SOLVER_TOLERANCE,
};

/// Physical parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub g: f64,
    pub f0: f64,
    /// Regularization length `α̂`.
    pub alpha: f64,
    /// Reference density `ρ` in `h̄ = m / (ρ A)`.
    pub density: f64,
    /// Bottom height per particle; empty means flat.
    pub bottom: Vec<f64>,
    pub force: ForceModel,
    pub mass: MassMatrix,
}

impl ModelParams {
    pub fn new(g: f64, f0: f64, alpha: f64, density: f64) -> Result<Self> {
        let p = Self {
            g,
            f0,
            alpha,
            density,
            bottom: Vec::new(),
            force: ForceModel::Exact,
            mass: MassMatrix::Consistent,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(VflError::Config(format!("g must be positive, got {}", self.g)));
        }
        if !(self.f0 >= 0.0 && self.f0.is_finite()) {
            return Err(VflError::Config(format!("f0 must be non-negative, got {}", self.f0)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(VflError::Config(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(VflError::Config(format!("density must be positive, got {}", self.density)));
        }
        Ok(())
    }

    fn bottom(&self, a: usize) -> f64 {
        self.bottom.get(a).copied().unwrap_or(0.0)
    }
}

/// How the integrator computes the pressure acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceModel {
    /// Exact negative gradient of the potential energy, differentiating
    /// through cell areas and the Helmholtz solve.
    Exact,
    /// Edge-average form `−gρ Σ [h̃] dn`, not conservative.
    EdgeAverage,
}

/// Particle cloud, indexed by label.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub domain: Domain,
    pub positions: Vec<Vec2>,
    /// `(U, V)`; in 1D `V` is the meridional velocity.
    pub velocities: Vec<Vec2>,
    pub masses: Vec<f64>,
}

impl State {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn sites(&self) -> Vec<SiteState> {
        (0..self.len())
            .map(|label| SiteState {
                label,
                position: self.positions[label],
                velocity: self.velocities[label],
                mass: self.masses[label],
            })
            .collect()
    }

    /// Build from sites carrying labels `0..n` in any order.
    pub fn from_sites(domain: Domain, sites: &[SiteState]) -> Result<Self> {
        let n = sites.len();
        let mut slots: Vec<Option<SiteState>> = vec![None; n];
        for s in sites {
            match slots.get_mut(s.label) {
                Some(slot @ None) => *slot = Some(*s),
                _ => return Err(VflError::Parse(format!("site labels must be a permutation of 0..{n}"))),
            }
        }
        let sites: Vec<SiteState> = slots.into_iter().map(Option::unwrap).collect();
        if let Some(s) = sites.iter().find(|s| !(s.mass > 0.0)) {
            return Err(VflError::Config(format!("site {} has non-positive mass {}", s.label, s.mass)));
        }
        Ok(Self {
            domain,
            positions: sites.iter().map(|s| domain.wrap(s.position)).collect(),
            velocities: sites.iter().map(|s| s.velocity).collect(),
            masses: sites.iter().map(|s| s.mass).collect(),
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn momentum(&self) -> Vec2 {
        self.masses.iter().zip(&self.velocities).fold(Vec2::zeros(), |acc, (m, u)| acc + *m * u)
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.masses.iter().zip(&self.velocities).map(|(m, u)| m * u.norm_squared()).sum::<f64>()
    }
}

/// Thickness carried forward by cell mass conservation,
/// `h̄^{n+1} = (A^n / A^{n+1}) h̄^n`.
pub fn update_thickness(cells_prev: &[VoronoiCell], cells_next: &[VoronoiCell], h_prev: &[f64]) -> Result<Vec<f64>> {
    cells_prev
        .iter()
        .zip(cells_next)
        .zip(h_prev)
        .map(|((p, n), h)| {
            if !(n.area > 0.0) {
                return Err(VflError::ZeroAreaCell(n.label, n.area));
            }
            Ok(p.area / n.area * h)
        })
        .collect()
}

/// Edge-average pressure acceleration `−gρ Σ_i [h̃]_α^{β_i} dn`. Mass times
/// this sums to zero across the domain.
pub fn pressure_force(htilde: &[f64], cells: &[VoronoiCell], masses: &[f64], params: &ModelParams) -> Vec<Vec2> {
    let avg = edge_average(htilde, masses, cells);
    cells
        .iter()
        .zip(&avg.values)
        .map(|(c, vals)| {
            -params.g * params.density * c.edges.iter().zip(vals).fold(Vec2::zeros(), |acc, (e, &f)| acc + f * e.dn())
        })
        .collect()
}

/// `½ Σ m|U|² + (g/2) Σ m (h̃ + 2 b̄)`.
pub fn total_energy(state: &State, htilde: &[f64], params: &ModelParams) -> f64 {
    state.kinetic_energy() + potential_energy(&state.masses, htilde, params)
}

pub fn potential_energy(masses: &[f64], htilde: &[f64], params: &ModelParams) -> f64 {
    0.5 * params.g
        * masses.iter().zip(htilde).enumerate().map(|(a, (m, h))| m * (h + 2.0 * params.bottom(a))).sum::<f64>()
}

/// Everything derived from one particle configuration.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub geometry: Geometry,
    pub regularized: Regularized,
    /// Pressure acceleration per site.
    pub acceleration: Vec<Vec2>,
    pub potential: f64,
}

/// Geometry, regularization and pressure acceleration at `positions`.
pub fn evaluate(
    domain: Domain,
    positions: &[Vec2],
    masses: &[f64],
    params: &ModelParams,
    min_separation: f64,
) -> Result<Evaluation> {
    let geometry = Geometry::build(domain, positions, min_separation)?;
    let regularized = regularize_thickness_with(masses, &geometry, positions, params.alpha, params.density, params.mass)?;
    let potential = potential_energy(masses, &regularized.htilde, params);
    let acceleration = match params.force {
        ForceModel::Exact => {
            let grad = potential_gradient(&geometry, positions, masses, &regularized, params)?;
            grad.iter().zip(masses).map(|(g, m)| -g / *m).collect()
        }
        ForceModel::EdgeAverage => pressure_force(&regularized.htilde, &geometry.cells, masses, params),
    };
    Ok(Evaluation { geometry, regularized, acceleration, potential })
}

/// `∂V/∂X_α` for `V = (g/2) mᵀ h̃` with `h̃ = A⁻¹ M h̄(X)`.
///
/// With the adjoint `λ = A⁻¹ m`,
/// `dV = (g/2) [λᵀ dM (h̄ − h̃) − α̂² λᵀ dK h̃ + (Mλ)ᵀ dh̄]`.
pub fn potential_gradient(
    geom: &Geometry,
    positions: &[Vec2],
    masses: &[f64],
    reg: &Regularized,
    params: &ModelParams,
) -> Result<Vec<Vec2>> {
    let n = geom.n_sites();
    let sys = &reg.system;
    let rows = sys.a.row_sums();
    let mut lambda: Vec<f64> = masses.iter().zip(&rows).map(|(m, r)| m / r).collect();
    conjugate_residual(&sys.a, masses, &mut lambda, SOLVER_TOLERANCE)?;
    // without smoothing A = M, so Mλ = m exactly
    let m_lambda = if params.alpha == 0.0 { masses.to_vec() } else { sys.m.mul(&lambda) };
    let (hbar, ht) = (&reg.hbar, &reg.htilde);
    let a2 = params.alpha * params.alpha;
    let half_g = 0.5 * params.g;
    let mut grad = vec![Vec2::zeros(); n];

    let lumped = params.mass == MassMatrix::Lumped;
    // cell areas through h̄ = m/(ρA), and through M itself when lumped
    for (a, cell) in geom.cells.iter().enumerate() {
        let w = if lumped { -lambda[a] * ht[a] } else { -m_lambda[a] * hbar[a] / cell.area };
        for e in &cell.edges {
            let s = w * e.length / e.distance;
            grad[a] += s * e.midpoint;
            grad[e.neighbor] -= s * (e.midpoint - e.separation());
        }
    }

    match &geom.elements {
        Elements::Segments(segs) => {
            for s in segs {
                let [i, j] = s.nodes;
                let l = s.length;
                let (ui, uj) = (hbar[i] - ht[i], hbar[j] - ht[j]);
                let (li, lj) = (lambda[i], lambda[j]);
                let q_m = if lumped { 0.0 } else { (2.0 * li * ui + li * uj + lj * ui + 2.0 * lj * uj) / 6.0 };
                let dv_dl = q_m + a2 * (lj - li) * (ht[j] - ht[i]) / (l * l);
                grad[j].x += dv_dl;
                grad[i].x -= dv_dl;
            }
        }
        Elements::Triangles(tri) => {
            for t in &tri.triangles {
                let p = triangle_vertices(t, geom, positions);
                let area = 0.5 * (p[1] - p[0]).perp(&(p[2] - p[0]));
                let g = scaled_basis_gradients(&p);
                let idx = t.nodes;
                let lam = [lambda[idx[0]], lambda[idx[1]], lambda[idx[2]]];
                let hh = [ht[idx[0]], ht[idx[1]], ht[idx[2]]];
                let u = [hbar[idx[0]] - hh[0], hbar[idx[1]] - hh[1], hbar[idx[2]] - hh[2]];
                let coef_m = if lumped {
                    0.0
                } else {
                    ((lam[0] + lam[1] + lam[2]) * (u[0] + u[1] + u[2]) + lam[0] * u[0] + lam[1] * u[1] + lam[2] * u[2])
                        / 12.0
                };
                let gl = g[0] * lam[0] + g[1] * lam[1] + g[2] * lam[2];
                let gh = g[0] * hh[0] + g[1] * hh[1] + g[2] * hh[2];
                let stiff = gl.dot(&gh) / (4.0 * area);
                for k in 0..3 {
                    let (k1, k2) = ((k + 1) % 3, (k + 2) % 3);
                    let cl = lam[k1] - lam[k2];
                    let ch = hh[k1] - hh[k2];
                    let dgg = Vec2::new(cl * gh.y + ch * gl.y, -cl * gh.x - ch * gl.x);
                    let d_area = 0.5 * g[k];
                    let d_stiff = dgg / (4.0 * area) - (stiff / area) * d_area;
                    grad[idx[k]] += coef_m * d_area - a2 * d_stiff;
                }
            }
        }
    }
    for v in &mut grad {
        *v *= half_g;
    }
    Ok(grad)
}
