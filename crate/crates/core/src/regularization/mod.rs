//! Dispersive regularization of the layer thickness: a conforming P1 finite
//! element solve of `(1 − α̂²∇²) h̃ = h` on the dual mesh.

mod solver;
mod sparse;

pub use solver::{conjugate_residual, SolveStats};
pub use sparse::Csr;

use crate::error::{Result, VflError};
use crate::geometry::periodic::frame_position;
use crate::geometry::{Elements, Geometry, Triangle, Vec2};

/// Default relative residual tolerance of the Helmholtz solves.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

/// `A = M + α̂² K` with consistent mass matrix `M` and stiffness `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct HelmholtzSystem {
    pub a: Csr,
    pub m: Csr,
    pub k: Csr,
    pub alpha: f64,
}

/// Vertex positions of a periodic triangle in a common frame.
pub fn triangle_vertices(t: &Triangle, geom: &Geometry, positions: &[Vec2]) -> [Vec2; 3] {
    let l = geom.domain.length;
    let mut p = [Vec2::zeros(); 3];
    for k in 0..3 {
        let o = t.offsets[k];
        p[k] = frame_position(geom.domain, positions[t.nodes[k]]) + Vec2::new(o[0] as f64 * l, o[1] as f64 * l);
    }
    p
}

/// `2A ∇N_i` for the linear basis on a counterclockwise triangle.
pub fn scaled_basis_gradients(p: &[Vec2; 3]) -> [Vec2; 3] {
    let mut g = [Vec2::zeros(); 3];
    for i in 0..3 {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        g[i] = Vec2::new(a.y - b.y, b.x - a.x);
    }
    g
}

/// Mass matrix used on the right of `A h̃ = M h` and inside `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassMatrix {
    /// Exact element integrals of the linear basis.
    #[default]
    Consistent,
    /// Diagonal of Voronoi cell areas. Continuous across Delaunay flips,
    /// unlike the consistent matrix.
    Lumped,
}

/// Assemble the Helmholtz system on the element mesh of `geom` with the
/// consistent mass matrix.
pub fn assemble(geom: &Geometry, positions: &[Vec2], alpha: f64) -> Result<HelmholtzSystem> {
    assemble_with(geom, positions, alpha, MassMatrix::Consistent)
}

pub fn assemble_with(geom: &Geometry, positions: &[Vec2], alpha: f64, mass: MassMatrix) -> Result<HelmholtzSystem> {
    if !(alpha >= 0.0) {
        return Err(VflError::Config(format!("regularization length must be non-negative, got {alpha}")));
    }
    let n = geom.n_sites();
    let mut mt = Vec::new();
    let mut kt = Vec::new();
    match &geom.elements {
        Elements::Segments(segs) => {
            for s in segs {
                let l = s.length;
                if !(l > 0.0) {
                    return Err(VflError::InvertedTriangle(l));
                }
                let [i, j] = s.nodes;
                for (r, c, mv, kv) in
                    [(i, i, l / 3.0, 1.0 / l), (j, j, l / 3.0, 1.0 / l), (i, j, l / 6.0, -1.0 / l), (j, i, l / 6.0, -1.0 / l)]
                {
                    mt.push((r, c, mv));
                    kt.push((r, c, kv));
                }
            }
        }
        Elements::Triangles(tri) => {
            for t in &tri.triangles {
                let p = triangle_vertices(t, geom, positions);
                let area = 0.5 * (p[1] - p[0]).perp(&(p[2] - p[0]));
                if !(area > 0.0) {
                    return Err(VflError::InvertedTriangle(area));
                }
                let g = scaled_basis_gradients(&p);
                for a in 0..3 {
                    for b in 0..3 {
                        let mv = if a == b { area / 6.0 } else { area / 12.0 };
                        mt.push((t.nodes[a], t.nodes[b], mv));
                        kt.push((t.nodes[a], t.nodes[b], g[a].dot(&g[b]) / (4.0 * area)));
                    }
                }
            }
        }
    }
    if mass == MassMatrix::Lumped {
        mt = geom.cells.iter().enumerate().map(|(i, c)| (i, i, c.area)).collect();
    }
    let a2 = alpha * alpha;
    let at: Vec<(usize, usize, f64)> =
        mt.iter().copied().chain(kt.iter().map(|&(r, c, k)| (r, c, a2 * k))).collect();
    Ok(HelmholtzSystem {
        a: Csr::from_triplets(n, at),
        m: Csr::from_triplets(n, mt),
        k: Csr::from_triplets(n, kt),
        alpha,
    })
}

/// Solve `A h̃ = M h`, starting from `h`.
pub fn solve(sys: &HelmholtzSystem, h: &[f64]) -> Result<Vec<f64>> {
    let rhs = sys.m.mul(h);
    let mut x = h.to_vec();
    conjugate_residual(&sys.a, &rhs, &mut x, SOLVER_TOLERANCE)?;
    Ok(x)
}

/// Output of the four-step regularization pipeline.
#[derive(Debug, Clone)]
pub struct Regularized {
    pub system: HelmholtzSystem,
    /// Cellwise thickness `m / (ρ A)`.
    pub hbar: Vec<f64>,
    /// Regularized nodal thickness.
    pub htilde: Vec<f64>,
}

/// Cellwise thickness `h̄_α = m_α / (ρ A_α)`.
pub fn cell_thickness(masses: &[f64], geom: &Geometry, density: f64) -> Result<Vec<f64>> {
    masses
        .iter()
        .zip(&geom.cells)
        .map(|(&m, c)| {
            if !(c.area > 0.0) {
                return Err(VflError::ZeroAreaCell(c.label, c.area));
            }
            Ok(m / (density * c.area))
        })
        .collect()
}

/// Thickness from masses and areas, nodal identification at the sites,
/// Helmholtz solve.
pub fn regularize_thickness(
    masses: &[f64],
    geom: &Geometry,
    positions: &[Vec2],
    alpha: f64,
    density: f64,
) -> Result<Regularized> {
    regularize_thickness_with(masses, geom, positions, alpha, density, MassMatrix::Consistent)
}

pub fn regularize_thickness_with(
    masses: &[f64],
    geom: &Geometry,
    positions: &[Vec2],
    alpha: f64,
    density: f64,
    mass: MassMatrix,
) -> Result<Regularized> {
    let hbar = cell_thickness(masses, geom, density)?;
    let system = assemble_with(geom, positions, alpha, mass)?;
    let htilde = solve(&system, &hbar)?;
    Ok(Regularized { system, hbar, htilde })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, Triangulation};

    fn geom_1d(n: usize, l: f64) -> (Geometry, Vec<Vec2>) {
        let dx = l / n as f64;
        let pos: Vec<Vec2> = (0..n).map(|i| Vec2::new(i as f64 * dx, 0.0)).collect();
        (Geometry::build(Domain::new(1, l).unwrap(), &pos, 0.0).unwrap(), pos)
    }

    #[test]
    fn one_dimensional_entries() {
        let (g, pos) = geom_1d(8, 4.0);
        let s = assemble(&g, &pos, 0.0).unwrap();
        assert_eq!(s.m.get(3, 3), 1.0 / 3.0);
        assert_eq!(s.m.get(3, 4), 1.0 / 12.0);
        assert_eq!(s.m.get(0, 7), 1.0 / 12.0);
        assert_eq!(s.k.get(0, 7), -2.0);
        assert_eq!(s.a, s.m);
        assert!(s.k.row_sums().iter().all(|r| r.abs() < 1e-14));
    }

    #[test]
    fn equilateral_triangle_mass_rows() {
        let h = 3f64.sqrt() / 2.0;
        let p = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.5, h)];
        let geom = Geometry {
            domain: Domain::new(2, 10.0).unwrap(),
            cells: vec![Default::default(); 3],
            elements: Elements::Triangles(Triangulation {
                triangles: vec![Triangle { nodes: [0, 1, 2], offsets: [[0, 0]; 3], area: h / 2.0 }],
            }),
        };
        let s = assemble(&geom, &p, 0.0).unwrap();
        for r in s.m.row_sums() {
            assert!((r - h / 2.0 / 3.0).abs() < 1e-15);
        }
        assert!(s.k.row_sums().iter().all(|r| r.abs() < 1e-15));
        assert!(s.a.is_symmetric() && s.k.is_symmetric());
    }

    #[test]
    fn constants_are_fixed_points() {
        let (g, pos) = geom_1d(32, 6.0);
        let s = assemble(&g, &pos, 0.5).unwrap();
        let ht = solve(&s, &vec![1.7; 32]).unwrap();
        assert!(ht.iter().all(|v| (v - 1.7).abs() < 1e-12));
    }
}
