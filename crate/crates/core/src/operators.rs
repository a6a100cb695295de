//! Mimetic discrete calculus on Voronoi cells.
//!
//! Fields live either on cells (one value per site) or on directed cell edges
//! (one value per entry of `cell.edges`, seen from the owner).

use crate::error::{Result, VflError};
use crate::geometry::{Geometry, Vec2, VoronoiCell};

/// Values attached to every directed edge `(α, β_i)`, aligned with
/// `cells[α].edges`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField<T> {
    pub values: Vec<Vec<T>>,
}

impl<T: Copy> EdgeField<T> {
    pub fn from_fn(cells: &[VoronoiCell], mut f: impl FnMut(usize, usize) -> T) -> Self {
        let values = cells
            .iter()
            .enumerate()
            .map(|(a, c)| (0..c.edges.len()).map(|i| f(a, i)).collect())
            .collect();
        Self { values }
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(T) -> U) -> EdgeField<U> {
        EdgeField { values: self.values.iter().map(|v| v.iter().map(|&x| f(x)).collect()).collect() }
    }
}

/// Mass-weighted edge mean `[f]_α^β = (m_α f_α + m_β f_β) / (2 m_α)`.
pub fn edge_average(f: &[f64], masses: &[f64], cells: &[VoronoiCell]) -> EdgeField<f64> {
    EdgeField::from_fn(cells, |a, i| {
        let b = cells[a].edges[i].neighbor;
        (masses[a] * f[a] + masses[b] * f[b]) / (2.0 * masses[a])
    })
}

/// Componentwise [`edge_average`] of a vector field.
pub fn edge_average_vec(v: &[Vec2], masses: &[f64], cells: &[VoronoiCell]) -> EdgeField<Vec2> {
    EdgeField::from_fn(cells, |a, i| {
        let b = cells[a].edges[i].neighbor;
        (masses[a] * v[a] + masses[b] * v[b]) / (2.0 * masses[a])
    })
}

/// Weak cellwise gradient `-Σ_i [f]_α^{β_i} n Δl`. Not divided by area.
pub fn grad_cell(avg: &EdgeField<f64>, cells: &[VoronoiCell]) -> Vec<Vec2> {
    cells
        .iter()
        .zip(&avg.values)
        .map(|(c, vals)| -c.edges.iter().zip(vals).fold(Vec2::zeros(), |acc, (e, &f)| acc + f * e.dn()))
        .collect()
}

/// Edgewise gradient of a nodal field, `n (f_β - f_α) / d`.
pub fn grad_edge(f: &[f64], cells: &[VoronoiCell]) -> EdgeField<Vec2> {
    EdgeField::from_fn(cells, |a, i| {
        let e = &cells[a].edges[i];
        e.normal * ((f[e.neighbor] - f[a]) / e.distance)
    })
}

/// `(1/A) Σ_i dn · v_i` for one cell.
pub fn div_cell(v: &[Vec2], cell: &VoronoiCell) -> f64 {
    cell.edges.iter().zip(v).map(|(e, w)| e.dn().dot(w)).sum::<f64>() / cell.area
}

/// `(1/A) Σ_i dτ · v_i` for one cell (2D only).
pub fn curl_cell_z(v: &[Vec2], cell: &VoronoiCell) -> f64 {
    cell.edges.iter().zip(v).map(|(e, w)| e.dtau().dot(w)).sum::<f64>() / cell.area
}

/// Divergence in every cell.
pub fn div_field(v: &EdgeField<Vec2>, cells: &[VoronoiCell]) -> Vec<f64> {
    cells.iter().zip(&v.values).map(|(c, vals)| div_cell(vals, c)).collect()
}

/// Vertical curl in every cell; unavailable on the periodic interval.
pub fn curl_field(v: &EdgeField<Vec2>, geom: &Geometry) -> Result<Vec<f64>> {
    if geom.domain.dim != 2 {
        return Err(VflError::Unsupported(geom.domain.dim));
    }
    Ok(geom.cells.iter().zip(&v.values).map(|(c, vals)| curl_cell_z(vals, c)).collect())
}

/// `k × v`, the counterclockwise quarter turn.
#[inline]
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// `Σ_i u_i (w_{i+1} - w_{i-1})` around a closed loop of edge values.
pub fn loop_stencil<T: Copy>(u: &[T], w: &[T], dot: impl Fn(T, T) -> f64) -> f64 {
    let n = u.len();
    assert_eq!(n, w.len());
    if n == 0 {
        return 0.0;
    }
    (0..n)
        .map(|i| dot(u[i], w[(i + 1) % n]) - dot(u[i], w[(i + n - 1) % n]))
        .sum()
}
