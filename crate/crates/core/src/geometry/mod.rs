//! Periodic Delaunay triangulation and its dual Voronoi diagram over a moving
//! particle cloud.
//!
//! In 2D the periodic torus is handled by ghost replication: sites near the
//! boundary are copied into a band of width `L/4` around the unit cell, the
//! extended cloud is triangulated with exact predicates, and one copy of every
//! torus triangle is kept. In 1D the cells are intervals between midpoints of
//! periodic neighbors.

mod delaunay;
mod oned;
pub(crate) mod periodic;
pub mod predicates;

use crate::error::{Result, VflError};

pub use delaunay::DelaunayBuilder;
pub use oned::build_1d_cells;
pub use periodic::{build_triangulation, build_voronoi};

pub type Vec2 = nalgebra::Vector2<f64>;

/// Periodic interval (`dim == 1`) or doubly periodic square (`dim == 2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub dim: usize,
    pub length: f64,
}

impl Domain {
    pub fn new(dim: usize, length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(VflError::Config(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(VflError::Config(format!("domain length must be positive, got {length}")));
        }
        Ok(Self { dim, length })
    }

    /// Reduce a coordinate to `[0, L)`.
    pub fn wrap_coord(&self, x: f64) -> f64 {
        let r = x.rem_euclid(self.length);
        // rem_euclid can return L for tiny negative inputs
        if r >= self.length {
            0.0
        } else {
            r
        }
    }

    pub fn wrap(&self, p: Vec2) -> Vec2 {
        match self.dim {
            1 => Vec2::new(self.wrap_coord(p.x), 0.0),
            _ => Vec2::new(self.wrap_coord(p.x), self.wrap_coord(p.y)),
        }
    }

    /// Shortest periodic displacement from `a` to `b`.
    pub fn displacement(&self, a: Vec2, b: Vec2) -> Vec2 {
        let l = self.length;
        let mut d = b - a;
        d.x -= l * (d.x / l).round();
        if self.dim == 2 {
            d.y -= l * (d.y / l).round();
        } else {
            d.y = 0.0;
        }
        d
    }

    /// Total measure `L^d`.
    pub fn measure(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }
}

/// One labelled particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteState {
    pub label: usize,
    pub position: Vec2,
    /// `(U, V)`; in 1D only `U` moves the particle, `V` is the meridional
    /// velocity.
    pub velocity: Vec2,
    pub mass: f64,
}

/// One edge of a Voronoi cell as seen from its owner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellEdge {
    pub neighbor: usize,
    /// Edge length `Δl` (1 in 1D).
    pub length: f64,
    /// Outward unit normal, parallel to the image-corrected site separation.
    pub normal: Vec2,
    /// `k × n`, counterclockwise around the owner.
    pub tangent: Vec2,
    /// Site-to-site distance.
    pub distance: f64,
    /// Edge midpoint relative to the owner site.
    pub midpoint: Vec2,
    /// Counterclockwise end vertex of the edge relative to the owner site.
    pub end_vertex: Vec2,
}

impl CellEdge {
    /// `n Δl`
    pub fn dn(&self) -> Vec2 {
        self.normal * self.length
    }

    /// `τ Δl`
    pub fn dtau(&self) -> Vec2 {
        self.tangent * self.length
    }

    /// Image-corrected vector from the owner site to the neighbor.
    pub fn separation(&self) -> Vec2 {
        self.normal * self.distance
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VoronoiCell {
    pub label: usize,
    pub area: f64,
    /// Edges in counterclockwise order of their normals.
    pub edges: Vec<CellEdge>,
}

impl VoronoiCell {
    pub fn perimeter(&self) -> f64 {
        self.edges.iter().map(|e| e.length.abs()).sum()
    }

    /// `Σ n Δl`, zero for a closed cell.
    pub fn closure(&self) -> Vec2 {
        self.edges.iter().fold(Vec2::zeros(), |acc, e| acc + e.dn())
    }

    /// Polygon vertices relative to the site, counterclockwise.
    pub fn vertices(&self) -> Vec<Vec2> {
        self.edges.iter().map(|e| e.end_vertex).collect()
    }
}

/// A triangle of the periodic Delaunay triangulation. `offsets[i]` is the
/// periodic image (in multiples of `L`) at which node `i` is placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub nodes: [usize; 3],
    pub offsets: [[i32; 2]; 3],
    pub area: f64,
}

/// A 1D element between consecutive sites; node 1 sits at image `shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub nodes: [usize; 2],
    pub shift: i32,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    pub triangles: Vec<Triangle>,
}

impl Triangulation {
    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }

    /// Sorted, de-duplicated neighbor labels per site.
    pub fn neighbors(&self, n_sites: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); n_sites];
        for t in &self.triangles {
            for i in 0..3 {
                let a = t.nodes[i];
                let b = t.nodes[(i + 1) % 3];
                out[a].push(b);
                out[b].push(a);
            }
        }
        for v in &mut out {
            v.sort_unstable();
            v.dedup();
        }
        out
    }
}

/// Finite elements of the dual mesh used by the Helmholtz solve.
#[derive(Debug, Clone, PartialEq)]
pub enum Elements {
    Segments(Vec<Segment>),
    Triangles(Triangulation),
}

/// Geometry for one particle configuration: Voronoi cells plus the dual
/// element mesh. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub domain: Domain,
    pub cells: Vec<VoronoiCell>,
    pub elements: Elements,
}

impl Geometry {
    /// Build the full geometry for `positions` (indexed by label).
    /// `min_separation` is the collision threshold.
    pub fn build(domain: Domain, positions: &[Vec2], min_separation: f64) -> Result<Self> {
        match domain.dim {
            1 => {
                let xs: Vec<f64> = positions.iter().map(|p| p.x).collect();
                let (cells, segments) = oned::build_1d_mesh(&xs, domain.length, min_separation)?;
                Ok(Self { domain, cells, elements: Elements::Segments(segments) })
            }
            _ => {
                let tri = periodic::triangulate(positions, domain, min_separation)?;
                let cells = periodic::voronoi_from(&tri, positions, domain)?;
                Ok(Self { domain, cells, elements: Elements::Triangles(tri) })
            }
        }
    }

    pub fn n_sites(&self) -> usize {
        self.cells.len()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.area).collect()
    }
}

/// Collision threshold: `1e-6` of the reference spacing.
pub fn collision_threshold(dx_ref: f64) -> f64 {
    1e-6 * dx_ref
}
