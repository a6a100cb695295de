//! Doubly periodic Delaunay triangulation by ghost replication, and its
//! Voronoi dual.
//!
//! Triangulation runs on positions snapped to a fixed-point grid of `2^40`
//! steps per period so that ghost translates are exact and every copy of a
//! cocircular quadruple resolves its tie the same way. Geometry is then
//! evaluated on the true positions.

use std::collections::BTreeMap;

use super::delaunay::DelaunayBuilder;
use super::predicates::circumcenter;
use super::{CellEdge, Domain, SiteState, Triangle, Triangulation, Vec2, VoronoiCell};
use crate::error::{Result, VflError};

const GRID: f64 = (1u64 << 40) as f64;
const FAST_BAND: f64 = 0.25;

/// Periodic Delaunay triangulation of `sites` (placed by label).
pub fn build_triangulation(sites: &[SiteState], domain: Domain) -> Result<Triangulation> {
    triangulate(&positions_by_label(sites)?, domain, 0.0)
}

/// Voronoi cells dual to `tri`, one per label.
pub fn build_voronoi(tri: &Triangulation, sites: &[SiteState], domain: Domain) -> Result<Vec<VoronoiCell>> {
    voronoi_from(tri, &positions_by_label(sites)?, domain)
}

fn positions_by_label(sites: &[SiteState]) -> Result<Vec<Vec2>> {
    let mut out = vec![None; sites.len()];
    for s in sites {
        match out.get_mut(s.label) {
            Some(slot @ None) => *slot = Some(s.position),
            _ => return Err(VflError::Parse(format!("site labels must be a permutation of 0..{}", sites.len()))),
        }
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

pub(crate) fn triangulate(positions: &[Vec2], domain: Domain, min_separation: f64) -> Result<Triangulation> {
    let n = positions.len();
    if n < 3 {
        return Err(VflError::DegenerateSites(format!("need at least 3 sites in 2D, got {n}")));
    }
    let l = domain.length;
    let real: Vec<Vec2> = positions.iter().map(|&p| frame_position(domain, p)).collect();
    let snapped: Vec<Vec2> = real.iter().map(|p| Vec2::new(snap(p.x, l), snap(p.y, l))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lex(snapped[a], snapped[b]));
    for w in order.windows(2) {
        if snapped[w[0]] == snapped[w[1]] {
            return Err(VflError::DegenerateSites(format!(
                "sites {} and {} coincide at ({}, {})",
                w[0], w[1], real[w[0]].x, real[w[0]].y
            )));
        }
    }

    let tri = match attempt(&real, &snapped, l, FAST_BAND)? {
        Some(t) => t,
        None => attempt(&real, &snapped, l, 1.0)?.ok_or_else(|| {
            let (a, b, length) = longest_edge_hint(&real, domain);
            VflError::GhostCutoffExceeded { a, b, length, cutoff: l }
        })?,
    };

    for t in &tri.triangles {
        let p = image_positions(t, &real, l);
        for i in 0..3 {
            let j = (i + 1) % 3;
            let d = (p[j] - p[i]).norm();
            if d < min_separation {
                let (a, b) = (t.nodes[i], t.nodes[j]);
                return Err(VflError::Collision { a: a.min(b), b: a.max(b), distance: d });
            }
        }
    }
    Ok(tri)
}

fn snap(x: f64, l: f64) -> f64 {
    (x / l * GRID).round().max(0.0)
}

/// `p` wrapped into the unit cell, except that a coordinate which rounds up
/// to the period on the grid is moved just below 0 so the real and snapped
/// frames agree. All periodic geometry is evaluated in this frame.
pub(crate) fn frame_position(domain: Domain, p: Vec2) -> Vec2 {
    let l = domain.length;
    let fix = |x: f64| if snap(x, l) >= GRID { x - l } else { x };
    let p = domain.wrap(p);
    Vec2::new(fix(p.x), fix(p.y))
}

fn lex(a: Vec2, b: Vec2) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

/// One triangulation pass with ghosts in a band of `band * L`. Returns `None`
/// when the band was too thin to certify every torus triangle.
fn attempt(real: &[Vec2], snapped: &[Vec2], l: f64, band: f64) -> Result<Option<Triangulation>> {
    let n = real.len();
    let cut = (band * GRID).ceil();
    let (lo, hi) = (-cut, GRID + cut);
    let mut pts = Vec::with_capacity(n * 3);
    let mut origin: Vec<(usize, [i32; 2])> = Vec::with_capacity(n * 3);
    for (i, p) in snapped.iter().enumerate() {
        pts.push(*p);
        origin.push((i, [0, 0]));
    }
    for sx in -1..=1i32 {
        for sy in -1..=1i32 {
            if sx == 0 && sy == 0 {
                continue;
            }
            for (i, p) in snapped.iter().enumerate() {
                let q = Vec2::new(p.x + sx as f64 * GRID, p.y + sy as f64 * GRID);
                if q.x >= lo && q.x < hi && q.y >= lo && q.y < hi {
                    pts.push(q);
                    origin.push((i, [sx, sy]));
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| lex(pts[a], pts[b]));
    let mut ranks = vec![0u32; pts.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r as u32;
    }

    let mut kept: BTreeMap<[(usize, [i32; 2]); 3], ()> = BTreeMap::new();
    for t in DelaunayBuilder::new(&pts, &ranks).triangles() {
        let (a, b, c) = (pts[t[0]], pts[t[1]], pts[t[2]]);
        let cc = circumcenter(a, b, c);
        let r = (a - cc).norm();
        if !(cc.x - r > lo && cc.x + r < hi && cc.y - r > lo && cc.y + r < hi) {
            continue;
        }
        kept.insert(canonical([origin[t[0]], origin[t[1]], origin[t[2]]]), ());
    }
    if kept.len() != 2 * n {
        return Ok(None);
    }
    let mut triangles = Vec::with_capacity(kept.len());
    for key in kept.keys() {
        let mut t = Triangle { nodes: [0; 3], offsets: [[0; 2]; 3], area: 0.0 };
        for (k, &(label, off)) in key.iter().enumerate() {
            t.nodes[k] = label;
            t.offsets[k] = off;
        }
        let p = image_positions(&t, real, l);
        t.area = 0.5 * (p[1] - p[0]).perp(&(p[2] - p[0]));
        if t.area <= 0.0 {
            return Err(VflError::InvertedTriangle(t.area));
        }
        triangles.push(t);
    }
    let tri = Triangulation { triangles };
    let total = tri.total_area();
    if ((total - l * l) / (l * l)).abs() > 1e-9 {
        return Ok(None);
    }
    Ok(Some(tri))
}

/// Rotate so the smallest `(label, offset)` comes first, then translate it to
/// the unit cell. Orientation is preserved.
fn canonical(v: [(usize, [i32; 2]); 3]) -> [(usize, [i32; 2]); 3] {
    let first = (0..3).min_by_key(|&i| v[i]).unwrap();
    let s = v[first].1;
    let mut out = [(0, [0, 0]); 3];
    for k in 0..3 {
        let (label, off) = v[(first + k) % 3];
        out[k] = (label, [off[0] - s[0], off[1] - s[1]]);
    }
    out
}

pub(crate) fn image_positions(t: &Triangle, real: &[Vec2], l: f64) -> [Vec2; 3] {
    let mut p = [Vec2::zeros(); 3];
    for k in 0..3 {
        let o = t.offsets[k];
        p[k] = real[t.nodes[k]] + Vec2::new(o[0] as f64 * l, o[1] as f64 * l);
    }
    p
}

fn longest_edge_hint(real: &[Vec2], domain: Domain) -> (usize, usize, f64) {
    // Nearest-neighbor spacing is the best cheap indicator of sparsity.
    let mut best = (0, 0, 0.0);
    for i in 0..real.len() {
        let nearest = (0..real.len())
            .filter(|&j| j != i)
            .map(|j| (j, domain.displacement(real[i], real[j]).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((j, d)) = nearest {
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    best
}

#[derive(Default)]
struct EdgeRecord {
    left: Option<Vec2>,
    right: Option<Vec2>,
}

/// Voronoi cells from a periodic Delaunay triangulation. Each Delaunay edge
/// becomes one Voronoi edge between the circumcenters of its two triangles.
pub(crate) fn voronoi_from(tri: &Triangulation, positions: &[Vec2], domain: Domain) -> Result<Vec<VoronoiCell>> {
    let n = positions.len();
    let l = domain.length;
    let real: Vec<Vec2> = positions.iter().map(|&p| frame_position(domain, p)).collect();

    // key: (a, b, shift of b relative to a), canonical with a <= b
    let mut edges: BTreeMap<(usize, usize, [i32; 2]), EdgeRecord> = BTreeMap::new();
    for t in &tri.triangles {
        let p = image_positions(t, &real, l);
        for i in 0..3 {
            let (u, v) = (i, (i + 1) % 3);
            let w = (i + 2) % 3;
            // circumcenter relative to the u image
            let cc_u = circumcenter(Vec2::zeros(), p[v] - p[u], p[w] - p[u]);
            let (nu, nv) = (t.nodes[u], t.nodes[v]);
            let rel = [t.offsets[v][0] - t.offsets[u][0], t.offsets[v][1] - t.offsets[u][1]];
            let forward = nu < nv || (nu == nv && rel > [0, 0]);
            if forward {
                edges.entry((nu, nv, rel)).or_default().left = Some(cc_u);
            } else {
                let back = [-rel[0], -rel[1]];
                // relative to the v image
                edges.entry((nv, nu, back)).or_default().right = Some(cc_u - (p[v] - p[u]));
            }
        }
    }

    let mut cells: Vec<VoronoiCell> =
        (0..n).map(|label| VoronoiCell { label, area: 0.0, edges: Vec::new() }).collect();
    for (&(a, b, s), rec) in &edges {
        let (Some(left), Some(right)) = (rec.left, rec.right) else {
            return Err(VflError::DegenerateSites(format!("delaunay edge ({a}, {b}) is not shared by two triangles")));
        };
        let sep = real[b] + Vec2::new(s[0] as f64 * l, s[1] as f64 * l) - real[a];
        let d = sep.norm();
        let normal = sep / d;
        let tangent = Vec2::new(-normal.y, normal.x);
        let length = (left - right).dot(&tangent);
        let mid = 0.5 * (left + right);
        cells[a].edges.push(CellEdge {
            neighbor: b,
            length,
            normal,
            tangent,
            distance: d,
            midpoint: mid,
            end_vertex: left,
        });
        cells[b].edges.push(CellEdge {
            neighbor: a,
            length,
            normal: -normal,
            tangent: -tangent,
            distance: d,
            midpoint: mid - sep,
            end_vertex: right - sep,
        });
    }
    for cell in &mut cells {
        cell.edges.sort_by(|e, f| {
            e.normal.y.atan2(e.normal.x).total_cmp(&f.normal.y.atan2(f.normal.x))
        });
        cell.area = 0.25 * cell.edges.iter().map(|e| e.length * e.distance).sum::<f64>();
        if !(cell.area > 0.0) {
            return Err(VflError::ZeroAreaCell(cell.label, cell.area));
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lattice(n: usize, l: f64) -> Vec<Vec2> {
        let dx = l / n as f64;
        let mut v = Vec::new();
        for j in 0..n {
            for i in 0..n {
                v.push(Vec2::new(i as f64 * dx, j as f64 * dx));
            }
        }
        v
    }

    #[test]
    fn four_sites_in_small_square() {
        let d = Domain::new(2, 2.0).unwrap();
        let tri = triangulate(&lattice(2, 2.0), d, 0.0).unwrap();
        assert_eq!(tri.triangles.len(), 8);
        assert!((tri.total_area() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lattice_cells_are_squares() {
        let l = 2.0 * PI;
        let n = 8;
        let d = Domain::new(2, l).unwrap();
        let pos = lattice(n, l);
        let tri = triangulate(&pos, d, 0.0).unwrap();
        let nb = tri.neighbors(pos.len());
        let cells = voronoi_from(&tri, &pos, d).unwrap();
        let dx = l / n as f64;
        for (i, c) in cells.iter().enumerate() {
            assert_eq!(nb[i].len(), 6);
            assert!((c.area - dx * dx).abs() < 1e-12);
            assert!(c.closure().norm() < 1e-12);
        }
    }

    #[test]
    fn three_sites_fall_back_to_full_replication() {
        let d = Domain::new(2, 100.0).unwrap();
        let pos = [Vec2::new(50.0, 50.0), Vec2::new(51.0, 50.2), Vec2::new(50.3, 51.1)];
        let tri = triangulate(&pos, d, 0.0).unwrap();
        assert_eq!(tri.triangles.len(), 6);
        assert!((tri.total_area() - 1e4).abs() < 1e-8);
        assert!(tri.triangles.iter().any(|t| t.offsets == [[0, 0]; 3]));
        let cells = voronoi_from(&tri, &pos, d).unwrap();
        let total: f64 = cells.iter().map(|c| c.area).sum();
        assert!((total - 1e4).abs() < 1e-8);
    }
}
