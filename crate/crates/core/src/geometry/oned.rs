//! Cells and elements on the periodic interval.

use super::{CellEdge, Segment, Vec2, VoronoiCell};
use crate::error::{Result, VflError};

/// Voronoi cells for 1D sites given in any order; cell `i` belongs to
/// `positions[i]`.
pub fn build_1d_cells(positions: &[f64], length: f64) -> Result<Vec<VoronoiCell>> {
    Ok(build_1d_mesh(positions, length, 0.0)?.0)
}

/// Cells plus the periodic segment mesh. Sites closer than `min_separation`
/// are reported as a collision.
pub(crate) fn build_1d_mesh(
    positions: &[f64],
    length: f64,
    min_separation: f64,
) -> Result<(Vec<VoronoiCell>, Vec<Segment>)> {
    let n = positions.len();
    if n < 2 {
        return Err(VflError::DegenerateSites(format!("need at least 2 sites in 1D, got {n}")));
    }
    let wrapped: Vec<f64> = positions
        .iter()
        .map(|&x| {
            let r = x.rem_euclid(length);
            if r >= length {
                0.0
            } else {
                r
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| wrapped[a].total_cmp(&wrapped[b]).then(a.cmp(&b)));

    // gap[k]: distance from order[k] to its right neighbor order[k+1]
    let mut gap = vec![0.0; n];
    for k in 0..n {
        let i = order[k];
        let j = order[(k + 1) % n];
        let d = if k + 1 == n { wrapped[j] + length - wrapped[i] } else { wrapped[j] - wrapped[i] };
        if d <= 0.0 {
            return Err(VflError::DegenerateSites(format!("sites {i} and {j} coincide at x = {}", wrapped[i])));
        }
        if d < min_separation {
            return Err(VflError::Collision { a: i.min(j), b: i.max(j), distance: d });
        }
        gap[k] = d;
    }

    let mut cells = vec![VoronoiCell { label: 0, area: 0.0, edges: Vec::new() }; n];
    let mut segments = Vec::with_capacity(n);
    for k in 0..n {
        let i = order[k];
        let right = order[(k + 1) % n];
        let left = order[(k + n - 1) % n];
        let dr = gap[k];
        let dl = gap[(k + n - 1) % n];
        let edge = |neighbor, sign: f64, d: f64| CellEdge {
            neighbor,
            length: 1.0,
            normal: Vec2::new(sign, 0.0),
            tangent: Vec2::new(0.0, sign),
            distance: d,
            midpoint: Vec2::new(sign * d / 2.0, 0.0),
            end_vertex: Vec2::new(sign * d / 2.0, 0.0),
        };
        cells[i] = VoronoiCell {
            label: i,
            area: 0.5 * (dl + dr),
            edges: vec![edge(right, 1.0, dr), edge(left, -1.0, dl)],
        };
        segments.push(Segment { nodes: [i, right], shift: i32::from(k + 1 == n), length: dr });
    }
    Ok((cells, segments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn two_sites_split_evenly() {
        let cells = build_1d_cells(&[0.0, PI], 2.0 * PI).unwrap();
        assert_eq!(cells[0].area, PI);
        assert_eq!(cells[1].area, PI);
    }

    #[test]
    fn uneven_sites_with_wrap() {
        let cells = build_1d_cells(&[0.0, 1.0, 3.0], 6.0).unwrap();
        let areas: Vec<f64> = cells.iter().map(|c| c.area).collect();
        assert_eq!(areas, vec![2.0, 1.5, 2.5]);
    }

    #[test]
    fn uniform_lattice() {
        let n = 128;
        let l = 2.0 * PI;
        let dx = l / n as f64;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * dx).collect();
        let cells = build_1d_cells(&xs, l).unwrap();
        for c in &cells {
            assert!((c.area - dx).abs() < 1e-14);
            assert!(c.closure().norm() < 1e-15);
        }
    }

    #[test]
    fn unsorted_input_and_segments() {
        let (cells, segs) = build_1d_mesh(&[3.0, 0.0, 1.0], 6.0, 0.0).unwrap();
        assert_eq!(cells[0].area, 2.5);
        assert_eq!(segs.len(), 3);
        let total: f64 = segs.iter().map(|s| s.length).sum();
        assert_eq!(total, 6.0);
        assert_eq!(segs[2], Segment { nodes: [0, 1], shift: 1, length: 3.0 });
    }

    #[test]
    fn duplicates_and_collisions() {
        assert!(matches!(build_1d_cells(&[1.0, 1.0], 4.0), Err(VflError::DegenerateSites(_))));
        assert!(matches!(build_1d_cells(&[0.0, 4.0], 4.0), Err(VflError::DegenerateSites(_))));
        assert!(matches!(build_1d_mesh(&[1.0, 1.0 + 1e-9], 4.0, 1e-6), Err(VflError::Collision { .. })));
    }
}
