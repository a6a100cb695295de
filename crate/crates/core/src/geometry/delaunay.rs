//! Incremental Bowyer–Watson Delaunay triangulation with exact predicates.

use super::predicates::{in_circumcircle, orient};
use super::Vec2;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [u32; 3],
    /// `nbr[i]` is across the edge opposite `v[i]`.
    nbr: [u32; 3],
    alive: bool,
}

/// Planar Delaunay triangulation of a point set. Ties are broken by the
/// caller-supplied ranks (lower rank wins, see [`super::predicates`]).
pub struct DelaunayBuilder {
    pts: Vec<Vec2>,
    ranks: Vec<u32>,
    tris: Vec<Tri>,
    free: Vec<u32>,
    n_input: usize,
    last: u32,
    // scratch
    mark: Vec<u32>,
    stamp: u32,
}

impl DelaunayBuilder {
    /// Triangulate `points`. Ranks must be distinct.
    pub fn new(points: &[Vec2], ranks: &[u32]) -> Self {
        assert_eq!(points.len(), ranks.len());
        let n = points.len();
        let (mut lo, mut hi) = (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY));
        for p in points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let span = (hi - lo).max().max(1.0);
        let mid = (lo + hi) * 0.5;
        let big = 64.0 * span;
        let mut pts = points.to_vec();
        pts.push(mid + Vec2::new(-big, -big));
        pts.push(mid + Vec2::new(big, -big));
        pts.push(mid + Vec2::new(0.0, big));
        let mut rk = ranks.to_vec();
        let top = ranks.iter().copied().max().unwrap_or(0);
        rk.extend([top + 1, top + 2, top + 3]);
        let mut b = Self {
            pts,
            ranks: rk,
            tris: vec![Tri { v: [n as u32, n as u32 + 1, n as u32 + 2], nbr: [NONE; 3], alive: true }],
            free: Vec::new(),
            n_input: n,
            last: 0,
            mark: vec![0],
            stamp: 0,
        };
        for i in insertion_order(points) {
            b.insert(i as u32);
        }
        b
    }

    /// Triangles (counterclockwise vertex triples) not touching the
    /// bounding super-triangle.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let n = self.n_input as u32;
        self.tris
            .iter()
            .filter(|t| t.alive && t.v.iter().all(|&v| v < n))
            .map(|t| [t.v[0] as usize, t.v[1] as usize, t.v[2] as usize])
            .collect()
    }

    fn locate(&self, p: Vec2) -> u32 {
        let mut t = self.last;
        if !self.tris[t as usize].alive {
            t = self.tris.iter().position(|t| t.alive).unwrap() as u32;
        }
        let mut steps = 0usize;
        'walk: loop {
            steps += 1;
            if steps > 4 * self.tris.len() + 16 {
                break;
            }
            let tri = &self.tris[t as usize];
            for i in 0..3 {
                let a = self.pts[tri.v[(i + 1) % 3] as usize];
                let b = self.pts[tri.v[(i + 2) % 3] as usize];
                if orient(a, b, p) < 0.0 {
                    let nb = tri.nbr[i];
                    if nb != NONE {
                        t = nb;
                        continue 'walk;
                    }
                }
            }
            return t;
        }
        // Fallback: linear scan.
        for (k, tri) in self.tris.iter().enumerate() {
            if !tri.alive {
                continue;
            }
            let inside = (0..3).all(|i| {
                orient(self.pts[tri.v[(i + 1) % 3] as usize], self.pts[tri.v[(i + 2) % 3] as usize], p) >= 0.0
            });
            if inside {
                return k as u32;
            }
        }
        unreachable!("point outside the super-triangle")
    }

    fn in_circle(&self, t: u32, p: u32) -> bool {
        let v = self.tris[t as usize].v;
        in_circumcircle(
            [self.pts[v[0] as usize], self.pts[v[1] as usize], self.pts[v[2] as usize], self.pts[p as usize]],
            [self.ranks[v[0] as usize], self.ranks[v[1] as usize], self.ranks[v[2] as usize], self.ranks[p as usize]],
        )
    }

    fn insert(&mut self, p: u32) {
        let start = self.locate(self.pts[p as usize]);
        self.stamp += 1;
        let stamp = self.stamp;
        if self.mark.len() < self.tris.len() {
            self.mark.resize(self.tris.len(), 0);
        }
        // Cavity by flood fill over triangles whose circumcircle contains p.
        let mut cavity = vec![start];
        self.mark[start as usize] = stamp;
        let mut k = 0;
        while k < cavity.len() {
            let t = cavity[k];
            k += 1;
            for i in 0..3 {
                let nb = self.tris[t as usize].nbr[i];
                if nb != NONE && self.mark[nb as usize] != stamp && self.in_circle(nb, p) {
                    self.mark[nb as usize] = stamp;
                    cavity.push(nb);
                }
            }
        }
        // Boundary edges (a, b, outer neighbor), oriented counterclockwise.
        let mut boundary: Vec<(u32, u32, u32)> = Vec::new();
        for &t in &cavity {
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let nb = tri.nbr[i];
                if nb == NONE || self.mark[nb as usize] != stamp {
                    boundary.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb));
                }
            }
        }
        for &t in &cavity {
            self.tris[t as usize].alive = false;
            self.free.push(t);
        }
        let mut created: Vec<u32> = Vec::with_capacity(boundary.len());
        for &(a, b, outer) in &boundary {
            let tri = Tri { v: [a, b, p], nbr: [NONE, NONE, outer], alive: true };
            let id = match self.free.pop() {
                Some(id) => {
                    self.tris[id as usize] = tri;
                    id
                }
                None => {
                    self.tris.push(tri);
                    self.mark.push(0);
                    (self.tris.len() - 1) as u32
                }
            };
            if outer != NONE {
                let o = &mut self.tris[outer as usize];
                for j in 0..3 {
                    let (x, y) = (o.v[(j + 1) % 3], o.v[(j + 2) % 3]);
                    if x == b && y == a {
                        o.nbr[j] = id;
                    }
                }
            }
            created.push(id);
        }
        // Link the fan: triangle (a, b, p) neighbors (b, c, p) across b–p and
        // (z, a, p) across p–a.
        for (idx, &(a, _b, _)) in boundary.iter().enumerate() {
            let id = created[idx];
            for (jdx, &(a2, b2, _)) in boundary.iter().enumerate() {
                if b2 == a {
                    // (a2, a, p) is across edge p–a, opposite vertex b of ours
                    self.tris[id as usize].nbr[1] = created[jdx];
                    self.tris[created[jdx] as usize].nbr[0] = id;
                    let _ = a2;
                }
            }
        }
        self.last = *created.last().unwrap();
    }
}

/// Spatially coherent insertion order (Hilbert curve), ties by index.
fn insertion_order(points: &[Vec2]) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let (mut lo, mut hi) = (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY));
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let span = (hi - lo).max().max(f64::MIN_POSITIVE);
    const ORDER: u32 = 16;
    let side = (1u32 << ORDER) - 1;
    let mut keyed: Vec<(u64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let x = (((p.x - lo.x) / span) * side as f64) as u32;
            let y = (((p.y - lo.y) / span) * side as f64) as u32;
            (hilbert_index(x.min(side), y.min(side), ORDER), i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn hilbert_index(mut x: u32, mut y: u32, order: u32) -> u64 {
    let mut d = 0u64;
    let mut s = 1u32 << (order - 1);
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += (s as u64) * (s as u64) * ((3 * rx) ^ ry) as u64;
        if ry == 0 {
            if rx == 1 {
                let n1 = (1u32 << order) - 1;
                x = n1 - x;
                y = n1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s >>= 1;
    }
    d
}
