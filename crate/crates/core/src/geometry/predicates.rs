//! Exact orientation and in-circle tests with a deterministic symbolic
//! perturbation for cocircular ties.
//!
//! Each point carries a rank. Exact ties of the in-circle test are resolved as
//! if every point `p` were lifted by an infinitesimal `ε^rank(p)` on the
//! paraboloid, so the lowest-ranked point of a cocircular quadruple decides.

use super::Vec2;

#[inline]
fn coord(p: Vec2) -> robust::Coord<f64> {
    robust::Coord { x: p.x, y: p.y }
}

/// Twice the signed area of `abc`: positive when counterclockwise. Exact sign.
#[inline]
pub fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

/// Positive when `d` lies strictly inside the circle through the
/// counterclockwise triangle `abc`. Exact sign, zero when cocircular.
#[inline]
pub fn incircle_exact(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    robust::incircle(coord(a), coord(b), coord(c), coord(d))
}

/// Perturbed in-circle test; never ties for four distinct points.
///
/// `abc` must be counterclockwise. Ranks must be distinct.
pub fn in_circumcircle(pts: [Vec2; 4], ranks: [u32; 4]) -> bool {
    let [a, b, c, d] = pts;
    let det = incircle_exact(a, b, c, d);
    if det != 0.0 {
        return det > 0.0;
    }
    // Coefficient of each point's lift in the expanded determinant.
    let coeff = |i: usize| -> f64 {
        match i {
            0 => orient(b, c, d),
            1 => orient(c, a, d),
            2 => orient(a, b, d),
            _ => -orient(a, b, c),
        }
    };
    let mut order = [0usize, 1, 2, 3];
    order.sort_unstable_by_key(|&i| ranks[i]);
    for i in order {
        let c = coeff(i);
        if c != 0.0 {
            return c > 0.0;
        }
    }
    false
}

/// Circumcenter of `abc` (need not be oriented).
pub fn circumcenter(a: Vec2, b: Vec2, c: Vec2) -> Vec2 {
    let ba = b - a;
    let ca = c - a;
    let bl = ba.norm_squared();
    let cl = ca.norm_squared();
    let d = 2.0 * (ba.x * ca.y - ba.y * ca.x);
    a + Vec2::new(ca.y * bl - ba.y * cl, ba.x * cl - ca.x * bl) / d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_signs() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(1.0, 0.0);
        let c = Vec2::new(0.0, 1.0);
        assert!(orient(a, b, c) > 0.0);
        assert!(orient(a, c, b) < 0.0);
        assert_eq!(orient(a, b, Vec2::new(2.0, 0.0)), 0.0);
    }

    #[test]
    fn square_tie_breaks_away_from_lowest_rank() {
        // Unit square, ranks in lexicographic (x, y) order: LL=0, UL=1, LR=2, UR=3.
        let ll = Vec2::new(0.0, 0.0);
        let lr = Vec2::new(1.0, 0.0);
        let ul = Vec2::new(0.0, 1.0);
        let ur = Vec2::new(1.0, 1.0);
        assert_eq!(incircle_exact(ll, lr, ur, ul), 0.0);
        // Triangle (LR, UR, UL) avoids LL. Testing LL against it: LL is lifted
        // most, so it is outside and the triangle survives.
        assert!(!in_circumcircle([lr, ur, ul, ll], [2, 3, 1, 0]));
        // Triangle (LL, LR, UR) contains LL; UL must then be inside it so that
        // the LL-avoiding diagonal wins.
        assert!(in_circumcircle([ll, lr, ur, ul], [0, 2, 3, 1]));
    }

    #[test]
    fn perturbation_is_consistent_under_rotation_of_triangle() {
        let p = [
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(0.0, 2.0),
        ];
        let r = [5, 9, 2, 7];
        let base = in_circumcircle([p[0], p[1], p[2], p[3]], [r[0], r[1], r[2], r[3]]);
        assert_eq!(base, in_circumcircle([p[1], p[2], p[0], p[3]], [r[1], r[2], r[0], r[3]]));
        assert_eq!(base, in_circumcircle([p[2], p[0], p[1], p[3]], [r[2], r[0], r[1], r[3]]));
    }

    #[test]
    fn circumcenter_of_right_triangle_is_hypotenuse_midpoint() {
        let c = circumcenter(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 2.0));
        assert!((c - Vec2::new(1.0, 1.0)).norm() < 1e-15);
    }
}
