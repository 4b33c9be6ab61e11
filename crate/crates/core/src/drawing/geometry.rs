//! Exact planar predicates on generic scalars.
//!
//! Everything here reduces to signs of 2×2 determinants, so on an exact
//! scalar such as [`crate::Rational`] the answers are certain: a crossing is
//! a crossing, a degeneracy is a degeneracy, never a rounding artifact.
//! Instantiated with floats the same code gives fast approximate answers.

use crate::Scalar;

/// A point in the plane.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }
}

/// Sign of the cross product `(b − a) × (c − a)`.
///
/// `1` when `a, b, c` turn counterclockwise, `-1` clockwise, `0` when
/// collinear.
pub fn orient<T: Scalar>(a: &Point<T>, b: &Point<T>, c: &Point<T>) -> i8 {
    let det = (b.x.clone() - a.x.clone()) * (c.y.clone() - a.y.clone())
        - (b.y.clone() - a.y.clone()) * (c.x.clone() - a.x.clone());
    if det > T::zero() {
        1
    } else if det < T::zero() {
        -1
    } else {
        0
    }
}

/// Whether `p`, already known collinear with segment `uv`, lies strictly
/// between `u` and `v`.
pub fn strictly_inside<T: Scalar>(u: &Point<T>, v: &Point<T>, p: &Point<T>) -> bool {
    if p == u || p == v {
        return false;
    }
    let within = |lo: &T, hi: &T, x: &T| {
        if lo <= hi {
            lo <= x && x <= hi
        } else {
            hi <= x && x <= lo
        }
    };
    within(&u.x, &v.x, &p.x) && within(&u.y, &v.y, &p.y)
}

/// How the *open* segments `ab` and `cd` meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentIntersection {
    /// Exactly one common interior point.
    Proper,
    /// No common interior point (touching at endpoints does not count).
    None,
    /// The endpoint with this index into `(a, b, c, d)` lies strictly
    /// inside the other segment.
    TouchInterior { point: usize },
    /// All four points collinear with overlapping open segments.
    CollinearOverlap,
}

/// Classify the intersection of the open segments `ab` and `cd`.
///
/// Callers guarantee `a ≠ b` and `c ≠ d`.  Segments sharing an endpoint
/// *point* report [`SegmentIntersection::None`] unless they overlap along a
/// line.
pub fn open_segments_intersect<T: Scalar>(
    a: &Point<T>,
    b: &Point<T>,
    c: &Point<T>,
    d: &Point<T>,
) -> SegmentIntersection {
    let o_ab_c = orient(a, b, c);
    let o_ab_d = orient(a, b, d);
    let o_cd_a = orient(c, d, a);
    let o_cd_b = orient(c, d, b);

    if o_ab_c == 0 && o_ab_d == 0 {
        // All four points on one line: open segments overlap iff the later
        // start precedes the earlier end along that line.  Compare along a
        // coordinate where `ab` is not constant.
        let key = |p: &Point<T>| if a.x != b.x { p.x.clone() } else { p.y.clone() };
        let (mut lo1, mut hi1) = (key(a), key(b));
        if lo1 > hi1 {
            std::mem::swap(&mut lo1, &mut hi1);
        }
        let (mut lo2, mut hi2) = (key(c), key(d));
        if lo2 > hi2 {
            std::mem::swap(&mut lo2, &mut hi2);
        }
        let lo = if lo1 > lo2 { lo1 } else { lo2 };
        let hi = if hi1 < hi2 { hi1 } else { hi2 };
        return if lo < hi {
            SegmentIntersection::CollinearOverlap
        } else {
            SegmentIntersection::None
        };
    }

    // Single-point collinearities: an endpoint on the other segment's line.
    // Strictly inside means a vertex pierces an edge; at or beyond the ends
    // it is only an endpoint touch or a miss.
    if o_ab_c == 0 && strictly_inside(a, b, c) {
        return SegmentIntersection::TouchInterior { point: 2 };
    }
    if o_ab_d == 0 && strictly_inside(a, b, d) {
        return SegmentIntersection::TouchInterior { point: 3 };
    }
    if o_cd_a == 0 && strictly_inside(c, d, a) {
        return SegmentIntersection::TouchInterior { point: 0 };
    }
    if o_cd_b == 0 && strictly_inside(c, d, b) {
        return SegmentIntersection::TouchInterior { point: 1 };
    }
    if o_ab_c == 0 || o_ab_d == 0 || o_cd_a == 0 || o_cd_b == 0 {
        return SegmentIntersection::None;
    }

    if o_ab_c != o_ab_d && o_cd_a != o_cd_b {
        SegmentIntersection::Proper
    } else {
        SegmentIntersection::None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_bigint::BigInt;

    fn p(x: i64, y: i64) -> Point<Rational> {
        Point::new(
            Rational::from_integer(BigInt::from(x)),
            Rational::from_integer(BigInt::from(y)),
        )
    }

    #[test]
    fn orientation_signs() {
        assert_eq!(orient(&p(0, 0), &p(1, 0), &p(0, 1)), 1);
        assert_eq!(orient(&p(0, 0), &p(1, 0), &p(0, -1)), -1);
        assert_eq!(orient(&p(0, 0), &p(1, 1), &p(2, 2)), 0);
    }

    #[test]
    fn x_configuration_crosses() {
        assert_eq!(
            open_segments_intersect(&p(0, 0), &p(2, 2), &p(0, 2), &p(2, 0)),
            SegmentIntersection::Proper
        );
    }

    #[test]
    fn shared_endpoint_is_not_a_crossing() {
        assert_eq!(
            open_segments_intersect(&p(0, 0), &p(1, 0), &p(1, 0), &p(2, 1)),
            SegmentIntersection::None
        );
    }

    #[test]
    fn endpoint_inside_other_segment_is_flagged() {
        assert_eq!(
            open_segments_intersect(&p(0, 0), &p(2, 0), &p(1, 0), &p(1, 5)),
            SegmentIntersection::TouchInterior { point: 2 }
        );
        assert_eq!(
            open_segments_intersect(&p(1, 0), &p(1, 5), &p(0, 0), &p(2, 0)),
            SegmentIntersection::TouchInterior { point: 0 }
        );
    }

    #[test]
    fn collinear_segments() {
        assert_eq!(
            open_segments_intersect(&p(0, 0), &p(2, 0), &p(1, 0), &p(3, 0)),
            SegmentIntersection::CollinearOverlap
        );
        assert_eq!(
            open_segments_intersect(&p(0, 0), &p(1, 0), &p(1, 0), &p(2, 0)),
            SegmentIntersection::None,
            "touching end to end is not an overlap"
        );
        assert_eq!(
            open_segments_intersect(&p(0, 0), &p(1, 0), &p(2, 0), &p(3, 0)),
            SegmentIntersection::None
        );
        assert_eq!(
            open_segments_intersect(&p(0, 0), &p(0, 2), &p(0, 1), &p(0, 3)),
            SegmentIntersection::CollinearOverlap,
            "vertical overlap uses the y key"
        );
    }

    #[test]
    fn near_miss_beyond_an_end_does_not_cross() {
        // d is collinear with ab but beyond b.
        assert_eq!(
            open_segments_intersect(&p(0, 0), &p(2, 0), &p(1, 1), &p(3, 0)),
            SegmentIntersection::None
        );
    }

    #[test]
    fn works_on_floats_too() {
        let q = |x: f64, y: f64| Point::new(x, y);
        assert_eq!(
            open_segments_intersect(&q(0.0, 0.0), &q(2.0, 2.0), &q(0.0, 2.0), &q(2.0, 0.0)),
            SegmentIntersection::Proper
        );
    }
}
