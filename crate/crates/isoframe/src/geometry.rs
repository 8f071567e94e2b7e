//! Exact rational plane geometry: points, placements and the handful of
//! primitives the placement rules need (dominance order, reflections,
//! dyadic rounding for coordinate-size control).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::multigraph::VertexId;

/// Exact rational scalar used for all coordinates.
pub type Rational = BigRational;

/// Convenience constructor for small rationals.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// A coordinate axis of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// A point with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Point::new(rat_int(x), rat_int(y))
    }

    pub fn origin() -> Self {
        Point::new(Rational::zero(), Rational::zero())
    }

    pub fn offset(&self, dx: &Rational, dy: &Rational) -> Point {
        Point::new(&self.x + dx, &self.y + dy)
    }

    /// Coordinate differences `self − other`.
    pub fn delta(&self, other: &Point) -> (Rational, Rational) {
        (&self.x - &other.x, &self.y - &other.y)
    }

    /// Maximum-norm distance.
    pub fn linf_distance(&self, other: &Point) -> Rational {
        let (dx, dy) = self.delta(other);
        dx.abs().max(dy.abs())
    }

    /// Componentwise partial order: both coordinates no larger.
    pub fn leq(&self, other: &Point) -> bool {
        self.x <= other.x && self.y <= other.y
    }

    /// Strict dominance: componentwise ≤ and not equal.
    pub fn lt(&self, other: &Point) -> bool {
        self.leq(other) && self != other
    }

    pub fn reflect(&self, axis: Axis) -> Point {
        match axis {
            Axis::X => Point::new(self.x.clone(), -self.y.clone()),
            Axis::Y => Point::new(-self.x.clone(), self.y.clone()),
        }
    }

    /// Swaps the two coordinates.
    pub fn transpose(&self) -> Point {
        Point::new(self.y.clone(), self.x.clone())
    }
}

/// Largest power of two (possibly negative exponent) not exceeding the
/// positive rational `r`. Used to turn exact slack bounds into short dyadic
/// offsets so coordinate sizes stay tame over long constructions.
pub fn dyadic_floor_pow2(r: &Rational) -> Rational {
    assert!(r.is_positive(), "dyadic floor needs a positive bound");
    let one = Rational::one();
    let two = rat_int(2);
    let mut p = one.clone();
    if *r >= one {
        while &p * &two <= *r {
            p = &p * &two;
        }
    } else {
        while p > *r {
            p = &p / &two;
        }
    }
    p
}

/// Nearest multiple of 2^-bits to `r` (ties round up).
pub fn dyadic_round(r: &Rational, bits: u32) -> Rational {
    let scale = BigRational::from_integer(BigInt::from(1i64) << bits.min(62));
    let scale = if bits > 62 {
        // Compose shifts for large precisions.
        let mut s = scale;
        let mut rem = bits - 62;
        while rem > 0 {
            let step = rem.min(62);
            s *= BigRational::from_integer(BigInt::from(1i64) << step);
            rem -= step;
        }
        s
    } else {
        scale
    };
    let scaled = r * &scale;
    let rounded = (scaled + rat(1, 2)).floor();
    rounded / scale
}

/// An injective assignment of plane points to vertices (injectivity is a
/// checked property, not enforced by construction).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Placement {
    coords: BTreeMap<VertexId, Point>,
}

impl Placement {
    pub fn new() -> Self {
        Placement::default()
    }

    pub fn from_coords(coords: BTreeMap<VertexId, Point>) -> Self {
        Placement { coords }
    }

    pub fn insert(&mut self, v: VertexId, p: Point) {
        self.coords.insert(v, p);
    }

    pub fn point(&self, v: VertexId) -> Option<&Point> {
        self.coords.get(&v)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, &Point)> {
        self.coords.iter().map(|(&v, p)| (v, p))
    }

    pub fn coords(&self) -> &BTreeMap<VertexId, Point> {
        &self.coords
    }

    /// First coincident vertex pair, if any.
    pub fn injectivity_violation(&self) -> Option<(VertexId, VertexId)> {
        let entries: Vec<(VertexId, &Point)> = self.iter().collect();
        for i in 0..entries.len() {
            for j in (i + 1)..entries.len() {
                if entries[i].1 == entries[j].1 {
                    return Some((entries[i].0, entries[j].0));
                }
            }
        }
        None
    }

    pub fn is_injective(&self) -> bool {
        self.injectivity_violation().is_none()
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        self.coords.values().any(|q| q == p)
    }

    pub fn reflect(&self, axis: Axis) -> Placement {
        Placement {
            coords: self
                .coords
                .iter()
                .map(|(&v, p)| (v, p.reflect(axis)))
                .collect(),
        }
    }

    pub fn transpose(&self) -> Placement {
        Placement {
            coords: self.coords.iter().map(|(&v, p)| (v, p.transpose())).collect(),
        }
    }

    /// Rigidly translates every vertex of `class` by `(dx, dy)`.
    pub fn translate_class(
        &self,
        class: &BTreeSet<VertexId>,
        dx: &Rational,
        dy: &Rational,
    ) -> Placement {
        Placement {
            coords: self
                .coords
                .iter()
                .map(|(&v, p)| {
                    if class.contains(&v) {
                        (v, p.offset(dx, dy))
                    } else {
                        (v, p.clone())
                    }
                })
                .collect(),
        }
    }

    /// Restriction to the vertices in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<VertexId>) -> Placement {
        Placement {
            coords: self
                .coords
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .map(|(&v, p)| (v, p.clone()))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_order() {
        let a = Point::from_ints(0, 0);
        let b = Point::from_ints(1, 2);
        let c = Point::from_ints(1, -1);
        assert!(a.lt(&b));
        assert!(!a.lt(&c));
        assert!(!b.lt(&a));
        assert!(a.leq(&a) && !a.lt(&a));
    }

    #[test]
    fn reflections_compose_to_identity() {
        let p = Point::new(rat(3, 2), rat(-7, 5));
        assert_eq!(p.reflect(Axis::X).reflect(Axis::X), p);
        assert_eq!(p.reflect(Axis::Y).reflect(Axis::Y), p);
    }

    #[test]
    fn dyadic_floor_examples() {
        assert_eq!(dyadic_floor_pow2(&rat_int(5)), rat_int(4));
        assert_eq!(dyadic_floor_pow2(&rat_int(1)), rat_int(1));
        assert_eq!(dyadic_floor_pow2(&rat(3, 7)), rat(1, 4));
        assert_eq!(dyadic_floor_pow2(&rat(1, 8)), rat(1, 8));
    }

    #[test]
    fn dyadic_round_examples() {
        assert_eq!(dyadic_round(&rat(1, 3), 2), rat(1, 4));
        assert_eq!(dyadic_round(&rat(5, 3), 0), rat_int(2));
        assert_eq!(dyadic_round(&rat(-1, 3), 2), rat(-1, 4));
    }

    #[test]
    fn injectivity_detection() {
        let mut pl = Placement::new();
        pl.insert(VertexId(0), Point::from_ints(0, 0));
        pl.insert(VertexId(1), Point::from_ints(1, 0));
        assert!(pl.is_injective());
        pl.insert(VertexId(2), Point::from_ints(0, 0));
        assert_eq!(pl.injectivity_violation(), Some((VertexId(0), VertexId(2))));
    }
}
