//! Planar points and polyline primitives in the local metric frame.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{Field, Real};

/// Point in the local planar frame: `x` meters east, `y` meters north.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarPoint<T> {
    pub x: T,
    pub y: T,
}

impl<T> PlanarPoint<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }
}

impl<T: Field> PlanarPoint<T> {
    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x.clone() * other.x.clone() + self.y.clone() * other.y.clone()
    }

    pub fn cross(&self, other: &Self) -> T {
        self.x.clone() * other.y.clone() - self.y.clone() * other.x.clone()
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }
}

impl<T: Real> PlanarPoint<T> {
    pub fn norm(&self) -> T {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Self) -> T {
        (*self - *other).norm()
    }

    /// Direction of this vector, radians counterclockwise from +x.
    pub fn heading(&self) -> T {
        self.y.atan2(self.x)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Unit vector at `heading` radians counterclockwise from +x.
    pub fn from_heading(heading: T) -> Self {
        Self::new(heading.cos(), heading.sin())
    }

    /// Rotates counterclockwise by `angle` radians about the origin.
    pub fn rotated(&self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(&self, other: &Self, t: T) -> Self {
        *self + (*other - *self) * t
    }
}

impl<T: Field> Add for PlanarPoint<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Field> Sub for PlanarPoint<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Field> Mul<T> for PlanarPoint<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        Self::new(self.x * rhs.clone(), self.y * rhs)
    }
}

impl<T: Field> Neg for PlanarPoint<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Closest point on segment `a`-`b` to `p`, as `(point, fraction along a->b)`.
pub fn project_onto_segment<T: Real>(
    p: PlanarPoint<T>,
    a: PlanarPoint<T>,
    b: PlanarPoint<T>,
) -> (PlanarPoint<T>, T) {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq <= T::zero() {
        return (a, T::zero());
    }
    let t = ((p - a).dot(&ab) / len_sq).max(T::zero()).min(T::one());
    (a + ab * t, t)
}

/// Distance from `p` to segment `a`-`b`.
pub fn distance_to_segment<T: Real>(p: PlanarPoint<T>, a: PlanarPoint<T>, b: PlanarPoint<T>) -> T {
    let (q, _) = project_onto_segment(p, a, b);
    p.distance(&q)
}

/// Total chord length of a polyline.
pub fn polyline_length<T: Real>(points: &[PlanarPoint<T>]) -> T {
    points
        .windows(2)
        .fold(T::zero(), |acc, w| acc + w[0].distance(&w[1]))
}

/// Minimum distance from `p` to any sub-segment of `points`.
/// A single-point polyline degenerates to point distance; empty gives infinity.
pub fn distance_to_polyline<T: Real>(p: PlanarPoint<T>, points: &[PlanarPoint<T>]) -> T {
    match points {
        [] => T::infinity(),
        [only] => p.distance(only),
        _ => points
            .windows(2)
            .map(|w| distance_to_segment(p, w[0], w[1]))
            .fold(T::infinity(), T::min),
    }
}
