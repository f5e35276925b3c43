//! Canonical charts, geodesic distance and measure on the unit circle, the
//! flat 2-torus and the round 2-sphere.
//!
//! All three manifolds are normalised so that the natural "unit" length is 1:
//! the circle is `[0,1)` with arc length, the torus is `[0,1)^2` with the flat
//! metric, and the sphere has radius `1/(2π)` so that its equator has length 1.
//! Measures are always reported as fractions of the total volume.

mod measure;
mod net;
pub mod rotation;
mod sample;

pub(crate) use measure::intersection_monte_carlo;
pub use measure::{ball_intersection_measure, ball_measure, monte_carlo_measure, Measure, TORUS_CLOSED_FORM_LIMIT};
pub use net::net;
pub use sample::{sample_in_ball, sample_uniform};

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::scalar::{wrap_signed, wrap_unit, Real};

/// Radius of the sphere, chosen so that great circles have length 1.
pub fn sphere_radius<S: Real>() -> S {
    S::one() / (S::lit(2.0) * S::PI())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Circle,
    Torus2,
    Sphere2,
}

impl Manifold {
    /// Largest admissible ball radius (injectivity bound); 1/2 on all three.
    pub fn injectivity_bound<S: Real>(self) -> S {
        S::lit(0.5)
    }

    pub fn dimension(self) -> usize {
        match self {
            Manifold::Circle => 1,
            Manifold::Torus2 | Manifold::Sphere2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Manifold::Circle => "circle",
            Manifold::Torus2 => "torus2",
            Manifold::Sphere2 => "sphere2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "circle" | "s1" => Some(Manifold::Circle),
            "torus" | "torus2" | "t2" => Some(Manifold::Torus2),
            "sphere" | "sphere2" | "s2" => Some(Manifold::Sphere2),
            _ => None,
        }
    }
}

impl std::fmt::Display for Manifold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A point in the canonical chart of its manifold.
///
/// Circle and torus coordinates are kept reduced into `[0,1)`; sphere points
/// are embedding vectors of norm `1/(2π)`. Use the constructors, they enforce
/// both invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point<S> {
    Circle(S),
    Torus([S; 2]),
    Sphere([S; 3]),
}

impl<S: Real> Point<S> {
    pub fn circle(x: S) -> Self {
        Point::Circle(wrap_unit(x))
    }

    pub fn torus(x: S, y: S) -> Self {
        Point::Torus([wrap_unit(x), wrap_unit(y)])
    }

    /// Projects `v` radially onto the sphere. `v` must be nonzero.
    pub fn sphere(v: [S; 3]) -> Self {
        let n = norm3(v);
        let s = sphere_radius::<S>() / n;
        Point::Sphere([v[0] * s, v[1] * s, v[2] * s])
    }

    /// Builds a point from raw chart coordinates, validating the arity.
    pub fn from_coords(m: Manifold, c: &[S]) -> Result<Self> {
        match (m, c.len()) {
            (Manifold::Circle, 1) => Ok(Point::circle(c[0])),
            (Manifold::Torus2, 2) => Ok(Point::torus(c[0], c[1])),
            (Manifold::Sphere2, 3) => {
                if norm3([c[0], c[1], c[2]]) == S::zero() {
                    bail!(Domain, "zero vector is not a sphere point");
                }
                Ok(Point::sphere([c[0], c[1], c[2]]))
            }
            _ => bail!(Domain, "{} coordinates given for {}", c.len(), m),
        }
    }

    pub fn manifold(&self) -> Manifold {
        match self {
            Point::Circle(_) => Manifold::Circle,
            Point::Torus(_) => Manifold::Torus2,
            Point::Sphere(_) => Manifold::Sphere2,
        }
    }

    pub fn coords(&self) -> Vec<S> {
        match *self {
            Point::Circle(x) => vec![x],
            Point::Torus(v) => v.to_vec(),
            Point::Sphere(v) => v.to_vec(),
        }
    }

    pub fn coords_f64(&self) -> Vec<f64> {
        self.coords().into_iter().map(Real::as_f64).collect()
    }

    /// Converts to another scalar type.
    pub fn cast<T: Real>(&self) -> Point<T> {
        let c = |x: S| T::lit(x.as_f64());
        match *self {
            Point::Circle(x) => Point::circle(c(x)),
            Point::Torus([x, y]) => Point::torus(c(x), c(y)),
            Point::Sphere([x, y, z]) => Point::sphere([c(x), c(y), c(z)]),
        }
    }

    /// Antipodal point on the sphere / half-turn on circle and torus.
    pub fn antipode(&self) -> Self {
        let h = S::lit(0.5);
        match *self {
            Point::Circle(x) => Point::circle(x + h),
            Point::Torus([x, y]) => Point::torus(x + h, y + h),
            Point::Sphere([x, y, z]) => Point::Sphere([-x, -y, -z]),
        }
    }

    pub fn is_on_manifold(&self, tol: S) -> bool {
        let unit = |x: S| x.is_finite() && x >= S::zero() && x < S::one();
        match *self {
            Point::Circle(x) => unit(x),
            Point::Torus([x, y]) => unit(x) && unit(y),
            Point::Sphere(v) => (norm3(v) - sphere_radius::<S>()).abs() <= tol,
        }
    }
}

/// Geodesic ball `B(center, radius)`; also stands for its closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball<S> {
    pub center: Point<S>,
    pub radius: S,
}

impl<S: Real> Ball<S> {
    pub fn new(center: Point<S>, radius: S) -> Result<Self> {
        check_radius(center.manifold(), radius)?;
        Ok(Ball { center, radius })
    }

    pub fn manifold(&self) -> Manifold {
        self.center.manifold()
    }

    /// Closed-ball membership.
    pub fn contains(&self, p: &Point<S>) -> bool {
        matches!(dist(&self.center, p), Ok(d) if d <= self.radius)
    }
}

/// Open arc of the circle starting at `start` and running `len` in the
/// positive direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleArc<S> {
    pub start: S,
    pub len: S,
}

impl<S: Real> CircleArc<S> {
    /// Arc `(a, b)` traversed positively from `a` to `b`.
    pub fn between(a: S, b: S) -> Self {
        let start = wrap_unit(a);
        let mut len = wrap_unit(b - a);
        if len == S::zero() {
            len = S::one();
        }
        CircleArc { start, len }
    }

    pub fn end(&self) -> S {
        wrap_unit(self.start + self.len)
    }

    fn offset(&self, x: S) -> S {
        wrap_unit(x - self.start)
    }

    /// The whole circle.
    pub fn full() -> Self {
        CircleArc { start: S::zero(), len: S::one() }
    }

    pub fn is_full(&self) -> bool {
        self.len >= S::one()
    }

    /// Open-arc membership.
    pub fn contains(&self, x: S) -> bool {
        if self.is_full() {
            return true;
        }
        let o = self.offset(x);
        o > S::zero() && o < self.len
    }

    /// Whether the closed arc `[c - r, c + r]` lies inside this open arc.
    pub fn contains_ball(&self, c: S, r: S) -> bool {
        if self.is_full() {
            return r < S::lit(0.5);
        }
        let o = self.offset(c);
        self.contains(c) && o - r > S::zero() && o + r < self.len
    }

    /// Whether the closed arc `[a, b]` (positively oriented) contains the
    /// closure of this arc.
    pub fn inside_closed(&self, a: S, b: S) -> bool {
        let span = wrap_unit(b - a);
        let s = wrap_unit(self.start - a);
        s + self.len <= span
    }

    pub fn shifted(&self, by: S) -> Self {
        CircleArc { start: wrap_unit(self.start + by), len: self.len }
    }

    /// The complementary closed arc, returned as the open arc with the same
    /// endpoints (measure is what callers use).
    pub fn complement(&self) -> Self {
        CircleArc { start: self.end(), len: S::one() - self.len }
    }
}

pub(crate) fn check_radius<S: Real>(m: Manifold, r: S) -> Result<()> {
    if !(r > S::zero() && r <= m.injectivity_bound::<S>()) {
        bail!(Domain, "radius {r} outside (0, 1/2] on {m}");
    }
    Ok(())
}

/// Geodesic distance between two points of the same manifold.
pub fn dist<S: Real>(p: &Point<S>, q: &Point<S>) -> Result<S> {
    match (p, q) {
        (Point::Circle(a), Point::Circle(b)) => Ok(circle_dist(*a, *b)),
        (Point::Torus(a), Point::Torus(b)) => Ok(circle_dist(a[0], b[0]).hypot(circle_dist(a[1], b[1]))),
        (Point::Sphere(a), Point::Sphere(b)) => Ok(sphere_dist(*a, *b)),
        _ => bail!(Domain, "distance between points of {} and {}", p.manifold(), q.manifold()),
    }
}

/// Distance for callers that already know both points share a manifold.
#[allow(dead_code)]
pub(crate) fn dist_unchecked<S: Real>(p: &Point<S>, q: &Point<S>) -> S {
    dist(p, q).expect("points on the same manifold")
}

fn circle_dist<S: Real>(a: S, b: S) -> S {
    let d = (a - b).abs();
    d.min(S::one() - d)
}

fn sphere_dist<S: Real>(a: [S; 3], b: [S; 3]) -> S {
    // atan2 form stays accurate for nearly equal and nearly antipodal points
    let c = cross3(a, b);
    sphere_radius::<S>() * norm3(c).atan2(dot3(a, b))
}

/// Geodesic midpoint of two points (the shorter arc; undefined for antipodes).
pub fn midpoint<S: Real>(p: &Point<S>, q: &Point<S>) -> Point<S> {
    let h = S::lit(0.5);
    match (*p, *q) {
        (Point::Circle(a), Point::Circle(b)) => Point::circle(a + h * wrap_signed(b - a)),
        (Point::Torus(a), Point::Torus(b)) => {
            Point::torus(a[0] + h * wrap_signed(b[0] - a[0]), a[1] + h * wrap_signed(b[1] - a[1]))
        }
        (Point::Sphere(a), Point::Sphere(b)) => {
            let m = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
            if norm3(m) <= S::epsilon() {
                *p
            } else {
                Point::sphere(m)
            }
        }
        _ => *p,
    }
}

/// Moves from `p` by the tangent displacement `(s cos φ, s sin φ)` along a
/// geodesic of length `s`. On the sphere the tangent frame is [`tangent_frame`].
pub fn exp_polar<S: Real>(p: &Point<S>, s: S, phi: S) -> Point<S> {
    let (sn, cs) = phi.sin_cos();
    match *p {
        Point::Circle(x) => Point::circle(x + s * cs.signum()),
        Point::Torus([x, y]) => Point::torus(x + s * cs, y + s * sn),
        Point::Sphere(v) => {
            let rho = sphere_radius::<S>();
            let (e1, e2) = tangent_frame(v);
            let u = scale3(v, S::one() / norm3(v));
            let (sa, ca) = (s / rho).sin_cos();
            let w = [
                ca * u[0] + sa * (cs * e1[0] + sn * e2[0]),
                ca * u[1] + sa * (cs * e1[1] + sn * e2[1]),
                ca * u[2] + sa * (cs * e1[2] + sn * e2[2]),
            ];
            Point::sphere(w)
        }
    }
}

/// Orthonormal tangent frame at the sphere point `v`.
pub fn tangent_frame<S: Real>(v: [S; 3]) -> ([S; 3], [S; 3]) {
    let u = scale3(v, S::one() / norm3(v));
    // pick the coordinate axis least aligned with u
    let a = if u[0].abs() <= u[1].abs() && u[0].abs() <= u[2].abs() {
        [S::one(), S::zero(), S::zero()]
    } else if u[1].abs() <= u[2].abs() {
        [S::zero(), S::one(), S::zero()]
    } else {
        [S::zero(), S::zero(), S::one()]
    };
    let e1 = cross3(u, a);
    let e1 = scale3(e1, S::one() / norm3(e1));
    let e2 = cross3(u, e1);
    (e1, e2)
}

pub(crate) fn dot3<S: Real>(a: [S; 3], b: [S; 3]) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3<S: Real>(a: [S; 3], b: [S; 3]) -> [S; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm3<S: Real>(a: [S; 3]) -> S {
    dot3(a, a).sqrt()
}

pub(crate) fn scale3<S: Real>(a: [S; 3], s: S) -> [S; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circle_wraparound_distance() {
        let d = dist(&Point::circle(0.1), &Point::circle(0.9)).unwrap();
        assert!((d - 0.2_f64).abs() < 1e-15);
    }

    #[test]
    fn torus_diagonal_distance() {
        let d = dist(&Point::torus(0.0, 0.0), &Point::torus(0.5, 0.5)).unwrap();
        assert!((d - 0.5_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sphere_pole_to_pole_is_half() {
        let rho = sphere_radius::<f64>();
        let p = Point::sphere([0.0, 0.0, rho]);
        let q = Point::sphere([0.0, 0.0, -rho]);
        assert!((dist(&p, &q).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mismatched_manifolds_rejected() {
        let e = dist(&Point::circle(0.1_f64), &Point::torus(0.1, 0.1));
        assert!(matches!(e, Err(crate::Error::Domain(_))));
    }

    #[test]
    fn coordinate_reduction() {
        assert_eq!(Point::circle(-0.25_f64), Point::Circle(0.75));
        assert_eq!(Point::torus(1.5_f64, -1e-20), Point::Torus([0.5, 0.0]));
        assert!(Point::<f64>::from_coords(Manifold::Sphere2, &[0.0, 0.0, 0.0]).is_err());
        assert!(Point::<f64>::from_coords(Manifold::Torus2, &[0.1]).is_err());
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [Manifold::Circle, Manifold::Torus2, Manifold::Sphere2] {
            for _ in 0..10_000 {
                let a: Point<f64> = sample_uniform(m, &mut rng);
                let b = sample_uniform(m, &mut rng);
                let c = sample_uniform(m, &mut rng);
                let ab = dist(&a, &b).unwrap();
                assert_eq!(ab, dist(&b, &a).unwrap());
                assert!(ab >= 0.0);
                assert_eq!(dist(&a, &a).unwrap(), 0.0);
                assert!(ab <= dist(&a, &c).unwrap() + dist(&c, &b).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn exp_polar_moves_by_geodesic_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in [Manifold::Torus2, Manifold::Sphere2] {
            for k in 0..200 {
                let p: Point<f64> = sample_uniform(m, &mut rng);
                let s = 0.4 * (k as f64 + 0.5) / 200.0;
                let q = exp_polar(&p, s, 0.7 * k as f64);
                assert!((dist(&p, &q).unwrap() - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let d = dist(&Point::circle(0.1_f32), &Point::circle(0.9_f32)).unwrap();
        assert!((d - 0.2).abs() < 1e-6);
        let rho = sphere_radius::<f32>();
        let d = dist(&Point::sphere([rho, 0.0, 0.0]), &Point::sphere([0.0, rho, 0.0])).unwrap();
        assert!((d - 0.25).abs() < 1e-6);
    }
}
