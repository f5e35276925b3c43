use rand::Rng;

use super::{exp_polar, sphere_radius, Ball, Manifold, Point};
use crate::scalar::Real;

/// Draws a point from normalised Lebesgue measure.
pub fn sample_uniform<S: Real, R: Rng + ?Sized>(m: Manifold, rng: &mut R) -> Point<S> {
    match m {
        Manifold::Circle => Point::circle(S::lit(rng.gen::<f64>())),
        Manifold::Torus2 => Point::torus(S::lit(rng.gen::<f64>()), S::lit(rng.gen::<f64>())),
        Manifold::Sphere2 => {
            // Archimedes: the height is uniform on [-1, 1]
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let phi = rng.gen::<f64>() * std::f64::consts::TAU;
            let s = (1.0 - z * z).max(0.0).sqrt();
            let rho = sphere_radius::<f64>();
            Point::sphere([S::lit(rho * s * phi.cos()), S::lit(rho * s * phi.sin()), S::lit(rho * z)])
        }
    }
}

/// Draws a point uniformly from the closed geodesic ball.
pub fn sample_in_ball<S: Real, R: Rng + ?Sized>(ball: &Ball<S>, rng: &mut R) -> Point<S> {
    let r = ball.radius.as_f64();
    let phi = rng.gen::<f64>() * std::f64::consts::TAU;
    let s = match ball.manifold() {
        Manifold::Circle => {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            return Point::circle(ball.center.coords()[0] + S::lit(r * u));
        }
        Manifold::Torus2 => r * rng.gen::<f64>().sqrt(),
        Manifold::Sphere2 => {
            let rho = sphere_radius::<f64>();
            let c0 = (r / rho).cos();
            let c = 1.0 - rng.gen::<f64>() * (1.0 - c0);
            rho * c.clamp(-1.0, 1.0).acos()
        }
    };
    exp_polar(&ball.center, S::lit(s), S::lit(phi))
}
