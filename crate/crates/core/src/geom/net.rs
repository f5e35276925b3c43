use super::{check_radius, exp_polar, sphere_radius, Manifold, Point};
use crate::error::{bail, Result};
use crate::scalar::Real;

/// Finite `δ`-net of the closed ball `B̄(x, r)`.
///
/// Circle: equally spaced points of the arc, endpoints included. Torus and
/// sphere: a geodesic polar grid whose ring spacing and in-ring spacing are
/// both at most `δ`, with the outermost ring on the boundary. Every point of
/// the ball lies within `δ` of the net and consecutive rings are at most `2δ`
/// apart, so the net is `δ`-chain-connected.
pub fn net<S: Real>(x: &Point<S>, r: S, delta: S) -> Result<Vec<Point<S>>> {
    let m = x.manifold();
    check_radius(m, r)?;
    if !(delta > S::zero() && delta < r) {
        bail!(Domain, "net resolution {delta} must lie in (0, r) for r = {r}");
    }
    let segments = |len: S| -> usize {
        // tolerate rounding so that 0.2/0.01 gives 20 and not 21 segments
        let q = (len / delta).as_f64();
        ((q - 1e-9).ceil() as usize).max(1)
    };
    if m == Manifold::Circle {
        let n = segments(r + r);
        let c = x.coords()[0];
        let step = (r + r) / S::of_usize(n);
        return Ok((0..=n).map(|i| Point::circle(c - r + step * S::of_usize(i))).collect());
    }
    let rings = segments(r);
    let h = r / S::of_usize(rings);
    let tau = S::lit(std::f64::consts::TAU);
    let mut out = vec![*x];
    for j in 1..=rings {
        let s = h * S::of_usize(j);
        let circumference = match m {
            Manifold::Sphere2 => {
                let rho = sphere_radius::<S>();
                tau * rho * (s / rho).sin()
            }
            _ => tau * s,
        };
        if m == Manifold::Sphere2 && circumference <= delta * S::lit(1e-6) {
            // the ring degenerated to the antipode
            out.push(exp_polar(x, s, S::zero()));
            continue;
        }
        let n = segments(circumference);
        // stagger alternate rings so radial neighbours interleave
        let offset = if j % 2 == 0 { S::lit(0.5) } else { S::zero() };
        for k in 0..n {
            let phi = tau * (S::of_usize(k) + offset) / S::of_usize(n);
            out.push(exp_polar(x, s, phi));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{dist, sample_in_ball, sample_uniform, Ball};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circle_grid_has_21_points() {
        let pts = net(&Point::circle(0.5_f64), 0.1, 0.01).unwrap();
        assert_eq!(pts.len(), 21);
        for (i, p) in pts.iter().enumerate() {
            assert!((p.coords()[0] - (0.4 + 0.01 * i as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_resolution() {
        assert!(net(&Point::circle(0.5_f64), 0.1, 0.0).is_err());
        assert!(net(&Point::circle(0.5_f64), 0.1, 0.2).is_err());
        assert!(net(&Point::torus(0.5_f64, 0.5), 0.7, 0.01).is_err());
    }

    fn check_cover(m: Manifold, r: f64, delta: f64, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Point<f64> = sample_uniform(m, &mut rng);
        let pts = net(&c, r, delta).unwrap();
        let ball = Ball::new(c, r).unwrap();
        for p in &pts {
            assert!(dist(&c, p).unwrap() <= r + 1e-12);
        }
        for _ in 0..10_000 {
            let z = sample_in_ball(&ball, &mut rng);
            let near = pts.iter().map(|p| dist(&z, p).unwrap()).fold(f64::INFINITY, f64::min);
            assert!(near <= delta + 1e-12, "{m}: {near} > {delta}");
        }
    }

    #[test]
    fn covering_property() {
        check_cover(Manifold::Torus2, 0.1, 0.01, 1);
        check_cover(Manifold::Sphere2, 0.1, 0.01, 2);
        check_cover(Manifold::Circle, 0.1, 0.01, 3);
        check_cover(Manifold::Sphere2, 0.45, 0.04, 4);
        check_cover(Manifold::Torus2, 0.3, 0.05, 5);
    }

    #[test]
    fn hemisphere_net_reaches_boundary() {
        let rho = sphere_radius::<f64>();
        let c = Point::sphere([0.0, 0.0, rho]);
        let pts = net(&c, 0.25, 0.02).unwrap();
        let far = pts.iter().map(|p| dist(&c, p).unwrap()).fold(0.0, f64::max);
        assert!((far - 0.25).abs() < 1e-12);
    }
}
