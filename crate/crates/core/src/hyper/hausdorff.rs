use super::nearest::Nearest;
use super::Continuum;
use crate::error::{bail, Result};
use crate::geom::{dist, Manifold, Point};
use crate::scalar::{wrap_unit, Real};

/// Directed Hausdorff distance `sup_{a∈A} inf_{b∈B} d(a, b)` between finite
/// sets.
pub fn directed_hausdorff<S: Real>(a: &[Point<S>], b: &[Point<S>]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let near = Nearest::new(b);
    a.iter().map(|p| near.distance(p)).fold(0.0, f64::max)
}

/// Hausdorff distance between finite point sets.
pub fn hausdorff_points<S: Real>(a: &[Point<S>], b: &[Point<S>]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Exact Hausdorff distance between closed circle arcs `[a0, a0 + la]` and
/// `[b0, b0 + lb]` (lengths below 1).
pub fn arc_hausdorff(a0: f64, la: f64, b0: f64, lb: f64) -> f64 {
    directed_arc(a0, la, b0, lb).max(directed_arc(b0, lb, a0, la))
}

fn directed_arc(a0: f64, la: f64, b0: f64, lb: f64) -> f64 {
    // positions are offsets from b0, so coincident arcs compare exactly
    let to_b = |o: f64| -> f64 {
        if o <= lb {
            0.0
        } else {
            // leave B forward by o - lb or backward by 1 - o
            (o - lb).min(1.0 - o)
        }
    };
    let s = wrap_unit(a0 - b0);
    let mut best = to_b(s).max(to_b(wrap_unit(s + la)));
    // the point of B's complement farthest from B
    let far = lb + 0.5 * (1.0 - lb);
    if wrap_unit(far - s) <= la {
        best = best.max(to_b(far));
    }
    best
}

/// Hausdorff distance between two continua.
///
/// Arcs, spherical caps and torus discs in the injectivity range are handled
/// in closed form; everything else goes through the finite-set distance of
/// the nets (an arc or ball is discretised at the other operand's resolution).
pub fn hausdorff<S: Real>(a: &Continuum<S>, b: &Continuum<S>) -> Result<f64> {
    if a.manifold() != b.manifold() {
        bail!(Domain, "Hausdorff distance between continua on {} and {}", a.manifold(), b.manifold());
    }
    match (a, b) {
        (Continuum::Ball { center: ca, radius: ra }, Continuum::Ball { center: cb, radius: rb }) => {
            let (ra, rb) = (ra.as_f64(), rb.as_f64());
            if let (Point::Circle(x), Point::Circle(y)) = (ca, cb) {
                let (x, y) = (x.as_f64(), y.as_f64());
                return Ok(arc_hausdorff(x - ra, 2.0 * ra, y - rb, 2.0 * rb));
            }
            let d = dist(ca, cb)?.as_f64();
            if d + ra.max(rb) <= 0.5 {
                return Ok(d + (ra - rb).abs());
            }
            if a.manifold() == Manifold::Sphere2 {
                // distance to a cap is the excess over its radius, and the
                // farthest point of a cap from any centre is capped by the antipode
                let directed = |r_from: f64, r_to: f64| ((d + r_from).min(0.5) - r_to).max(0.0);
                return Ok(directed(ra, rb).max(directed(rb, ra)));
            }
            // nets sized by the larger ball keep the point count bounded
            let delta = S::lit(ra.max(rb) / 40.0);
            let na = a.to_net(delta)?;
            let nb = b.to_net(delta)?;
            Ok(hausdorff_points(na.points(), nb.points()))
        }
        _ => {
            let delta = if a.resolution() > S::zero() { a.resolution() } else { b.resolution() };
            let na = a.to_net(delta)?;
            let nb = b.to_net(delta)?;
            Ok(hausdorff_points(na.points(), nb.points()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{sample_uniform, Manifold};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(a: &[Point<f64>], b: &[Point<f64>]) -> f64 {
        let dir = |x: &[Point<f64>], y: &[Point<f64>]| {
            x.iter().map(|p| y.iter().map(|q| dist(p, q).unwrap()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
        };
        dir(a, b).max(dir(b, a))
    }

    #[test]
    fn indexed_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in [Manifold::Circle, Manifold::Torus2, Manifold::Sphere2] {
            for _ in 0..50 {
                let na = rng.gen_range(1..200);
                let nb = rng.gen_range(1..200);
                let a: Vec<Point<f64>> = (0..na).map(|_| sample_uniform(m, &mut rng)).collect();
                let b: Vec<Point<f64>> = (0..nb).map(|_| sample_uniform(m, &mut rng)).collect();
                assert_eq!(hausdorff_points(&a, &b), brute(&a, &b));
            }
        }
    }

    // samples the arcs densely: an independent route to the exact formula
    fn sampled_arc(a0: f64, la: f64, b0: f64, lb: f64) -> f64 {
        let n = 4000;
        let pa: Vec<Point<f64>> = (0..=n).map(|i| Point::circle(a0 + la * i as f64 / n as f64)).collect();
        let pb: Vec<Point<f64>> = (0..=n).map(|i| Point::circle(b0 + lb * i as f64 / n as f64)).collect();
        brute(&pa, &pb)
    }

    #[test]
    fn arc_formula_matches_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..40 {
            let (a0, b0) = (rng.gen::<f64>(), rng.gen::<f64>());
            let (la, lb) = (rng.gen_range(0.0..0.9), rng.gen_range(0.0..0.9));
            let exact = arc_hausdorff(a0, la, b0, lb);
            let approx = sampled_arc(a0, la, b0, lb);
            assert!((exact - approx).abs() < 5e-4, "{a0} {la} {b0} {lb}: {exact} vs {approx}");
        }
    }

    #[test]
    fn arc_examples() {
        // equal radii: the distance of the centres
        assert!((arc_hausdorff(0.3 - 0.05, 0.1, 0.42 - 0.05, 0.1) - 0.12).abs() < 1e-12);
        // concentric radii 0.1 and 0.05
        assert!((arc_hausdorff(0.4, 0.2, 0.45, 0.1) - 0.05).abs() < 1e-12);
        assert_eq!(arc_hausdorff(0.1, 0.2, 0.1, 0.2), 0.0);
    }

    #[test]
    fn far_caps_match_nets() {
        use crate::geom::exp_polar;
        let c = Point::sphere([0.0, 0.0, 1.0]);
        for (d, ra, rb) in [(0.45, 0.1, 0.03), (0.5, 0.08, 0.08), (0.3, 0.25, 0.01)] {
            let a = Continuum::ball(c, ra).unwrap();
            let b = Continuum::ball(exp_polar(&c, d, 0.7), rb).unwrap();
            let delta = 1e-3;
            let nets = hausdorff_points(a.to_net(delta).unwrap().points(), b.to_net(delta).unwrap().points());
            let exact = hausdorff(&a, &b).unwrap();
            assert!((exact - nets).abs() <= 2.0 * delta, "d={d}: {exact} vs {nets}");
        }
    }
}
