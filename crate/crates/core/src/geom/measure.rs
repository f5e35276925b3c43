use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{check_radius, dist, sample_in_ball, sample_uniform, sphere_radius, Ball, Manifold, Point};
use crate::error::{bail, Result};
use crate::scalar::{wrap_signed, Real};

/// Largest radius sum for which two torus discs meet in at most one lens.
pub const TORUS_CLOSED_FORM_LIMIT: f64 = 0.5;

const MC_SAMPLES: usize = 1_000_000;
const MC_SEED: u64 = 0x5eed_ba11;

/// A normalised measure value; `std_err` is zero for exact results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measure {
    pub value: f64,
    pub std_err: f64,
}

impl Measure {
    pub fn exact(value: f64) -> Self {
        Measure { value, std_err: 0.0 }
    }

    pub fn is_exact(&self) -> bool {
        self.std_err == 0.0
    }
}

/// Normalised volume of a geodesic ball of radius `r`.
///
/// The unit torus contains every disc of radius at most 1/2 without
/// self-overlap, so `πr²` is exact on the whole admissible range.
pub fn ball_measure<S: Real>(m: Manifold, r: S) -> Result<f64> {
    check_radius(m, r)?;
    let r = r.as_f64();
    Ok(match m {
        Manifold::Circle => 2.0 * r,
        Manifold::Torus2 => std::f64::consts::PI * r * r,
        Manifold::Sphere2 => (1.0 - (std::f64::consts::TAU * r).cos()) / 2.0,
    })
}

/// Normalised measure of `B(x, rx) ∩ B(y, ry)`.
///
/// Exact for nested or disjoint balls, for arcs on the circle and for single
/// lenses on the torus; the sphere uses a ring quadrature around `x`. Torus
/// discs large enough to meet twice fall back to Monte Carlo.
pub fn ball_intersection_measure<S: Real>(x: &Point<S>, rx: S, y: &Point<S>, ry: S) -> Result<Measure> {
    let m = x.manifold();
    check_radius(m, rx)?;
    check_radius(m, ry)?;
    let d = dist(x, y)?.as_f64();
    let (rx, ry) = (rx.as_f64(), ry.as_f64());
    let (small, large) = if rx <= ry { (rx, ry) } else { (ry, rx) };
    if d + small <= large {
        return Ok(Measure::exact(ball_measure(m, small)?));
    }
    match m {
        Manifold::Circle => {
            let u = wrap_signed(y.coords()[0] - x.coords()[0]).as_f64();
            let len: f64 = [-1.0, 0.0, 1.0].iter().map(|k| interval_overlap(-rx, rx, u + k - ry, u + k + ry)).sum();
            Ok(Measure::exact(len))
        }
        Manifold::Torus2 if rx + ry <= TORUS_CLOSED_FORM_LIMIT => {
            if d >= rx + ry {
                return Ok(Measure::exact(0.0));
            }
            Ok(Measure::exact(lens_area(rx, ry, d)))
        }
        Manifold::Torus2 => intersection_monte_carlo(x, rx, y, ry, MC_SAMPLES, MC_SEED),
        Manifold::Sphere2 => {
            if d >= rx + ry {
                return Ok(Measure::exact(0.0));
            }
            Ok(Measure::exact(cap_intersection(rx, ry, d)))
        }
    }
}

fn interval_overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// Area of the intersection of two planar discs with radii `r1`, `r2` whose
/// centres are `d` apart (general position).
fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k.max(0.0).sqrt()
}

/// Normalised area of two intersecting spherical caps of geodesic radii
/// `rx`, `ry` at centre distance `d`, integrating ring by ring around the
/// first centre.
fn cap_intersection(rx: f64, ry: f64, d: f64) -> f64 {
    let rho = sphere_radius::<f64>();
    let (ax, ay, dd) = (rx / rho, ry / rho, d / rho);
    let (cy, cd, sd) = (ay.cos(), dd.cos(), dd.sin());
    // fraction of the ring at angle t from x that lies inside the y-cap
    let frac = |t: f64| -> f64 {
        let (st, ct) = t.sin_cos();
        if st * sd <= 0.0 {
            return if ct * cd >= cy { 1.0 } else { 0.0 };
        }
        let c = (cy - ct * cd) / (st * sd);
        c.clamp(-1.0, 1.0).acos() / std::f64::consts::PI
    };
    let f = |t: f64| 0.5 * t.sin() * frac(t);
    // the integrand has kinks where rings start or stop meeting the y-cap
    let mut knots = vec![0.0, ax];
    for k in [(dd - ay).abs(), dd + ay] {
        if k > 0.0 && k < ax {
            knots.push(k);
        }
    }
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.windows(2).map(|w| adaptive_simpson(&f, w[0], w[1], 1e-13, 40)).sum()
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Monte Carlo estimate of `m(B(x,rx) ∩ B(y,ry))` sampling inside `B(x,rx)`.
pub(crate) fn intersection_monte_carlo<S: Real>(
    x: &Point<S>,
    rx: f64,
    y: &Point<S>,
    ry: f64,
    n: usize,
    seed: u64,
) -> Result<Measure> {
    let m = x.manifold();
    let bx = Ball::new(*x, S::lit(rx))?;
    let by = Ball::new(*y, S::lit(ry))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..n).filter(|_| by.contains(&sample_in_ball(&bx, &mut rng))).count();
    let p = hits as f64 / n as f64;
    let vol = ball_measure(m, S::lit(rx))?;
    Ok(Measure { value: vol * p, std_err: vol * (p * (1.0 - p) / n as f64).sqrt() })
}

/// Monte Carlo estimate of the normalised measure of `{p : inside(p)}`.
pub fn monte_carlo_measure<S: Real, F>(m: Manifold, inside: F, n: usize, seed: u64) -> Result<Measure>
where
    F: Fn(&Point<S>) -> bool,
{
    if n == 0 {
        bail!(Input, "Monte Carlo needs at least one sample");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..n).filter(|_| inside(&sample_uniform(m, &mut rng))).count();
    let p = hits as f64 / n as f64;
    Ok(Measure { value: p, std_err: (p * (1.0 - p) / n as f64).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::exp_polar;
    use std::f64::consts::PI;

    const ALL: [Manifold; 3] = [Manifold::Circle, Manifold::Torus2, Manifold::Sphere2];

    fn origin(m: Manifold) -> Point<f64> {
        match m {
            Manifold::Circle => Point::circle(0.3),
            Manifold::Torus2 => Point::torus(0.2, 0.7),
            Manifold::Sphere2 => Point::sphere([0.3, -0.2, 0.5]),
        }
    }

    #[test]
    fn closed_forms() {
        assert!((ball_measure(Manifold::Circle, 0.1).unwrap() - 0.2).abs() < 1e-15);
        assert!((ball_measure(Manifold::Sphere2, 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!((ball_measure(Manifold::Torus2, 0.1).unwrap() - 0.031_415_926_535_897_934).abs() < 1e-15);
        assert!((ball_measure(Manifold::Sphere2, 0.5).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn radius_out_of_range() {
        for m in ALL {
            assert!(ball_measure(m, 0.0).is_err());
            assert!(ball_measure(m, 0.51).is_err());
            assert!(ball_measure(m, -0.1).is_err());
        }
    }

    #[test]
    fn ball_measure_matches_monte_carlo() {
        // 20 radii per manifold, 10^6 samples, 4 standard errors
        for m in ALL {
            let c = origin(m);
            for i in 1..=20 {
                let r = 0.49 * i as f64 / 20.0;
                let exact = ball_measure(m, r).unwrap();
                let mc = monte_carlo_measure(m, |p| dist(&c, p).unwrap() <= r, 1_000_000, i as u64).unwrap();
                let tol = 4.0 * mc.std_err.max(1e-7);
                assert!((mc.value - exact).abs() <= tol, "{m} r={r}: {} vs {exact}", mc.value);
            }
        }
    }

    #[test]
    fn containment_and_identity_cases() {
        let m = intersection(Point::circle(0.5), 0.1, Point::circle(0.51), 0.05);
        assert!((m.value - 0.1).abs() < 1e-15 && m.is_exact());
        for mf in ALL {
            let c = origin(mf);
            let v = ball_intersection_measure(&c, 0.2, &c, 0.2).unwrap();
            assert_eq!(v.value, ball_measure(mf, 0.2).unwrap());
        }
    }

    fn intersection(x: Point<f64>, rx: f64, y: Point<f64>, ry: f64) -> Measure {
        ball_intersection_measure(&x, rx, &y, ry).unwrap()
    }

    #[test]
    fn torus_lens_value() {
        let v = intersection(Point::torus(0.0, 0.0), 0.1, Point::torus(0.1, 0.0), 0.1);
        let (r, d) = (0.1_f64, 0.1_f64);
        let expected = 2.0 * r * r * (d / (2.0 * r)).acos() - d / 2.0 * (4.0 * r * r - d * d).sqrt();
        assert!((v.value - expected).abs() < 1e-15);
        assert!((v.value - 0.012_284).abs() < 1e-6);
    }

    #[test]
    fn circle_arcs_meeting_on_both_sides() {
        // arcs of radius 0.4 centred half a turn apart overlap in two pieces of 0.3
        let v = intersection(Point::circle(0.0), 0.4, Point::circle(0.5), 0.4);
        assert!((v.value - 0.6).abs() < 1e-12);
    }

    #[test]
    fn general_position_matches_monte_carlo() {
        for m in [Manifold::Torus2, Manifold::Sphere2, Manifold::Circle] {
            let x = origin(m);
            for (k, (rx, ry, d)) in
                [(0.1, 0.1, 0.1), (0.2, 0.07, 0.2), (0.3, 0.25, 0.4), (0.05, 0.3, 0.3)].into_iter().enumerate()
            {
                let y = exp_polar(&x, d, 1.1);
                let exact = intersection(x, rx, y, ry);
                let mc = intersection_monte_carlo(&x, rx, &y, ry, 400_000, k as u64).unwrap();
                // the "exact" side may itself be a Monte Carlo estimate on the torus
                let tol = 4.0 * exact.std_err.hypot(mc.std_err).max(1e-9);
                assert!((exact.value - mc.value).abs() <= tol, "{m} {rx} {ry} {d}: {exact:?} {mc:?}");
            }
        }
    }

    #[test]
    fn torus_large_discs_use_monte_carlo() {
        let v = intersection(Point::torus(0.0, 0.0), 0.4, Point::torus(0.5, 0.0), 0.4);
        assert!(!v.is_exact());
        // two lenses, one on each side of the torus
        let lens = lens_area(0.4, 0.4, 0.5);
        assert!((v.value - 2.0 * lens).abs() < 4.0 * v.std_err);
    }

    #[test]
    fn cap_hemisphere_overlap() {
        // two hemispheres with perpendicular poles meet in a quarter of the sphere
        let rho = sphere_radius::<f64>();
        let v = intersection(Point::sphere([0.0, 0.0, rho]), 0.25, Point::sphere([rho, 0.0, 0.0]), 0.25);
        assert!((v.value - 0.25).abs() < 1e-10, "{}", v.value);
        let _ = PI;
    }
}
