//! Two rotations of the sphere about perpendicular axes.
//!
//! `T_γ` advances every point by arc length `γ` along its parallel about
//! the z-axis (the equator has length 1); `R_γ` does the same about the
//! x-axis.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::geom::rotation::{self, Mat3};
use crate::geom::{dist, norm3, sample_uniform, sphere_radius, Manifold, Point};
use crate::ifs::{apply_word, IfsSystem, Letter, Map, Word};
use crate::scalar::Real;
use crate::zoo::SphereRotation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SphereConfig {
    /// Arc length advanced by the rotation about the z-axis.
    pub gamma1: f64,
    /// Arc length advanced by the rotation about the x-axis.
    pub gamma2: f64,
}

impl Default for SphereConfig {
    fn default() -> Self {
        SphereConfig { gamma1: std::f64::consts::SQRT_2 - 1.0, gamma2: std::f64::consts::PI - 3.0 }
    }
}

/// Axis of one of the two example rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Z,
    X,
}

impl Axis {
    fn unit<S: Real>(self) -> [S; 3] {
        match self {
            Axis::Z => [S::zero(), S::zero(), S::one()],
            Axis::X => [S::one(), S::zero(), S::zero()],
        }
    }

    /// Cyclic relabelling putting this axis last; the rotation is then a
    /// rotation of the first two coordinates.
    fn to_local<S: Copy>(self, v: [S; 3]) -> [S; 3] {
        match self {
            Axis::Z => v,
            Axis::X => [v[1], v[2], v[0]],
        }
    }

    fn to_global<S: Copy>(self, v: [S; 3]) -> [S; 3] {
        match self {
            Axis::Z => v,
            Axis::X => [v[2], v[0], v[1]],
        }
    }
}

/// Rotation matrix advancing arc length `gamma` along the equator about `axis`.
pub fn axis_rotation<S: Real>(axis: Axis, gamma: S) -> Mat3<S> {
    rotation::about_axis(axis.unit(), S::TAU() * gamma)
}

/// The same rotation evaluated through the meridian construction: project
/// the point along its meridian to the equator, advance arc length `gamma`
/// there, and lift back to the original parallel. The poles are fixed.
pub fn meridian_rotate<S: Real>(axis: Axis, gamma: S, p: [S; 3]) -> [S; 3] {
    let rho = sphere_radius::<S>();
    let [a, b, h] = axis.to_local(p);
    let planar = a.hypot(b);
    if planar <= S::lit(1e-300) {
        return p;
    }
    // point on the equator below p
    let foot = [a * rho / planar, b * rho / planar];
    let angle = S::TAU() * gamma;
    let (s, c) = angle.sin_cos();
    let moved = [foot[0] * c - foot[1] * s, foot[0] * s + foot[1] * c];
    // back up the meridian to the parallel at height h
    let lift = (rho * rho - h * h).max(S::zero()).sqrt() / rho;
    axis.to_global([moved[0] * lift, moved[1] * lift, h])
}

impl SphereConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if !(v > 0.0 && v < 1.0) {
                bail!(Construction, "{name} = {v} must lie in (0, 1)");
            }
        }
        Ok(())
    }

    /// Builds the two rotations from their matrices after checking them
    /// against the meridian construction on random points.
    pub fn build<S: Real>(&self) -> Result<IfsSystem<S>> {
        self.validate()?;
        let tol = formula_tolerance::<S>();
        let dev = self.formula_deviation::<S>(1000, 0x5eed)?;
        if dev > tol {
            bail!(Construction, "matrix and meridian evaluations disagree by {dev:e}");
        }
        let t = SphereRotation { label: "T", matrix: axis_rotation(Axis::Z, S::lit(self.gamma1)) };
        let r = SphereRotation { label: "R", matrix: axis_rotation(Axis::X, S::lit(self.gamma2)) };
        let gens: Vec<Arc<dyn Map<S>>> = vec![Arc::new(t), Arc::new(r)];
        IfsSystem::new(Manifold::Sphere2, "sphere example", gens)
    }

    /// Largest distance between matrix and meridian evaluations of both
    /// generators over `samples` random points.
    pub fn formula_deviation<S: Real>(&self, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for (axis, g) in [(Axis::Z, self.gamma1), (Axis::X, self.gamma2)] {
            let m = axis_rotation(axis, S::lit(g));
            for _ in 0..samples {
                let p: Point<S> = sample_uniform(Manifold::Sphere2, &mut rng);
                let Point::Sphere(v) = p else { unreachable!() };
                let a = Point::sphere(rotation::apply(&m, v));
                let b = Point::sphere(meridian_rotate(axis, S::lit(g), v));
                worst = worst.max(dist(&a, &b)?.as_f64());
            }
        }
        Ok(worst)
    }
}

fn formula_tolerance<S: Real>() -> f64 {
    (S::epsilon().as_f64() * 1e4).max(1e-12)
}

/// A word of sphere rotations viewed as a single rotation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordRotation {
    /// Unit axis, absent when the composition is numerically the identity.
    pub axis: Option<[f64; 3]>,
    pub angle: f64,
    /// `±ρ·axis`.
    pub fixed_points: Option<[[f64; 3]; 2]>,
    /// Largest displacement of a fixed point under the word.
    pub residual: f64,
}

impl WordRotation {
    pub fn reliable(&self) -> bool {
        self.axis.is_some()
    }
}

/// Composes the rotation matrices of `w` and extracts its axis, angle and
/// fixed points, checking that the word really fixes them.
pub fn word_rotation_axis<S: Real>(sys: &IfsSystem<S>, w: &Word) -> Result<WordRotation> {
    sys.check_word(w)?;
    let mut m = rotation::identity::<S>();
    for &l in w.letters() {
        let Some(g) = sys.generator(l.generator).rotation_matrix() else {
            bail!(Capability, "generator {} is not a sphere rotation", sys.generator(l.generator).name());
        };
        let g = if l.inverted { rotation::transpose(&g) } else { g };
        m = rotation::mul(&m, &g);
    }
    let (axis, angle) = rotation::axis_angle(&m);
    let rho = sphere_radius::<S>();
    let Some(axis) = axis else {
        return Ok(WordRotation { axis: None, angle: 0.0, fixed_points: None, residual: 0.0 });
    };
    let n = norm3(axis);
    let pts = [axis.map(|c| c / n * rho), axis.map(|c| -c / n * rho)];
    let mut residual: f64 = 0.0;
    for v in pts {
        let p = Point::sphere(v);
        residual = residual.max(dist(&apply_word(sys, w, &p)?, &p)?.as_f64());
    }
    Ok(WordRotation {
        axis: Some(axis.map(|c| (c / n).as_f64())),
        angle: angle.as_f64(),
        fixed_points: Some(pts.map(|v| v.map(|c| c.as_f64()))),
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquicontinuityReport {
    pub samples: usize,
    pub max_len: usize,
    pub with_inverses: bool,
    pub max_deviation: f64,
    pub seed: u64,
}

/// Largest `|d(h p, h q) − d(p, q)|` over random words `h` of length
/// `1..=max_len` and random point pairs.
pub fn equicontinuity_check<S: Real>(
    sys: &IfsSystem<S>,
    samples: usize,
    max_len: usize,
    with_inverses: bool,
    seed: u64,
) -> Result<EquicontinuityReport> {
    if max_len == 0 {
        bail!(Input, "words must have positive length");
    }
    let alphabet = sys.alphabet(with_inverses);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let len = rng.gen_range(1..=max_len);
        let w = Word::new((0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect::<Vec<Letter>>());
        let p: Point<S> = sample_uniform(sys.manifold(), &mut rng);
        let q: Point<S> = sample_uniform(sys.manifold(), &mut rng);
        let d0 = dist(&p, &q)?;
        let d1 = dist(&apply_word(sys, &w, &p)?, &apply_word(sys, &w, &q)?)?;
        worst = worst.max((d1 - d0).abs().as_f64());
    }
    Ok(EquicontinuityReport { samples, max_len, with_inverses, max_deviation: worst, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::enumerate_words;

    fn sys() -> IfsSystem<f64> {
        SphereConfig::default().build().unwrap()
    }

    #[test]
    fn poles_and_equator() {
        let rho = sphere_radius::<f64>();
        let cfg = SphereConfig::default();
        let s = sys();
        for pole in [[0.0, 0.0, rho], [0.0, 0.0, -rho]] {
            let p = Point::sphere(pole);
            assert!(dist(&s.apply_letter(Letter::forward(0), &p), &p).unwrap() < 1e-12);
            assert_eq!(meridian_rotate(Axis::Z, cfg.gamma1, pole), pole);
        }
        let e = [rho, 0.0, 0.0];
        assert!(dist(&s.apply_letter(Letter::forward(1), &Point::sphere(e)), &Point::sphere(e)).unwrap() < 1e-12);
        // on the equator the move is exactly arc length gamma
        let h = [rho * 0.6, rho * 0.8, 0.0];
        let moved = meridian_rotate(Axis::Z, 0.0, h);
        assert!(dist(&Point::sphere(moved), &Point::sphere(h)).unwrap() < 1e-15);
        let t = s.apply_letter(Letter::forward(0), &Point::sphere(h));
        assert!((dist(&t, &Point::sphere(h)).unwrap() - cfg.gamma1.min(1.0 - cfg.gamma1)).abs() < 1e-12);
    }

    #[test]
    fn parallels_are_preserved() {
        let s = sys();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p: Point<f64> = sample_uniform(Manifold::Sphere2, &mut rng);
            let q = s.apply_letter(Letter::forward(0), &p);
            let (a, b) = (p.coords(), q.coords());
            assert!((a[0].hypot(a[1]) - b[0].hypot(b[1])).abs() < 1e-12);
            assert!((a[2] - b[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_and_meridian_paths_agree() {
        assert!(SphereConfig::default().formula_deviation::<f64>(1000, 11).unwrap() < 1e-12);
        SphereConfig::default().build::<f32>().unwrap();
    }

    #[test]
    fn inverse_composition_is_identity() {
        let s = sys();
        let w = Word::new(vec![Letter::forward(0), Letter::inverse(0)]);
        let p = Point::sphere([0.1, -0.05, 0.07]);
        assert!(dist(&apply_word(&s, &w, &p).unwrap(), &p).unwrap() < 1e-9);
        let rot = word_rotation_axis(&s, &w).unwrap();
        assert!(!rot.reliable() && rot.angle == 0.0);
    }

    #[test]
    fn single_letter_axis() {
        let s = sys();
        let rot = word_rotation_axis(&s, &Word::new(vec![Letter::forward(0)])).unwrap();
        let a = rot.axis.unwrap();
        assert!(a[2].abs() > 1.0 - 1e-12);
        let g = SphereConfig::default().gamma1;
        let expected = std::f64::consts::TAU * g;
        let expected = if expected > std::f64::consts::PI { std::f64::consts::TAU - expected } else { expected };
        assert!((rot.angle - expected).abs() < 1e-12);
    }

    #[test]
    fn short_words_have_fixed_points() {
        let s = sys();
        for w in enumerate_words(2, 6, true, 10_000).unwrap() {
            let rot = word_rotation_axis(&s, &w).unwrap();
            assert!(rot.residual < 1e-9, "{w}: {}", rot.residual);
        }
    }

    #[test]
    fn isometry_of_long_words() {
        let s = sys();
        for inv in [false, true] {
            let r = equicontinuity_check(&s, 1000, 20, inv, 3).unwrap();
            assert!(r.max_deviation < 1e-12, "{r:?}");
        }
        let p = Point::sphere([0.0, 0.1, 0.1]);
        let w = Word::new(vec![Letter::forward(1); 5]);
        let hp = apply_word(&s, &w, &p).unwrap();
        assert_eq!(dist(&hp, &hp).unwrap(), 0.0);
    }
}
