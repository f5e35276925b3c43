//! Generators, words of the generated semigroup, and orbits.

mod word;

pub use word::{enumerate_words, word_count, Letter, Word, WordIter};

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{bail, Result};
use crate::geom::rotation::Mat3;
use crate::geom::{dist, sample_uniform, Ball, CircleArc, Manifold, Point};
use crate::scalar::Real;

/// Arc of the circle on which a generator acts as the rotation `x ↦ x + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationDomain<S> {
    pub arc: CircleArc<S>,
    pub shift: S,
}

impl<S: Real> RotationDomain<S> {
    /// The domain on which the inverse map is a pure rotation.
    pub fn inverse(&self) -> Self {
        RotationDomain { arc: self.arc.shifted(self.shift), shift: -self.shift }
    }
}

/// A self-map of one of the supported manifolds.
///
/// Only `apply` is mandatory; the remaining methods expose optional
/// capabilities and structure that verifiers exploit.
pub trait Map<S: Real>: Send + Sync {
    fn name(&self) -> String;

    fn apply(&self, p: &Point<S>) -> Point<S>;

    fn apply_inverse(&self, _p: &Point<S>) -> Option<Point<S>> {
        None
    }

    fn has_inverse(&self) -> bool {
        false
    }

    /// The map preserves geodesic distance exactly.
    fn is_isometry(&self) -> bool {
        false
    }

    fn rotation_domain(&self) -> Option<RotationDomain<S>> {
        None
    }

    /// Ball on which the map is affine in the chart.
    fn affine_region(&self) -> Option<Ball<S>> {
        None
    }

    /// Matrix of the map when it is a rotation of the sphere.
    fn rotation_matrix(&self) -> Option<Mat3<S>> {
        None
    }
}

/// A finite family of generators acting on one manifold.
#[derive(Clone)]
pub struct IfsSystem<S> {
    manifold: Manifold,
    label: String,
    generators: Vec<Arc<dyn Map<S>>>,
}

impl<S: Real> std::fmt::Debug for IfsSystem<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<String> = self.generators.iter().map(|g| g.name()).collect();
        f.debug_struct("IfsSystem")
            .field("manifold", &self.manifold)
            .field("label", &self.label)
            .field("generators", &names)
            .finish()
    }
}

impl<S: Real> IfsSystem<S> {
    pub fn new(manifold: Manifold, label: impl Into<String>, generators: Vec<Arc<dyn Map<S>>>) -> Result<Self> {
        if generators.is_empty() {
            bail!(Input, "a system needs at least one generator");
        }
        Ok(IfsSystem { manifold, label: label.into(), generators })
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generator(&self, i: usize) -> &dyn Map<S> {
        self.generators[i].as_ref()
    }

    pub fn generators(&self) -> impl Iterator<Item = &dyn Map<S>> {
        self.generators.iter().map(|g| g.as_ref())
    }

    pub fn invertible(&self) -> bool {
        self.generators.iter().all(|g| g.has_inverse())
    }

    pub fn all_isometries(&self) -> bool {
        self.generators.iter().all(|g| g.is_isometry())
    }

    /// Letters available to searches: forward generators, then inverses
    /// when requested (and available).
    pub fn alphabet(&self, with_inverses: bool) -> Vec<Letter> {
        let mut out: Vec<Letter> = (0..self.len()).map(Letter::forward).collect();
        if with_inverses {
            out.extend((0..self.len()).filter(|&i| self.generators[i].has_inverse()).map(Letter::inverse));
        }
        out
    }

    pub fn check_letter(&self, l: Letter) -> Result<()> {
        if l.generator >= self.len() {
            bail!(Input, "generator {} out of range for a system of {}", l.generator + 1, self.len());
        }
        if l.inverted && !self.generators[l.generator].has_inverse() {
            bail!(Capability, "generator {} has no inverse", self.generators[l.generator].name());
        }
        Ok(())
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        w.letters().iter().try_for_each(|&l| self.check_letter(l))
    }

    /// Applies one letter; the letter must have passed [`Self::check_letter`].
    pub fn apply_letter(&self, l: Letter, p: &Point<S>) -> Point<S> {
        let g = &self.generators[l.generator];
        if l.inverted {
            g.apply_inverse(p).expect("inverse checked")
        } else {
            g.apply(p)
        }
    }

    pub fn letter_rotation_domain(&self, l: Letter) -> Option<RotationDomain<S>> {
        let d = self.generators[l.generator].rotation_domain()?;
        Some(if l.inverted { d.inverse() } else { d })
    }

    pub fn letter_is_isometry(&self, l: Letter) -> bool {
        self.generators[l.generator].is_isometry()
    }

    /// Samples the structural claims of every generator: images lie on the
    /// manifold, declared inverses invert, declared isometries preserve
    /// distance.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tol_manifold = S::lit(1e-10);
        for g in &self.generators {
            for _ in 0..samples {
                let p: Point<S> = sample_uniform(self.manifold, &mut rng);
                let q: Point<S> = sample_uniform(self.manifold, &mut rng);
                let fp = g.apply(&p);
                if fp.manifold() != self.manifold || !fp.is_on_manifold(tol_manifold) {
                    bail!(Construction, "{} maps {:?} off the manifold", g.name(), p.coords_f64());
                }
                if g.has_inverse() {
                    let back = g.apply_inverse(&fp).expect("declared inverse");
                    if dist(&back, &p)?.as_f64() > 1e-9 {
                        bail!(Construction, "inverse of {} fails at {:?}", g.name(), p.coords_f64());
                    }
                }
                if g.is_isometry() {
                    let dev = (dist(&fp, &g.apply(&q))? - dist(&p, &q)?).abs().as_f64();
                    if dev > 1e-12 {
                        bail!(Construction, "{} is flagged isometric but distorts by {dev:e}", g.name());
                    }
                }
            }
        }
        Ok(())
    }
}

/// `f_w(p)`, composing the letters of `w` right to left.
pub fn apply_word<S: Real>(sys: &IfsSystem<S>, w: &Word, p: &Point<S>) -> Result<Point<S>> {
    if p.manifold() != sys.manifold() {
        bail!(Domain, "point on {} given to a system on {}", p.manifold(), sys.manifold());
    }
    sys.check_word(w)?;
    Ok(w.time_order().fold(*p, |q, l| sys.apply_letter(l, &q)))
}

/// The fiberwise orbit `(f_ω¹(x), …, f_ω^n(x))` where `f_ω^i` applies the
/// first `i` acting letters of `ω` (see [`Word::first_acting`]).
pub fn fiberwise_orbit<S: Real>(sys: &IfsSystem<S>, omega: &Word, x: &Point<S>) -> Result<Vec<Point<S>>> {
    if omega.is_empty() {
        bail!(Input, "fiberwise orbit needs a nonempty sequence");
    }
    if x.manifold() != sys.manifold() {
        bail!(Domain, "point on {} given to a system on {}", x.manifold(), sys.manifold());
    }
    sys.check_word(omega)?;
    let mut cur = *x;
    Ok(omega
        .time_order()
        .map(|l| {
            cur = sys.apply_letter(l, &cur);
            cur
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{CircleRotation, TorusTranslation};
    use proptest::prelude::*;

    fn rotation_system(beta: f64) -> IfsSystem<f64> {
        IfsSystem::new(Manifold::Circle, "rot", vec![Arc::new(CircleRotation::new(beta)) as Arc<dyn Map<f64>>]).unwrap()
    }

    fn two_translations() -> IfsSystem<f64> {
        IfsSystem::new(
            Manifold::Torus2,
            "tr",
            vec![
                Arc::new(TorusTranslation::new([0.31, 0.17])) as Arc<dyn Map<f64>>,
                Arc::new(TorusTranslation::new([0.05, 0.71])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_word_is_identity() {
        let sys = rotation_system(0.3);
        let p = Point::circle(0.42);
        assert_eq!(apply_word(&sys, &Word::empty(), &p).unwrap(), p);
    }

    #[test]
    fn single_rotation_letter() {
        let beta = (2f64.sqrt() - 1.0) / 10.0;
        let sys = rotation_system(beta);
        let q = apply_word(&sys, &Word::new(vec![Letter::forward(0)]), &Point::circle(0.97)).unwrap();
        assert!((q.coords()[0] - (0.97 + beta - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn inverse_letters_require_capability() {
        struct NoInverse;
        impl Map<f64> for NoInverse {
            fn name(&self) -> String {
                "doubling".into()
            }
            fn apply(&self, p: &Point<f64>) -> Point<f64> {
                Point::circle(2.0 * p.coords()[0])
            }
        }
        let sys = IfsSystem::new(Manifold::Circle, "d", vec![Arc::new(NoInverse) as Arc<dyn Map<f64>>]).unwrap();
        let e = apply_word(&sys, &Word::new(vec![Letter::inverse(0)]), &Point::circle(0.1));
        assert!(matches!(e, Err(crate::Error::Capability(_))));
        let e = apply_word(&sys, &Word::new(vec![Letter::forward(3)]), &Point::circle(0.1));
        assert!(matches!(e, Err(crate::Error::Input(_))));
    }

    #[test]
    fn fiberwise_orbit_of_isometry_keeps_gaps() {
        let sys = two_translations();
        let omega = Word::power(Letter::forward(0), 12);
        let x = Point::torus(0.1, 0.2);
        let orbit = fiberwise_orbit(&sys, &omega, &x).unwrap();
        assert_eq!(orbit.len(), 12);
        let gap = dist(&x, &orbit[0]).unwrap();
        for w in orbit.windows(2) {
            assert!((dist(&w[0], &w[1]).unwrap() - gap).abs() < 1e-12);
        }
        let single = fiberwise_orbit(&sys, &Word::new(vec![Letter::forward(1)]), &x).unwrap();
        assert_eq!(single, vec![sys.apply_letter(Letter::forward(1), &x)]);
        assert!(fiberwise_orbit(&sys, &Word::empty(), &x).is_err());
    }

    #[test]
    fn validation_catches_false_isometry_claim() {
        struct Squash;
        impl Map<f64> for Squash {
            fn name(&self) -> String {
                "squash".into()
            }
            fn apply(&self, p: &Point<f64>) -> Point<f64> {
                let x = p.coords()[0];
                Point::circle(x + 0.05 * (std::f64::consts::TAU * x).sin())
            }
            fn is_isometry(&self) -> bool {
                true
            }
        }
        let sys = IfsSystem::new(Manifold::Circle, "s", vec![Arc::new(Squash) as Arc<dyn Map<f64>>]).unwrap();
        assert!(matches!(sys.validate(100, 1), Err(crate::Error::Construction(_))));
        assert!(two_translations().validate(1000, 1).is_ok());
    }

    fn arb_word(max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec((0usize..2, any::<bool>()), 0..max_len)
            .prop_map(|v| Word::new(v.into_iter().map(|(g, inv)| Letter { generator: g, inverted: inv }).collect()))
    }

    proptest! {
        #[test]
        fn word_application_is_a_homomorphism(w1 in arb_word(8), w2 in arb_word(8), x in 0.0..1.0f64, y in 0.0..1.0f64) {
            let sys = two_translations();
            let p = Point::torus(x, y);
            let lhs = apply_word(&sys, &w1.compose(&w2), &p).unwrap();
            let rhs = apply_word(&sys, &w1, &apply_word(&sys, &w2, &p).unwrap()).unwrap();
            prop_assert!(dist(&lhs, &rhs).unwrap() < 1e-10);
        }

        #[test]
        fn isometries_preserve_distance(w in arb_word(10), a in 0.0..1.0f64, b in 0.0..1.0f64) {
            let sys = two_translations();
            let (p, q) = (Point::torus(a, b), Point::torus(b, a));
            let d0 = dist(&p, &q).unwrap();
            let d1 = dist(&apply_word(&sys, &w, &p).unwrap(), &apply_word(&sys, &w, &q).unwrap()).unwrap();
            prop_assert!((d0 - d1).abs() < 1e-12);
        }
    }
}
