//! Rigid rotations and translations, used as controls and building blocks.

use std::sync::Arc;

use crate::error::{bail, Result};
use crate::geom::rotation::{self, Mat3};
use crate::geom::{CircleArc, Manifold, Point};
use crate::ifs::{IfsSystem, Map, RotationDomain};
use crate::scalar::Real;

/// `x ↦ x + β (mod 1)`.
#[derive(Debug, Clone, Copy)]
pub struct CircleRotation<S> {
    pub beta: S,
}

impl<S: Real> CircleRotation<S> {
    pub fn new(beta: S) -> Self {
        CircleRotation { beta }
    }
}

impl<S: Real> Map<S> for CircleRotation<S> {
    fn name(&self) -> String {
        format!("R[{}]", self.beta)
    }

    fn apply(&self, p: &Point<S>) -> Point<S> {
        match *p {
            Point::Circle(x) => Point::circle(x + self.beta),
            other => other,
        }
    }

    fn apply_inverse(&self, p: &Point<S>) -> Option<Point<S>> {
        match *p {
            Point::Circle(x) => Some(Point::circle(x - self.beta)),
            _ => None,
        }
    }

    fn has_inverse(&self) -> bool {
        true
    }

    fn is_isometry(&self) -> bool {
        true
    }

    fn rotation_domain(&self) -> Option<RotationDomain<S>> {
        Some(RotationDomain { arc: CircleArc::full(), shift: self.beta })
    }
}

/// `(x, y) ↦ (x + α₁, y + α₂)`.
#[derive(Debug, Clone, Copy)]
pub struct TorusTranslation<S> {
    pub alpha: [S; 2],
}

impl<S: Real> TorusTranslation<S> {
    pub fn new(alpha: [S; 2]) -> Self {
        TorusTranslation { alpha }
    }
}

impl<S: Real> Map<S> for TorusTranslation<S> {
    fn name(&self) -> String {
        format!("T[{}, {}]", self.alpha[0], self.alpha[1])
    }

    fn apply(&self, p: &Point<S>) -> Point<S> {
        match *p {
            Point::Torus([x, y]) => Point::torus(x + self.alpha[0], y + self.alpha[1]),
            other => other,
        }
    }

    fn apply_inverse(&self, p: &Point<S>) -> Option<Point<S>> {
        match *p {
            Point::Torus([x, y]) => Some(Point::torus(x - self.alpha[0], y - self.alpha[1])),
            _ => None,
        }
    }

    fn has_inverse(&self) -> bool {
        true
    }

    fn is_isometry(&self) -> bool {
        true
    }
}

/// Rotation of the sphere by a fixed matrix.
#[derive(Debug, Clone, Copy)]
pub struct SphereRotation<S> {
    pub label: &'static str,
    pub matrix: Mat3<S>,
}

impl<S: Real> Map<S> for SphereRotation<S> {
    fn name(&self) -> String {
        self.label.to_string()
    }

    fn apply(&self, p: &Point<S>) -> Point<S> {
        match *p {
            Point::Sphere(v) => Point::sphere(rotation::apply(&self.matrix, v)),
            other => other,
        }
    }

    fn apply_inverse(&self, p: &Point<S>) -> Option<Point<S>> {
        match *p {
            Point::Sphere(v) => Some(Point::sphere(rotation::apply(&rotation::transpose(&self.matrix), v))),
            _ => None,
        }
    }

    fn has_inverse(&self) -> bool {
        true
    }

    fn is_isometry(&self) -> bool {
        true
    }

    fn rotation_matrix(&self) -> Option<Mat3<S>> {
        Some(self.matrix)
    }
}

/// System of circle rotations by the given angles.
pub fn rotation_system<S: Real>(betas: &[S]) -> Result<IfsSystem<S>> {
    if betas.is_empty() {
        bail!(Input, "at least one rotation angle is required");
    }
    let gens = betas.iter().map(|&b| Arc::new(CircleRotation::new(b)) as Arc<dyn Map<S>>).collect();
    let label = format!("circle rotations {:?}", betas.iter().map(|b| b.as_f64()).collect::<Vec<_>>());
    IfsSystem::new(Manifold::Circle, label, gens)
}

/// System of torus translations by the given vectors.
pub fn translation_system<S: Real>(alphas: &[[S; 2]]) -> Result<IfsSystem<S>> {
    if alphas.is_empty() {
        bail!(Input, "at least one translation vector is required");
    }
    let gens = alphas.iter().map(|&a| Arc::new(TorusTranslation::new(a)) as Arc<dyn Map<S>>).collect();
    let label =
        format!("torus translations {:?}", alphas.iter().map(|a| [a[0].as_f64(), a[1].as_f64()]).collect::<Vec<_>>());
    IfsSystem::new(Manifold::Torus2, label, gens)
}
