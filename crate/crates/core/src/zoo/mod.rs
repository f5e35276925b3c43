//! The example systems: rigid controls, the circle pair, the conjugated
//! torus translation and the sphere rotation pair.

mod basic;
mod circle;
mod sphere;
mod torus;

pub use basic::{rotation_system, translation_system, CircleRotation, SphereRotation, TorusTranslation};
pub use circle::{
    circle_witness, compute_k, lebesgue_number, omega_construction, BlendedRotation, CircleConditions, CircleConfig,
    OmegaRun,
};
pub use sphere::{
    axis_rotation, equicontinuity_check, meridian_rotate, word_rotation_axis, Axis, EquicontinuityReport, SphereConfig,
    WordRotation,
};
pub use torus::{
    spectral_norm, torus_return_index, torus_witness, Conjugacy, ConjugatedTranslation, Mat2, ReturnIndex, TorusConfig,
    TorusExample,
};

use crate::criteria::{SearchBudget, WitnessConstructor, WitnessResult};
use crate::error::Result;
use crate::geom::Point;
use crate::ifs::IfsSystem;
use crate::scalar::Real;

/// Witnesses for the circle pair from the inductive symbol sequence.
pub struct CircleOmega<'a, S> {
    pub system: &'a IfsSystem<S>,
}

impl<S: Real> WitnessConstructor<S> for CircleOmega<'_, S> {
    fn name(&self) -> String {
        "circle omega construction".to_string()
    }

    fn construct(
        &self,
        x: &Point<S>,
        y: &Point<S>,
        r: f64,
        theta: f64,
        budget: &SearchBudget,
    ) -> Result<WitnessResult> {
        circle_witness(self.system, x, y, S::lit(r), theta, budget.max_word_len)
    }
}

/// Witnesses for the torus example from the return-index scan.
pub struct TorusReturn<'a, S> {
    pub example: &'a TorusExample<S>,
}

impl<S: Real> WitnessConstructor<S> for TorusReturn<'_, S> {
    fn name(&self) -> String {
        "torus return index".to_string()
    }

    fn construct(
        &self,
        x: &Point<S>,
        y: &Point<S>,
        r: f64,
        theta: f64,
        budget: &SearchBudget,
    ) -> Result<WitnessResult> {
        torus_witness(self.example, x, y, r, theta, budget.max_word_len as u64, budget.delta_cap)
    }
}
