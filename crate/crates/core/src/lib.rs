//! Iterated function systems on the circle, the flat 2-torus and the round
//! 2-sphere, their induced action on continua, and sampled verifiers for
//! overlap, hyper-minimality, orbit density and coverage.
//!
//! The geometry is generic over the scalar type; the aliases below fix it
//! to `f64`, which is what the verifiers and the command line use.

// negated comparisons are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod criteria;
pub mod error;
pub mod geom;
pub mod hyper;
pub mod ifs;
pub mod scalar;
pub mod zoo;

pub use error::{Error, Result};
pub use geom::Manifold;
pub use ifs::{Letter, Word};
pub use scalar::Real;

pub type Point = geom::Point<f64>;
pub type Ball = geom::Ball<f64>;
pub type Continuum = hyper::Continuum<f64>;
pub type System = ifs::IfsSystem<f64>;
