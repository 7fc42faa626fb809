//! Weighted projective fibers, Dirichlet jet integrals and Monte-Carlo Morse
//! integrals for random curvature forms on jet-differential bundles.

pub mod curvature;
pub mod error;
pub mod exact;
pub mod hermitian;
pub mod jet_combinatorics;
pub mod measures;
pub mod models;
pub mod morse;
pub mod rng;
pub mod stats;
pub mod wps;

pub use curvature::{CurvatureTensor, TwistForm};
pub use error::{Error, Result};
pub use exact::Rational;
pub use hermitian::{HermitianForm, Signature};
pub use measures::{SimplexPoint, SphereTuple};
pub use stats::Estimate;
pub use wps::{FiberPoint, WeightSpec};
pub use morse::{ManifoldSample, MorseReport, SamplePoint};
pub use models::{CompleteIntersectionSpec, ModelSpec, SecondFundamentalForm};
