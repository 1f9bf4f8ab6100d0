//! Average-case optimal first-order methods for quadratic minimization.
//!
//! The crate models the spectral density of a Hessian (Marchenko-Pastur,
//! exponential, uniform or empirical), builds the residual orthogonal
//! polynomials of that density through three-term recurrences, and turns
//! their coefficients into momentum-type gradient methods. Classical
//! baselines, parameter estimation from matrix oracles and a Monte-Carlo
//! harness for synthetic quadratics are included.
//!
//! The numerical core is generic over the scalar type. Recurrence
//! transforms work over any [`Field`] (including exact rationals), the
//! floating point parts over [`Scalar`] (`f32`/`f64`). Concrete aliases
//! for `f64` and `f32` live at the crate root.

pub mod density;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod mmio;
pub mod optimizers;
pub mod orthopoly;
pub mod problems;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Field, Scalar};

/// `f64` density model.
pub type DensityModel = density::DensityModel<f64>;
/// `f32` density model.
pub type DensityModel32 = density::DensityModel<f32>;
/// `f64` residual recurrence.
pub type ResidualRecurrence = orthopoly::ResidualRecurrence<f64>;
/// `f32` residual recurrence.
pub type ResidualRecurrence32 = orthopoly::ResidualRecurrence<f32>;
/// `f64` general recurrence.
pub type GeneralRecurrence = orthopoly::GeneralRecurrence<f64>;
/// `f64` monic recurrence.
pub type MonicRecurrence = orthopoly::MonicRecurrence<f64>;
/// `f64` averaging weights.
pub type AveragingWeights = orthopoly::AveragingWeights<f64>;
/// `f64` method description.
pub type MethodSpec = optimizers::MethodSpec<f64>;
/// `f32` method description.
pub type MethodSpec32 = optimizers::MethodSpec<f32>;
/// `f64` iterate trace.
pub type IterateTrace = optimizers::IterateTrace<f64>;
/// `f32` iterate trace.
pub type IterateTrace32 = optimizers::IterateTrace<f32>;
/// `f64` dense symmetric matrix.
pub type DenseMatrix = linalg::DenseMatrix<f64>;
/// `f32` dense symmetric matrix.
pub type DenseMatrix32 = linalg::DenseMatrix<f32>;
/// `f64` estimated parameters.
pub type EstimatedParams = estimation::EstimatedParams<f64>;
/// `f64` MP fit.
pub type MpFit = estimation::MpFit<f64>;

pub use problems::{GeneratorSpec, QuadraticProblem};
