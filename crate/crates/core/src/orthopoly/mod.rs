//! Three-term recurrences for orthogonal and residual polynomials.
//!
//! Recurrences are lazily generated, memoized coefficient streams shared by
//! the polynomial evaluators and the optimizers. The transforms
//! [`to_monic`], [`kernel_shift`] and [`to_residual`] compose to produce the
//! residual recurrence of a density from a classical family.

mod averaging;
mod families;
mod recurrence;
mod stream;
mod transform;

pub use averaging::{mp_mt, mp_mt_log, AveragedPolynomial, AveragingWeights};
pub use families::{
    chebyshev_residual, chebyshev_t_source, generalized_laguerre, laguerre_residual, modified_chebyshev_residual,
    momentum_residual, monic_legendre, mp_monic_residual, mp_residual, mp_residual_w, shifted_chebyshev_u,
    shifted_legendre, uniform_residual, uniform_residual_composed,
};
pub use recurrence::{
    FnSequence, GeneralRecurrence, GeneralStep, MonicRecurrence, MonicStep, PolynomialSequence, ResidualRecurrence,
    ResidualStep, StepAux,
};
pub use transform::{kernel_shift, to_monic, to_residual};
