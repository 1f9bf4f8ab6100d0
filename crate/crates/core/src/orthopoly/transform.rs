//! Monic rescaling, kernel shift and residual normalization.

use crate::error::Error;
use crate::orthopoly::recurrence::{
    GeneralRecurrence, GeneralStep, MonicRecurrence, MonicStep, ResidualRecurrence, ResidualStep, StepAux,
};
use crate::scalar::Field;

fn degenerate(t: usize, reason: &str) -> Error {
    Error::DegenerateRecurrence { t, reason: reason.into() }
}

/// Rescales a general recurrence to monic form:
/// `a_t = ã_t / b̃_t`, `c_t = c̃_t / (b̃_t b̃_{t-1})`.
///
/// `c_1` multiplies `Q_{-1} = 0` and is returned as zero.
pub fn to_monic<F: Field>(src: &GeneralRecurrence<F>) -> MonicRecurrence<F> {
    let src = src.clone();
    MonicRecurrence::from_stateful(move |t, _| {
        let s = src.step(t)?;
        if s.b.is_degenerate() {
            return Err(degenerate(t, "zero leading coefficient b̃_t"));
        }
        let a = s.a / s.b.clone();
        let c = if t == 1 {
            F::zero()
        } else {
            let prev = src.step(t - 1)?;
            if prev.b.is_degenerate() {
                return Err(degenerate(t - 1, "zero leading coefficient b̃_t"));
            }
            s.c / (s.b * prev.b)
        };
        Ok(MonicStep { a, c })
    })
}

/// Kernel polynomials of a monic family: orthogonal under `(λ - ξ) dμ`
/// when the source is orthogonal under `dμ`.
///
/// With `e_0 = 0`: `d_t = a_t + e_{t-1} + ξ`, `e_t = c_{t+1} / d_t`, and
/// `P_t = (λ - ξ + d_t - e_t) P_{t-1} + d_t e_{t-1} P_{t-2}`.
pub fn kernel_shift<F: Field>(src: &MonicRecurrence<F>, xi: F) -> GeneralRecurrence<F> {
    let src = src.clone();
    GeneralRecurrence::from_stateful(move |t, prev: &[GeneralStep<F>]| {
        let e_prev = match prev.last() {
            Some(step) => step.aux.e.clone().expect("kernel shift steps carry e_t"),
            None => F::zero(),
        };
        let a_t = src.step(t)?.a;
        let d = a_t + e_prev.clone() + xi.clone();
        if d.is_degenerate() {
            return Err(degenerate(t, "d_t = 0: source polynomial vanishes at the shift point"));
        }
        let c_next = src.step(t + 1)?.c;
        let e = c_next / d.clone();
        Ok(GeneralStep {
            a: d.clone() - e.clone() - xi.clone(),
            b: F::one(),
            c: d.clone() * e_prev,
            aux: StepAux { delta: None, d: Some(d), e: Some(e), w: None },
        })
    })
}

/// Normalizes so that `P_t(0) = 1`: `δ_t = 1 / (ã_t + c̃_t δ_{t-1})`,
/// `δ_0 = 0`, `a_t = δ_t ã_t`, `b_t = δ_t b̃_t`.
///
/// Auxiliary `d`/`e`/`w` values of the source are carried over.
pub fn to_residual<F: Field>(src: &GeneralRecurrence<F>) -> ResidualRecurrence<F> {
    let src = src.clone();
    ResidualRecurrence::from_stateful(move |t, prev: &[ResidualStep<F>]| {
        let delta_prev = match prev.last() {
            Some(step) => step.aux.delta.clone().expect("residual steps carry δ_t"),
            None => F::zero(),
        };
        let s = src.step(t)?;
        let denom = s.a.clone() + s.c * delta_prev;
        if denom.is_degenerate() {
            return Err(degenerate(t, "source polynomial vanishes at 0"));
        }
        let delta = F::one() / denom;
        Ok(ResidualStep {
            a: delta.clone() * s.a,
            b: delta.clone() * s.b,
            aux: StepAux { delta: Some(delta), ..s.aux },
        })
    })
}
