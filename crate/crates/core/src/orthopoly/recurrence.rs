//! Recurrence types and their evaluation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::SymmetricOperator;
use crate::orthopoly::stream::CoefficientStream;
use crate::scalar::{Field, Scalar};

/// Auxiliary per-step sequences kept for inspection.
///
/// `delta` is the residual normalization ratio, `d`/`e` the kernel-shift
/// sequences and `w` the alternative MP parameterization.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepAux<F> {
    pub delta: Option<F>,
    pub d: Option<F>,
    pub e: Option<F>,
    pub w: Option<F>,
}

impl<F> StepAux<F> {
    pub fn none() -> Self {
        Self { delta: None, d: None, e: None, w: None }
    }
}

/// Step of `Q_t = (a + b λ) Q_{t-1} + c Q_{t-2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralStep<F> {
    pub a: F,
    pub b: F,
    pub c: F,
    pub aux: StepAux<F>,
}

/// Step of `Q_t = (a + λ) Q_{t-1} + c Q_{t-2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonicStep<F> {
    pub a: F,
    pub c: F,
}

/// Step of `P_t = (a + b λ) P_{t-1} + (1 - a) P_{t-2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualStep<F> {
    pub a: F,
    pub b: F,
    pub aux: StepAux<F>,
}

/// A sequence of polynomials `P_0, P_1, ...` that can be evaluated pointwise.
pub trait PolynomialSequence<F: Field>: Send + Sync {
    /// Values `P_0(λ), ..., P_{t_max}(λ)`.
    fn values_upto(&self, t_max: usize, lambda: &F) -> Result<Vec<F>>;

    /// `P_t(λ)`.
    fn eval(&self, t: usize, lambda: &F) -> Result<F> {
        let mut v = self.values_upto(t, lambda)?;
        Ok(v.pop().expect("values_upto returns t_max + 1 values"))
    }
}

macro_rules! stream_type {
    ($name:ident, $step:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, Debug)]
        pub struct $name<F> {
            stream: Arc<CoefficientStream<$step<F>>>,
        }

        impl<F: Field> $name<F> {
            /// Stateless coefficient function of `t >= 1`.
            pub fn from_fn(f: impl Fn(usize) -> $step<F> + Send + Sync + 'static) -> Self {
                Self::from_stateful(move |t, _| Ok(f(t)))
            }

            /// Coefficient generator that sees all earlier steps.
            pub fn from_stateful(f: impl Fn(usize, &[$step<F>]) -> Result<$step<F>> + Send + Sync + 'static) -> Self {
                Self { stream: Arc::new(CoefficientStream::new(f)) }
            }

            /// Coefficients of step `t >= 1`.
            pub fn step(&self, t: usize) -> Result<$step<F>> {
                if t == 0 {
                    return Err(Error::InvalidParameter("recurrence steps start at t = 1".into()));
                }
                self.stream.get(t)
            }

            /// Steps `1..=t`.
            pub fn steps(&self, t: usize) -> Result<Vec<$step<F>>> {
                self.stream.prefix(t)
            }
        }
    };
}

stream_type!(
    GeneralRecurrence,
    GeneralStep,
    "Recurrence `Q_t = (a_t + b_t λ) Q_{t-1} + c_t Q_{t-2}` with `Q_{-1} = 0`, `Q_0 = 1`."
);
stream_type!(
    MonicRecurrence,
    MonicStep,
    "Recurrence `Q_t = (a_t + λ) Q_{t-1} + c_t Q_{t-2}` with `Q_{-1} = 0`, `Q_0 = 1`."
);
stream_type!(
    ResidualRecurrence,
    ResidualStep,
    "Residual recurrence `P_t = (a_t + b_t λ) P_{t-1} + (1 - a_t) P_{t-2}` with `P_{-1} = P_0 = 1`, so `P_1 = 1 + b_1 λ` and `P_t(0) = 1`."
);

fn run_three_term<F: Field>(
    t_max: usize,
    q_minus1: F,
    mut step: impl FnMut(usize, &F, &F) -> Result<F>,
) -> Result<Vec<F>> {
    let mut out = Vec::with_capacity(t_max + 1);
    out.push(F::one());
    let mut prev2 = q_minus1;
    for t in 1..=t_max {
        let prev1 = out[t - 1].clone();
        let next = step(t, &prev1, &prev2)?;
        prev2 = prev1;
        out.push(next);
    }
    Ok(out)
}

impl<F: Field> PolynomialSequence<F> for GeneralRecurrence<F> {
    fn values_upto(&self, t_max: usize, lambda: &F) -> Result<Vec<F>> {
        let steps = self.steps(t_max)?;
        run_three_term(t_max, F::zero(), |t, p1, p2| {
            let s = &steps[t - 1];
            Ok((s.a.clone() + s.b.clone() * lambda.clone()) * p1.clone() + s.c.clone() * p2.clone())
        })
    }
}

impl<F: Field> PolynomialSequence<F> for MonicRecurrence<F> {
    fn values_upto(&self, t_max: usize, lambda: &F) -> Result<Vec<F>> {
        let steps = self.steps(t_max)?;
        run_three_term(t_max, F::zero(), |t, p1, p2| {
            let s = &steps[t - 1];
            Ok((s.a.clone() + lambda.clone()) * p1.clone() + s.c.clone() * p2.clone())
        })
    }
}

impl<F: Field> PolynomialSequence<F> for ResidualRecurrence<F> {
    fn values_upto(&self, t_max: usize, lambda: &F) -> Result<Vec<F>> {
        let steps = self.steps(t_max)?;
        // Difference form of the update, so that P_t(0) = 1 holds exactly
        // in floating point as well.
        run_three_term(t_max, F::one(), |t, p1, p2| {
            let s = &steps[t - 1];
            Ok(p1.clone()
                + (F::one() - s.a.clone()) * (p2.clone() - p1.clone())
                + s.b.clone() * lambda.clone() * p1.clone())
        })
    }
}

/// Power-basis coefficients of `Q_0..=Q_{t_max}` (index `k` holds the
/// coefficient of `λ^k`), by exact propagation through the recurrence.
fn power_basis<F: Field>(
    t_max: usize,
    q_minus1: Vec<F>,
    coeffs: impl Fn(usize) -> Result<(F, F, F)>,
) -> Result<Vec<Vec<F>>> {
    let mut out: Vec<Vec<F>> = vec![vec![F::one()]];
    let mut prev2 = q_minus1;
    for t in 1..=t_max {
        let (a, b, c) = coeffs(t)?;
        let prev1 = out[t - 1].clone();
        let mut next = vec![F::zero(); t + 1];
        for (k, v) in prev1.iter().enumerate() {
            next[k] = next[k].clone() + a.clone() * v.clone();
            next[k + 1] = next[k + 1].clone() + b.clone() * v.clone();
        }
        for (k, v) in prev2.iter().enumerate() {
            next[k] = next[k].clone() + c.clone() * v.clone();
        }
        prev2 = prev1;
        out.push(next);
    }
    Ok(out)
}

impl<F: Field> GeneralRecurrence<F> {
    pub fn power_basis(&self, t_max: usize) -> Result<Vec<Vec<F>>> {
        power_basis(t_max, vec![], |t| {
            let s = self.step(t)?;
            Ok((s.a, s.b, s.c))
        })
    }
}

impl<F: Field> MonicRecurrence<F> {
    pub fn power_basis(&self, t_max: usize) -> Result<Vec<Vec<F>>> {
        power_basis(t_max, vec![], |t| {
            let s = self.step(t)?;
            Ok((s.a, F::one(), s.c))
        })
    }
}

impl<F: Field> ResidualRecurrence<F> {
    pub fn power_basis(&self, t_max: usize) -> Result<Vec<Vec<F>>> {
        power_basis(t_max, vec![F::one()], |t| {
            let s = self.step(t)?;
            let c = F::one() - s.a.clone();
            Ok((s.a, s.b, c))
        })
    }
}

impl<S: Scalar> ResidualRecurrence<S> {
    /// `P_t(H) v` via the vector form of the recurrence.
    pub fn eval_matrix_apply(&self, t: usize, op: &(impl SymmetricOperator<S> + ?Sized), v: &[S]) -> Result<Vec<S>> {
        let d = op.dim();
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
        let mut prev2 = v.to_vec();
        let mut prev1 = v.to_vec();
        let mut hv = vec![S::zero(); d];
        for step in self.steps(t)? {
            op.apply(&prev1, &mut hv);
            let c = S::one() - step.a;
            for i in 0..d {
                let next = step.a * prev1[i] + step.b * hv[i] + c * prev2[i];
                prev2[i] = prev1[i];
                prev1[i] = next;
            }
        }
        Ok(prev1)
    }
}

/// Blanket evaluation for closures `t, λ -> P_t(λ)`.
pub struct FnSequence<G>(pub G);

impl<F: Field, G> PolynomialSequence<F> for FnSequence<G>
where
    G: Fn(usize, &F) -> F + Send + Sync,
{
    fn values_upto(&self, t_max: usize, lambda: &F) -> Result<Vec<F>> {
        Ok((0..=t_max).map(|t| (self.0)(t, lambda)).collect())
    }
}
