//! Iterate averaging over an orthogonal residual family.
//!
//! Given norms `m_i = ∫ P_i² ρ` of a family orthogonal under `ρ`, the
//! average `p*_t = (1/M_t) Σ_{i≤t} P_i / m_i` with `M_t = Σ_{i≤t} 1/m_i` is
//! the residual polynomial of degree `t` with the smallest `ρ`-norm, and
//! that norm is `1/M_t`.

use std::sync::Arc;

use crate::density::DensityModel;
use crate::error::{invalid, Error, Result};
use crate::orthopoly::recurrence::{PolynomialSequence, ResidualRecurrence};
use crate::orthopoly::stream::CoefficientStream;
use crate::scalar::Scalar;

/// Norms `m_t` and partial sums `M_t` for `t >= 0`.
#[derive(Clone, Debug)]
pub struct AveragingWeights<S> {
    // Entry t + 1 of the stream holds (m_t, M_t).
    stream: Arc<CoefficientStream<(S, S)>>,
}

impl<S: Scalar> AveragingWeights<S> {
    /// Weights from a norm function `t -> m_t`.
    pub fn from_fn(m: impl Fn(usize) -> Result<S> + Send + Sync + 'static) -> Self {
        Self {
            stream: Arc::new(CoefficientStream::new(move |k, prev: &[(S, S)]| {
                let t = k - 1;
                let m_t = m(t)?;
                if !(m_t > S::zero() && m_t.is_finite()) {
                    return Err(Error::DegenerateRecurrence { t, reason: format!("norm m_t = {m_t} is not positive") });
                }
                let big_m = prev.last().map_or(S::zero(), |p| p.1) + S::one() / m_t;
                Ok((m_t, big_m))
            })),
        }
    }

    /// Norms of the residual monic-MP family under `μ_MP`: `m_t = r^{-t}`.
    pub fn mp_monic(r: S) -> Result<Self> {
        if !(r > S::zero() && r.is_finite()) {
            return Err(invalid("r must be positive"));
        }
        Ok(Self::from_fn(move |t| Ok(r.powi(-(t as i32)))))
    }

    /// Closed-form norms of the MP-OPT family under the normalized weight
    /// `λ μ_MP / β₁`, see [`mp_mt`].
    pub fn mp_chebyshev(r: S) -> Result<Self> {
        mp_mt(r, 0)?;
        Ok(Self::from_fn(move |t| Ok(mp_mt(r, t)?.0)))
    }

    /// Norms `∫ P_t² λ^β dμ` computed by quadrature.
    pub fn from_quadrature(model: DensityModel<S>, rec: ResidualRecurrence<S>, beta: u32) -> Self {
        Self::from_fn(move |t| {
            model.weighted_integral(
                |lam| {
                    let p = rec.eval(t, &lam).unwrap_or(S::nan());
                    p * p
                },
                beta,
            )
        })
    }

    /// `m_t`.
    pub fn m(&self, t: usize) -> Result<S> {
        Ok(self.stream.get(t + 1)?.0)
    }

    /// `M_t = Σ_{i≤t} 1/m_i`.
    pub fn big_m(&self, t: usize) -> Result<S> {
        Ok(self.stream.get(t + 1)?.1)
    }

    /// `(m_i, M_i)` for `i = 0..=t`.
    pub fn table(&self, t: usize) -> Result<Vec<(S, S)>> {
        self.stream.prefix(t + 1)
    }
}

fn ln_sinh<S: Scalar>(x: S) -> S {
    // sinh x = e^x (1 - e^{-2x}) / 2 for x > 0.
    x + (-(-(x + x)).exp()).ln_1p() - S::of(std::f64::consts::LN_2)
}

/// `(ln m_t, ln M_t)` with `m_t = (sinh α / sinh((t+1)α))²`,
/// `α = |ln √r| = acosh((1+r)/(2√r))`.
pub fn mp_mt_log<S: Scalar>(r: S, t: usize) -> Result<(S, S)> {
    if !(r > S::zero() && r.is_finite()) {
        return Err(invalid(format!("r must be positive, got {r}")));
    }
    let alpha = (r.ln() * S::of(0.5)).abs();
    if alpha <= S::zero() {
        return Err(invalid("r = 1 makes α = 0 and the closed form degenerate"));
    }
    let ln_m = |i: usize| S::of(2.0) * (ln_sinh(alpha) - ln_sinh(S::of((i + 1) as f64) * alpha));
    // log-sum-exp of -ln m_i; the last term is the largest.
    let top = -ln_m(t);
    let sum: S = (0..=t).map(|i| (-ln_m(i) - top).exp()).sum();
    Ok((ln_m(t), top + sum.ln()))
}

/// `(m_t, M_t)` for the MP-OPT family.
///
/// `m_t = (sinh α / sinh((t+1)α))²` is `∫ P_t² λ dμ_MP / β₁` for the MP-OPT
/// residual polynomials, `β₁ = σ²r`. `M_t = Σ_{i≤t} 1/m_i`. Values may
/// under/overflow for large `t`; use [`mp_mt_log`] then.
pub fn mp_mt<S: Scalar>(r: S, t: usize) -> Result<(S, S)> {
    let (a, b) = mp_mt_log(r, t)?;
    Ok((a.exp(), b.exp()))
}

/// The averaged polynomial `p*_t = (1/M_t) Σ_{i≤t} P_i / m_i`.
#[derive(Clone, Debug)]
pub struct AveragedPolynomial<S> {
    pub rec: ResidualRecurrence<S>,
    pub weights: AveragingWeights<S>,
}

impl<S: Scalar> AveragedPolynomial<S> {
    pub fn new(rec: ResidualRecurrence<S>, weights: AveragingWeights<S>) -> Self {
        Self { rec, weights }
    }
}

impl<S: Scalar> PolynomialSequence<S> for AveragedPolynomial<S> {
    fn values_upto(&self, t_max: usize, lambda: &S) -> Result<Vec<S>> {
        let p = self.rec.values_upto(t_max, lambda)?;
        let table = self.weights.table(t_max)?;
        let mut acc = S::zero();
        Ok(p.iter()
            .zip(&table)
            .map(|(&pi, &(m, big_m))| {
                acc = acc + pi / m;
                acc / big_m
            })
            .collect())
    }
}
