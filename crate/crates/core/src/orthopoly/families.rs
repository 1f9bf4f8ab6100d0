//! Concrete polynomial families and the residual recurrences of the
//! density-optimal methods.

use crate::error::{invalid, Error, Result};
use crate::orthopoly::recurrence::{
    GeneralRecurrence, GeneralStep, MonicRecurrence, MonicStep, ResidualRecurrence, ResidualStep, StepAux,
};
use crate::orthopoly::transform::{kernel_shift, to_monic, to_residual};
use crate::scalar::{Field, Scalar};

fn int<F: Field>(v: usize) -> F {
    F::from_int(v as i64)
}

fn check_interval<F: Field>(ell: &F, big_l: &F) -> Result<()> {
    if !(*ell >= F::zero()) || !(*big_l > *ell) || (big_l.clone() - ell.clone()).is_degenerate() {
        return Err(invalid(format!("need 0 <= ell < L, got ell = {ell:?}, L = {big_l:?}")));
    }
    Ok(())
}

fn check_mp<S: Scalar>(r: S, sigma2: S) -> Result<()> {
    if !(r > S::zero() && r.is_finite() && sigma2 > S::zero() && sigma2.is_finite()) {
        return Err(invalid(format!("MP needs r > 0 and sigma2 > 0, got r = {r}, sigma2 = {sigma2}")));
    }
    Ok(())
}

/// Legendre polynomials mapped to `[ℓ, L]` (standard normalization,
/// value 1 at `λ = L`).
pub fn shifted_legendre<F: Field>(ell: F, big_l: F) -> Result<GeneralRecurrence<F>> {
    check_interval(&ell, &big_l)?;
    let width = big_l.clone() - ell.clone();
    let centre = big_l + ell;
    Ok(GeneralRecurrence::from_fn(move |t| {
        let k: F = int::<F>(2 * t - 1) / int(t);
        GeneralStep {
            a: -(k.clone() * centre.clone() / width.clone()),
            b: k * int(2) / width.clone(),
            c: -(int::<F>(t - 1) / int(t)),
            aux: StepAux::none(),
        }
    }))
}

/// Monic Legendre on `[ℓ, L]`: `a_t = -(L+ℓ)/2`,
/// `c_t = -(L-ℓ)²(t-1)² / (4(2t-1)(2t-3))`.
pub fn monic_legendre<F: Field>(ell: F, big_l: F) -> Result<MonicRecurrence<F>> {
    check_interval(&ell, &big_l)?;
    let w2 = (big_l.clone() - ell.clone()) * (big_l.clone() - ell.clone());
    let a = -(big_l + ell) / int(2);
    Ok(MonicRecurrence::from_fn(move |t| {
        let c = if t == 1 {
            F::zero()
        } else {
            -(w2.clone() * int(t - 1) * int(t - 1)) / (int::<F>(4) * int(2 * t - 1) * int(2 * t - 3))
        };
        MonicStep { a: a.clone(), c }
    }))
}

/// Residual polynomials for the uniform density on `[ℓ, L]`
/// (orthogonal under `λ dμ`).
///
/// `d_t = -(L+ℓ)/2 + e_{t-1}`, `e_t = -(L-ℓ)² t² / (4 d_t (4t² - 1))`,
/// `δ_t = 1 / (d_t - e_t + δ_{t-1} d_t e_{t-1})`, `a_t = δ_t (d_t - e_t)`,
/// `b_t = δ_t`, with `e_0 = δ_0 = 0`.
pub fn uniform_residual<F: Field>(ell: F, big_l: F) -> Result<ResidualRecurrence<F>> {
    check_interval(&ell, &big_l)?;
    let w2 = (big_l.clone() - ell.clone()) * (big_l.clone() - ell.clone());
    let half_sum = (big_l + ell) / int(2);
    Ok(ResidualRecurrence::from_stateful(move |t, prev: &[ResidualStep<F>]| {
        let (e_prev, delta_prev) = match prev.last() {
            Some(s) => (s.aux.e.clone().unwrap(), s.aux.delta.clone().unwrap()),
            None => (F::zero(), F::zero()),
        };
        let d = e_prev.clone() - half_sum.clone();
        if d.is_degenerate() {
            return Err(Error::DegenerateRecurrence { t, reason: "d_t = 0".into() });
        }
        let tt: F = int(t * t);
        let e = -(w2.clone() * tt.clone()) / (int::<F>(4) * d.clone() * (int::<F>(4) * tt - F::one()));
        let denom = d.clone() - e.clone() + delta_prev * d.clone() * e_prev;
        if denom.is_degenerate() {
            return Err(Error::DegenerateRecurrence { t, reason: "δ_t denominator vanishes".into() });
        }
        let delta = F::one() / denom;
        Ok(ResidualStep {
            a: delta.clone() * (d.clone() - e.clone()),
            b: delta.clone(),
            aux: StepAux { delta: Some(delta), d: Some(d), e: Some(e), w: None },
        })
    }))
}

/// The same family built by composing the generic transforms.
pub fn uniform_residual_composed<F: Field>(ell: F, big_l: F) -> Result<ResidualRecurrence<F>> {
    let legendre = shifted_legendre(ell, big_l)?;
    Ok(to_residual(&kernel_shift(&to_monic(&legendre), F::zero())))
}

/// Shifted Chebyshev polynomials of the second kind `U_t(z(λ))` with
/// `z(λ) = (λ - σ²(1+r)) / (2σ²√r)`, mapping the MP support to `[-1, 1]`.
pub fn shifted_chebyshev_u<S: Scalar>(r: S, sigma2: S) -> Result<GeneralRecurrence<S>> {
    check_mp(r, sigma2)?;
    let sr = r.sqrt();
    let a = -(S::one() + r) / sr;
    let b = S::one() / (sigma2 * sr);
    Ok(GeneralRecurrence::from_fn(move |_| GeneralStep { a, b, c: -S::one(), aux: StepAux::none() }))
}

/// MP-OPT: residual polynomials orthogonal under `λ dμ_MP`.
///
/// `δ_t = -1 / ((1+r)/√r + δ_{t-1})`, `δ_0 = 0`, `a_t = -δ_t (1+r)/√r`,
/// `b_t = δ_t / (σ²√r)`.
pub fn mp_residual<S: Scalar>(r: S, sigma2: S) -> Result<ResidualRecurrence<S>> {
    check_mp(r, sigma2)?;
    let sr = r.sqrt();
    let rho2 = (S::one() + r) / sr;
    Ok(ResidualRecurrence::from_stateful(move |_, prev: &[ResidualStep<S>]| {
        let delta_prev = prev.last().and_then(|s| s.aux.delta).unwrap_or(S::zero());
        let delta = -S::one() / (rho2 + delta_prev);
        Ok(ResidualStep {
            a: -delta * rho2,
            b: delta / (sigma2 * sr),
            aux: StepAux { delta: Some(delta), ..StepAux::none() },
        })
    }))
}

/// MP-OPT through the alternative parameterization
/// `w_t = 1 / (2ρ - w_{t-1})`, `w_0 = 0`, `ρ = (1+r)/(2√r)`, with
/// `a_t = 2ρ w_t`, `b_t = -w_t / (σ²√r)`.
pub fn mp_residual_w<S: Scalar>(r: S, sigma2: S) -> Result<ResidualRecurrence<S>> {
    check_mp(r, sigma2)?;
    let sr = r.sqrt();
    let two_rho = (S::one() + r) / sr;
    Ok(ResidualRecurrence::from_stateful(move |_, prev: &[ResidualStep<S>]| {
        let w_prev = prev.last().and_then(|s| s.aux.w).unwrap_or(S::zero());
        let w = S::one() / (two_rho - w_prev);
        Ok(ResidualStep { a: two_rho * w, b: -w / (sigma2 * sr), aux: StepAux { w: Some(w), ..StepAux::none() } })
    }))
}

/// Residual normalization of the monic MP family, orthogonal under `dμ_MP`:
/// constant `a = (1+r)/r`, `b = -1/(rσ²)`. Its norms are `r^{-t}`.
pub fn mp_monic_residual<F: Field>(r: F, sigma2: F) -> Result<ResidualRecurrence<F>> {
    if !(r > F::zero()) || !(sigma2 > F::zero()) {
        return Err(invalid("MP needs r > 0 and sigma2 > 0"));
    }
    let a = (F::one() + r.clone()) / r.clone();
    let b = -(F::one() / (r * sigma2));
    Ok(ResidualRecurrence::from_fn(move |_| ResidualStep { a: a.clone(), b: b.clone(), aux: StepAux::none() }))
}

/// Generalized Laguerre `L^{(α)}_t(λ₀ λ)`.
pub fn generalized_laguerre<F: Field>(alpha: F, lambda0: F) -> Result<GeneralRecurrence<F>> {
    if !(lambda0 > F::zero()) {
        return Err(invalid("lambda0 must be positive"));
    }
    Ok(GeneralRecurrence::from_fn(move |t| GeneralStep {
        a: (int::<F>(2 * t - 1) + alpha.clone()) / int(t),
        b: -(lambda0.clone() / int(t)),
        c: -((int::<F>(t - 1) + alpha.clone()) / int(t)),
        aux: StepAux::none(),
    }))
}

/// EXP: residual Laguerre polynomials for the rate-`λ₀` exponential density,
/// `a_t = 2t/(t+1)`, `b_t = -λ₀/(t+1)`.
pub fn laguerre_residual<F: Field>(lambda0: F) -> Result<ResidualRecurrence<F>> {
    if !(lambda0 > F::zero()) {
        return Err(invalid("lambda0 must be positive"));
    }
    Ok(ResidualRecurrence::from_fn(move |t| ResidualStep {
        a: int::<F>(2 * t) / int(t + 1),
        b: -(lambda0.clone() / int(t + 1)),
        aux: StepAux::none(),
    }))
}

/// Chebyshev polynomials of the first kind `T_t(z(λ))`,
/// `z(λ) = (L + ℓ - 2λ) / (L - ℓ)`.
pub fn chebyshev_t_source<F: Field>(ell: F, big_l: F) -> Result<GeneralRecurrence<F>> {
    check_interval(&ell, &big_l)?;
    let width = big_l.clone() - ell.clone();
    let z0 = (big_l + ell) / width.clone();
    Ok(GeneralRecurrence::from_fn(move |t| {
        let k: F = if t == 1 { F::one() } else { int(2) };
        GeneralStep {
            a: k.clone() * z0.clone(),
            b: -(k * int(2) / width.clone()),
            c: if t == 1 { F::zero() } else { -F::one() },
            aux: StepAux::none(),
        }
    }))
}

/// Residual Chebyshev polynomials `T_t(z(λ)) / T_t(z(0))` on `[ℓ, L]`
/// (the Chebyshev semi-iterative method).
pub fn chebyshev_residual<F: Field>(ell: F, big_l: F) -> Result<ResidualRecurrence<F>> {
    Ok(to_residual(&chebyshev_t_source(ell, big_l)?))
}

/// Constant-coefficient heavy ball: `a = 1 + momentum`, `b = -step`.
/// Momentum zero gives gradient descent.
pub fn momentum_residual<F: Field>(momentum: F, step: F) -> ResidualRecurrence<F> {
    let a = F::one() + momentum;
    let b = -step;
    ResidualRecurrence::from_fn(move |_| ResidualStep { a: a.clone(), b: b.clone(), aux: StepAux::none() })
}

/// Momentum method for `ℓ = 0`: step `1/L` and momentum `(t-1)/(t+2)`.
pub fn modified_chebyshev_residual<F: Field>(big_l: F) -> Result<ResidualRecurrence<F>> {
    if !(big_l > F::zero()) {
        return Err(invalid("L must be positive"));
    }
    let step = F::one() / big_l;
    Ok(ResidualRecurrence::from_fn(move |t| ResidualStep {
        a: F::one() + int::<F>(t - 1) / int(t + 2),
        b: -step.clone(),
        aux: StepAux::none(),
    }))
}
