//! Fitting density parameters from a matrix oracle.
//!
//! Traces come from Hutchinson's estimator with Rademacher probes, the
//! largest eigenvalue from power iteration. Probes are evaluated in
//! parallel, each with its own generator stream, and reduced in probe order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq, SymmetricOperator};
use crate::scalar::Scalar;

/// Default probe count for Hutchinson estimates.
pub const DEFAULT_PROBES: usize = 100;
/// Default power iteration budget.
pub const DEFAULT_POWER_ITERS: usize = 200;

/// Hutchinson estimates of `tr(H)` and `tr(H²)` with their sample variances.
#[derive(Clone, Debug, Serialize)]
pub struct TraceEstimate<S> {
    pub trace: S,
    pub trace_sq: S,
    pub probes: usize,
    /// Variance of the mean estimate of `tr(H)`.
    pub trace_var: S,
    /// Variance of the mean estimate of `tr(H²)`.
    pub trace_sq_var: S,
}

/// Marchenko-Pastur fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MpFit<S> {
    pub r: S,
    pub sigma2: S,
    /// `γ = 1/σ²`.
    pub gamma: S,
}

/// Uniform fit `[ℓ, L]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UniformFit<S> {
    pub ell: S,
    #[serde(rename = "L")]
    pub big_l: S,
    /// The lower edge was clamped at zero and `L` re-solved from `β₁`.
    pub clamped: bool,
}

/// Inputs shared by the estimators.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics<S> {
    pub dim: usize,
    pub probes: usize,
    pub power_iters: usize,
    pub trace: S,
    pub trace_sq: S,
    pub trace_var: S,
    pub trace_sq_var: S,
    pub lmax: S,
    pub beta1: S,
    pub beta2: S,
}

/// All fits from one set of oracle estimates; each route may fail
/// independently.
#[derive(Clone, Debug)]
pub struct EstimatedParams<S> {
    pub mp_lmax_trace: Result<MpFit<S>, String>,
    pub mp_moments: Result<MpFit<S>, String>,
    pub lambda0: Result<S, String>,
    pub uniform: Result<UniformFit<S>, String>,
    pub diagnostics: Diagnostics<S>,
}

fn rademacher<S: Scalar>(rng: &mut ChaCha8Rng, d: usize) -> Vec<S> {
    (0..d).map(|_| if rng.random::<bool>() { S::one() } else { -S::one() }).collect()
}

fn probe_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Hutchinson estimates `tr(H) ≈ mean zᵀHz` and `tr(H²) ≈ mean ‖Hz‖²`.
pub fn hutchinson_trace<S: Scalar>(
    op: &(impl SymmetricOperator<S> + ?Sized),
    probes: usize,
    seed: u64,
) -> Result<TraceEstimate<S>> {
    if probes == 0 {
        return Err(Error::InvalidParameter("need at least one probe".into()));
    }
    let d = op.dim();
    let samples: Vec<(S, S)> = (0..probes)
        .into_par_iter()
        .map(|k| {
            let z = rademacher::<S>(&mut probe_rng(seed, k as u64), d);
            let hz = op.apply_new(&z);
            (dot(&z, &hz), norm_sq(&hz))
        })
        .collect();
    let n = S::of(probes as f64);
    let mean = |f: fn(&(S, S)) -> S| samples.iter().map(f).sum::<S>() / n;
    let trace = mean(|s| s.0);
    let trace_sq = mean(|s| s.1);
    let var = |f: fn(&(S, S)) -> S, m: S| {
        if probes < 2 {
            return S::zero();
        }
        samples.iter().map(|s| (f(s) - m).powi(2)).sum::<S>() / (S::of((probes - 1) as f64) * n)
    };
    Ok(TraceEstimate { trace, trace_sq, probes, trace_var: var(|s| s.0, trace), trace_sq_var: var(|s| s.1, trace_sq) })
}

/// Largest eigenvalue by power iteration (Rayleigh quotient of the final
/// vector). Returns 0 for the zero operator.
pub fn power_lmax<S: Scalar>(op: &(impl SymmetricOperator<S> + ?Sized), iters: usize, seed: u64) -> Result<S> {
    if iters == 0 {
        return Err(Error::InvalidParameter("need at least one power iteration".into()));
    }
    let d = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<S> = (0..d).map(|_| S::of(rng.sample::<f64, _>(StandardNormal))).collect();
    let mut hv = vec![S::zero(); d];
    let mut rayleigh = S::zero();
    for _ in 0..iters {
        let norm = norm_sq(&v).sqrt();
        if norm == S::zero() {
            return Ok(S::zero());
        }
        v.iter_mut().for_each(|x| *x = *x / norm);
        op.apply(&v, &mut hv);
        let next = dot(&v, &hv);
        let converged = (next - rayleigh).abs() <= S::epsilon() * next.abs();
        rayleigh = next;
        std::mem::swap(&mut v, &mut hv);
        if converged {
            break;
        }
    }
    Ok(rayleigh.max(S::zero()))
}

/// Probabilistic PSD check: `zᵀHz >= -1e-10 ‖z‖²` on random probes.
pub fn check_psd<S: Scalar>(op: &(impl SymmetricOperator<S> + ?Sized), probes: usize, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..probes {
        let z: Vec<S> = (0..op.dim()).map(|_| S::of(rng.sample::<f64, _>(StandardNormal))).collect();
        let q = dot(&z, &op.apply_new(&z));
        if q < -S::of(1e-10) * norm_sq(&z) {
            return Err(Error::NotPsd(format!("probe with zᵀHz = {q}")));
        }
    }
    Ok(())
}

/// MP fit pinning the largest eigenvalue to the upper edge:
/// `ξ = √(τ/λmax)`, `r = (ξ/(1-ξ))²`, `γ = r/τ`, `σ² = 1/γ` with
/// `τ = trace/d`. Then `γ λmax = (1 + √r)²` and `γ τ = r`.
pub fn mp_from_lmax_trace<S: Scalar>(lmax: S, trace: S, d: usize) -> Result<MpFit<S>> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let tau = trace / S::of(d as f64);
    if !(tau > S::zero() && lmax.is_finite()) {
        return Err(Error::FitFailed(format!("need trace/d > 0, got {tau}")));
    }
    // A gap at rounding level (e.g. power iteration overshooting a constant
    // spectrum by an ulp) carries no spread information.
    if !(lmax - tau > S::of(64.0) * S::epsilon() * lmax) {
        return Err(Error::FitFailed(format!("trace/d = {tau} >= lmax = {lmax}: spectrum is not MP-like")));
    }
    let xi = (tau / lmax).sqrt();
    let r = (xi / (S::one() - xi)).powi(2);
    let gamma = r / tau;
    Ok(MpFit { r, sigma2: S::one() / gamma, gamma })
}

/// MP fit from the first two moments: `r = β₁²/(β₂ - β₁²)`,
/// `σ² = (β₂ - β₁²)/β₁`.
pub fn mp_from_moments<S: Scalar>(beta1: S, beta2: S) -> Result<MpFit<S>> {
    let var = beta2 - beta1 * beta1;
    if !(beta1 > S::zero()) || !(var > S::zero()) {
        return Err(Error::FitFailed(format!("need beta2 > beta1² > 0, got beta1 = {beta1}, beta2 = {beta2}")));
    }
    let sigma2 = var / beta1;
    Ok(MpFit { r: beta1 * beta1 / var, sigma2, gamma: S::one() / sigma2 })
}

/// Exponential rate `λ₀ = d / tr(H)`.
pub fn exp_rate_from_trace<S: Scalar>(trace: S, d: usize) -> Result<S> {
    if !(trace > S::zero()) || d == 0 {
        return Err(Error::FitFailed(format!("need trace > 0, got {trace}")));
    }
    Ok(S::of(d as f64) / trace)
}

/// Uniform fit by moments: `ℓ, L = β₁ ∓ √(3(β₂ - β₁²))`. If `ℓ < 0` it is
/// clamped to zero and `L = 2β₁` keeps the mean.
pub fn uniform_from_moments<S: Scalar>(beta1: S, beta2: S) -> Result<UniformFit<S>> {
    let var = beta2 - beta1 * beta1;
    if !(var > S::zero()) || !(beta1 > S::zero()) {
        return Err(Error::FitFailed(format!(
            "need beta2 > beta1² and beta1 > 0, got beta1 = {beta1}, beta2 = {beta2}"
        )));
    }
    let half_width = (S::of(3.0) * var).sqrt();
    let ell = beta1 - half_width;
    if ell < S::zero() {
        return Ok(UniformFit { ell: S::zero(), big_l: beta1 + beta1, clamped: true });
    }
    Ok(UniformFit { ell, big_l: beta1 + half_width, clamped: false })
}

/// Runs both MP routes, the exponential and the uniform fit from one set
/// of oracle estimates.
pub fn estimate_all<S: Scalar>(
    op: &(impl SymmetricOperator<S> + ?Sized),
    probes: usize,
    power_iters: usize,
    seed: u64,
) -> Result<EstimatedParams<S>> {
    let d = op.dim();
    let tr = hutchinson_trace(op, probes, seed)?;
    let lmax = power_lmax(op, power_iters, seed.wrapping_add(1))?;
    let n = S::of(d as f64);
    let (beta1, beta2) = (tr.trace / n, tr.trace_sq / n);
    fn s<T>(r: Result<T>) -> std::result::Result<T, String> {
        r.map_err(|e| e.to_string())
    }
    Ok(EstimatedParams {
        mp_lmax_trace: s(mp_from_lmax_trace(lmax, tr.trace, d)),
        mp_moments: s(mp_from_moments(beta1, beta2)),
        lambda0: s(exp_rate_from_trace(tr.trace, d)),
        uniform: s(uniform_from_moments(beta1, beta2)),
        diagnostics: Diagnostics {
            dim: d,
            probes,
            power_iters,
            trace: tr.trace,
            trace_sq: tr.trace_sq,
            trace_var: tr.trace_var,
            trace_sq_var: tr.trace_sq_var,
            lmax,
            beta1,
            beta2,
        },
    })
}
