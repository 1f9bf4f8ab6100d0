//! First-order methods on quadratic objectives `f(x) = ½ (x - x⋆)ᵀ H (x - x⋆)`.
//!
//! Every method except conjugate gradient has a residual polynomial `P_t`
//! with `x_t - x⋆ = P_t(H)(x_0 - x⋆)`. Methods given by a residual
//! recurrence run the update
//! `x_t = x_{t-1} + (1 - a_t)(x_{t-2} - x_{t-1}) + b_t ∇f(x_{t-1})` with
//! `x_{-1} = x_0`.

use crate::error::{invalid, Error, Result};
use crate::linalg::{all_finite, dot, norm_sq, SymmetricOperator};
use crate::orthopoly::{
    chebyshev_residual, modified_chebyshev_residual, momentum_residual, AveragedPolynomial, AveragingWeights,
    PolynomialSequence, ResidualRecurrence,
};
use crate::scalar::Scalar;

/// Quadratic objective given by an operator and its minimizer.
#[derive(Clone, Copy)]
pub struct QuadraticOracle<'a, S> {
    pub op: &'a dyn SymmetricOperator<S>,
    pub x_star: &'a [S],
}

impl<'a, S: Scalar> QuadraticOracle<'a, S> {
    pub fn new(op: &'a dyn SymmetricOperator<S>, x_star: &'a [S]) -> Result<Self> {
        if op.dim() != x_star.len() {
            return Err(Error::DimensionMismatch { expected: op.dim(), got: x_star.len() });
        }
        Ok(Self { op, x_star })
    }

    pub fn dim(&self) -> usize {
        self.x_star.len()
    }

    /// `x - x⋆`.
    pub fn error(&self, x: &[S]) -> Vec<S> {
        x.iter().zip(self.x_star).map(|(&a, &b)| a - b).collect()
    }

    /// `∇f(x) = H (x - x⋆)`.
    pub fn gradient(&self, x: &[S]) -> Vec<S> {
        self.op.apply_new(&self.error(x))
    }

    /// `f(x) = ½ (x - x⋆)ᵀ H (x - x⋆)`.
    pub fn f_gap(&self, x: &[S]) -> S {
        let e = self.error(x);
        S::of(0.5) * dot(&e, &self.op.apply_new(&e))
    }

    fn check(&self, x0: &[S]) -> Result<()> {
        if x0.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x0.len() });
        }
        Ok(())
    }
}

/// Per-iteration error measures of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateTrace<S> {
    /// `‖x_t - x⋆‖²`.
    pub dist_sq: Vec<S>,
    /// `f(x_t) - f(x⋆)`.
    pub f_gap: Vec<S>,
    /// `‖∇f(x_t)‖²`.
    pub grad_sq: Vec<S>,
    /// Last finite iterate.
    pub final_iterate: Vec<S>,
    /// A non-finite iterate appeared; the trace stops before it.
    pub diverged: bool,
    /// Conjugate gradient stopped (zero residual or curvature) and the
    /// remaining entries repeat the final iterate.
    pub terminated_early: bool,
}

impl<S: Scalar> IterateTrace<S> {
    fn new(capacity: usize) -> Self {
        Self {
            dist_sq: Vec::with_capacity(capacity),
            f_gap: Vec::with_capacity(capacity),
            grad_sq: Vec::with_capacity(capacity),
            final_iterate: Vec::new(),
            diverged: false,
            terminated_early: false,
        }
    }

    /// Records the metrics of an iterate with error `e` and gradient `g`.
    /// Returns `false` (and flags divergence) if any value is not finite.
    fn record(&mut self, x: &[S], e: &[S], g: &[S]) -> bool {
        let dist = norm_sq(e);
        let f = S::of(0.5) * dot(e, g);
        let gs = norm_sq(g);
        if !(all_finite(x) && dist.is_finite() && f.is_finite() && gs.is_finite()) {
            self.diverged = true;
            return false;
        }
        self.dist_sq.push(dist);
        self.f_gap.push(f.max(S::zero()));
        self.grad_sq.push(gs);
        self.final_iterate = x.to_vec();
        true
    }

    /// Number of recorded iterations minus one.
    pub fn horizon(&self) -> usize {
        self.dist_sq.len().saturating_sub(1)
    }

    /// `e_tᵀ H^β e_t` for `β ∈ {0, 1, 2}` (`f_gap` is half of `β = 1`).
    pub fn weighted(&self, beta: u32) -> Option<Vec<S>> {
        match beta {
            0 => Some(self.dist_sq.clone()),
            1 => Some(self.f_gap.iter().map(|&v| v + v).collect()),
            2 => Some(self.grad_sq.clone()),
            _ => None,
        }
    }
}

/// A first-order method.
#[derive(Clone, Debug)]
pub enum MethodSpec<S> {
    GradientDescent {
        step: S,
    },
    Polyak {
        ell: S,
        big_l: S,
    },
    Nesterov {
        ell: S,
        big_l: S,
    },
    ChebyshevSemiIterative {
        ell: S,
        big_l: S,
    },
    ModifiedChebyshev {
        big_l: S,
    },
    ConjugateGradient,
    /// Any residual recurrence (MP-OPT, EXP, UNIF, ...).
    RecurrenceDriven {
        rec: ResidualRecurrence<S>,
    },
    MpAsymptotic {
        r: S,
        sigma2: S,
    },
    Averaged {
        rec: ResidualRecurrence<S>,
        weights: AveragingWeights<S>,
    },
}

impl<S: Scalar> MethodSpec<S> {
    /// MP-OPT.
    pub fn mp_opt(r: S, sigma2: S) -> Result<Self> {
        Ok(Self::RecurrenceDriven { rec: crate::orthopoly::mp_residual(r, sigma2)? })
    }

    /// EXP.
    pub fn exp(lambda0: S) -> Result<Self> {
        Ok(Self::RecurrenceDriven { rec: crate::orthopoly::laguerre_residual(lambda0)? })
    }

    /// UNIF.
    pub fn unif(ell: S, big_l: S) -> Result<Self> {
        Ok(Self::RecurrenceDriven { rec: crate::orthopoly::uniform_residual(ell, big_l)? })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::GradientDescent { .. } => "gd",
            Self::Polyak { .. } => "polyak",
            Self::Nesterov { .. } => "nesterov",
            Self::ChebyshevSemiIterative { .. } => "chebyshev",
            Self::ModifiedChebyshev { .. } => "modified-chebyshev",
            Self::ConjugateGradient => "cg",
            Self::RecurrenceDriven { .. } => "recurrence",
            Self::MpAsymptotic { .. } => "mp-asympt",
            Self::Averaged { .. } => "averaged",
        }
    }

    /// The residual recurrence driving the method, if it has one.
    pub fn residual_recurrence(&self) -> Result<Option<ResidualRecurrence<S>>> {
        Ok(Some(match self {
            Self::GradientDescent { step } => {
                if !step.is_finite() {
                    return Err(invalid("gradient step must be finite"));
                }
                momentum_residual(S::zero(), *step)
            }
            Self::Polyak { ell, big_l } => {
                let (m, s) = polyak_params(*ell, *big_l)?;
                momentum_residual(m, s)
            }
            Self::ChebyshevSemiIterative { ell, big_l } => {
                if !(*ell > S::zero()) {
                    return Err(invalid("Chebyshev needs ell > 0; use ModifiedChebyshev for ell = 0"));
                }
                chebyshev_residual(*ell, *big_l)?
            }
            Self::ModifiedChebyshev { big_l } => modified_chebyshev_residual(*big_l)?,
            Self::RecurrenceDriven { rec } => rec.clone(),
            Self::MpAsymptotic { r, sigma2 } => {
                let (m, s) = mp_asymptotic_params(*r, *sigma2)?;
                momentum_residual(m, s)
            }
            Self::Nesterov { .. } | Self::ConjugateGradient | Self::Averaged { .. } => return Ok(None),
        }))
    }

    /// The residual polynomial sequence, if the method has one (all but CG).
    pub fn residual_polynomial(&self) -> Result<Option<Box<dyn PolynomialSequence<S>>>> {
        if let Some(rec) = self.residual_recurrence()? {
            return Ok(Some(Box::new(rec)));
        }
        Ok(match self {
            Self::Nesterov { ell, big_l } => Some(Box::new(NesterovPolynomial::new(*ell, *big_l)?)),
            Self::Averaged { rec, weights } => Some(Box::new(AveragedPolynomial::new(rec.clone(), weights.clone()))),
            _ => None,
        })
    }
}

/// Runs `method` for `horizon` iterations from `x0`.
pub fn run<S: Scalar>(
    method: &MethodSpec<S>,
    oracle: &QuadraticOracle<'_, S>,
    x0: &[S],
    horizon: usize,
) -> Result<IterateTrace<S>> {
    oracle.check(x0)?;
    match method {
        MethodSpec::ConjugateGradient => conjugate_gradient(oracle, x0, horizon),
        MethodSpec::Nesterov { ell, big_l } => nesterov(*ell, *big_l, oracle, x0, horizon),
        MethodSpec::Averaged { rec, weights } => averaged_run(rec, weights, oracle, x0, horizon),
        _ => {
            let rec = method.residual_recurrence()?.expect("recurrence-driven method");
            run_recurrence(&rec, oracle, x0, horizon)
        }
    }
}

/// Runs the momentum update given by a residual recurrence.
pub fn run_recurrence<S: Scalar>(
    rec: &ResidualRecurrence<S>,
    oracle: &QuadraticOracle<'_, S>,
    x0: &[S],
    horizon: usize,
) -> Result<IterateTrace<S>> {
    oracle.check(x0)?;
    let steps = rec.steps(horizon)?;
    let mut trace = IterateTrace::new(horizon + 1);
    let mut x_prev = x0.to_vec();
    let mut x = x0.to_vec();
    let mut e = oracle.error(&x);
    let mut g = oracle.op.apply_new(&e);
    if !trace.record(&x, &e, &g) {
        return Ok(trace);
    }
    for step in steps {
        let c = S::one() - step.a;
        for i in 0..x.len() {
            let next = x[i] + c * (x_prev[i] - x[i]) + step.b * g[i];
            x_prev[i] = x[i];
            x[i] = next;
        }
        e = oracle.error(&x);
        oracle.op.apply(&e, &mut g);
        if !trace.record(&x, &e, &g) {
            break;
        }
    }
    Ok(trace)
}

/// Iterate averaging: `x_t` follows the recurrence and the reported point is
/// `y_t = (M_{t-1}/M_t) y_{t-1} + x_t / (M_t m_t)`, `y_0 = x_0`.
pub fn averaged_run<S: Scalar>(
    rec: &ResidualRecurrence<S>,
    weights: &AveragingWeights<S>,
    oracle: &QuadraticOracle<'_, S>,
    x0: &[S],
    horizon: usize,
) -> Result<IterateTrace<S>> {
    oracle.check(x0)?;
    let steps = rec.steps(horizon)?;
    let table = weights.table(horizon)?;
    let mut trace = IterateTrace::new(horizon + 1);
    let mut x_prev = x0.to_vec();
    let mut x = x0.to_vec();
    let mut gx = oracle.gradient(&x);
    // y_0 = x_0 regardless of m_0.
    let mut y = x0.to_vec();
    let ey = oracle.error(&y);
    if !trace.record(&y, &ey, &gx) {
        return Ok(trace);
    }
    let mut gy = gx.clone();
    for (t, step) in steps.iter().enumerate().map(|(i, s)| (i + 1, s)) {
        let c = S::one() - step.a;
        for i in 0..x.len() {
            let next = x[i] + c * (x_prev[i] - x[i]) + step.b * gx[i];
            x_prev[i] = x[i];
            x[i] = next;
        }
        let (m_t, big_m) = table[t];
        let keep = table[t - 1].1 / big_m;
        let add = S::one() / (big_m * m_t);
        for (yi, &xi) in y.iter_mut().zip(&x) {
            *yi = keep * *yi + add * xi;
        }
        oracle.op.apply(&oracle.error(&x), &mut gx);
        let ey = oracle.error(&y);
        oracle.op.apply(&ey, &mut gy);
        if !all_finite(&x) || !trace.record(&y, &ey, &gy) {
            trace.diverged = true;
            break;
        }
    }
    Ok(trace)
}

/// Heavy ball constants `((√L - √ℓ)/(√L + √ℓ))²` and `4/(√ℓ + √L)²`.
pub fn polyak_params<S: Scalar>(ell: S, big_l: S) -> Result<(S, S)> {
    if !(ell > S::zero() && big_l >= ell && big_l.is_finite()) {
        return Err(invalid(format!("Polyak needs 0 < ell <= L, got ell = {ell}, L = {big_l}")));
    }
    let (a, b) = (ell.sqrt(), big_l.sqrt());
    let momentum = ((b - a) / (b + a)).powi(2);
    let step = S::of(4.0) / (a + b).powi(2);
    Ok((momentum, step))
}

/// MP-ASYMPT constants: momentum `min(1/r, r)` and step
/// `min(1/√r, √r) / (σ²√r)`.
pub fn mp_asymptotic_params<S: Scalar>(r: S, sigma2: S) -> Result<(S, S)> {
    if !(r > S::zero() && r.is_finite() && sigma2 > S::zero()) {
        return Err(invalid(format!("MP-ASYMPT needs r > 0 and sigma2 > 0, got r = {r}, sigma2 = {sigma2}")));
    }
    if r == S::one() {
        return Err(invalid("MP-ASYMPT is undefined at r = 1"));
    }
    if r > S::one() {
        Ok((S::one() / r, S::one() / (sigma2 * r)))
    } else {
        Ok((r, S::one() / sigma2))
    }
}

/// One MP-ASYMPT step `x_t = x_{t-1} - m (x_{t-2} - x_{t-1}) - s ∇f(x_{t-1})`
/// from `prev = x_{t-2}`, `curr = x_{t-1}` and `grad = ∇f(x_{t-1})`.
pub fn mp_asymptotic_step<S: Scalar>(r: S, sigma2: S, prev: &[S], curr: &[S], grad: &[S]) -> Result<Vec<S>> {
    if prev.len() != curr.len() || grad.len() != curr.len() {
        return Err(Error::DimensionMismatch { expected: curr.len(), got: prev.len().min(grad.len()) });
    }
    let (m, s) = mp_asymptotic_params(r, sigma2)?;
    Ok(curr.iter().zip(prev).zip(grad).map(|((&c, &p), &g)| c - m * (p - c) - s * g).collect())
}

/// Gradient descent with a constant step.
pub fn gradient_descent<S: Scalar>(
    step: S,
    oracle: &QuadraticOracle<'_, S>,
    x0: &[S],
    horizon: usize,
) -> Result<IterateTrace<S>> {
    run(&MethodSpec::GradientDescent { step }, oracle, x0, horizon)
}

/// Chebyshev semi-iterative method on `[ℓ, L]`.
pub fn chebyshev_semi_iterative<S: Scalar>(
    ell: S,
    big_l: S,
    oracle: &QuadraticOracle<'_, S>,
    x0: &[S],
    horizon: usize,
) -> Result<IterateTrace<S>> {
    run(&MethodSpec::ChebyshevSemiIterative { ell, big_l }, oracle, x0, horizon)
}

/// Momentum method for `ℓ = 0`, see [`modified_chebyshev_residual`].
pub fn modified_chebyshev<S: Scalar>(
    big_l: S,
    oracle: &QuadraticOracle<'_, S>,
    x0: &[S],
    horizon: usize,
) -> Result<IterateTrace<S>> {
    run(&MethodSpec::ModifiedChebyshev { big_l }, oracle, x0, horizon)
}

fn nesterov_constants<S: Scalar>(ell: S, big_l: S) -> Result<(S, S)> {
    if !(ell >= S::zero() && big_l > S::zero() && big_l >= ell && big_l.is_finite()) {
        return Err(invalid(format!("Nesterov needs 0 <= ell <= L, L > 0, got ell = {ell}, L = {big_l}")));
    }
    let (a, b) = (ell.sqrt(), big_l.sqrt());
    Ok((S::one() / big_l, (b - a) / (b + a)))
}

/// Nesterov's method for strongly convex quadratics:
/// `y_t = x_{t-1} - ∇f(x_{t-1})/L`, `x_t = y_t + β (y_t - y_{t-1})`,
/// `β = (√L - √ℓ)/(√L + √ℓ)`, `y_0 = x_0`. The trace reports `x_t`.
pub fn nesterov<S: Scalar>(
    ell: S,
    big_l: S,
    oracle: &QuadraticOracle<'_, S>,
    x0: &[S],
    horizon: usize,
) -> Result<IterateTrace<S>> {
    oracle.check(x0)?;
    let (h, beta) = nesterov_constants(ell, big_l)?;
    let mut trace = IterateTrace::new(horizon + 1);
    let mut x = x0.to_vec();
    let mut y_prev = x0.to_vec();
    let mut y = x0.to_vec();
    let mut e = oracle.error(&x);
    let mut g = oracle.op.apply_new(&e);
    if !trace.record(&x, &e, &g) {
        return Ok(trace);
    }
    for _ in 0..horizon {
        for i in 0..x.len() {
            y[i] = x[i] - h * g[i];
            x[i] = y[i] + beta * (y[i] - y_prev[i]);
        }
        std::mem::swap(&mut y_prev, &mut y);
        e = oracle.error(&x);
        oracle.op.apply(&e, &mut g);
        if !trace.record(&x, &e, &g) {
            break;
        }
    }
    Ok(trace)
}

/// Residual polynomial of [`nesterov`]: `Q_0 = 1`,
/// `Q_1 = (1 + β)(1 - hλ) - β`, `Q_t = (1 - hλ)((1 + β) Q_{t-1} - β Q_{t-2})`.
#[derive(Clone, Copy, Debug)]
pub struct NesterovPolynomial<S> {
    h: S,
    beta: S,
}

impl<S: Scalar> NesterovPolynomial<S> {
    pub fn new(ell: S, big_l: S) -> Result<Self> {
        let (h, beta) = nesterov_constants(ell, big_l)?;
        Ok(Self { h, beta })
    }
}

impl<S: Scalar> PolynomialSequence<S> for NesterovPolynomial<S> {
    fn values_upto(&self, t_max: usize, lambda: &S) -> Result<Vec<S>> {
        let g = S::one() - self.h * *lambda;
        let mut out = vec![S::one()];
        for t in 1..=t_max {
            let next = if t == 1 {
                (S::one() + self.beta) * g - self.beta
            } else {
                g * ((S::one() + self.beta) * out[t - 1] - self.beta * out[t - 2])
            };
            out.push(next);
        }
        Ok(out)
    }
}

/// Conjugate gradient. Stops early (flagged, remaining entries repeat the
/// last iterate) when the residual or the curvature `pᵀHp` vanishes.
pub fn conjugate_gradient<S: Scalar>(
    oracle: &QuadraticOracle<'_, S>,
    x0: &[S],
    horizon: usize,
) -> Result<IterateTrace<S>> {
    oracle.check(x0)?;
    let d = x0.len();
    let mut trace = IterateTrace::new(horizon + 1);
    let mut x = x0.to_vec();
    let e = oracle.error(&x);
    // Residual r = -∇f.
    let mut res: Vec<S> = oracle.op.apply_new(&e).into_iter().map(|v| -v).collect();
    let neg = |r: &[S]| r.iter().map(|&v| -v).collect::<Vec<_>>();
    if !trace.record(&x, &e, &neg(&res)) {
        return Ok(trace);
    }
    let mut p = res.clone();
    let mut rr = norm_sq(&res);
    let mut hp = vec![S::zero(); d];
    for _ in 0..horizon {
        if trace.terminated_early {
            let last = trace.dist_sq.len() - 1;
            trace.dist_sq.push(trace.dist_sq[last]);
            trace.f_gap.push(trace.f_gap[last]);
            trace.grad_sq.push(trace.grad_sq[last]);
            continue;
        }
        oracle.op.apply(&p, &mut hp);
        let curvature = dot(&p, &hp);
        if rr == S::zero() || !(curvature > S::zero()) {
            trace.terminated_early = true;
            let last = trace.dist_sq.len() - 1;
            trace.dist_sq.push(trace.dist_sq[last]);
            trace.f_gap.push(trace.f_gap[last]);
            trace.grad_sq.push(trace.grad_sq[last]);
            continue;
        }
        let alpha = rr / curvature;
        for i in 0..d {
            x[i] = x[i] + alpha * p[i];
            res[i] = res[i] - alpha * hp[i];
        }
        let rr_new = norm_sq(&res);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..d {
            p[i] = res[i] + beta * p[i];
        }
        if !trace.record(&x, &oracle.error(&x), &neg(&res)) {
            break;
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::orthopoly::{laguerre_residual, mp_residual};

    fn oracle_1d(c: f64) -> (DenseMatrix<f64>, Vec<f64>) {
        (DenseMatrix::from_diagonal(&[c]), vec![0.5])
    }

    #[test]
    fn gd_exact_one_step() {
        let (h, xs) = oracle_1d(4.0);
        let o = QuadraticOracle::new(&h, &xs).unwrap();
        let tr = gradient_descent(0.25, &o, &[3.0], 3).unwrap();
        assert_eq!(tr.dist_sq.len(), 4);
        assert!(tr.dist_sq[1] < 1e-30);
    }

    #[test]
    fn gd_contraction_factor() {
        let (ell, big_l) = (1.0, 5.0);
        let (h, xs) = oracle_1d(ell);
        let o = QuadraticOracle::new(&h, &xs).unwrap();
        let tr = gradient_descent(2.0 / (ell + big_l), &o, &[2.5], 5).unwrap();
        let q = (1.0 - 2.0 * ell / (ell + big_l)).abs();
        for t in 1..=5 {
            assert!((tr.dist_sq[t] / tr.dist_sq[t - 1] - q * q).abs() < 1e-12);
        }
    }

    #[test]
    fn exp_first_step() {
        let h = DenseMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let xs = vec![0.0; 3];
        let o = QuadraticOracle::new(&h, &xs).unwrap();
        let x0 = [1.0, -1.0, 2.0];
        let lambda0: f64 = 0.8;
        let tr = run(&MethodSpec::exp(lambda0).unwrap(), &o, &x0, 1).unwrap();
        let g = o.gradient(&x0);
        for i in 0..3 {
            assert!((tr.final_iterate[i] - (x0[i] - lambda0 / 2.0 * g[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn mp_first_step_matches_seed() {
        let h = DenseMatrix::from_diagonal(&[0.5, 2.0]);
        let xs = vec![0.0; 2];
        let o = QuadraticOracle::new(&h, &xs).unwrap();
        let (r, s2): (f64, f64) = (2.0, 1.5);
        let tr = run(&MethodSpec::mp_opt(r, s2).unwrap(), &o, &[1.0, 1.0], 1).unwrap();
        let g = o.gradient(&[1.0, 1.0]);
        for i in 0..2 {
            assert!((tr.final_iterate[i] - (1.0 - g[i] / ((1.0 + r) * s2))).abs() < 1e-15);
        }
    }

    #[test]
    fn nesterov_equal_edges_one_step() {
        let h = DenseMatrix::from_diagonal(&[2.0, 2.0]);
        let xs = vec![1.0, -1.0];
        let o = QuadraticOracle::new(&h, &xs).unwrap();
        let tr = nesterov(2.0, 2.0, &o, &[5.0, 5.0], 2).unwrap();
        assert!(tr.dist_sq[1] < 1e-28);
    }

    #[test]
    fn cg_identity_and_finite_termination() {
        let h = DenseMatrix::identity(4);
        let xs = vec![1.0, 2.0, 3.0, 4.0];
        let o = QuadraticOracle::new(&h, &xs).unwrap();
        let tr = conjugate_gradient(&o, &[0.0; 4], 5).unwrap();
        assert!(tr.dist_sq[1] < 1e-28);
        assert!(tr.terminated_early);
        assert_eq!(tr.dist_sq.len(), 6);

        let d = 10;
        let h =
            DenseMatrix::from_fn(d, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).abs()) + if i == j { 1.0 } else { 0.0 });
        let xs = vec![0.3; d];
        let o = QuadraticOracle::new(&h, &xs).unwrap();
        let tr = conjugate_gradient(&o, &vec![1.0; d], 10).unwrap();
        assert!(tr.dist_sq[10] <= 1e-16 * tr.dist_sq[0]);
    }

    #[test]
    fn mp_asymptotic_constants() {
        assert_eq!(mp_asymptotic_params(4.0, 1.0).unwrap(), (0.25, 0.25));
        assert_eq!(mp_asymptotic_params(0.25, 1.0).unwrap(), (0.25, 1.0));
        assert!(mp_asymptotic_params(1.0, 1.0).is_err());
        let next = mp_asymptotic_step(4.0, 1.0, &[1.0], &[2.0], &[4.0]).unwrap();
        assert_eq!(next, vec![2.0 - 0.25 * (1.0 - 2.0) - 0.25 * 4.0]);
    }

    #[test]
    fn polyak_constants() {
        let (m, s) = polyak_params(1.0f64, 9.0).unwrap();
        assert!((m - 0.25).abs() < 1e-15 && (s - 0.25).abs() < 1e-15);
        let (m, s) = polyak_params(3.0f64, 3.0).unwrap();
        assert!(m.abs() < 1e-15 && (s - 1.0 / 3.0).abs() < 1e-15);
        assert!(polyak_params(0.0, 1.0).is_err());
    }

    #[test]
    fn chebyshev_rejects_zero_lower_edge() {
        let (h, xs) = oracle_1d(1.0);
        let o = QuadraticOracle::new(&h, &xs).unwrap();
        assert!(chebyshev_semi_iterative(0.0, 1.0, &o, &[1.0], 3).is_err());
        let tr = chebyshev_semi_iterative(0.5, 1.5, &o, &[1.5], 1).unwrap();
        // First step is 2/(ℓ+L) = 1 along ∇f = 1.
        assert!((tr.final_iterate[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn divergence_truncates_and_flags() {
        let (h, xs) = oracle_1d(1.0);
        let o = QuadraticOracle::new(&h, &xs).unwrap();
        let tr = gradient_descent(1e200, &o, &[1.0], 10).unwrap();
        assert!(tr.diverged);
        assert!(tr.dist_sq.len() < 11);
        assert!(tr.final_iterate.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn dimension_mismatch() {
        let (h, xs) = oracle_1d(1.0);
        let o = QuadraticOracle::new(&h, &xs).unwrap();
        assert!(run(&MethodSpec::ConjugateGradient, &o, &[1.0, 2.0], 1).is_err());
        assert!(QuadraticOracle::new(&h, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn recurrence_matches_matrix_polynomial() {
        let d = 6;
        let h = DenseMatrix::from_fn(d, |i, j| if i == j { 0.5 + i as f64 } else { 0.1 });
        let xs = vec![0.0; d];
        let o = QuadraticOracle::new(&h, &xs).unwrap();
        let x0: Vec<f64> = (0..d).map(|i| (i as f64).sin() + 1.0).collect();
        for rec in [mp_residual(2.0, 1.0).unwrap(), laguerre_residual(0.7).unwrap()] {
            let tr = run_recurrence(&rec, &o, &x0, 12).unwrap();
            let want = rec.eval_matrix_apply(12, &h, &x0).unwrap();
            for (a, b) in tr.final_iterate.iter().zip(&want) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }
}
