//! Spectral density models: supports, moments, weighted integrals,
//! samplers and expected-error curves.
//!
//! All models are probability measures. Weighted integrals use fixed Gauss
//! rules ([`LEGENDRE_NODES`] points on bounded supports,
//! [`LAGUERRE_NODES`]-point generalized Gauss-Laguerre for the exponential)
//! and estimate their error against a rule with twice as many nodes.
//!
//! The Marchenko-Pastur continuous part is integrated in the angle
//! `φ ∈ [0, π]` with `λ = σ²(1 + r) - 2σ²√r cos φ`, which turns the density
//! into the smooth `2σ²r sin²φ / (π λ)` and removes the `1/λ` singularity
//! at `r = 1`. For `r` close to but not at 1 the unweighted rule is split
//! into panels graded toward the lower edge. Its atom `(1 - r)₊` at zero
//! is added analytically.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::orthopoly::PolynomialSequence;
use crate::quadrature::{gauss_laguerre, gauss_legendre, LAGUERRE_NODES, LEGENDRE_NODES};
use crate::scalar::{Field, Scalar};

/// A spectral density model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum DensityModel<S> {
    /// Marchenko-Pastur law with aspect ratio `r` and scale `σ²`.
    MarchenkoPastur { r: S, sigma2: S },
    /// Exponential density `λ₀ e^{-λ₀ λ}` (`lambda0` is a rate).
    Exponential { lambda0: S },
    /// Uniform density on `[ℓ, L]`.
    Uniform {
        ell: S,
        #[serde(rename = "L")]
        big_l: S,
    },
    /// Empirical spectral density (each eigenvalue has mass `1/d`).
    Empirical { eigs: Vec<S> },
}

/// Support edges and mass of the atom at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportInfo<S> {
    pub lower: S,
    /// `+∞` for the exponential.
    pub upper: S,
    pub zero_mass: S,
}

/// Serializable description `{variant, parameters, support, zero_mass}`.
#[derive(Clone, Debug, Serialize)]
pub struct DensitySummary {
    pub variant: &'static str,
    pub parameters: BTreeMap<&'static str, f64>,
    /// `[lower, upper]`; an infinite upper edge serializes as `null`.
    pub support: [Option<f64>; 2],
    pub zero_mass: f64,
}

/// Quadrature nodes and weights for `λ^β dμ` (continuous part) plus the
/// mass of the atom at zero.
#[derive(Clone, Debug)]
pub struct MeasureRule<S> {
    pub nodes: Vec<S>,
    pub weights: Vec<S>,
    pub atom: S,
}

/// Tabulated distribution function `F(λ)` including the atom at zero.
#[derive(Clone, Debug)]
pub struct TabulatedCdf {
    pub lambda: Vec<f64>,
    pub cdf: Vec<f64>,
    pub zero_mass: f64,
}

impl TabulatedCdf {
    /// Inverse CDF by binary search and linear interpolation.
    pub fn quantile(&self, u: f64) -> f64 {
        if u < self.zero_mass {
            return 0.0;
        }
        let n = self.cdf.len();
        let idx = self.cdf.partition_point(|&c| c <= u);
        if idx == 0 {
            return self.lambda[0];
        }
        if idx >= n {
            return self.lambda[n - 1];
        }
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let (l0, l1) = (self.lambda[idx - 1], self.lambda[idx]);
        if c1 <= c0 {
            return l0;
        }
        l0 + (l1 - l0) * (u - c0) / (c1 - c0)
    }
}

/// Closed-form MP moment `σ^{2k} Σ_{i<k} C(k,i) C(k-1,i) r^{k-i} / (i+1)`,
/// exact over any field.
pub fn mp_moment_exact<F: Field>(r: F, sigma2: F, k: u32) -> F {
    if k == 0 {
        return F::one();
    }
    let int = |v: u32| F::from_int(v as i64);
    let mut total = F::zero();
    let mut c_k = F::one(); // C(k, i)
    let mut c_k1 = F::one(); // C(k-1, i)
    for i in 0..k {
        let mut term = c_k.clone() * c_k1.clone() / int(i + 1);
        for _ in 0..(k - i) {
            term = term * r.clone();
        }
        total = total + term;
        c_k = c_k * int(k - i) / int(i + 1);
        if i + 1 < k {
            c_k1 = c_k1 * int(k - 1 - i) / int(i + 1);
        }
    }
    for _ in 0..k {
        total = total * sigma2.clone();
    }
    total
}

const CDF_SEGMENTS: usize = 4096;

impl<S: Scalar> DensityModel<S> {
    pub fn marchenko_pastur(r: S, sigma2: S) -> Result<Self> {
        let m = Self::MarchenkoPastur { r, sigma2 };
        m.validate()?;
        Ok(m)
    }

    pub fn exponential(lambda0: S) -> Result<Self> {
        let m = Self::Exponential { lambda0 };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(ell: S, big_l: S) -> Result<Self> {
        let m = Self::Uniform { ell, big_l };
        m.validate()?;
        Ok(m)
    }

    /// Empirical density of the given eigenvalues (sorted on construction).
    pub fn empirical(mut eigs: Vec<S>) -> Result<Self> {
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let m = Self::Empirical { eigs };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: S| v > S::zero() && v.is_finite();
        match self {
            Self::MarchenkoPastur { r, sigma2 } if !(pos(*r) && pos(*sigma2)) => {
                Err(invalid(format!("MP needs r > 0 and sigma2 > 0, got r = {r}, sigma2 = {sigma2}")))
            }
            Self::Exponential { lambda0 } if !pos(*lambda0) => {
                Err(invalid(format!("exponential rate must be positive, got {lambda0}")))
            }
            Self::Uniform { ell, big_l } if !(*ell >= S::zero() && *big_l > *ell && big_l.is_finite()) => {
                Err(invalid(format!("uniform needs 0 <= ell < L, got [{ell}, {big_l}]")))
            }
            Self::Empirical { eigs } if eigs.is_empty() => Err(invalid("empirical density needs eigenvalues")),
            Self::Empirical { eigs } if eigs.iter().any(|v| !(*v >= S::zero() && v.is_finite())) => {
                Err(Error::NotPsd("empirical eigenvalues must be finite and nonnegative".into()))
            }
            Self::Empirical { eigs } if eigs.windows(2).any(|w| w[0] > w[1]) => {
                Err(invalid("empirical eigenvalues must be nondecreasing"))
            }
            _ => Ok(()),
        }
    }

    pub fn support(&self) -> SupportInfo<S> {
        match self {
            Self::MarchenkoPastur { r, sigma2 } => {
                let sr = r.sqrt();
                SupportInfo {
                    lower: *sigma2 * (S::one() - sr).powi(2),
                    upper: *sigma2 * (S::one() + sr).powi(2),
                    zero_mass: (S::one() - *r).max(S::zero()),
                }
            }
            Self::Exponential { .. } => SupportInfo { lower: S::zero(), upper: S::infinity(), zero_mass: S::zero() },
            Self::Uniform { ell, big_l } => SupportInfo { lower: *ell, upper: *big_l, zero_mass: S::zero() },
            Self::Empirical { eigs } => {
                let zeros = eigs.iter().filter(|v| **v == S::zero()).count();
                SupportInfo {
                    lower: eigs[0],
                    upper: eigs[eigs.len() - 1],
                    zero_mass: S::of(zeros as f64 / eigs.len() as f64),
                }
            }
        }
    }

    /// Density of the continuous part; zero outside the support.
    pub fn pdf(&self, lambda: S) -> Result<S> {
        Ok(match self {
            Self::MarchenkoPastur { sigma2, .. } => {
                let sup = self.support();
                if lambda <= sup.lower || lambda >= sup.upper {
                    S::zero()
                } else {
                    let pi = S::of(std::f64::consts::PI);
                    ((sup.upper - lambda) * (lambda - sup.lower)).sqrt() / (S::of(2.0) * pi * *sigma2 * lambda)
                }
            }
            Self::Exponential { lambda0 } => {
                if lambda < S::zero() {
                    S::zero()
                } else {
                    *lambda0 * (-*lambda0 * lambda).exp()
                }
            }
            Self::Uniform { ell, big_l } => {
                if lambda < *ell || lambda > *big_l {
                    S::zero()
                } else {
                    S::one() / (*big_l - *ell)
                }
            }
            Self::Empirical { .. } => {
                return Err(Error::Unsupported("the empirical density has no pdf".into()));
            }
        })
    }

    /// `k`-th moment `∫ λ^k dμ` in closed form (`k = 0` gives the mass 1).
    pub fn moment(&self, k: u32) -> S {
        match self {
            Self::MarchenkoPastur { r, sigma2 } => mp_moment_exact(*r, *sigma2, k),
            Self::Exponential { lambda0 } => {
                let fact: S = (1..=k).map(|i| S::of(i as f64)).fold(S::one(), |a, b| a * b);
                fact / lambda0.powi(k as i32)
            }
            Self::Uniform { ell, big_l } => {
                let k1 = (k + 1) as i32;
                (big_l.powi(k1) - ell.powi(k1)) / (S::of(k1 as f64) * (*big_l - *ell))
            }
            Self::Empirical { eigs } => {
                let n = S::of(eigs.len() as f64);
                eigs.iter().map(|v| v.powi(k as i32)).sum::<S>() / n
            }
        }
    }

    /// Moments `β_1..=β_k`.
    pub fn moments(&self, k: u32) -> Vec<S> {
        (1..=k).map(|i| self.moment(i)).collect()
    }

    /// Quadrature rule for `λ^β dμ`. `refine` doubles the node count.
    pub fn measure_rule(&self, beta: u32, refine: bool) -> Result<MeasureRule<S>> {
        let factor = if refine { 2 } else { 1 };
        let atom = if beta == 0 { self.support().zero_mass } else { S::zero() };
        let pw = |lam: S| lam.powi(beta as i32);
        match self {
            Self::MarchenkoPastur { r, sigma2 } => {
                let sr = r.sqrt();
                let lower = *sigma2 * (S::one() - sr).powi(2);
                let pi = S::of(std::f64::consts::PI);
                let half = S::of(0.5);
                // In φ = π - θ the β = 0 weight has a pole |1 - √r| away from φ = 0.
                let gap = (S::one() - sr).abs();
                let panels = mp_panels(beta, gap.to_f64_lossy());
                let rule = gauss_legendre(panels.nodes * factor)?;
                let mut nodes = Vec::with_capacity(rule.len() * panels.edges.len());
                let mut weights = Vec::with_capacity(rule.len() * panels.edges.len());
                for pair in panels.edges.windows(2) {
                    let (a, b) = (S::of(pair[0]), S::of(pair[1]));
                    let width = (b - a) * half;
                    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                        let phi = a + width * (S::of(u) + S::one());
                        let c = (phi * half).sin();
                        let lam = lower + S::of(4.0) * *sigma2 * sr * c * c;
                        // dμ = (2σ²r sin²φ / (π λ)) dφ.
                        let s = phi.sin();
                        let dens_times_lam = S::of(2.0) * *sigma2 * *r * s * s / pi;
                        let weight =
                            if beta == 0 { dens_times_lam / lam } else { dens_times_lam * lam.powi(beta as i32 - 1) };
                        nodes.push(lam);
                        weights.push(S::of(w) * width * weight);
                    }
                }
                Ok(MeasureRule { nodes, weights, atom })
            }
            Self::Exponential { lambda0 } => {
                let rule = gauss_laguerre(LAGUERRE_NODES * factor, beta)?;
                let scale = lambda0.powi(-(beta as i32));
                let nodes = rule.nodes.iter().map(|&u| S::of(u) / *lambda0).collect();
                let weights = rule.weights.iter().map(|&w| S::of(w) * scale).collect();
                Ok(MeasureRule { nodes, weights, atom })
            }
            Self::Uniform { ell, big_l } => {
                let rule = gauss_legendre(LEGENDRE_NODES * factor)?;
                let half = S::of(0.5);
                let (c, h) = ((*big_l + *ell) * half, (*big_l - *ell) * half);
                let nodes: Vec<S> = rule.nodes.iter().map(|&u| c + h * S::of(u)).collect();
                let weights = nodes.iter().zip(&rule.weights).map(|(&lam, &w)| S::of(w) * half * pw(lam)).collect();
                Ok(MeasureRule { nodes, weights, atom })
            }
            Self::Empirical { eigs } => {
                let inv = S::one() / S::of(eigs.len() as f64);
                Ok(MeasureRule {
                    nodes: eigs.clone(),
                    weights: eigs.iter().map(|&l| pw(l) * inv).collect(),
                    atom: S::zero(),
                })
            }
        }
    }

    fn is_exact_sum(&self) -> bool {
        matches!(self, Self::Empirical { .. })
    }

    /// `∫ f(λ) λ^β dμ(λ)`, including `f(0) · zero_mass` when `β = 0`.
    pub fn weighted_integral(&self, f: impl Fn(S) -> S, beta: u32) -> Result<S> {
        let apply = |rule: &MeasureRule<S>| {
            let mut value = S::zero();
            let mut scale = S::zero();
            for (&lam, &w) in rule.nodes.iter().zip(&rule.weights) {
                if w == S::zero() {
                    continue;
                }
                let term = w * f(lam);
                value = value + term;
                scale = scale + term.abs();
            }
            if rule.atom > S::zero() {
                let term = rule.atom * f(S::zero());
                value = value + term;
                scale = scale + term.abs();
            }
            (value, scale)
        };
        let (base, scale) = apply(&self.measure_rule(beta, false)?);
        if self.is_exact_sum() {
            return Ok(base);
        }
        let (fine, _) = apply(&self.measure_rule(beta, true)?);
        check_accuracy(base, fine, scale)?;
        Ok(base)
    }

    /// `R² ∫ P_t² λ^β dμ` for `t = 0..=horizon`.
    pub fn expected_error_curve(
        &self,
        poly: &(impl PolynomialSequence<S> + ?Sized),
        horizon: usize,
        init_scale: S,
        beta: u32,
    ) -> Result<Vec<S>> {
        let apply = |rule: &MeasureRule<S>| -> Result<Vec<S>> {
            let mut sums = vec![S::zero(); horizon + 1];
            for (&lam, &w) in rule.nodes.iter().zip(&rule.weights) {
                if w == S::zero() {
                    continue;
                }
                // (P √w)² avoids overflow of P² where the weight is tiny.
                let sw = w.sqrt();
                for (s, p) in sums.iter_mut().zip(poly.values_upto(horizon, &lam)?) {
                    let v = p * sw;
                    *s = *s + v * v;
                }
            }
            if rule.atom > S::zero() {
                for (s, p) in sums.iter_mut().zip(poly.values_upto(horizon, &S::zero())?) {
                    *s = *s + rule.atom * p * p;
                }
            }
            Ok(sums)
        };
        let base = apply(&self.measure_rule(beta, false)?)?;
        if !self.is_exact_sum() {
            let fine = apply(&self.measure_rule(beta, true)?)?;
            for (&b, &f) in base.iter().zip(&fine) {
                check_accuracy(b, f, b.abs())?;
            }
        }
        let r2 = init_scale * init_scale;
        Ok(base.into_iter().map(|v| v * r2).collect())
    }

    /// Distribution function tabulated on a fine grid (computed in `f64`).
    pub fn tabulated_cdf(&self) -> Result<TabulatedCdf> {
        match self {
            Self::MarchenkoPastur { r, sigma2 } => {
                let (r, sigma2) = (r.to_f64_lossy(), sigma2.to_f64_lossy());
                let sr = r.sqrt();
                let lower = sigma2 * (1.0 - sr).powi(2);
                let pi = std::f64::consts::PI;
                let lam_of = |theta: f64| {
                    let c = (0.5 * theta).cos();
                    lower + 4.0 * sigma2 * sr * c * c
                };
                let dens = |theta: f64| {
                    let s = theta.sin();
                    2.0 * sigma2 * r * s * s / (pi * lam_of(theta))
                };
                let gl = gauss_legendre(8)?;
                let zero_mass = (1.0 - r).max(0.0);
                let mut lambda = Vec::with_capacity(CDF_SEGMENTS + 1);
                let mut cdf = Vec::with_capacity(CDF_SEGMENTS + 1);
                let mut acc = zero_mass;
                let step = pi / CDF_SEGMENTS as f64;
                // θ from π down to 0 walks λ upward.
                for i in 0..=CDF_SEGMENTS {
                    let theta = pi - step * i as f64;
                    lambda.push(lam_of(theta));
                    cdf.push(acc);
                    if i < CDF_SEGMENTS {
                        let mid = theta - 0.5 * step;
                        acc += 0.5 * step * gl.integrate(|u| dens(mid + 0.5 * step * u));
                    }
                }
                Ok(TabulatedCdf { lambda, cdf, zero_mass })
            }
            Self::Uniform { ell, big_l } => {
                let (a, b) = (ell.to_f64_lossy(), big_l.to_f64_lossy());
                let lambda = (0..=CDF_SEGMENTS).map(|i| a + (b - a) * i as f64 / CDF_SEGMENTS as f64).collect();
                let cdf = (0..=CDF_SEGMENTS).map(|i| i as f64 / CDF_SEGMENTS as f64).collect();
                Ok(TabulatedCdf { lambda, cdf, zero_mass: 0.0 })
            }
            Self::Exponential { lambda0 } => {
                let l0 = lambda0.to_f64_lossy();
                // Up to the 1 - 1e-12 quantile.
                let top = 12.0 * std::f64::consts::LN_10 / l0;
                let lambda: Vec<f64> = (0..=CDF_SEGMENTS).map(|i| top * i as f64 / CDF_SEGMENTS as f64).collect();
                let cdf = lambda.iter().map(|&x| -(-l0 * x).exp_m1()).collect();
                Ok(TabulatedCdf { lambda, cdf, zero_mass: 0.0 })
            }
            Self::Empirical { eigs } => {
                let d = eigs.len() as f64;
                let lambda: Vec<f64> = eigs.iter().map(|v| v.to_f64_lossy()).collect();
                let cdf = (1..=eigs.len()).map(|i| i as f64 / d).collect();
                let zero_mass = self.support().zero_mass.to_f64_lossy();
                Ok(TabulatedCdf { lambda, cdf, zero_mass })
            }
        }
    }

    /// `d` i.i.d. eigenvalues drawn from the model, deterministic in `seed`.
    pub fn sample_eigenvalues(&self, d: usize, seed: u64) -> Result<Vec<S>> {
        if d == 0 {
            return Err(invalid("d must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Self::Exponential { lambda0 } => {
                let l0 = lambda0.to_f64_lossy();
                Ok((0..d).map(|_| S::of(-(-rng.random::<f64>()).ln_1p() / l0)).collect())
            }
            Self::Empirical { eigs } => Ok((0..d).map(|_| eigs[rng.random_range(0..eigs.len())]).collect()),
            _ => {
                let table = self.tabulated_cdf()?;
                Ok((0..d).map(|_| S::of(table.quantile(rng.random::<f64>()))).collect())
            }
        }
    }

    pub fn summary(&self) -> DensitySummary {
        let sup = self.support();
        let f = |v: S| v.to_f64_lossy();
        let (variant, parameters): (&'static str, Vec<(&'static str, f64)>) = match self {
            Self::MarchenkoPastur { r, sigma2 } => ("marchenko_pastur", vec![("r", f(*r)), ("sigma2", f(*sigma2))]),
            Self::Exponential { lambda0 } => ("exponential", vec![("lambda0", f(*lambda0))]),
            Self::Uniform { ell, big_l } => ("uniform", vec![("ell", f(*ell)), ("L", f(*big_l))]),
            Self::Empirical { eigs } => ("empirical", vec![("d", eigs.len() as f64)]),
        };
        let upper = f(sup.upper);
        DensitySummary {
            variant,
            parameters: parameters.into_iter().collect(),
            support: [Some(f(sup.lower)), upper.is_finite().then_some(upper)],
            zero_mass: f(sup.zero_mass),
        }
    }
}

struct Panels {
    edges: Vec<f64>,
    nodes: usize,
}

/// Breakpoints in `φ ∈ [0, π]` for the MP rule. Near `r = 1` the `β = 0`
/// weight gets panels shrinking by 4 toward `φ = 0` until they reach `gap`.
fn mp_panels(beta: u32, gap: f64) -> Panels {
    let pi = std::f64::consts::PI;
    if beta > 0 || gap == 0.0 || gap >= 0.05 {
        return Panels { edges: vec![0.0, pi], nodes: LEGENDRE_NODES };
    }
    let mut edges = vec![pi];
    while edges[edges.len() - 1] > gap {
        let next = edges[edges.len() - 1] / 4.0;
        edges.push(next);
    }
    edges.push(0.0);
    edges.reverse();
    Panels { edges, nodes: LEGENDRE_NODES / 4 }
}

fn check_accuracy<S: Scalar>(base: S, fine: S, scale: S) -> Result<()> {
    let err = (fine - base).abs();
    let tol = S::check_tolerance() * scale.max(S::min_positive_value());
    if !(err <= tol) {
        return Err(Error::QuadratureAccuracy { estimate: err.to_f64_lossy(), tolerance: tol.to_f64_lossy() });
    }
    Ok(())
}
