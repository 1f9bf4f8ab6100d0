//! Gauss quadrature rules (Legendre and generalized Laguerre).
//!
//! Nodes are eigenvalues of the Jacobi matrix (Golub-Welsch), refined by
//! Newton steps on the orthonormal polynomial of degree `n`. Weights come
//! from the Christoffel function `1 / Σ p_k(x)²`, accumulated with a
//! running power-of-two rescaling so the Laguerre rules at large `n` do not
//! overflow. Rules are built once in `f64` and cached.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Result;
use crate::linalg::tridiagonal_eigenvalues;

/// Node count used for bounded supports.
pub const LEGENDRE_NODES: usize = 400;
/// Node count used for the exponential density.
pub const LAGUERRE_NODES: usize = 200;

/// Nodes and weights of a Gauss rule.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Family {
    Legendre,
    Laguerre(u32),
}

impl Family {
    fn alpha(self, k: usize) -> f64 {
        match self {
            Family::Legendre => 0.0,
            Family::Laguerre(a) => 2.0 * k as f64 + a as f64 + 1.0,
        }
    }

    /// Off-diagonal coupling of `p_{k-1}` and `p_k`, `k >= 1`.
    fn beta(self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            Family::Legendre => k / (4.0 * k * k - 1.0).sqrt(),
            Family::Laguerre(a) => (k * (k + a as f64)).sqrt(),
        }
    }

    fn mass(self) -> f64 {
        match self {
            Family::Legendre => 2.0,
            Family::Laguerre(a) => (1..=a).map(f64::from).product(),
        }
    }
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<Arc<GaussRule>> {
    cached(Family::Legendre, n)
}

/// `n`-point generalized Gauss-Laguerre rule for the weight `x^alpha e^{-x}`
/// on `[0, ∞)`.
pub fn gauss_laguerre(n: usize, alpha: u32) -> Result<Arc<GaussRule>> {
    cached(Family::Laguerre(alpha), n)
}

type RuleCache = Mutex<HashMap<(Family, usize), Arc<GaussRule>>>;

fn cached(family: Family, n: usize) -> Result<Arc<GaussRule>> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&(family, n)) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build(family, n)?);
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert((family, n), rule.clone());
    Ok(rule)
}

/// Orthonormal recurrence at `x`: returns `(p_n, p_n', Σ_{k<n} p_k², log2 scale)`
/// where the true values are the returned ones times `2^scale` (squared for
/// the sum).
fn evaluate(family: Family, n: usize, x: f64) -> (f64, f64, f64, i32) {
    let mut scale = 0i32;
    let mut p_prev = 0.0;
    let mut dp_prev = 0.0;
    let mut p = 1.0 / family.mass().sqrt();
    let mut dp = 0.0;
    let mut sum = 0.0;
    for k in 0..n {
        sum += p * p;
        let b_next = family.beta(k + 1);
        let b_k = if k == 0 { 0.0 } else { family.beta(k) };
        let a = family.alpha(k);
        let p_next = ((x - a) * p - b_k * p_prev) / b_next;
        let dp_next = (p + (x - a) * dp - b_k * dp_prev) / b_next;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
        let mag = p.abs().max(p_prev.abs());
        if mag > 1e100 {
            let f = 2f64.powi(-332);
            p *= f;
            p_prev *= f;
            dp *= f;
            dp_prev *= f;
            sum *= f * f;
            scale += 332;
        }
    }
    (p, dp, sum, scale)
}

fn build(family: Family, n: usize) -> Result<GaussRule> {
    let diag: Vec<f64> = (0..n).map(|k| family.alpha(k)).collect();
    let off: Vec<f64> = (1..n).map(|k| family.beta(k)).collect();
    let mut nodes = tridiagonal_eigenvalues(&diag, &off)?;
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp, _, _) = evaluate(family, n, *x);
            if dp == 0.0 || !dp.is_finite() {
                break;
            }
            let step = p / dp;
            if !step.is_finite() || step.abs() > 1e-6 * x.abs().max(1.0) {
                break;
            }
            *x -= step;
            if step.abs() <= f64::EPSILON * x.abs() {
                break;
            }
        }
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let (_, _, sum, scale) = evaluate(family, n, x);
            (-(sum.ln() + 2.0 * scale as f64 * std::f64::consts::LN_2)).exp()
        })
        .collect();
    Ok(GaussRule { nodes, weights })
}
