//! Resolving `auto` method parameters on a concrete problem.
//!
//! Spectrum statistics are computed once per problem instance and cached.
//! Extreme eigenvalues are exact (dense eigendecomposition) up to the dense
//! cap, and come from power iteration above it. Traces are always exact.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use anyhow::{anyhow, bail, Context, Result};
use spectral_accel::estimation::{
    mp_from_lmax_trace, mp_from_moments, power_lmax, uniform_from_moments, DEFAULT_POWER_ITERS,
};
use spectral_accel::linalg::{FnOperator, SymmetricOperator};
use spectral_accel::orthopoly::{mp_residual, AveragingWeights};
use spectral_accel::problems::{dense_cap, eigenvalues};
use spectral_accel::{MethodSpec, MpFit, QuadraticProblem};

use crate::config::{MethodConfig, MethodKind, MpRoute, Param};

/// Below this fraction of `λmax` the smallest eigenvalue counts as zero.
const ZERO_LMIN: f64 = 1e-12;

/// Spectrum statistics of one Hessian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumStats {
    pub dim: usize,
    pub lmin: f64,
    pub lmax: f64,
    pub trace: f64,
    /// `tr(H²)`.
    pub trace_sq: f64,
    /// Whether `lmin`/`lmax` are exact eigenvalues.
    pub exact: bool,
}

impl SpectrumStats {
    pub fn compute(problem: &QuadraticProblem, power_iters: usize) -> Result<Self> {
        Self::compute_with(problem, power_iters, problem.dim() <= dense_cap())
    }

    fn compute_with(problem: &QuadraticProblem, power_iters: usize, dense: bool) -> Result<Self> {
        let h = &problem.h;
        let dim = h.dim();
        let trace = h.trace();
        let trace_sq = h.as_slice().iter().map(|v| v * v).sum();
        if dense {
            let eigs = eigenvalues(h)?;
            return Ok(Self { dim, lmin: eigs[0].max(0.0), lmax: eigs[dim - 1], trace, trace_sq, exact: true });
        }
        let lmax = power_lmax(h, power_iters, 0)?;
        // Smallest eigenvalue as λmax minus the top of λmax I - H.
        let shifted = FnOperator::new(dim, |x: &[f64], out: &mut [f64]| {
            h.apply(x, out);
            for (o, &xi) in out.iter_mut().zip(x) {
                *o = lmax * xi - *o;
            }
        });
        let gap = power_lmax(&shifted, power_iters, 1)?;
        Ok(Self { dim, lmin: (lmax - gap).max(0.0), lmax, trace, trace_sq, exact: false })
    }

    /// MP fit by the chosen route.
    pub fn mp_fit(&self, route: MpRoute) -> Result<MpFit> {
        let n = self.dim as f64;
        Ok(match route {
            MpRoute::LmaxTrace => mp_from_lmax_trace(self.lmax, self.trace, self.dim)?,
            MpRoute::Moments => mp_from_moments(self.trace / n, self.trace_sq / n)?,
        })
    }
}

/// Per-problem cache of [`SpectrumStats`], keyed by the problem's
/// description (which includes its seed).
pub struct Fitter {
    power_iters: usize,
    cache: Mutex<HashMap<String, Arc<SpectrumStats>>>,
}

impl Fitter {
    pub fn new(power_iters: Option<usize>) -> Self {
        Self { power_iters: power_iters.unwrap_or(DEFAULT_POWER_ITERS), cache: Mutex::new(HashMap::new()) }
    }

    pub fn stats(&self, problem: &QuadraticProblem) -> Result<Arc<SpectrumStats>> {
        if let Some(s) = self.cache.lock().expect("cache lock").get(&problem.meta) {
            return Ok(s.clone());
        }
        // Computed outside the lock; a concurrent duplicate is harmless.
        let stats = Arc::new(SpectrumStats::compute(problem, self.power_iters)?);
        self.cache.lock().expect("cache lock").insert(problem.meta.clone(), stats.clone());
        Ok(stats)
    }

    /// Builds the method described by `cfg` for `problem`.
    pub fn method(&self, cfg: &MethodConfig, problem: &QuadraticProblem) -> Result<MethodSpec> {
        let label = cfg.label();
        self.method_inner(cfg, problem).with_context(|| format!("method {label:?}"))
    }

    fn method_inner(&self, cfg: &MethodConfig, problem: &QuadraticProblem) -> Result<MethodSpec> {
        let stats = || self.stats(problem);
        let value = |p: Option<Param>| match p {
            Some(Param::Value(v)) => Some(v),
            _ => None,
        };
        let big_l = || -> Result<f64> {
            match value(cfg.big_l) {
                Some(v) => Ok(v),
                None => Ok(stats()?.lmax),
            }
        };
        let ell = || -> Result<f64> {
            if let Some(v) = value(cfg.ell) {
                return Ok(v);
            }
            let s = stats()?;
            if s.lmin <= ZERO_LMIN * s.lmax {
                bail!(
                    "the smallest eigenvalue is {:e} (numerically zero); set `ell` or use modified_chebyshev",
                    s.lmin
                );
            }
            Ok(s.lmin)
        };
        let mp = || -> Result<(f64, f64)> {
            match (value(cfg.r), value(cfg.sigma2)) {
                (Some(r), Some(s2)) => Ok((r, s2)),
                _ => {
                    let fit = stats()?.mp_fit(cfg.fit.unwrap_or_default())?;
                    Ok((fit.r, fit.sigma2))
                }
            }
        };
        Ok(match cfg.kind {
            MethodKind::Gd => {
                let step = match value(cfg.step) {
                    Some(v) => v,
                    None => {
                        let l = stats()?.lmax;
                        if !(l > 0.0) {
                            bail!("the Hessian is zero; set `step`");
                        }
                        1.0 / l
                    }
                };
                MethodSpec::GradientDescent { step }
            }
            MethodKind::Polyak => MethodSpec::Polyak { ell: ell()?, big_l: big_l()? },
            MethodKind::Nesterov => MethodSpec::Nesterov { ell: ell()?, big_l: big_l()? },
            MethodKind::Chebyshev => MethodSpec::ChebyshevSemiIterative { ell: ell()?, big_l: big_l()? },
            MethodKind::ModifiedChebyshev => MethodSpec::ModifiedChebyshev { big_l: big_l()? },
            MethodKind::Cg => MethodSpec::ConjugateGradient,
            MethodKind::MpOpt => {
                let (r, s2) = mp()?;
                MethodSpec::mp_opt(r, s2)?
            }
            MethodKind::MpAsympt => {
                let (r, sigma2) = mp()?;
                MethodSpec::MpAsymptotic { r, sigma2 }
            }
            MethodKind::MpAveraged => {
                let (r, s2) = mp()?;
                mp_averaged(r, s2)?
            }
            MethodKind::Exp => {
                let lambda0 = match value(cfg.lambda0) {
                    Some(v) => v,
                    None => {
                        let s = stats()?;
                        if !(s.trace > 0.0) {
                            bail!("the Hessian has zero trace; set `lambda0`");
                        }
                        s.dim as f64 / s.trace
                    }
                };
                MethodSpec::exp(lambda0)?
            }
            MethodKind::Unif => {
                let (ell, big_l) = match (value(cfg.ell), value(cfg.big_l)) {
                    (Some(a), Some(b)) => (a, b),
                    (a, b) => {
                        // Moment-matched support, as in the oracle estimator.
                        let s = stats()?;
                        let n = s.dim as f64;
                        let fit = uniform_from_moments(s.trace / n, s.trace_sq / n)?;
                        (a.unwrap_or(fit.ell), b.unwrap_or(fit.big_l))
                    }
                };
                if !(big_l > ell) {
                    bail!("uniform support [{ell}, {big_l}] is empty");
                }
                MethodSpec::unif(ell, big_l)?
            }
        })
    }
}

/// MP-OPT iterates averaged with the weights `1/m_t` of the MP-OPT family.
pub fn mp_averaged(r: f64, sigma2: f64) -> Result<MethodSpec> {
    Ok(MethodSpec::Averaged {
        rec: mp_residual(r, sigma2)?,
        weights: AveragingWeights::mp_chebyshev(r).map_err(|e| anyhow!("{e}"))?,
    })
}
