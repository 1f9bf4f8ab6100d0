//! Quadratic test problems, empirical spectral densities and the
//! Monte-Carlo expected-error harness.
//!
//! Generated Hessians are dense `f64`. Each seed fixes the Hessian (for
//! random generators), the minimizer `x⋆ ~ N(0, I)` and the initial point
//! `x₀ = x⋆ + R g` with `g ~ N(0, I)`, so `E (x₀ - x⋆)(x₀ - x⋆)ᵀ = R² I`.

use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensityModel;
use crate::error::{invalid, Error, Result};
use crate::linalg::DenseMatrix;
use crate::mmio::read_matrix_market;
use crate::optimizers::{run, IterateTrace, MethodSpec, QuadraticOracle};

/// Default cap on the dimension for dense eigendecompositions.
pub const DEFAULT_DENSE_CAP: usize = 4096;
/// Environment variable overriding [`DEFAULT_DENSE_CAP`].
pub const DENSE_CAP_ENV: &str = "SPECTRAL_ACCEL_DENSE_CAP";

const STREAM_ROTATION: u64 = 1;
const STREAM_X_STAR: u64 = 2;
const STREAM_INIT: u64 = 3;

/// Orthogonal factor used by spectrum-based generators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotation {
    /// Haar for `d <= 1000`, otherwise 16 Householder reflectors.
    #[default]
    Auto,
    /// Haar-distributed (QR of a Gaussian matrix).
    Haar,
    /// Product of this many random Householder reflectors (`O(k d²)`).
    Householder(usize),
    /// No rotation: `H = diag(eigs)`.
    Identity,
}

/// How a Matrix Market file becomes a Hessian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assembly {
    /// The file holds `H`.
    #[default]
    Hessian,
    /// The file holds `A` (`n × d`) and `H = AᵀA / d`.
    Gram,
    /// The file holds `A` and `H = AᵀA`.
    GramUnnormalized,
}

/// Problem generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// `H = MᵀM / d` with `M` of shape `n × d`, i.i.d. `N(0, σ²)` entries.
    GaussianGram {
        n: usize,
        d: usize,
        #[serde(default = "one")]
        sigma2: f64,
        #[serde(default)]
        seed: u64,
    },
    /// `H = Q diag(eigs) Qᵀ`.
    FromSpectrum {
        eigs: Vec<f64>,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        rotation: Rotation,
    },
    /// Eigenvalues drawn i.i.d. from `model` for every seed, then rotated.
    SampledSpectrum {
        model: DensityModel<f64>,
        d: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        rotation: Rotation,
    },
    /// Hessian (or data matrix) read from a Matrix Market file.
    MatrixMarketFile {
        path: PathBuf,
        #[serde(default)]
        assembly: Assembly,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

impl GeneratorSpec {
    pub fn seed(&self) -> u64 {
        match self {
            Self::GaussianGram { seed, .. }
            | Self::FromSpectrum { seed, .. }
            | Self::SampledSpectrum { seed, .. }
            | Self::MatrixMarketFile { seed, .. } => *seed,
        }
    }

    /// The same generator with another seed.
    pub fn with_seed(&self, new_seed: u64) -> Self {
        let mut s = self.clone();
        match &mut s {
            Self::GaussianGram { seed, .. }
            | Self::FromSpectrum { seed, .. }
            | Self::SampledSpectrum { seed, .. }
            | Self::MatrixMarketFile { seed, .. } => *seed = new_seed,
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::GaussianGram { n, d, sigma2, .. } => {
                if *n == 0 || *d == 0 {
                    return Err(invalid("GaussianGram needs n, d >= 1"));
                }
                if !(*sigma2 > 0.0 && sigma2.is_finite()) {
                    return Err(invalid("GaussianGram needs sigma2 > 0"));
                }
            }
            Self::FromSpectrum { eigs, .. } => {
                if eigs.is_empty() {
                    return Err(invalid("FromSpectrum needs eigenvalues"));
                }
                if eigs.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(Error::NotPsd("FromSpectrum eigenvalues must be finite and nonnegative".into()));
                }
            }
            Self::SampledSpectrum { model, d, .. } => {
                model.validate()?;
                if *d == 0 {
                    return Err(invalid("SampledSpectrum needs d >= 1"));
                }
            }
            Self::MatrixMarketFile { path, .. } => {
                if !path.exists() {
                    return Err(invalid(format!("file not found: {}", path.display())));
                }
            }
        }
        Ok(())
    }
}

/// A quadratic `f(x) = ½ (x - x⋆)ᵀ H (x - x⋆)` with an initial point.
#[derive(Clone, Debug)]
pub struct QuadraticProblem {
    pub h: DenseMatrix<f64>,
    pub x_star: Vec<f64>,
    pub x0: Vec<f64>,
    /// Initialization scale `R`.
    pub init_scale: f64,
    pub meta: String,
}

impl QuadraticProblem {
    pub fn dim(&self) -> usize {
        self.x_star.len()
    }

    pub fn oracle(&self) -> QuadraticOracle<'_, f64> {
        QuadraticOracle { op: &self.h, x_star: &self.x_star }
    }

    /// Rescales `x₀ - x⋆` to initialization scale `r`.
    pub fn with_init_scale(mut self, r: f64) -> Self {
        let factor = if self.init_scale == 0.0 { 0.0 } else { r / self.init_scale };
        for (x0, &xs) in self.x0.iter_mut().zip(&self.x_star) {
            *x0 = xs + factor * (*x0 - xs);
        }
        self.init_scale = r;
        self
    }

    /// Runs `method` from `x₀`.
    pub fn run(&self, method: &MethodSpec<f64>, horizon: usize) -> Result<IterateTrace<f64>> {
        run(method, &self.oracle(), &self.x0, horizon)
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> DMatrix<f64> {
    // Fill row by row so the draw order does not depend on storage order.
    let mut m = DMatrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            m[(i, j)] = scale * rng.sample::<f64, _>(StandardNormal);
        }
    }
    m
}

fn rotate(eigs: &[f64], rotation: Rotation, seed: u64) -> DenseMatrix<f64> {
    let d = eigs.len();
    let rotation = match rotation {
        Rotation::Auto if d <= 1000 => Rotation::Haar,
        Rotation::Auto => Rotation::Householder(16),
        other => other,
    };
    let mut rng = rng(seed, STREAM_ROTATION);
    let mut h = match rotation {
        Rotation::Identity | Rotation::Auto => DenseMatrix::from_diagonal(eigs),
        Rotation::Haar => {
            let qr = gaussian_matrix(&mut rng, d, d, 1.0).qr();
            let r = qr.r();
            let mut q = qr.q();
            for j in 0..d {
                if r[(j, j)] < 0.0 {
                    q.column_mut(j).neg_mut();
                }
            }
            let mut ql = q.clone();
            for (j, &lam) in eigs.iter().enumerate() {
                ql.column_mut(j).scale_mut(lam);
            }
            DenseMatrix::from_nalgebra(&(ql * q.transpose())).expect("square")
        }
        Rotation::Householder(k) => {
            let mut h = DenseMatrix::from_diagonal(eigs);
            for _ in 0..k {
                let mut v = gaussian_vec(&mut rng, d);
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter_mut().for_each(|x| *x /= norm);
                reflect(&mut h, &v);
            }
            h
        }
    };
    h.symmetrize();
    h
}

/// `H <- (I - 2vvᵀ) H (I - 2vvᵀ)` for unit `v`, as the symmetric rank-2
/// update `H - v wᵀ - w vᵀ` with `w = 2Hv - 2(vᵀHv) v`.
fn reflect(h: &mut DenseMatrix<f64>, v: &[f64]) {
    let d = v.len();
    let hv: Vec<f64> = (0..d).map(|i| crate::linalg::dot(h.row(i), v)).collect();
    let vhv = crate::linalg::dot(v, &hv);
    let w: Vec<f64> = hv.iter().zip(v).map(|(a, b)| 2.0 * a - 2.0 * vhv * b).collect();
    for i in 0..d {
        let (vi, wi) = (v[i], w[i]);
        for ((hij, &vj), &wj) in h.row_mut(i).iter_mut().zip(v).zip(&w) {
            *hij -= vi * wj + wi * vj;
        }
    }
}

/// Builds the problem for `spec` with initialization scale 1.
pub fn generate(spec: &GeneratorSpec) -> Result<QuadraticProblem> {
    spec.validate()?;
    let seed = spec.seed();
    let (h, meta) = match spec {
        GeneratorSpec::GaussianGram { n, d, sigma2, .. } => {
            let m = gaussian_matrix(&mut rng(seed, 0), *n, *d, sigma2.sqrt());
            let mut g = m.transpose() * &m;
            g /= *d as f64;
            let mut h = DenseMatrix::from_nalgebra(&g)?;
            h.symmetrize();
            (h, format!("gaussian_gram n={n} d={d} sigma2={sigma2} seed={seed}"))
        }
        GeneratorSpec::FromSpectrum { eigs, rotation, .. } => {
            (rotate(eigs, *rotation, seed), format!("from_spectrum d={} seed={seed}", eigs.len()))
        }
        GeneratorSpec::SampledSpectrum { model, d, rotation, .. } => {
            let eigs = model.sample_eigenvalues(*d, seed)?;
            (rotate(&eigs, *rotation, seed), format!("sampled_spectrum {} d={d} seed={seed}", model.summary().variant))
        }
        GeneratorSpec::MatrixMarketFile { path, assembly, .. } => {
            let a = read_matrix_market(path)?;
            let h = match assembly {
                Assembly::Hessian => {
                    let mut h = a.into_square()?;
                    let scale = h.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if h.asymmetry() > 1e-12 * scale.max(1.0) {
                        return Err(Error::NotPsd(format!("{} is not symmetric", path.display())));
                    }
                    h.symmetrize();
                    h
                }
                Assembly::Gram => {
                    let d = a.ncols as f64;
                    a.gram(1.0 / d)
                }
                Assembly::GramUnnormalized => a.gram(1.0),
            };
            check_psd_dense(&h)?;
            (h, format!("matrix_market {} seed={seed}", path.display()))
        }
    };
    let d = h.dim();
    let x_star = gaussian_vec(&mut rng(seed, STREAM_X_STAR), d);
    let g = gaussian_vec(&mut rng(seed, STREAM_INIT), d);
    let x0 = x_star.iter().zip(&g).map(|(a, b)| a + b).collect();
    Ok(QuadraticProblem { h, x_star, x0, init_scale: 1.0, meta })
}

fn check_psd_dense(h: &DenseMatrix<f64>) -> Result<()> {
    if h.dim() <= dense_cap() {
        let eigs = h.symmetric_eigenvalues();
        let top = eigs.last().copied().unwrap_or(0.0).abs().max(1.0);
        if let Some(&low) = eigs.first() {
            if low < -1e-10 * top {
                return Err(Error::NotPsd(format!("smallest eigenvalue {low:e}")));
            }
        }
        Ok(())
    } else {
        crate::estimation::check_psd(h, 32, 0)
    }
}

/// Dense eigendecomposition cap, from [`DENSE_CAP_ENV`] if set.
pub fn dense_cap() -> usize {
    std::env::var(DENSE_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_DENSE_CAP)
}

/// Eigenvalues of `h`, ascending, with values in `[-1e-10, 0)` clamped to 0.
pub fn eigenvalues(h: &DenseMatrix<f64>) -> Result<Vec<f64>> {
    let cap = dense_cap();
    if h.dim() > cap {
        return Err(Error::DenseCapExceeded { d: h.dim(), cap });
    }
    let mut eigs = h.symmetric_eigenvalues();
    for v in &mut eigs {
        if *v < 0.0 && *v >= -1e-10 {
            *v = 0.0;
        }
    }
    Ok(eigs)
}

/// Empirical spectral density of the problem's Hessian.
pub fn esd(problem: &QuadraticProblem) -> Result<DensityModel<f64>> {
    DensityModel::empirical(eigenvalues(&problem.h)?)
}

/// Builds a method for a concrete problem (possibly fitting parameters).
pub type MethodFactory<'a> = dyn Fn(&QuadraticProblem) -> Result<MethodSpec<f64>> + Sync + 'a;

/// Monte-Carlo experiment description.
#[derive(Clone, Debug)]
pub struct MonteCarloSpec {
    pub generator: GeneratorSpec,
    pub seeds: usize,
    /// Seeds used are `base_seed, base_seed + 1, ...`.
    pub base_seed: u64,
    pub horizon: usize,
    pub init_scale: f64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

/// All runs of one method.
#[derive(Clone, Debug)]
pub struct MethodRuns {
    pub name: String,
    pub dim: Vec<usize>,
    /// Per seed, in seed order: the trace or the failure message.
    pub runs: Vec<(u64, std::result::Result<IterateTrace<f64>, String>)>,
}

/// Pointwise statistics of one metric across seeds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CurveStats {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub max: Vec<f64>,
}

/// Aggregated curves of one method.
#[derive(Clone, Debug)]
pub struct Aggregate {
    pub name: String,
    pub dist_sq: CurveStats,
    pub f_gap: CurveStats,
    pub grad_sq: CurveStats,
    /// Seeds included in the statistics.
    pub used: usize,
    /// Seeds excluded because the run failed or diverged.
    pub failed: usize,
}

fn stats(samples: &[Vec<f64>], horizon: usize) -> CurveStats {
    let n = samples.len();
    let mut out = CurveStats::default();
    for t in 0..=horizon {
        let col = samples.iter().map(|s| s[t]);
        let mean = col.clone().sum::<f64>() / n as f64;
        let var = if n > 1 { col.clone().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        out.mean.push(mean);
        out.stderr.push((var / n as f64).sqrt());
        out.max.push(col.fold(f64::NEG_INFINITY, f64::max));
    }
    out
}

impl MethodRuns {
    /// Pointwise mean, standard error and maximum over successful seeds.
    /// With `per_dimension`, all three metrics are divided by `d`.
    pub fn aggregate(&self, horizon: usize, per_dimension: bool) -> Result<Aggregate> {
        let mut dist = Vec::new();
        let mut fgap = Vec::new();
        let mut grad = Vec::new();
        let mut failed = 0;
        for ((_, run), &d) in self.runs.iter().zip(&self.dim) {
            match run {
                Ok(tr) if !tr.diverged && tr.dist_sq.len() > horizon => {
                    let scale = if per_dimension { 1.0 / d as f64 } else { 1.0 };
                    let norm = |v: &[f64]| v[..=horizon].iter().map(|x| x * scale).collect::<Vec<_>>();
                    dist.push(norm(&tr.dist_sq));
                    fgap.push(norm(&tr.f_gap));
                    grad.push(norm(&tr.grad_sq));
                }
                _ => failed += 1,
            }
        }
        if dist.is_empty() {
            return Err(Error::FitFailed(format!("all {} runs of {} failed", self.runs.len(), self.name)));
        }
        Ok(Aggregate {
            name: self.name.clone(),
            dist_sq: stats(&dist, horizon),
            f_gap: stats(&fgap, horizon),
            grad_sq: stats(&grad, horizon),
            used: dist.len(),
            failed,
        })
    }
}

/// Runs every method on every seed. Each seed's problem is generated once
/// and shared by all methods. Results are in seed order.
pub fn monte_carlo(spec: &MonteCarloSpec, methods: &[(String, &MethodFactory<'_>)]) -> Result<Vec<MethodRuns>> {
    if spec.seeds == 0 {
        return Err(invalid("need at least one seed"));
    }
    spec.generator.validate()?;
    let per_seed = |k: usize| -> (u64, usize, Vec<std::result::Result<IterateTrace<f64>, String>>) {
        let seed = spec.base_seed.wrapping_add(k as u64);
        match generate(&spec.generator.with_seed(seed)) {
            Ok(problem) => {
                let problem = problem.with_init_scale(spec.init_scale);
                let runs = methods
                    .iter()
                    .map(|(_, factory)| {
                        factory(&problem).and_then(|m| problem.run(&m, spec.horizon)).map_err(|e| e.to_string())
                    })
                    .collect();
                (seed, problem.dim(), runs)
            }
            Err(e) => (seed, 0, methods.iter().map(|_| Err(e.to_string())).collect()),
        }
    };
    let results: Vec<_> = match spec.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| invalid(e.to_string()))?
            .install(|| (0..spec.seeds).into_par_iter().map(per_seed).collect()),
        None => (0..spec.seeds).into_par_iter().map(per_seed).collect(),
    };
    let mut out: Vec<MethodRuns> =
        methods.iter().map(|(name, _)| MethodRuns { name: name.clone(), dim: Vec::new(), runs: Vec::new() }).collect();
    for (seed, dim, runs) in results {
        for (m, run) in out.iter_mut().zip(runs) {
            m.dim.push(dim);
            m.runs.push((seed, run));
        }
    }
    Ok(out)
}

/// Monte-Carlo estimate of the per-dimension expected error curves of one
/// method.
pub fn monte_carlo_expected_error(spec: &MonteCarloSpec, method: &MethodFactory<'_>) -> Result<Aggregate> {
    let runs = monte_carlo(spec, &[("method".to_string(), method)])?;
    runs[0].aggregate(spec.horizon, true)
}
