//! Subcommand implementations.

pub mod bench;
pub mod estimate;
pub mod polys;
pub mod rates;
pub mod spectrum;

use anyhow::{bail, Context, Result};
use spectral_accel::problems::generate;
use spectral_accel::{DensityModel, GeneratorSpec, MethodSpec, QuadraticProblem};

use crate::config::ExperimentConfig;
use crate::fit::mp_averaged;
use crate::{GlobalArgs, InputArgs, ModelArg, ModelParams, RateMethod};

/// The problem named by a positional matrix file or, failing that, by the
/// config. Returns the problem and a short description of its source.
pub(crate) fn load_problem(g: &GlobalArgs, input: &InputArgs) -> Result<(QuadraticProblem, String)> {
    let seed = g.seed.unwrap_or(0);
    let (spec, source) = match (&input.matrix, &g.config) {
        (Some(path), _) => (
            GeneratorSpec::MatrixMarketFile { path: path.clone(), assembly: input.assembly.into(), seed },
            path.display().to_string(),
        ),
        (None, Some(cfg_path)) => {
            let text = std::fs::read_to_string(cfg_path).with_context(|| format!("reading {}", cfg_path.display()))?;
            let json = cfg_path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
            // Only the problem matters here; methods are not required.
            let cfg = ExperimentConfig::parse(&text, json).with_context(|| format!("in {}", cfg_path.display()))?;
            let mut spec = cfg.problem;
            if let GeneratorSpec::MatrixMarketFile { path, .. } = &mut spec {
                if path.is_relative() {
                    if let Some(dir) = cfg_path.parent() {
                        *path = dir.join(&*path);
                    }
                }
            }
            let seed = g.seed.unwrap_or(spec.seed());
            (spec.with_seed(seed), cfg_path.display().to_string())
        }
        (None, None) => bail!("give a Matrix Market file or --config"),
    };
    let problem = generate(&spec).with_context(|| format!("loading {source}"))?;
    Ok((problem, source))
}

/// The density model selected by `model` and its flags.
pub(crate) fn density(model: ModelArg, p: &ModelParams) -> Result<DensityModel> {
    Ok(match model {
        ModelArg::Mp => DensityModel::marchenko_pastur(p.r, p.sigma2)?,
        ModelArg::Exp => DensityModel::exponential(p.lambda0)?,
        ModelArg::Uniform => {
            let Some(big_l) = p.big_l else {
                bail!("the uniform model needs --big-l");
            };
            DensityModel::uniform(p.ell.unwrap_or(0.0), big_l)?
        }
    })
}

/// Builds `method` with parameters from the flags. `ℓ` and `L` default to
/// the edges of the continuous part of `model`.
pub(crate) fn method_for(method: RateMethod, model: ModelArg, p: &ModelParams) -> Result<MethodSpec> {
    let support = density(model, p)?.support();
    let ell = p.ell.unwrap_or(support.lower);
    let big_l = || -> Result<f64> {
        let l = p.big_l.unwrap_or(support.upper);
        if !l.is_finite() {
            bail!("the support is unbounded; give --big-l");
        }
        Ok(l)
    };
    Ok(match method {
        RateMethod::Optimal => match model {
            ModelArg::Mp => MethodSpec::mp_opt(p.r, p.sigma2)?,
            ModelArg::Exp => MethodSpec::exp(p.lambda0)?,
            ModelArg::Uniform => MethodSpec::unif(ell, big_l()?)?,
        },
        RateMethod::MpOpt => MethodSpec::mp_opt(p.r, p.sigma2)?,
        RateMethod::MpAveraged => mp_averaged(p.r, p.sigma2)?,
        RateMethod::MpAsympt => MethodSpec::MpAsymptotic { r: p.r, sigma2: p.sigma2 },
        RateMethod::Exp => MethodSpec::exp(p.lambda0)?,
        RateMethod::Unif => MethodSpec::unif(ell, big_l()?)?,
        RateMethod::Gd => MethodSpec::GradientDescent { step: p.step.map_or_else(|| big_l().map(|l| 1.0 / l), Ok)? },
        RateMethod::Polyak => MethodSpec::Polyak { ell, big_l: big_l()? },
        RateMethod::Nesterov => MethodSpec::Nesterov { ell, big_l: big_l()? },
        RateMethod::Chebyshev => MethodSpec::ChebyshevSemiIterative { ell, big_l: big_l()? },
        RateMethod::ModifiedChebyshev => MethodSpec::ModifiedChebyshev { big_l: big_l()? },
    })
}
