//! Experiment configuration files.
//!
//! TOML by default, JSON when the file name ends in `.json`. Syntax and
//! schema errors carry the line number reported by the parser.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use spectral_accel::GeneratorSpec;

use crate::GlobalArgs;

/// A method parameter: a number or `"auto"` (fitted per problem).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Value(f64),
    #[default]
    #[serde(with = "auto_keyword")]
    Auto,
}

mod auto_keyword {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "auto" {
            Ok(())
        } else {
            Err(D::Error::custom(format!("expected a number or \"auto\", got {s:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Gd,
    Polyak,
    Nesterov,
    Chebyshev,
    ModifiedChebyshev,
    Cg,
    MpOpt,
    MpAsympt,
    MpAveraged,
    Exp,
    Unif,
}

impl MethodKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Gd => "gd",
            Self::Polyak => "polyak",
            Self::Nesterov => "nesterov",
            Self::Chebyshev => "chebyshev",
            Self::ModifiedChebyshev => "modified_chebyshev",
            Self::Cg => "cg",
            Self::MpOpt => "mp_opt",
            Self::MpAsympt => "mp_asympt",
            Self::MpAveraged => "mp_averaged",
            Self::Exp => "exp",
            Self::Unif => "unif",
        }
    }

    /// Parameter names the method accepts.
    fn accepts(self) -> &'static [&'static str] {
        match self {
            Self::Gd => &["step"],
            Self::Polyak | Self::Nesterov | Self::Chebyshev | Self::Unif => &["ell", "L"],
            Self::ModifiedChebyshev => &["L"],
            Self::Cg => &[],
            Self::MpOpt | Self::MpAsympt | Self::MpAveraged => &["r", "sigma2", "fit"],
            Self::Exp => &["lambda0"],
        }
    }
}

/// Which MP estimator an `auto` MP method uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MpRoute {
    #[default]
    LmaxTrace,
    Moments,
}

/// One method entry. Parameters left out are `auto`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub kind: MethodKind,
    /// Label in the output files (default: the kind).
    pub name: Option<String>,
    pub step: Option<Param>,
    pub ell: Option<Param>,
    #[serde(rename = "L")]
    pub big_l: Option<Param>,
    pub r: Option<Param>,
    pub sigma2: Option<Param>,
    pub lambda0: Option<Param>,
    pub fit: Option<MpRoute>,
}

impl MethodConfig {
    pub fn new(kind: MethodKind) -> Self {
        Self { kind, name: None, step: None, ell: None, big_l: None, r: None, sigma2: None, lambda0: None, fit: None }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.label().to_string())
    }

    fn given(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, set) in [
            ("step", self.step.is_some()),
            ("ell", self.ell.is_some()),
            ("L", self.big_l.is_some()),
            ("r", self.r.is_some()),
            ("sigma2", self.sigma2.is_some()),
            ("lambda0", self.lambda0.is_some()),
            ("fit", self.fit.is_some()),
        ] {
            if set {
                out.push(name);
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let accepted = self.kind.accepts();
        for p in self.given() {
            if !accepted.contains(&p) {
                bail!("method {:?} ({}) does not take parameter `{p}`", self.label(), self.kind.label());
            }
        }
        for (name, p) in [
            ("step", self.step),
            ("ell", self.ell),
            ("L", self.big_l),
            ("r", self.r),
            ("sigma2", self.sigma2),
            ("lambda0", self.lambda0),
        ] {
            if let Some(Param::Value(v)) = p {
                if !v.is_finite() || v < 0.0 {
                    bail!("method {:?}: parameter `{name}` must be finite and nonnegative, got {v}", self.label());
                }
            }
        }
        let mp_partial = matches!((self.r, self.sigma2), (Some(Param::Value(_)), None | Some(Param::Auto)))
            || matches!((self.r, self.sigma2), (None | Some(Param::Auto), Some(Param::Value(_))));
        if mp_partial {
            bail!("method {:?}: give both `r` and `sigma2` or neither", self.label());
        }
        Ok(())
    }
}

fn default_seeds() -> usize {
    1
}

fn one() -> f64 {
    1.0
}

/// Output file names, relative to `--out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default = "default_bench")]
    pub bench: PathBuf,
    #[serde(default = "default_aggregate")]
    pub aggregate: PathBuf,
}

fn default_bench() -> PathBuf {
    "bench.csv".into()
}

fn default_aggregate() -> PathBuf {
    "bench_aggregate.csv".into()
}

impl Default for Outputs {
    fn default() -> Self {
        Self { bench: default_bench(), aggregate: default_aggregate() }
    }
}

/// A benchmark experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: GeneratorSpec,
    #[serde(default)]
    pub methods: Vec<MethodConfig>,
    /// Iterations T.
    pub iters: usize,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    /// Base seed; seed `k` runs on `seed + k`.
    #[serde(default)]
    pub seed: u64,
    /// Initialization scale R.
    #[serde(default = "one", rename = "R", alias = "init_scale")]
    pub init_scale: f64,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub probes: Option<usize>,
    #[serde(default)]
    pub power_iters: Option<usize>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ExperimentConfig {
    /// Parses `text`; `json` selects the JSON syntax.
    pub fn parse(text: &str, json: bool) -> Result<Self> {
        if json {
            serde_json::from_str(text).map_err(|e| anyhow::anyhow!("config parse error: {e}"))
        } else {
            toml::from_str(text).map_err(|e| anyhow::anyhow!("config parse error: {e}"))
        }
    }

    /// Reads, parses and validates a config file. Relative Matrix Market
    /// paths are resolved against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let mut cfg = Self::parse(&text, json).with_context(|| format!("in {}", path.display()))?;
        if let GeneratorSpec::MatrixMarketFile { path: file, .. } = &mut cfg.problem {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
        cfg.validate().with_context(|| format!("in {}", path.display()))?;
        Ok(cfg)
    }

    /// Applies command-line overrides.
    pub fn apply_overrides(&mut self, g: &GlobalArgs) {
        if let Some(s) = g.seed {
            self.seed = s;
        }
        if let Some(s) = g.seeds {
            self.seeds = s;
        }
        if let Some(t) = g.iters {
            self.iters = t;
        }
        if g.jobs.is_some() {
            self.jobs = g.jobs;
        }
        if g.probes.is_some() {
            self.probes = g.probes;
        }
        if g.power_iters.is_some() {
            self.power_iters = g.power_iters;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            bail!("config needs at least one method");
        }
        if self.iters == 0 {
            bail!("iters must be at least 1");
        }
        if self.seeds == 0 {
            bail!("seeds must be at least 1");
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            bail!("R must be finite and nonnegative");
        }
        if self.jobs == Some(0) || self.probes == Some(0) || self.power_iters == Some(0) {
            bail!("jobs, probes and power_iters must be at least 1");
        }
        let mut names = HashSet::new();
        for m in &self.methods {
            m.validate()?;
            if !names.insert(m.label()) {
                bail!("duplicate method name {:?}; set `name` to tell them apart", m.label());
            }
        }
        self.problem.validate()?;
        Ok(())
    }
}

/// Loads `--config` (required) with command-line overrides applied.
pub fn load_with_overrides(g: &GlobalArgs) -> Result<ExperimentConfig> {
    let Some(path) = &g.config else {
        bail!("--config is required");
    };
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply_overrides(g);
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
iters = 10
seeds = 3

[problem]
kind = "gaussian_gram"
n = 20
d = 10

[[methods]]
kind = "mp_opt"

[[methods]]
kind = "gd"
step = 0.1
"#;

    #[test]
    fn parses_toml() {
        let cfg = ExperimentConfig::parse(BASIC, false).unwrap();
        assert_eq!(cfg.methods.len(), 2);
        assert_eq!(cfg.methods[1].step, Some(Param::Value(0.1)));
        assert_eq!(cfg.init_scale, 1.0);
        assert_eq!(cfg.outputs, Outputs::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn auto_keyword() {
        let m: MethodConfig = toml::from_str("kind = \"chebyshev\"\nell = \"auto\"\nL = 4").unwrap();
        assert_eq!(m.ell, Some(Param::Auto));
        assert_eq!(m.big_l, Some(Param::Value(4.0)));
        assert!(toml::from_str::<MethodConfig>("kind = \"chebyshev\"\nell = \"fast\"").is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = BASIC.replace("step = 0.1", "stepp = 0.1");
        let e = ExperimentConfig::parse(&bad, false).unwrap_err().to_string();
        assert!(e.contains("line 15"), "{e}");
        let e = ExperimentConfig::parse("{\n \"iters\": 3,\n \"problem\": 5\n}", true).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
    }

    #[test]
    fn semantic_validation() {
        let mut cfg = ExperimentConfig::parse(BASIC, false).unwrap();
        cfg.methods[0].step = Some(Param::Value(1.0));
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::parse(BASIC, false).unwrap();
        cfg.methods[1].kind = MethodKind::MpOpt;
        cfg.methods[1].step = None;
        assert!(cfg.validate().unwrap_err().to_string().contains("duplicate"));
        let mut cfg = ExperimentConfig::parse(BASIC, false).unwrap();
        cfg.methods[0].r = Some(Param::Value(2.0));
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::parse(BASIC, false).unwrap();
        cfg.methods.clear();
        assert!(cfg.validate().is_err());
    }
}
