//! `estimate`: density fits from oracle estimates.

use anyhow::Result;
use serde_json::{json, Value};
use spectral_accel::estimation::{estimate_all, DEFAULT_POWER_ITERS, DEFAULT_PROBES};

use super::load_problem;
use crate::output::{path_in, write_json};
use crate::{AssemblyArg, GlobalArgs, InputArgs};

fn route<T: serde::Serialize>(model: &str, fit: &Result<T, String>) -> Value {
    match fit {
        Ok(p) => json!({ "model": model, "params": p }),
        Err(e) => json!({ "model": model, "fit_failed": e }),
    }
}

pub fn run(g: &GlobalArgs, input: &InputArgs) -> Result<()> {
    let (problem, source) = load_problem(g, input)?;
    let probes = g.probes.unwrap_or(DEFAULT_PROBES);
    let power_iters = g.power_iters.unwrap_or(DEFAULT_POWER_ITERS);
    let est = estimate_all(&problem.h, probes, power_iters, g.seed.unwrap_or(0))?;
    let assembly = match (&input.matrix, input.assembly) {
        (None, _) => Value::Null,
        (Some(_), AssemblyArg::Hessian) => json!("hessian"),
        (Some(_), AssemblyArg::Gram) => json!("gram"),
        (Some(_), AssemblyArg::GramUnnormalized) => json!("gram_unnormalized"),
    };
    let exponential = match &est.lambda0 {
        Ok(l) => json!({ "model": "exponential", "params": { "lambda0": l } }),
        Err(e) => json!({ "model": "exponential", "fit_failed": e }),
    };
    let report = json!({
        "input": source,
        "assembly": assembly,
        "mp_lmax_trace": route("marchenko_pastur", &est.mp_lmax_trace),
        "mp_moments": route("marchenko_pastur", &est.mp_moments),
        "exponential": exponential,
        "uniform": route("uniform", &est.uniform),
        "diagnostics": est.diagnostics,
    });
    let text = write_json(&path_in(&g.out, "estimate.json")?, &report)?;
    print!("{text}");
    Ok(())
}
