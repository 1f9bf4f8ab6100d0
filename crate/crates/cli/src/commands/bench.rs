//! `bench`: every configured method on every seed.

use anyhow::Result;
use log::{info, warn};
use spectral_accel::problems::{monte_carlo, MethodFactory, MonteCarloSpec};
use spectral_accel::{Error, MethodSpec, QuadraticProblem};

use crate::config::load_with_overrides;
use crate::fit::Fitter;
use crate::output::{csv_writer, fmt, path_in};
use crate::GlobalArgs;

pub const RUN_HEADER: [&str; 6] = ["method", "seed", "iter", "dist_sq", "f_gap", "grad_sq"];
pub const AGGREGATE_HEADER: [&str; 13] = [
    "method",
    "iter",
    "used",
    "failed",
    "dist_sq_mean",
    "dist_sq_stderr",
    "dist_sq_max",
    "f_gap_mean",
    "f_gap_stderr",
    "f_gap_max",
    "grad_sq_mean",
    "grad_sq_stderr",
    "grad_sq_max",
];

pub fn run(g: &GlobalArgs) -> Result<()> {
    let cfg = load_with_overrides(g)?;
    let fitter = Fitter::new(cfg.power_iters);
    let factories: Vec<Box<MethodFactory<'_>>> = cfg
        .methods
        .iter()
        .map(|m| {
            let fitter = &fitter;
            Box::new(move |p: &QuadraticProblem| -> spectral_accel::Result<MethodSpec> {
                fitter.method(m, p).map_err(|e| Error::FitFailed(format!("{e:#}")))
            }) as Box<MethodFactory<'_>>
        })
        .collect();
    let named: Vec<(String, &MethodFactory<'_>)> =
        cfg.methods.iter().zip(&factories).map(|(m, f)| (m.label(), f.as_ref())).collect();
    let spec = MonteCarloSpec {
        generator: cfg.problem.clone(),
        seeds: cfg.seeds,
        base_seed: cfg.seed,
        horizon: cfg.iters,
        init_scale: cfg.init_scale,
        jobs: cfg.jobs,
    };
    info!("running {} methods on {} seeds for {} iterations", named.len(), cfg.seeds, cfg.iters);
    let results = monte_carlo(&spec, &named)?;

    let runs_path = path_in(&g.out, &cfg.outputs.bench)?;
    let mut w = csv_writer(&runs_path, &RUN_HEADER)?;
    for m in &results {
        for (seed, run) in &m.runs {
            match run {
                Ok(tr) => {
                    if tr.diverged {
                        warn!("{} diverged on seed {seed} after {} iterations", m.name, tr.horizon());
                    }
                    for t in 0..tr.dist_sq.len() {
                        w.write_record([
                            m.name.clone(),
                            seed.to_string(),
                            t.to_string(),
                            fmt(tr.dist_sq[t]),
                            fmt(tr.f_gap[t]),
                            fmt(tr.grad_sq[t]),
                        ])?;
                    }
                }
                Err(e) => warn!("{} failed on seed {seed}: {e}", m.name),
            }
        }
    }
    w.flush()?;

    let agg_path = path_in(&g.out, &cfg.outputs.aggregate)?;
    let mut w = csv_writer(&agg_path, &AGGREGATE_HEADER)?;
    for m in &results {
        let agg = match m.aggregate(cfg.iters, false) {
            Ok(a) => a,
            Err(e) => {
                warn!("no aggregate for {}: {e}", m.name);
                continue;
            }
        };
        for t in 0..=cfg.iters {
            let mut row = vec![m.name.clone(), t.to_string(), agg.used.to_string(), agg.failed.to_string()];
            for c in [&agg.dist_sq, &agg.f_gap, &agg.grad_sq] {
                row.extend([fmt(c.mean[t]), fmt(c.stderr[t]), fmt(c.max[t])]);
            }
            w.write_record(&row)?;
        }
        println!(
            "{:<24} used {:>4}  failed {:>4}  final mean f_gap {}",
            m.name,
            agg.used,
            agg.failed,
            fmt(agg.f_gap.mean[cfg.iters])
        );
    }
    w.flush()?;
    info!("wrote {} and {}", runs_path.display(), agg_path.display());
    Ok(())
}
