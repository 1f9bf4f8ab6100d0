//! `spectrum`: exact eigenvalues and the fitted MP density.
//!
//! The pdf uses the λmax/trace fit, whose support contains every
//! eigenvalue. The moment fit is reported alongside.

use anyhow::Result;
use log::warn;
use serde_json::json;
use spectral_accel::estimation::{mp_from_lmax_trace, mp_from_moments};
use spectral_accel::mmio::write_eigenvalues_csv;
use spectral_accel::problems::eigenvalues;
use spectral_accel::DensityModel;

use super::load_problem;
use crate::output::{csv_writer, fmt, path_in, write_json};
use crate::{GlobalArgs, InputArgs};

/// Points of the fitted pdf, on `[0, 1.1 λmax]`.
pub const PDF_POINTS: usize = 512;

pub fn run(g: &GlobalArgs, input: &InputArgs) -> Result<()> {
    let (problem, source) = load_problem(g, input)?;
    let eigs = eigenvalues(&problem.h)?;
    let d = eigs.len();
    let (lmin, lmax) = (eigs[0], eigs[d - 1]);
    let trace: f64 = eigs.iter().sum();
    let trace_sq: f64 = eigs.iter().map(|v| v * v).sum();
    write_eigenvalues_csv(path_in(&g.out, "eigenvalues.csv")?, &eigs)?;

    let fit = match mp_from_lmax_trace(lmax, trace, d) {
        Ok(fit) => {
            let model = DensityModel::marchenko_pastur(fit.r, fit.sigma2)?;
            let mut w = csv_writer(&path_in(&g.out, "mp_fit_pdf.csv")?, &["lambda", "pdf"])?;
            let top = 1.1 * lmax;
            for i in 0..PDF_POINTS {
                let lam = top * i as f64 / (PDF_POINTS - 1) as f64;
                w.write_record([fmt(lam), fmt(model.pdf(lam)?)])?;
            }
            w.flush()?;
            json!({ "r": fit.r, "sigma2": fit.sigma2, "zero_mass": model.support().zero_mass })
        }
        Err(e) => {
            warn!("no MP fit for {source}: {e}");
            json!({ "fit_failed": e.to_string() })
        }
    };
    let n = d as f64;
    let moments = match mp_from_moments(trace / n, trace_sq / n) {
        Ok(fit) => json!({ "r": fit.r, "sigma2": fit.sigma2 }),
        Err(e) => json!({ "fit_failed": e.to_string() }),
    };
    let report = json!({
        "input": source,
        "dim": d,
        "lmin": lmin,
        "lmax": lmax,
        "trace": trace,
        "mp_fit": fit,
        "mp_fit_moments": moments,
    });
    let text = write_json(&path_in(&g.out, "spectrum.json")?, &report)?;
    print!("{text}");
    Ok(())
}
