//! `rates`: expected error curves of a method under a density model.

use anyhow::{anyhow, Result};
use spectral_accel::orthopoly::mp_mt_log;

use super::{density, method_for};
use crate::output::{csv_writer, fmt, path_in};
use crate::{GlobalArgs, ModelArg, RateMethod, RatesArgs};

/// Default horizon when `--iters` is not given.
pub const DEFAULT_ITERS: usize = 100;

/// Closed-form value at iteration `t`, where one is known.
///
/// * MP-OPT under MP: `f_gap = ½ R² β₁ m_t`.
/// * averaged MP-OPT under MP: `f_gap = ½ R² β₁ / M_t`.
/// * EXP under the exponential model: `dist_sq = R² / (t + 1)`.
fn closed_form(args: &RatesArgs, t: usize) -> Option<f64> {
    let p = &args.params;
    let r2 = args.init_scale * args.init_scale;
    match (args.model, args.method) {
        (ModelArg::Mp, RateMethod::Optimal | RateMethod::MpOpt) => {
            let (ln_m, _) = mp_mt_log(p.r, t).ok()?;
            Some(0.5 * r2 * p.sigma2 * p.r * ln_m.exp())
        }
        (ModelArg::Mp, RateMethod::MpAveraged) => {
            let (_, ln_big_m) = mp_mt_log(p.r, t).ok()?;
            Some(0.5 * r2 * p.sigma2 * p.r * (-ln_big_m).exp())
        }
        (ModelArg::Exp, RateMethod::Optimal | RateMethod::Exp) => Some(r2 / (t + 1) as f64),
        _ => None,
    }
}

pub fn run(g: &GlobalArgs, args: &RatesArgs) -> Result<()> {
    let horizon = g.iters.unwrap_or(DEFAULT_ITERS);
    let model = density(args.model, &args.params)?;
    let method = method_for(args.method, args.model, &args.params)?;
    let poly =
        method.residual_polynomial()?.ok_or_else(|| anyhow!("{} has no fixed residual polynomial", method.name()))?;
    let dist = model.expected_error_curve(poly.as_ref(), horizon, args.init_scale, 0)?;
    let fgap = model.expected_error_curve(poly.as_ref(), horizon, args.init_scale, 1)?;
    let mut w =
        csv_writer(&path_in(&g.out, "rates.csv")?, &["iter", "expected_dist_sq", "expected_f_gap", "closed_form"])?;
    for t in 0..=horizon {
        let closed = closed_form(args, t).map(fmt).unwrap_or_default();
        w.write_record([t.to_string(), fmt(dist[t]), fmt(0.5 * fgap[t]), closed])?;
    }
    w.flush()?;
    println!("expected dist_sq at t = {horizon}: {}, expected f_gap: {}", fmt(dist[horizon]), fmt(0.5 * fgap[horizon]));
    Ok(())
}
