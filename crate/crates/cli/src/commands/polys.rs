//! `polys`: residual polynomial values on a grid.

use anyhow::{anyhow, bail, Result};
use spectral_accel::DensityModel;

use super::method_for;
use crate::output::{csv_writer, fmt, path_in};
use crate::{Family, GlobalArgs, ModelArg, PolysArgs, RateMethod};

fn label(f: Family) -> &'static str {
    match f {
        Family::Gd => "gd",
        Family::Chebyshev => "chebyshev",
        Family::Mp => "mp",
        Family::MpAveraged => "mp_averaged",
        Family::Exp => "exp",
        Family::Unif => "unif",
        Family::Polyak => "polyak",
        Family::Nesterov => "nesterov",
        Family::ModifiedChebyshev => "modified_chebyshev",
    }
}

fn as_method(f: Family) -> RateMethod {
    match f {
        Family::Gd => RateMethod::Gd,
        Family::Chebyshev => RateMethod::Chebyshev,
        Family::Mp => RateMethod::MpOpt,
        Family::MpAveraged => RateMethod::MpAveraged,
        Family::Exp => RateMethod::Exp,
        Family::Unif => RateMethod::Unif,
        Family::Polyak => RateMethod::Polyak,
        Family::Nesterov => RateMethod::Nesterov,
        Family::ModifiedChebyshev => RateMethod::ModifiedChebyshev,
    }
}

pub fn run(g: &GlobalArgs, args: &PolysArgs) -> Result<()> {
    if args.grid < 2 {
        bail!("--grid needs at least 2 points");
    }
    let Some(&t_max) = args.degrees.iter().max() else {
        bail!("--degrees is empty");
    };
    let p = &args.params;
    let top = match args.lambda_max {
        Some(v) => v,
        None => DensityModel::marchenko_pastur(p.r, p.sigma2)?.support().upper,
    };
    if !(top > 0.0 && top.is_finite()) {
        bail!("--lambda-max must be positive and finite");
    }
    let grid: Vec<f64> = (0..args.grid).map(|i| top * i as f64 / (args.grid - 1) as f64).collect();
    let mut w = csv_writer(&path_in(&g.out, "polys.csv")?, &["family", "t", "lambda", "value"])?;
    for &family in &args.families {
        let method = method_for(as_method(family), ModelArg::Mp, p)?;
        let poly =
            method.residual_polynomial()?.ok_or_else(|| anyhow!("{} has no residual polynomial", label(family)))?;
        let table = grid.iter().map(|lam| poly.values_upto(t_max, lam)).collect::<Result<Vec<_>, _>>()?;
        for &t in &args.degrees {
            for (lam, values) in grid.iter().zip(&table) {
                w.write_record([label(family).to_string(), t.to_string(), fmt(*lam), fmt(values[t])])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
