//! Output files. Floats are written as `{:.16e}` so that reruns are
//! byte-identical and values round-trip.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Formats a float for CSV output; non-finite values as `nan`/`inf`/`-inf`.
pub fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// `out/name`, creating `out` if needed.
pub fn path_in(out: &Path, name: impl AsRef<Path>) -> Result<PathBuf> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    Ok(out.join(name))
}

/// CSV writer with a header row.
pub fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<fs::File>> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    Ok(w)
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.0, 1.0, -2.5e-300, std::f64::consts::PI, 1e300] {
            assert_eq!(fmt(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt(1.0), "1.0000000000000000e0");
        assert_eq!(fmt(f64::INFINITY), "inf");
        assert_eq!(fmt(f64::NAN), "nan");
    }
}
