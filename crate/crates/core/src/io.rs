//! File formats: CSV tables, sorted-key JSON, knot files and window arguments.
//!
//! Floats are written with 17 significant digits so that a value read back
//! is bit-identical to the one written.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::atlas::ScanPoint;
use crate::dual::DetScan;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::window::WindowSpec;

/// Round-trip float formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Grid samples as `x,value`.
pub fn write_grid_csv<W: Write>(out: W, g: &GridFunction) -> Result<()> {
    let mut wtr = csv_writer(out);
    wtr.write_record(["x", "value"])?;
    for (x, v) in g.nodes() {
        wtr.write_record([fmt_f64(x), fmt_f64(v)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Determinant scan as `x,det,A_N,G21,G22,G23`.
pub fn write_det_scan_csv<W: Write>(out: W, scan: &DetScan) -> Result<()> {
    let mut wtr = csv_writer(out);
    wtr.write_record(["x", "det", "A_N", "G21", "G22", "G23"])?;
    for s in &scan.samples {
        wtr.write_record([s.x, s.det, s.a_n, s.g21, s.g22, s.g23].map(fmt_f64))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Region scan as `a,b,status,rules` with rules joined by `;`.
pub fn write_scan_csv<W: Write>(out: W, points: &[ScanPoint]) -> Result<()> {
    let mut wtr = csv_writer(out);
    wtr.write_record(["a", "b", "status", "rules"])?;
    for p in points {
        wtr.write_record([
            fmt_f64(p.a),
            fmt_f64(p.b),
            p.classification.status.id().to_string(),
            p.classification.rules_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn json_string(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn write_json(path: &Path, v: &serde_json::Value) -> Result<()> {
    fs::write(path, json_string(v))?;
    Ok(())
}

/// Reads two-column numeric rows; a non-numeric first row is taken as a header.
fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::validation("csv", format!("{}: row {} needs two columns", path.display(), i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(x), Ok(v)) => rows.push((x, v)),
            _ if i == 0 => continue,
            _ => {
                return Err(Error::validation(
                    "csv",
                    format!("{}: row {} is not numeric: `{},{}`", path.display(), i + 1, &rec[0], &rec[1]),
                ))
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::validation("csv", format!("{} has no data rows", path.display())));
    }
    Ok(rows)
}

/// Knot file rows `x,value` with ascending `x` in `[-N/2, 0]`.
pub fn read_knots_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    read_pairs(path)
}

/// Reads a uniformly sampled function written by [`write_grid_csv`].
pub fn read_grid_csv(path: &Path) -> Result<GridFunction> {
    let rows = read_pairs(path)?;
    if rows.len() < 2 {
        return Err(Error::validation("grid", "need at least two samples"));
    }
    let x0 = rows[0].0;
    let step = (rows[rows.len() - 1].0 - x0) / (rows.len() - 1) as f64;
    for (k, &(x, _)) in rows.iter().enumerate() {
        let want = x0 + k as f64 * step;
        if (x - want).abs() > 1e-9 * step.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::validation("grid", format!("samples are not uniform at row {} (x = {x})", k + 1)));
        }
    }
    GridFunction::new(x0, step, rows.into_iter().map(|(_, v)| v).collect())
}

/// Parses a window argument. `knots:FILE.csv` reads the knot file; its `N`
/// comes from `n_override` or else from the first knot at `-N/2`. For the
/// closed-form windows `n_override`, when given, must agree with the window.
pub fn window_from_arg(arg: &str, n_override: Option<f64>) -> Result<WindowSpec> {
    if let Some(file) = arg.strip_prefix("knots:") {
        let knots = read_knots_csv(Path::new(file))?;
        let n = n_override.unwrap_or(-2.0 * knots[0].0);
        return WindowSpec::knot_interpolant(n, knots);
    }
    let spec: WindowSpec = arg.parse()?;
    if let Some(n) = n_override {
        let own = spec.support_length();
        if (own - n).abs() > 1e-12 * own.max(1.0) {
            return Err(Error::validation("N", format!("--N {n} disagrees with {spec} (N = {own})")));
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::{make_window, sample};

    #[test]
    fn grid_round_trip_is_bit_exact() {
        let w = make_window(WindowSpec::trunc_gauss(2.0).unwrap()).unwrap();
        let g = sample(&w, -1.0, 1.0, 1.0 / 3.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        write_grid_csv(fs::File::create(&path).unwrap(), &g).unwrap();
        let back = read_grid_csv(&path).unwrap();
        assert_eq!(back.values(), g.values());
        assert_eq!(back.len(), g.len());
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x,value\n"));
    }

    #[test]
    fn knot_argument() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.csv");
        fs::write(&path, "x,value\n-2.5,0\n-2.3333333333333335,3\n-1.3333333333333333,5\n-1,10\n0,12\n").unwrap();
        let arg = format!("knots:{}", path.display());
        let spec = window_from_arg(&arg, Some(5.0)).unwrap();
        assert_eq!(spec.support_length(), 5.0);
        let inferred = window_from_arg(&arg, None).unwrap();
        assert_eq!(inferred, spec);
        assert!(window_from_arg(&arg, Some(4.0)).is_err());
    }

    #[test]
    fn closed_form_argument_checks_n() {
        assert!(window_from_arg("bspline:N=2", Some(2.0)).is_ok());
        assert!(window_from_arg("bspline:N=2", Some(3.0)).is_err());
        assert!(window_from_arg("bspline:N=2", None).is_ok());
    }

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
