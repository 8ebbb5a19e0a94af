//! Golden files: `--bless` writes them, later runs compare against them.

use std::path::Path;

use crate::CliError;

/// Absolute tolerance for real-valued fields.
pub const GOLDEN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoldenOutcome {
    Blessed,
    Matched,
    Missing,
}

/// Field-wise CSV comparison. Fields that parse as reals on both sides are
/// compared to `tol`, everything else must match exactly. Lines starting with
/// `#` are ignored.
pub fn compare_csv(expected: &str, actual: &str, tol: f64) -> Result<(), String> {
    let rows = |t: &str| -> Vec<String> {
        t.lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect()
    };
    let (e, a) = (rows(expected), rows(actual));
    if e.len() != a.len() {
        return Err(format!("expected {} rows, got {}", e.len(), a.len()));
    }
    for (i, (le, la)) in e.iter().zip(&a).enumerate() {
        let fe: Vec<&str> = le.split(',').collect();
        let fa: Vec<&str> = la.split(',').collect();
        if fe.len() != fa.len() {
            return Err(format!(
                "row {}: field count {} vs {}",
                i + 1,
                fe.len(),
                fa.len()
            ));
        }
        for (j, (x, y)) in fe.iter().zip(&fa).enumerate() {
            let same = match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(p), Ok(q)) if x.contains(['.', 'e', 'E']) || y.contains(['.', 'e', 'E']) => {
                    (p - q).abs() <= tol || (p.is_nan() && q.is_nan())
                }
                _ => x == y,
            };
            if !same {
                return Err(format!(
                    "row {}, field {}: expected {x}, got {y}",
                    i + 1,
                    j + 1
                ));
            }
        }
    }
    Ok(())
}

pub fn check(dir: &Path, name: &str, actual: &str, bless: bool) -> Result<GoldenOutcome, CliError> {
    let path = dir.join(name);
    if bless {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
        std::fs::write(&path, actual)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
        return Ok(GoldenOutcome::Blessed);
    }
    let Ok(expected) = std::fs::read_to_string(&path) else {
        return Ok(GoldenOutcome::Missing);
    };
    compare_csv(&expected, actual, GOLDEN_TOL).map_err(|msg| {
        CliError::Numerical(format!("golden mismatch in {}: {msg}", path.display()))
    })?;
    Ok(GoldenOutcome::Matched)
}
