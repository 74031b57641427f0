use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 15 significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.14e}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Output(format!("{}: {e}", path.display()))
}

pub fn prepare(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Writes a CSV file with a header row; cells are preformatted strings.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<PathBuf, Failure> {
    prepare(dir)?;
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    w.write_record(header).map_err(|e| io_err(&path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;
    Ok(path)
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    version: &'a str,
    command: &'a str,
    config: &'a C,
    result: &'a R,
}

/// Writes `{version, command, config, result}` as pretty JSON.
pub fn write_json<C: Serialize, R: Serialize>(
    dir: &Path,
    name: &str,
    command: &str,
    config: &C,
    result: &R,
) -> Result<PathBuf, Failure> {
    prepare(dir)?;
    let path = dir.join(name);
    let doc = Envelope { version: VERSION, command, config, result };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| io_err(&path, e))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(num(0.1), "1.00000000000000e-1");
        assert_eq!(num(-1234.5), "-1.23450000000000e3");
        assert_eq!(num(1.0 / 3.0).len(), "3.33333333333333e-1".len());
        assert_eq!(num(0.0), "0.00000000000000e0");
    }
}
