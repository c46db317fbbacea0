//! CSV output.
//!
//! Columns: `t,C,L,U,J,K,deltaA,deltaB,bounds_defined`, plus `sweep_coord`
//! for swept scenarios. Floats carry 17 significant digits, so parsing
//! recovers them exactly; undefined bounds are written as `NaN`.

use std::fs;
use std::io::Write;
use std::path::Path;

use scramble_core::{ResultTable, ScramblingRecord};

use crate::CliError;

pub const HEADER: &str = "t,C,L,U,J,K,deltaA,deltaB,bounds_defined";

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render(table: &ResultTable) -> String {
    let swept = table.sweep.column_name();
    let mut out = String::from(HEADER);
    if let Some(col) = swept {
        out.push(',');
        out.push_str(col);
    }
    out.push('\n');
    for row in &table.rows {
        let r = &row.record;
        let fields = [r.t, r.c, r.lower, r.upper, r.j_factor, r.k_factor, r.delta_a, r.delta_b];
        let mut line: Vec<String> = fields.iter().map(|&x| float(x)).collect();
        line.push(if r.bounds_defined { "1" } else { "0" }.to_string());
        if swept.is_some() {
            line.push(float(row.sweep_coord.unwrap_or(f64::NAN)));
        }
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

/// One parsed data row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub record: ScramblingRecord,
    pub sweep_coord: Option<f64>,
}

/// Parses text produced by [`render`].
pub fn parse(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let swept = match header.strip_prefix(HEADER) {
        Some("") => false,
        Some(",sweep_coord") => true,
        _ => return Err(format!("unexpected header `{header}`")),
    };
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            let want = if swept { 10 } else { 9 };
            if cells.len() != want {
                return Err(format!("row {}: {} fields, expected {want}", i + 1, cells.len()));
            }
            let num = |k: usize| cells[k].parse::<f64>().map_err(|e| format!("row {} col {k}: {e}", i + 1));
            let record = ScramblingRecord {
                t: num(0)?,
                c: num(1)?,
                lower: num(2)?,
                upper: num(3)?,
                j_factor: num(4)?,
                k_factor: num(5)?,
                delta_a: num(6)?,
                delta_b: num(7)?,
                bounds_defined: match cells[8] {
                    "1" => true,
                    "0" => false,
                    other => return Err(format!("row {}: bounds_defined `{other}`", i + 1)),
                },
            };
            let sweep_coord = if swept { Some(num(9)?) } else { None };
            Ok(CsvRow { record, sweep_coord })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, -0.0, 1.0, 3.9506172839506153, 1e-300, f64::MIN_POSITIVE, 5e-324, f64::MAX, -2.5e17, 0.1 + 0.2] {
            let s = float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert!(float(f64::NAN).parse::<f64>().unwrap().is_nan());
        assert_eq!(float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn rejects_foreign_headers() {
        assert!(parse("a,b\n").is_err());
        assert!(parse("").is_err());
        assert!(parse(&format!("{HEADER}\n1,2\n")).is_err());
    }
}
