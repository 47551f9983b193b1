//! JSON and CSV readers and writers for covariance matrices and state specs.
//!
//! A covariance matrix is `{"modes": N, "entries": [...]}` with `4N²`
//! row-major entries, or `2N` CSV lines of `2N` numbers each.

use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::states::{BisymmetricSpec, FullySymmetricSpec};
use crate::symplectic::{CovarianceMatrix, SymplecticMatrix};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    modes: usize,
    entries: Vec<f64>,
}

impl Serialize for CovarianceMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson { modes: self.modes(), entries: self.row_major() }.serialize(serializer)
    }
}

impl Serialize for SymplecticMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson { modes: self.modes(), entries: self.row_major() }.serialize(serializer)
    }
}

fn json_error(err: serde_json::Error) -> Error {
    Error::Parse { line: err.line(), message: err.to_string() }
}

pub fn cm_from_json(text: &str) -> Result<CovarianceMatrix> {
    let raw: MatrixJson = serde_json::from_str(text).map_err(json_error)?;
    CovarianceMatrix::from_row_major(raw.modes, &raw.entries)
}

pub fn cm_to_json(cm: &CovarianceMatrix) -> String {
    serde_json::to_string(cm).expect("covariance matrices always serialize")
}

/// 1-based line of the first record starting at or after `byte`. The reader
/// reports positions before any skipped blank or comment lines, and its own
/// line count ignores blank lines.
fn csv_line(text: &str, byte: usize) -> usize {
    let byte = byte.min(text.len());
    let mut line = text.as_bytes()[..byte].iter().filter(|&&c| c == b'\n').count() + 1;
    for l in text[byte..].split('\n') {
        let t = l.trim();
        if !t.is_empty() && !t.starts_with('#') {
            break;
        }
        line += 1;
    }
    line
}

pub fn cm_from_csv(text: &str) -> Result<CovarianceMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let line_at = |byte: u64| csv_line(text, byte as usize);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| line_at(p.byte())),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(rows.len() + 1, |p| line_at(p.byte()));
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("column {}: {field:?} is not a number", col + 1),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    let dim = rows.len();
    if dim == 0 {
        return Err(Error::Parse { line: 1, message: "no matrix rows".into() });
    }
    if rows[0].len() != dim || !dim.is_multiple_of(2) {
        return Err(Error::Parse {
            line: 1,
            message: format!("matrix is {dim}x{}, expected 2N x 2N", rows[0].len()),
        });
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    CovarianceMatrix::from_row_major(dim / 2, &flat)
}

pub fn cm_to_csv(cm: &CovarianceMatrix) -> String {
    let m = cm.matrix();
    let mut out = String::new();
    for r in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols()).map(|c| format!("{:e}", m[(r, c)])).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Read a matrix from a file, choosing the format by extension (`.csv`,
/// otherwise JSON).
pub fn read_cm(path: &Path) -> Result<CovarianceMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        cm_from_csv(&text)
    } else {
        cm_from_json(&text)
    }
}

fn inline_or_file(arg: &str) -> Result<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::invalid(format!("cannot read {arg}: {e}")))
    }
}

pub fn fs_spec_from_json(text: &str) -> Result<FullySymmetricSpec> {
    let spec: FullySymmetricSpec = serde_json::from_str(text).map_err(json_error)?;
    spec.validate()?;
    Ok(spec)
}

pub fn bisym_spec_from_json(text: &str) -> Result<BisymmetricSpec> {
    let spec: BisymmetricSpec = serde_json::from_str(text).map_err(json_error)?;
    spec.validate_blocks()?;
    Ok(spec)
}

/// Inline JSON (anything starting with `{`) or a path to a JSON file.
pub fn fs_spec_from_arg(arg: &str) -> Result<FullySymmetricSpec> {
    fs_spec_from_json(&inline_or_file(arg)?)
}

pub fn bisym_spec_from_arg(arg: &str) -> Result<BisymmetricSpec> {
    bisym_spec_from_json(&inline_or_file(arg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{fully_symmetric_cm, ghz_type_spec};

    #[test]
    fn json_round_trip() {
        let cm = fully_symmetric_cm(&ghz_type_spec(3, 1.4).unwrap()).unwrap();
        assert_eq!(cm_from_json(&cm_to_json(&cm)).unwrap(), cm);
    }

    #[test]
    fn csv_round_trip() {
        let cm = fully_symmetric_cm(&ghz_type_spec(2, 1.9).unwrap()).unwrap();
        assert_eq!(cm_from_csv(&cm_to_csv(&cm)).unwrap(), cm);
    }

    #[test]
    fn json_rejects_bad_shapes() {
        assert!(cm_from_json(r#"{"modes":1,"entries":[1,0,0]}"#).is_err());
        assert!(cm_from_json(r#"{"modes":1,"entries":[1,0.5,0,1]}"#).is_err());
        assert!(cm_from_json(r#"{"modes":1,"entries":[1,0,0,1],"x":1}"#).is_err());
        let err = cm_from_json("{\n\"modes\": 1,\n\"entries\": [1, 0, 0, oops]}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        assert!(cm_from_json(r#"{"modes":18446744073709551615,"entries":[]}"#).is_err());
    }

    #[test]
    fn csv_diagnostics() {
        let err = cm_from_csv("1,0\n0,x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = cm_from_csv("1,0\n0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        assert!(cm_from_csv("1,0,0\n0,1,0\n0,0,1\n").is_err());
        assert!(cm_from_csv("").is_err());
        assert!(cm_from_csv("1,2\n0,1\n").is_err());
    }

    #[test]
    fn spec_parsing() {
        let fs = fs_spec_from_arg(r#"{"modes":4,"b":1.5,"z1":0.1,"z2":0.2}"#).unwrap();
        assert_eq!(fs.modes, 4);
        assert!(fs_spec_from_arg(r#"{"modes":4,"b":1.5,"z1":0.1}"#).is_err());
        assert!(fs_spec_from_arg(r#"{"modes":2,"b":0.5,"z1":0,"z2":0}"#).is_err());
        let bi = bisym_spec_from_arg(
            r#"{"m":2,"n":3,"a":2,"e1":0.1,"e2":0.1,"b":1.5,"z1":0,"z2":0,"g1":0.2,"g2":-0.2}"#,
        )
        .unwrap();
        assert_eq!(bi.modes(), 5);
        assert!(bisym_spec_from_arg("/nonexistent/spec.json").is_err());
    }
}
