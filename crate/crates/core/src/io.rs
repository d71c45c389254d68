//! Matrix files: headerless CSV (`n` rows of `n` fields) or JSON
//! `{"n": .., "entries": [[..]], "kind": "multiplicative" | "additive"}`.
//!
//! CSV is written with 17 significant digits, so a write/read cycle is
//! bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{AdditiveMatrix, ComparisonMatrix, Matrix, PositiveMatrix};
use crate::error::{RankError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Multiplicative,
    Additive,
}

impl std::str::FromStr for MatrixKind {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mult" | "multiplicative" => Ok(MatrixKind::Multiplicative),
            "add" | "additive" => Ok(MatrixKind::Additive),
            other => Err(RankError::Parse(format!("unknown matrix kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Json,
}

impl MatrixFormat {
    /// `.json` means JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => MatrixFormat::Json,
            _ => MatrixFormat::Csv,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixDocument {
    n: usize,
    entries: Matrix,
    kind: MatrixKind,
}

pub fn parse_csv_matrix(text: &str) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| {
                    RankError::Parse(format!("row {}: `{field}` is not a number", line + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Matrix::from_rows(rows)
}

pub fn format_csv_matrix(m: &Matrix) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let fields: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn build(m: Matrix, kind: MatrixKind) -> Result<ComparisonMatrix> {
    Ok(match kind {
        MatrixKind::Multiplicative => ComparisonMatrix::Multiplicative(PositiveMatrix::new(m)?),
        MatrixKind::Additive => ComparisonMatrix::Additive(AdditiveMatrix::new(m)?),
    })
}

pub fn parse_json_matrix(text: &str) -> Result<ComparisonMatrix> {
    let doc: MatrixDocument = serde_json::from_str(text)?;
    if doc.n != doc.entries.n() {
        return Err(RankError::DimensionMismatch { expected: doc.n, got: doc.entries.n() });
    }
    build(doc.entries, doc.kind)
}

pub fn format_json_matrix(m: &Matrix, kind: MatrixKind) -> Result<String> {
    let doc = MatrixDocument { n: m.n(), entries: m.clone(), kind };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Reads a matrix file. For CSV the kind must be supplied; for JSON the
/// document's own `kind` wins unless it contradicts an explicit one.
pub fn read_matrix(path: &Path, kind: Option<MatrixKind>) -> Result<ComparisonMatrix> {
    let text = fs::read_to_string(path)?;
    match MatrixFormat::from_path(path) {
        MatrixFormat::Csv => {
            let kind = kind.ok_or_else(|| {
                RankError::InvalidParameter("CSV input needs an explicit matrix kind".into())
            })?;
            build(parse_csv_matrix(&text)?, kind)
        }
        MatrixFormat::Json => {
            let parsed = parse_json_matrix(&text)?;
            let found = match parsed {
                ComparisonMatrix::Multiplicative(_) => MatrixKind::Multiplicative,
                ComparisonMatrix::Additive(_) => MatrixKind::Additive,
            };
            match kind {
                Some(k) if k != found => Err(RankError::InvalidParameter(format!(
                    "file declares kind {found:?} but {k:?} was requested"
                ))),
                _ => Ok(parsed),
            }
        }
    }
}

pub fn write_matrix(path: &Path, m: &Matrix, kind: MatrixKind) -> Result<()> {
    let text = match MatrixFormat::from_path(path) {
        MatrixFormat::Csv => format_csv_matrix(m),
        MatrixFormat::Json => format_json_matrix(m, kind)?,
    };
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_parsing() {
        let m = parse_csv_matrix("1, 2\n0.5,1\n").unwrap();
        assert_eq!(m.to_rows(), vec![vec![1.0, 2.0], vec![0.5, 1.0]]);
        assert!(parse_csv_matrix("1,2\n3\n").is_err());
        assert!(parse_csv_matrix("1,x\n3,4\n").is_err());
    }

    #[test]
    fn json_document() {
        let text = r#"{"n": 2, "entries": [[0, 1], [-1, 0]], "kind": "additive"}"#;
        match parse_json_matrix(text).unwrap() {
            ComparisonMatrix::Additive(a) => assert!(a.is_skew()),
            other => panic!("unexpected {other:?}"),
        }
        let bad = r#"{"n": 3, "entries": [[0, 1], [-1, 0]], "kind": "additive"}"#;
        assert!(parse_json_matrix(bad).is_err());
        let negative = r#"{"n": 2, "entries": [[1, -1], [1, 1]], "kind": "multiplicative"}"#;
        assert!(matches!(parse_json_matrix(negative), Err(RankError::NonPositiveEntry { .. })));
    }

    #[test]
    fn file_round_trip_and_kind_checks() {
        let dir = tempdir();
        let m = Matrix::from_rows(vec![vec![1.0, 3.0], vec![1.0 / 3.0, 1.0]]).unwrap();
        let json = dir.join("m.json");
        write_matrix(&json, &m, MatrixKind::Multiplicative).unwrap();
        assert!(read_matrix(&json, Some(MatrixKind::Additive)).is_err());
        match read_matrix(&json, None).unwrap() {
            ComparisonMatrix::Multiplicative(x) => assert_eq!(x.matrix(), &m),
            other => panic!("unexpected {other:?}"),
        }
        let csv = dir.join("m.csv");
        write_matrix(&csv, &m, MatrixKind::Multiplicative).unwrap();
        assert!(read_matrix(&csv, None).is_err());
        assert!(read_matrix(&csv, Some(MatrixKind::Multiplicative)).is_ok());
    }

    fn tempdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("perron-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(data in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 9)) {
            let m = Matrix::from_fn(3, |i, j| data[i * 3 + j]);
            let back = parse_csv_matrix(&format_csv_matrix(&m)).unwrap();
            for (a, b) in m.as_slice().iter().zip(back.as_slice()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
