//! JSON file formats for matrices, loops, solutions and certificates.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::certifier::{CertificationReport, RealityFlag};
use crate::classifier::{self, OrbitRecord, TripleCount};
use crate::error::{Error, Result};
use crate::geometry::{self, ParameterMatrix, SolutionPoint};
use crate::monodromy::TriangleLoop;
use crate::tracker::PathStatus;

fn cell_text(value: &Value, field: &str) -> Result<String> {
    match value {
        Value::String(s) => Ok(s.trim().to_string()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::parse(field, format!("expected a string or number, found {other}"))),
    }
}

/// Reads `[[cell x 4] x 4]` where cells are decimal strings (`"1.4351"`,
/// `"-4.9127+5.2184i"`) or plain numbers.
pub fn matrix_from_rows(rows: &Value, field: &str) -> Result<ParameterMatrix> {
    let rows = rows
        .as_array()
        .filter(|r| r.len() == 4)
        .ok_or_else(|| Error::parse(field, "expected 4 rows"))?;
    let mut text: [[String; 4]; 4] = Default::default();
    for (i, row) in rows.iter().enumerate() {
        let cells = row
            .as_array()
            .filter(|r| r.len() == 4)
            .ok_or_else(|| Error::parse(format!("{field}[{i}]"), "expected 4 entries"))?;
        for (j, cell) in cells.iter().enumerate() {
            text[i][j] = cell_text(cell, &format!("{field}[{i}][{j}]"))?;
        }
    }
    ParameterMatrix::from_text(text)
}

/// Matrix file: `{"rows": [[...] x 4]}`.
pub fn parse_matrix(json: &str) -> Result<ParameterMatrix> {
    let value: Value = serde_json::from_str(json)?;
    let rows = value.get("rows").ok_or_else(|| Error::parse("rows", "missing"))?;
    matrix_from_rows(rows, "rows")
}

/// Entries are written as the decimal text they were read from, if any.
pub fn matrix_json(m: &ParameterMatrix) -> Value {
    serde_json::json!({ "rows": m.text_rows() })
}

#[derive(Deserialize)]
struct LoopFile {
    label: Option<String>,
    vertices: Vec<Value>,
}

/// Loop file: `{"label": "...", "vertices": [rows, rows, rows]}`; each
/// vertex is a row array or a matrix object with `rows`.
pub fn parse_loop(json: &str) -> Result<TriangleLoop> {
    let file: LoopFile = serde_json::from_str(json)?;
    if file.vertices.len() != 3 {
        return Err(Error::parse("vertices", format!("expected 3, found {}", file.vertices.len())));
    }
    let mut vertices = Vec::with_capacity(3);
    for (k, v) in file.vertices.iter().enumerate() {
        let rows = v.get("rows").unwrap_or(v);
        vertices.push(matrix_from_rows(rows, &format!("vertices[{k}]"))?);
    }
    Ok(TriangleLoop {
        label: file.label.unwrap_or_else(|| "file".into()),
        vertices: vertices.try_into().expect("three vertices"),
    })
}

pub fn loop_json(triangle: &TriangleLoop) -> Value {
    serde_json::json!({
        "label": triangle.label,
        "vertices": triangle.vertices.iter().map(ParameterMatrix::text_rows).collect::<Vec<_>>(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionEntry {
    pub representative: SolutionPoint,
    pub orbit: [SolutionPoint; 4],
    /// Largest scaled residual over the orbit.
    pub residual: f64,
    pub status: PathStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<classifier::SecantClass>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub matrix: Value,
    pub census: Option<String>,
    pub orbits: Vec<SolutionEntry>,
}

pub fn solution_entries(m: &ParameterMatrix, orbits: &[OrbitRecord]) -> Vec<SolutionEntry> {
    orbits
        .iter()
        .map(|o| SolutionEntry {
            representative: o.representative,
            orbit: o.orbit,
            residual: o
                .orbit
                .iter()
                .map(|x| geometry::scaled_residual(m.entries(), x))
                .fold(0.0, f64::max),
            status: PathStatus::Converged,
            class: o.class,
        })
        .collect()
}

pub fn solution_file(m: &ParameterMatrix, orbits: &[OrbitRecord], census: Option<TripleCount>) -> SolutionFile {
    SolutionFile {
        matrix: matrix_json(m),
        census: census.map(|c| classifier::census_line(c, orbits)),
        orbits: solution_entries(m, orbits),
    }
}

/// Reads a solution file; a bare array of entries is accepted too, in which
/// case the matrix has to be supplied separately.
pub fn parse_solutions(json: &str) -> Result<(Option<ParameterMatrix>, Vec<OrbitRecord>)> {
    let value: Value = serde_json::from_str(json)?;
    let (matrix, entries): (Option<ParameterMatrix>, Vec<SolutionEntry>) = if value.is_array() {
        (None, serde_json::from_value(value)?)
    } else {
        let file: SolutionFile = serde_json::from_value(value)?;
        let rows = file.matrix.get("rows").ok_or_else(|| Error::parse("matrix.rows", "missing"))?;
        (Some(matrix_from_rows(rows, "matrix.rows")?), file.orbits)
    };
    let points: Vec<SolutionPoint> = entries.iter().flat_map(|e| e.orbit).collect();
    let orbits = classifier::group_into_orbits(&points)?;
    Ok((matrix, orbits))
}

#[derive(Clone, Debug, Serialize)]
pub struct PointCertificate {
    pub orbit: usize,
    pub member: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma_bound: f64,
    pub certified: bool,
    pub reality: Option<RealityFlag>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateFile {
    pub mode: String,
    pub census_certified: Option<String>,
    pub distinct: bool,
    pub undetermined: Vec<usize>,
    pub points: Vec<PointCertificate>,
}

pub fn certificate_file(report: &CertificationReport, orbits: &[OrbitRecord]) -> CertificateFile {
    let mut orbits = orbits.to_vec();
    report.apply(&mut orbits);
    let points = report
        .certificates
        .iter()
        .enumerate()
        .map(|(k, c)| PointCertificate {
            orbit: k / 4 + 1,
            member: k % 4 + 1,
            alpha: c.alpha,
            beta: c.beta,
            gamma_bound: c.gamma_bound,
            certified: c.certified,
            reality: (k % 4 == 0).then(|| report.reality_flags.get(k / 4).copied()).flatten(),
        })
        .collect();
    CertificateFile {
        mode: format!("{:?}", report.mode).to_lowercase(),
        census_certified: report.census_certified.map(|c| classifier::census_line(c, &orbits)),
        distinct: report.distinct.distinct,
        undetermined: report.undetermined.iter().map(|o| o + 1).collect(),
        points,
    }
}
