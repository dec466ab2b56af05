//! File formats shared by the library and the command-line front end.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, QubitState};

/// Header of a scalar series export.
pub const SERIES_CSV_HEADER: &str = "t,value,stderr";
/// Header of a per-trial trajectory export.
pub const TRAJECTORY_CSV_HEADER: &str = "t,metric,value,trial";
/// Header of an eigenvalue table export.
pub const EIGENVALUE_CSV_HEADER: &str = "magnitude,multiplicity";

pub fn to_one_based(nodes: &[usize]) -> Vec<usize> {
    nodes.iter().map(|&x| x + 1).collect()
}

pub fn from_one_based(nodes: &[usize]) -> Result<Vec<usize>> {
    nodes
        .iter()
        .map(|&x| {
            x.checked_sub(1)
                .ok_or_else(|| Error::InvalidArgument("node 0 in 1-based data".into()))
        })
        .collect()
}

/// Serde adapter for a single edge stored 1-based on disk.
pub mod one_based_edge {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(edge: &[usize], s: S) -> Result<S::Ok, S::Error> {
        super::to_one_based(edge).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        super::from_one_based(&raw).map_err(serde::de::Error::custom)
    }
}

/// Shortest text that parses back to the same `f64`.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Writes `contents` next to `path` and renames it into place, so readers
/// never observe a half-written file.
pub fn write_atomic(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Dense JSON export of a density matrix as separate real and imaginary
/// row arrays.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DensityMatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DensityMatrix> for DensityMatrixJson {
    fn from(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let rows = |f: fn(&crate::qstate::C64) -> f64| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
                .collect()
        };
        DensityMatrixJson {
            n: rho.n_qubits(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(json: DensityMatrixJson) -> Result<Self> {
        if json.n > crate::qstate::DEFAULT_QUBIT_CAP {
            return Err(Error::DimensionCap {
                what: "density matrix JSON",
                n: json.n,
                cap: crate::qstate::DEFAULT_QUBIT_CAP,
            });
        }
        let dim = 1usize << json.n;
        let bad = || Error::InvalidState(format!("expected {dim}x{dim} entry arrays"));
        if json.re.len() != dim || json.im.len() != dim {
            return Err(bad());
        }
        let mut m = crate::qstate::CMatrix::zeros(dim, dim);
        for r in 0..dim {
            if json.re[r].len() != dim || json.im[r].len() != dim {
                return Err(bad());
            }
            for c in 0..dim {
                m[(r, c)] = crate::qstate::C64::new(json.re[r][c], json.im[r][c]);
            }
        }
        DensityMatrix::new(m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QubitJson {
    pub re: [[f64; 2]; 2],
    pub im: [[f64; 2]; 2],
}

impl From<&QubitState> for QubitJson {
    fn from(q: &QubitState) -> Self {
        let m = q.matrix();
        QubitJson {
            re: [[m[(0, 0)].re, m[(0, 1)].re], [m[(1, 0)].re, m[(1, 1)].re]],
            im: [[m[(0, 0)].im, m[(0, 1)].im], [m[(1, 0)].im, m[(1, 1)].im]],
        }
    }
}

/// Compact description of a (possibly large) network state.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StateSummary {
    pub n: usize,
    pub trace: f64,
    pub purity: f64,
    pub reduced: Vec<QubitJson>,
}

impl From<&DensityMatrix> for StateSummary {
    fn from(rho: &DensityMatrix) -> Self {
        StateSummary {
            n: rho.n_qubits(),
            trace: rho.trace().re,
            purity: rho.purity(),
            reduced: rho.reduced_states().iter().map(QubitJson::from).collect(),
        }
    }
}

/// Parses a CSV file produced by this crate and checks its header and row
/// arity, returning the number of data rows.
pub fn check_csv(contents: &str, expected_header: &str) -> Result<usize> {
    let mut lines = contents.lines();
    let header = lines.next().unwrap_or_default();
    if header != expected_header {
        return Err(Error::InvalidArgument(format!(
            "CSV header {header:?}, expected {expected_header:?}"
        )));
    }
    let columns = expected_header.split(',').count();
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        if line.split(',').count() != columns {
            return Err(Error::InvalidArgument(format!(
                "CSV row {} has the wrong number of fields",
                i + 2
            )));
        }
        rows += 1;
    }
    Ok(rows)
}

pub(crate) fn push_csv_row(out: &mut String, fields: &[&str]) {
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(f);
    }
    out.push('\n');
}

/// Eigenvalue table as CSV.
pub fn eigenvalue_table_csv(table: &[(f64, usize)]) -> String {
    let mut out = String::new();
    writeln!(out, "{EIGENVALUE_CSV_HEADER}").unwrap();
    for &(magnitude, multiplicity) in table {
        writeln!(out, "{},{}", fmt_f64(magnitude), multiplicity).unwrap();
    }
    out
}
