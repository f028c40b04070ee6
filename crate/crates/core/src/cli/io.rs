//! JSON documents for problems and spectral data, and CSV curves.
//!
//! Complex numbers are `[re, im]` pairs and matrices are arrays of rows.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::problem::{
    BoundaryCoefficient, PotentialGrid, Problem, Projector, SpectralData, SpectralDatum,
};

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_rows(a: &CMat) -> MatrixRows {
    (0..a.nrows())
        .map(|r| (0..a.ncols()).map(|c| [a[(r, c)].re, a[(r, c)].im]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &MatrixRows, m: usize, context: &str) -> Result<CMat> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse {
            context: context.to_string(),
            message: format!("expected a {m}×{m} matrix"),
        });
    }
    Ok(CMat::from_fn(m, m, |r, c| linalg::c(rows[r][c][0], rows[r][c][1])))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub m: usize,
    /// `Q` at the `n_grid + 1` uniform nodes of `[0, π]`.
    pub potential: Vec<MatrixRows>,
    pub projector: MatrixRows,
    pub boundary: MatrixRows,
    #[serde(default)]
    pub shift: f64,
}

impl ProblemFile {
    pub fn from_problem(p: &Problem) -> Self {
        Self {
            m: p.dim(),
            potential: p.potential.samples().iter().map(matrix_to_rows).collect(),
            projector: matrix_to_rows(p.projector.matrix()),
            boundary: matrix_to_rows(p.boundary.matrix()),
            shift: p.shift,
        }
    }

    pub fn to_problem(&self) -> Result<Problem> {
        let m = self.m;
        let samples = self
            .potential
            .iter()
            .enumerate()
            .map(|(i, rows)| rows_to_matrix(rows, m, &format!("potential[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let potential = PotentialGrid::new(samples).map_err(|e| Error::Parse {
            context: "potential".into(),
            message: e.to_string(),
        })?;
        let mut p = Problem::new(
            potential,
            Projector::new(rows_to_matrix(&self.projector, m, "projector")?),
            BoundaryCoefficient::new(rows_to_matrix(&self.boundary, m, "boundary")?),
        );
        p.shift = self.shift;
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralEntry {
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub alpha: MatrixRows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralDataFile {
    pub m: usize,
    pub entries: Vec<SpectralEntry>,
}

impl SpectralDataFile {
    pub fn from_data(d: &SpectralData) -> Self {
        Self {
            m: d.m(),
            entries: d
                .entries()
                .iter()
                .map(|e| SpectralEntry {
                    n: e.n,
                    k: e.k,
                    lambda: e.lambda,
                    alpha: matrix_to_rows(&e.alpha),
                })
                .collect(),
        }
    }

    pub fn to_data(&self) -> Result<SpectralData> {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                Ok(SpectralDatum {
                    n: e.n,
                    k: e.k,
                    lambda: e.lambda,
                    alpha: rows_to_matrix(&e.alpha, self.m, &format!("entries[{i}].alpha"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SpectralData::new(self.m, entries).map_err(|e| Error::Parse {
            context: "entries".into(),
            message: e.to_string(),
        })
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        context: format!("{what}, line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    parse_json::<ProblemFile>(text, "problem file")?.to_problem()
}

pub fn parse_spectral_data(text: &str) -> Result<SpectralData> {
    parse_json::<SpectralDataFile>(text, "spectral data file")?.to_data()
}

pub fn problem_to_string(p: &Problem) -> String {
    serde_json::to_string_pretty(&ProblemFile::from_problem(p)).expect("plain data serializes")
}

pub fn spectral_data_to_string(d: &SpectralData) -> String {
    serde_json::to_string_pretty(&SpectralDataFile::from_data(d)).expect("plain data serializes")
}

pub fn read_problem(path: &Path) -> Result<Problem> {
    parse_problem(&fs::read_to_string(path)?)
}

pub fn read_spectral_data(path: &Path) -> Result<SpectralData> {
    parse_spectral_data(&fs::read_to_string(path)?)
}

/// `x` followed by `Re Q_jk` for `j ≤ k`, plus `Im Q_jk` for `j < k` when
/// any is nonzero.
pub fn potential_csv(p: &PotentialGrid) -> String {
    let m = p.dim();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|j| (j..m).map(move |k| (j, k))).collect();
    let complex = p
        .samples()
        .iter()
        .any(|q| pairs.iter().any(|&(j, k)| j < k && q[(j, k)].im != 0.0));
    let mut out = String::from("x");
    for &(j, k) in &pairs {
        let _ = write!(out, ",re_q{}{}", j + 1, k + 1);
    }
    if complex {
        for &(j, k) in pairs.iter().filter(|(j, k)| j < k) {
            let _ = write!(out, ",im_q{}{}", j + 1, k + 1);
        }
    }
    out.push('\n');
    for (i, q) in p.samples().iter().enumerate() {
        let _ = write!(out, "{:.9}", p.node_x(i));
        for &(j, k) in &pairs {
            let _ = write!(out, ",{:.9}", q[(j, k)].re);
        }
        if complex {
            for &(j, k) in pairs.iter().filter(|(j, k)| j < k) {
                let _ = write!(out, ",{:.9}", q[(j, k)].im);
            }
        }
        out.push('\n');
    }
    out
}
