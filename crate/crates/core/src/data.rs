//! Samples `(X_i, Y_i)`, CSV ingestion and the projection of a sample onto
//! an index direction.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance on `| ||alpha|| - 1 |` accepted by [`project`] and friends.
pub const UNIT_NORM_TOL: f64 = 1e-8;

/// An `n x d` covariate matrix (row-major) with its response vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    n: usize,
    d: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from a row-major covariate buffer.
    pub fn new(d: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidData(format!("need d >= 2 covariates, got {d}")));
        }
        if x.len() != y.len() * d {
            return Err(Error::InvalidData(format!(
                "covariate buffer has {} entries, expected {} rows x {d}",
                x.len(),
                y.len()
            )));
        }
        let n = y.len();
        if n < 2 {
            return Err(Error::InvalidData(format!("need n >= 2 observations, got {n}")));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite covariate at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        if let Some(pos) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite response at row {pos}")));
        }
        Ok(Self { n, d, x, y })
    }

    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::InvalidData(format!("row {bad} has a different width")));
        }
        if rows.len() != y.len() {
            return Err(Error::InvalidData(format!(
                "{} covariate rows but {} responses",
                rows.len(),
                y.len()
            )));
        }
        Self::new(d, rows.concat(), y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.d)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Projections `alpha^T X_i` in row order (no norm check).
    pub fn projections(&self, alpha: &[f64]) -> Vec<f64> {
        self.rows().map(|r| linalg::dot(r, alpha)).collect()
    }

    /// Sample mean of the covariate vector.
    pub fn covariate_mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.d];
        for r in self.rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= self.n as f64);
        mean
    }

    /// `S_n = (1/n) sum (X_i - Xbar)(X_i - Xbar)^T`.
    pub fn covariate_covariance(&self) -> DMatrix<f64> {
        let mean = self.covariate_mean();
        let mut s = DMatrix::zeros(self.d, self.d);
        let mut c = vec![0.0; self.d];
        for r in self.rows() {
            for (ci, (v, m)) in c.iter_mut().zip(r.iter().zip(&mean)) {
                *ci = v - m;
            }
            for a in 0..self.d {
                for b in a..self.d {
                    s[(a, b)] += c[a] * c[b];
                }
            }
        }
        for a in 0..self.d {
            for b in a..self.d {
                let v = s[(a, b)] / self.n as f64;
                s[(a, b)] = v;
                s[(b, a)] = v;
            }
        }
        s
    }

    /// `(1/n) sum (X_i - Xbar) Y_i`, the sample covariance of `X` and `Y`.
    pub fn covariate_response_moment(&self) -> DVector<f64> {
        let mean = self.covariate_mean();
        let mut c = DVector::zeros(self.d);
        for (r, y) in self.rows().zip(&self.y) {
            for k in 0..self.d {
                c[k] += (r[k] - mean[k]) * y;
            }
        }
        c / self.n as f64
    }
}

/// Distinct projections of a sample with their multiplicities and group means.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedData {
    /// Strictly increasing distinct projections.
    pub z: Vec<f64>,
    /// Number of observations sharing each projection.
    pub w: Vec<usize>,
    /// Mean response within each group.
    pub ybar: Vec<f64>,
    /// Group index of every original row.
    pub group_of: Vec<usize>,
}

impl ProjectedData {
    pub fn m(&self) -> usize {
        self.z.len()
    }

    pub fn n(&self) -> usize {
        self.group_of.len()
    }
}

pub fn check_unit(alpha: &[f64]) -> Result<()> {
    let norm = linalg::norm(alpha);
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::NotUnit { norm });
    }
    Ok(())
}

/// Groups the rows by exactly equal projection `alpha^T X_i`.
///
/// Rows inside a group are summed in `(projection, response)` order, so the
/// result does not depend on the row order of `data`.
pub fn project(data: &Dataset, alpha: &[f64]) -> Result<ProjectedData> {
    if alpha.len() != data.d() {
        return Err(Error::Dimension {
            expected: data.d(),
            got: alpha.len(),
        });
    }
    check_unit(alpha)?;
    let t = data.projections(alpha);
    project_values(&t, data.y())
}

/// [`project`] for precomputed projections.
pub fn project_values(t: &[f64], y: &[f64]) -> Result<ProjectedData> {
    if let Some(i) = t.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidData(format!("non-finite projection at row {i}")));
    }
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_unstable_by(|&a, &b| t[a].total_cmp(&t[b]).then(y[a].total_cmp(&y[b])));

    let mut z = Vec::new();
    let mut w = Vec::new();
    let mut ybar = Vec::new();
    let mut group_of = vec![0; t.len()];
    let mut sum = 0.0;
    for &i in &order {
        if z.last() != Some(&t[i]) {
            if let Some(count) = w.last() {
                ybar.push(sum / *count as f64);
            }
            z.push(t[i]);
            w.push(0);
            sum = 0.0;
        }
        *w.last_mut().unwrap() += 1;
        sum += y[i];
        group_of[i] = z.len() - 1;
    }
    if let Some(count) = w.last() {
        ybar.push(sum / *count as f64);
    }
    Ok(ProjectedData { z, w, ybar, group_of })
}

/// Reads a header-first CSV file. The column named `y` is the response;
/// every other column is a covariate, kept in file order.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let y_col = headers.iter().position(|h| h == "y").ok_or_else(|| Error::Parse {
        row: 1,
        column: "y".into(),
        message: "missing response column".into(),
    })?;
    let d = headers.len() - 1;

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        // data rows are numbered from 2: the header is row 1
        let row = r + 2;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (c, field) in record.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                row,
                column: headers[c].clone(),
                message: format!("not a number: {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: headers[c].clone(),
                    message: format!("non-finite value {field:?}"),
                });
            }
            if c == y_col {
                y.push(value);
            } else {
                x.push(value);
            }
        }
    }
    if y.len() < 2 {
        return Err(Error::Parse {
            row: y.len() + 1,
            column: String::new(),
            message: format!("need at least 2 data rows, found {}", y.len()),
        });
    }
    Dataset::new(d, x, y)
}

/// Writes `x1,...,xd,y` with 17 significant digits, which round-trips exactly.
pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(File::create(path).map_err(io_err)?);
    let header: Vec<String> = (1..=data.d()).map(|k| format!("x{k}")).chain(["y".into()]).collect();
    writeln!(out, "{}", header.join(",")).map_err(io_err)?;
    for (row, y) in data.rows().zip(data.y()) {
        let fields: Vec<String> = row.iter().chain([y]).map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", fields.join(",")).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
