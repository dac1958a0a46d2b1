//! Least-squares monotone link estimate for a fixed index direction.
//!
//! For fixed `alpha` the least-squares non-decreasing link is the left
//! derivative of the greatest convex minorant of the cumulative sum diagram
//! of the grouped responses. We compute it with pool-adjacent-violators,
//! which gives the same step function in `O(m)`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{self, Dataset, ProjectedData};
use crate::error::{Error, Result};

/// Right-continuous non-decreasing step function with one level per knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotonicFit {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<usize>,
}

/// Increments of an [`IsotonicFit`]; each jump sits at the right knot of
/// the increase.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JumpSet {
    pub locations: Vec<f64>,
    pub sizes: Vec<f64>,
}

impl JumpSet {
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            locations: self.locations.clone(),
            sizes: self.sizes.iter().map(|s| s * c).collect(),
        }
    }
}

/// Weighted pool-adjacent-violators: minimises `sum w_i (y_i - v_i)^2` over
/// non-decreasing `v`.
pub fn pava(y: &[f64], w: &[f64]) -> Vec<f64> {
    debug_assert_eq!(y.len(), w.len());
    // (weighted sum, total weight, number of points)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&yi, &wi) in y.iter().zip(w) {
        let mut cur = (yi * wi, wi, 1usize);
        while let Some(&(s, tw, c)) = blocks.last() {
            if s / tw > cur.0 / cur.1 {
                blocks.pop();
                cur = (s + cur.0, tw + cur.1, c + cur.2);
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(y.len());
    for (s, tw, c) in blocks {
        out.extend(std::iter::repeat_n(s / tw, c));
    }
    out
}

pub fn fit_isotonic(pd: &ProjectedData) -> IsotonicFit {
    let w: Vec<f64> = pd.w.iter().map(|&c| c as f64).collect();
    IsotonicFit {
        knots: pd.z.clone(),
        values: pava(&pd.ybar, &w),
        weights: pd.w.clone(),
    }
}

impl IsotonicFit {
    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// `values[i]` on `[knots[i], knots[i+1])`, constant outside the knot range.
    pub fn evaluate(&self, u: f64) -> f64 {
        let idx = self.knots.partition_point(|&k| k <= u);
        self.values[idx.saturating_sub(1)]
    }

    pub fn jumps(&self) -> JumpSet {
        let mut set = JumpSet::default();
        for i in 1..self.values.len() {
            let inc = self.values[i] - self.values[i - 1];
            if inc > 0.0 {
                set.locations.push(self.knots[i]);
                set.sizes.push(inc);
            }
        }
        set
    }

    pub fn is_constant(&self) -> bool {
        self.values.first() == self.values.last()
    }

    /// Profile criterion `(1/n) sum (Y_i - psi(alpha^T X_i))^2`.
    pub fn sum_of_squares(&self, data: &Dataset, alpha: &[f64]) -> Result<f64> {
        let total: usize = self.weights.iter().sum();
        if total != data.n() {
            return Err(Error::Dimension {
                expected: data.n(),
                got: total,
            });
        }
        data::check_unit(alpha)?;
        let ss: f64 = data
            .rows()
            .zip(data.y())
            .map(|(r, y)| {
                let e = y - self.evaluate(crate::linalg::dot(r, alpha));
                e * e
            })
            .sum();
        Ok(ss / data.n() as f64)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
        writeln!(out, "knot,value").map_err(io_err)?;
        for (k, v) in self.knots.iter().zip(&self.values) {
            writeln!(out, "{k:.16e},{v:.16e}").map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }
}

/// Residuals `Y_i - psi(alpha^T X_i)` of every row, using the grouping that
/// produced `fit`.
pub fn residuals(fit: &IsotonicFit, pd: &ProjectedData, y: &[f64]) -> Vec<f64> {
    y.iter()
        .zip(&pd.group_of)
        .map(|(yi, &g)| yi - fit.values[g])
        .collect()
}
