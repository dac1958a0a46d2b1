//! Local parametrizations `alpha = S(beta)` of the unit sphere in `R^d` by
//! `d - 1` coordinates, with closed-form Jacobians.
//!
//! The spherical chart uses the ordering
//! `(cos b1, sin b1 cos b2, ..., sin b1..sin b_{d-2} cos b_{d-1}, sin b1..sin b_{d-1})`
//! except for `d = 3`, where it uses `(cos b1 sin b2, sin b1 sin b2, cos b2)`.
//! The half-sphere chart is `(b1, ..., b_{d-1}, sqrt(1 - |b|^2))`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::check_unit;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    Spherical,
    HalfSphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart {
    pub kind: ChartKind,
    pub d: usize,
}

impl Chart {
    pub fn new(kind: ChartKind, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Config(format!("chart dimension must be >= 2, got {d}")));
        }
        Ok(Self { kind, d })
    }

    pub fn spherical(d: usize) -> Result<Self> {
        Self::new(ChartKind::Spherical, d)
    }

    pub fn half_sphere(d: usize) -> Result<Self> {
        Self::new(ChartKind::HalfSphere, d)
    }

    fn check_beta(&self, beta: &[f64]) -> Result<()> {
        if beta.len() + 1 != self.d {
            return Err(Error::Dimension {
                expected: self.d - 1,
                got: beta.len(),
            });
        }
        if self.kind == ChartKind::HalfSphere {
            let r2: f64 = beta.iter().map(|b| b * b).sum();
            if !(r2 <= 1.0) {
                return Err(Error::ChartDomain(format!("half-sphere needs |beta| <= 1, got {}", r2.sqrt())));
            }
        }
        Ok(())
    }

    pub fn to_sphere(&self, beta: &[f64]) -> Result<Vec<f64>> {
        self.check_beta(beta)?;
        Ok(match self.kind {
            ChartKind::HalfSphere => {
                let r2: f64 = beta.iter().map(|b| b * b).sum();
                let mut a = beta.to_vec();
                a.push((1.0 - r2).max(0.0).sqrt());
                a
            }
            ChartKind::Spherical if self.d == 3 => {
                let (s1, c1) = beta[0].sin_cos();
                let (s2, c2) = beta[1].sin_cos();
                vec![c1 * s2, s1 * s2, c2]
            }
            ChartKind::Spherical => {
                let mut a = Vec::with_capacity(self.d);
                let mut prod = 1.0;
                for b in beta {
                    let (s, c) = b.sin_cos();
                    a.push(prod * c);
                    prod *= s;
                }
                a.push(prod);
                a
            }
        })
    }

    /// Inverse chart. At a spherical-chart singularity the angles that are
    /// not determined by `alpha` are returned as 0.
    pub fn from_sphere(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        if alpha.len() != self.d {
            return Err(Error::Dimension {
                expected: self.d,
                got: alpha.len(),
            });
        }
        check_unit(alpha)?;
        Ok(match self.kind {
            ChartKind::HalfSphere => {
                if !(alpha[self.d - 1] > 0.0) {
                    return Err(Error::ChartDomain(
                        "half-sphere chart needs a positive last coordinate".into(),
                    ));
                }
                alpha[..self.d - 1].to_vec()
            }
            ChartKind::Spherical if self.d == 3 => {
                let rho = alpha[0].hypot(alpha[1]);
                let b2 = rho.atan2(alpha[2]);
                let b1 = if rho == 0.0 { 0.0 } else { alpha[1].atan2(alpha[0]) };
                vec![b1, b2]
            }
            ChartKind::Spherical => {
                let d = self.d;
                let mut beta = vec![0.0; d - 1];
                // tail[k] = |(alpha_k, ..., alpha_{d-1})|
                let mut tail = vec![0.0f64; d + 1];
                for k in (0..d).rev() {
                    tail[k] = tail[k + 1].hypot(alpha[k]);
                }
                for k in 0..d - 2 {
                    if tail[k] == 0.0 {
                        break;
                    }
                    beta[k] = tail[k + 1].atan2(alpha[k]);
                }
                if tail[d - 2] > 0.0 {
                    beta[d - 2] = alpha[d - 1].atan2(alpha[d - 2]);
                }
                beta
            }
        })
    }

    /// `d x (d-1)` matrix of partial derivatives `dS/dbeta_j`.
    pub fn jacobian(&self, beta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_beta(beta)?;
        let d = self.d;
        let mut j = DMatrix::zeros(d, d - 1);
        match self.kind {
            ChartKind::HalfSphere => {
                let r2: f64 = beta.iter().map(|b| b * b).sum();
                let last = (1.0 - r2).sqrt();
                if !(last > 0.0) {
                    return Err(Error::ChartDomain("half-sphere jacobian is unbounded at |beta| = 1".into()));
                }
                for (l, b) in beta.iter().enumerate() {
                    j[(l, l)] = 1.0;
                    j[(d - 1, l)] = -b / last;
                }
            }
            ChartKind::Spherical if d == 3 => {
                let (s1, c1) = beta[0].sin_cos();
                let (s2, c2) = beta[1].sin_cos();
                j[(0, 0)] = -s1 * s2;
                j[(1, 0)] = c1 * s2;
                j[(2, 0)] = 0.0;
                j[(0, 1)] = c1 * c2;
                j[(1, 1)] = s1 * c2;
                j[(2, 1)] = -s2;
            }
            ChartKind::Spherical => {
                let (sin, cos): (Vec<f64>, Vec<f64>) = beta.iter().map(|b| b.sin_cos()).unzip();
                // prod of sines over j < k, skipping index `skip`
                let prod_except = |k: usize, skip: usize| -> f64 {
                    (0..k).filter(|&i| i != skip).map(|i| sin[i]).product()
                };
                for k in 0..d {
                    let last = k == d - 1;
                    for l in 0..(d - 1) {
                        j[(k, l)] = if last {
                            prod_except(d - 1, l) * cos[l]
                        } else if l < k {
                            prod_except(k, l) * cos[l] * cos[k]
                        } else if l == k {
                            -prod_except(k, usize::MAX) * sin[k]
                        } else {
                            0.0
                        };
                    }
                }
            }
        }
        Ok(j)
    }

    /// Whether some angle that fixes later coordinates has a vanishing sine.
    pub fn is_singular(&self, beta: &[f64]) -> bool {
        match self.kind {
            ChartKind::HalfSphere => beta.iter().map(|b| b * b).sum::<f64>() >= 1.0,
            ChartKind::Spherical if self.d == 3 => beta[1].sin() == 0.0,
            ChartKind::Spherical => beta[..self.d - 2].iter().any(|b| b.sin() == 0.0),
        }
    }
}
