//! Simple and efficient score functions, in the chart formulation
//! (`d - 1` equations in `beta`) and in the Lagrange formulation
//! (`d` equations in `alpha`, projected onto the tangent space).
//!
//! Every evaluation refits the isotonic link at the current direction.

use serde::{Deserialize, Serialize};

use crate::data::{self, Dataset};
use crate::error::{Error, Result};
use crate::isotonic::{self, IsotonicFit};
use crate::kernel::{self, Bandwidth, DerivativeEstimator};
use crate::linalg;
use crate::sphere::Chart;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Parametrized,
    Lagrange,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthRule {
    /// `0.5 * range * n^(-1/7)` recomputed from the current projections.
    #[default]
    Standard,
    Fixed(f64),
}

impl BandwidthRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Standard => Ok(()),
            Self::Fixed(h) => Bandwidth::new(*h).map(|_| ()),
        }
    }

    pub fn resolve(&self, projections: &[f64]) -> Result<Bandwidth> {
        match self {
            Self::Standard => kernel::default_bandwidth(projections, projections.len()),
            Self::Fixed(h) => Bandwidth::new(*h),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub formulation: Formulation,
    pub efficient: bool,
    /// Used only by the parametrized formulation.
    pub chart: Chart,
    pub bandwidth_rule: BandwidthRule,
}

impl ScoreConfig {
    pub fn parametrized(chart: Chart, efficient: bool) -> Self {
        Self {
            formulation: Formulation::Parametrized,
            efficient,
            chart,
            bandwidth_rule: BandwidthRule::Standard,
        }
    }

    pub fn lagrange(d: usize, efficient: bool) -> Result<Self> {
        Ok(Self {
            formulation: Formulation::Lagrange,
            efficient,
            chart: Chart::spherical(d)?,
            bandwidth_rule: BandwidthRule::Standard,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.bandwidth_rule.validate()
    }

    /// Dimension of the search space.
    pub fn point_dim(&self) -> usize {
        match self.formulation {
            Formulation::Parametrized => self.chart.d - 1,
            Formulation::Lagrange => self.chart.d,
        }
    }

    /// Maps a search point to a unit index vector.
    pub fn alpha_of(&self, point: &[f64]) -> Result<Vec<f64>> {
        match self.formulation {
            Formulation::Parametrized => self.chart.to_sphere(point),
            Formulation::Lagrange => linalg::normalized(point)
                .ok_or_else(|| Error::Degenerate("zero vector has no direction".into())),
        }
    }
}

/// The isotonic link at a direction together with the residual moment
/// `(1/n) sum X_i w_i {Y_i - psi(alpha^T X_i)}`.
#[derive(Debug, Clone)]
pub struct ResidualMoment {
    pub moment: Vec<f64>,
    pub fit: IsotonicFit,
    /// Bandwidth used for the derivative weights (efficient score only).
    pub bandwidth: Option<f64>,
}

pub fn residual_moment(
    data: &Dataset,
    alpha: &[f64],
    efficient: bool,
    rule: BandwidthRule,
) -> Result<ResidualMoment> {
    if alpha.len() != data.d() {
        return Err(Error::Dimension {
            expected: data.d(),
            got: alpha.len(),
        });
    }
    data::check_unit(alpha)?;
    let t = data.projections(alpha);
    let pd = data::project_values(&t, data.y())?;
    let fit = isotonic::fit_isotonic(&pd);
    let res = isotonic::residuals(&fit, &pd, data.y());

    let d = data.d();
    let mut moment = vec![0.0; d];
    let mut bandwidth = None;
    if efficient {
        let h = rule.resolve(&t)?;
        bandwidth = Some(h.value());
        let deriv = DerivativeEstimator::new(&fit, h);
        if !fit.is_constant() {
            // one derivative evaluation per distinct projection
            let weights: Vec<f64> = pd.z.iter().map(|&z| deriv.eval(z)).collect();
            for (i, row) in data.rows().enumerate() {
                let c = weights[pd.group_of[i]] * res[i];
                for (m, x) in moment.iter_mut().zip(row) {
                    *m += x * c;
                }
            }
        }
    } else {
        for (row, r) in data.rows().zip(&res) {
            for (m, x) in moment.iter_mut().zip(row) {
                *m += x * r;
            }
        }
    }
    let n = data.n() as f64;
    moment.iter_mut().for_each(|m| *m /= n);
    Ok(ResidualMoment { moment, fit, bandwidth })
}

fn chart_project(moment: &[f64], chart: &Chart, beta: &[f64]) -> Result<Vec<f64>> {
    let j = chart.jacobian(beta)?;
    Ok((0..j.ncols())
        .map(|c| (0..j.nrows()).map(|r| j[(r, c)] * moment[r]).sum())
        .collect())
}

/// `(I - alpha alpha^T) m`.
pub fn tangent_project(moment: &[f64], alpha: &[f64]) -> Vec<f64> {
    let a = linalg::dot(alpha, moment);
    moment.iter().zip(alpha).map(|(m, x)| m - a * x).collect()
}

pub fn simple_score_param(beta: &[f64], data: &Dataset, chart: &Chart) -> Result<Vec<f64>> {
    let alpha = chart.to_sphere(beta)?;
    let rm = residual_moment(data, &alpha, false, BandwidthRule::Standard)?;
    chart_project(&rm.moment, chart, beta)
}

pub fn efficient_score_param(beta: &[f64], data: &Dataset, chart: &Chart, rule: BandwidthRule) -> Result<Vec<f64>> {
    let alpha = chart.to_sphere(beta)?;
    let rm = residual_moment(data, &alpha, true, rule)?;
    chart_project(&rm.moment, chart, beta)
}

pub fn simple_score_lagrange(alpha: &[f64], data: &Dataset) -> Result<Vec<f64>> {
    let rm = residual_moment(data, alpha, false, BandwidthRule::Standard)?;
    Ok(tangent_project(&rm.moment, alpha))
}

pub fn efficient_score_lagrange(alpha: &[f64], data: &Dataset, rule: BandwidthRule) -> Result<Vec<f64>> {
    let rm = residual_moment(data, alpha, true, rule)?;
    Ok(tangent_project(&rm.moment, alpha))
}

/// Score vector selected by `config` at a search point (chart coordinates or
/// a nonzero vector of `R^d`, which is normalised first).
pub fn score_vector(point: &[f64], data: &Dataset, config: &ScoreConfig) -> Result<Vec<f64>> {
    if point.len() != config.point_dim() {
        return Err(Error::Dimension {
            expected: config.point_dim(),
            got: point.len(),
        });
    }
    let alpha = config.alpha_of(point)?;
    let rm = residual_moment(data, &alpha, config.efficient, config.bandwidth_rule)?;
    match config.formulation {
        Formulation::Parametrized => chart_project(&rm.moment, &config.chart, point),
        Formulation::Lagrange => Ok(tangent_project(&rm.moment, &alpha)),
    }
}

/// Squared Euclidean norm of the score; minimised by the pattern search.
pub fn score_objective(point: &[f64], data: &Dataset, config: &ScoreConfig) -> Result<f64> {
    let s = score_vector(point, data, config)?;
    Ok(linalg::dot(&s, &s))
}
