//! Fitting routines for the index vector.
//!
//! * score estimators (SSE, ESE): pattern-search minimisers of the squared
//!   score norm, either in chart coordinates or in `R^d` with normalisation;
//! * profile least squares (LSE) and maximum rank correlation (MRCE), also by
//!   pattern search;
//! * link-free estimators (H-LFLSE, LFLSE, unit-norm linear), which only use
//!   the first two sample moments and are solved in closed form or by Broyden.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{self, Dataset};
use crate::error::{Error, Result};
use crate::isotonic::{self, IsotonicFit};
use crate::linalg;
use crate::optim::{self, BroydenOpts, PatternSearchOpts, SolveReport};
use crate::score::{self, Formulation, ScoreConfig};
use crate::sphere::{Chart, ChartKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Sse,
    Ese,
    Lse,
    Mrce,
    Hlflse,
    Lflse,
    LinearNorm1,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 7] = [
        Self::Sse,
        Self::Ese,
        Self::Lse,
        Self::Mrce,
        Self::Hlflse,
        Self::Lflse,
        Self::LinearNorm1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sse => "sse",
            Self::Ese => "ese",
            Self::Lse => "lse",
            Self::Mrce => "mrce",
            Self::Hlflse => "hlflse",
            Self::Lflse => "lflse",
            Self::LinearNorm1 => "linear-norm1",
        }
    }

    /// Stable position used to derive per-estimator random streams.
    pub fn index(&self) -> u64 {
        Self::ALL.iter().position(|k| k == self).unwrap() as u64
    }

    pub fn uses_pattern_search(&self) -> bool {
        matches!(self, Self::Sse | Self::Ese | Self::Lse | Self::Mrce)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown estimator {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Starts {
    /// Unit vectors in `R^d`.
    Given(Vec<Vec<f64>>),
    /// `count` directions uniform on the sphere, folded to a positive first
    /// component.
    RandomGrid { count: usize, seed: u64 },
}

impl Starts {
    pub fn points(&self, d: usize) -> Result<Vec<Vec<f64>>> {
        match self {
            Self::Given(points) => {
                if points.is_empty() {
                    return Err(Error::Config("at least one start is required".into()));
                }
                for p in points {
                    if p.len() != d {
                        return Err(Error::Dimension {
                            expected: d,
                            got: p.len(),
                        });
                    }
                    data::check_unit(p)?;
                }
                Ok(points.clone())
            }
            Self::RandomGrid { count, seed } => {
                if *count == 0 {
                    return Err(Error::Config("at least one start is required".into()));
                }
                Ok(random_directions(*count, d, *seed))
            }
        }
    }
}

pub fn random_directions(count: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(mut u) = linalg::normalized(&g) {
            linalg::apply_sign_convention(&mut u);
            out.push(u);
        }
    }
    out
}

/// Options for the link-free estimators solved by Broyden's method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkFreeOpts {
    pub broyden: BroydenOpts,
    /// Random starts in addition to the least-squares direction.
    pub random_starts: usize,
    pub seed: u64,
    /// Roots violating their norm constraint by more than this are discarded.
    pub constraint_tol: f64,
}

impl Default for LinkFreeOpts {
    fn default() -> Self {
        Self {
            broyden: BroydenOpts::default(),
            random_starts: 4,
            seed: 0,
            constraint_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub score: ScoreConfig,
    pub pattern: PatternSearchOpts,
    pub starts: Starts,
    pub link_free: LinkFreeOpts,
}

impl FitConfig {
    /// Spherical chart, default solver options, ten random starts.
    pub fn new(d: usize) -> Result<Self> {
        Ok(Self {
            score: ScoreConfig::parametrized(Chart::spherical(d)?, false),
            pattern: PatternSearchOpts::default(),
            starts: Starts::RandomGrid { count: 10, seed: 0 },
            link_free: LinkFreeOpts::default(),
        })
    }

    pub fn with_starts(mut self, starts: Starts) -> Self {
        self.starts = starts;
        self
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        self.pattern.validate()?;
        self.score.validate()?;
        if self.score.chart.d != d {
            return Err(Error::Dimension {
                expected: d,
                got: self.score.chart.d,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimator: EstimatorKind,
    /// The estimator's own solution: unit norm, except for the LFLSE whose
    /// solution satisfies `alpha^T S_n alpha = 1`.
    pub alpha_hat: Vec<f64>,
    /// `alpha_hat` scaled to unit Euclidean norm.
    pub alpha_unit: Vec<f64>,
    pub beta_hat: Option<Vec<f64>>,
    pub link_fit: IsotonicFit,
    pub criterion: f64,
    /// `sum (Y_i - psi(alpha_unit^T X_i))^2` with the isotonic link.
    pub prediction_error: f64,
    pub bandwidth: Option<f64>,
    pub report: SolveReport,
    /// Set when all responses are equal and the index is not identified.
    pub degenerate: bool,
    /// Position of the selected start in the start list.
    pub start_index: usize,
}

impl Estimate {
    pub fn converged(&self) -> bool {
        self.report.converged
    }

    /// The JSON object written by the command line front end.
    pub fn to_json(&self, link_fit_csv: Option<&str>) -> serde_json::Value {
        let mut v = serde_json::json!({
            "estimator": self.estimator.name(),
            "alpha_hat": self.alpha_hat,
            "alpha_unit": self.alpha_unit,
            "criterion": self.criterion,
            "prediction_error": self.prediction_error,
            "converged": self.report.converged,
            "evaluations": self.report.evaluations,
            "degenerate": self.degenerate,
        });
        if let Some(b) = &self.beta_hat {
            v["beta_hat"] = serde_json::json!(b);
        }
        if let Some(h) = self.bandwidth {
            v["bandwidth"] = serde_json::json!(h);
        }
        if let Some(p) = link_fit_csv {
            v["link_fit_csv"] = serde_json::json!(p);
        }
        v
    }
}

fn responses_constant(data: &Dataset) -> bool {
    let y = data.y();
    y.iter().all(|v| *v == y[0])
}

/// Isotonic link and prediction error at a unit direction.
fn link_at(data: &Dataset, alpha_unit: &[f64]) -> Result<(IsotonicFit, f64)> {
    let pd = data::project(data, alpha_unit)?;
    let fit = isotonic::fit_isotonic(&pd);
    let pe = isotonic::residuals(&fit, &pd, data.y()).iter().map(|r| r * r).sum();
    Ok((fit, pe))
}

struct RawFit {
    alpha: Vec<f64>,
    beta: Option<Vec<f64>>,
    criterion: f64,
    report: SolveReport,
    bandwidth: Option<f64>,
}

fn finish(kind: EstimatorKind, data: &Dataset, raw: RawFit, chart: Option<&Chart>, start_index: usize) -> Result<Estimate> {
    let mut alpha_hat = raw.alpha;
    let flipped = linalg::apply_sign_convention(&mut alpha_hat);
    let alpha_unit = linalg::normalized(&alpha_hat)
        .ok_or_else(|| Error::Degenerate("estimate is the zero vector".into()))?;
    let beta_hat = match (flipped, chart) {
        (false, _) => raw.beta,
        (true, Some(c)) => c.from_sphere(&alpha_unit).ok(),
        (true, None) => None,
    };
    let (link_fit, prediction_error) = link_at(data, &alpha_unit)?;
    Ok(Estimate {
        estimator: kind,
        alpha_hat,
        alpha_unit,
        beta_hat,
        link_fit,
        criterion: raw.criterion,
        prediction_error,
        bandwidth: raw.bandwidth,
        report: raw.report,
        degenerate: responses_constant(data),
        start_index,
    })
}

/// Runs `fitter` on every start and keeps the smallest prediction error
/// among the converged runs (among all runs if none converged); ties go to
/// the earliest start.
pub fn multi_start<F>(starts: &[Vec<f64>], mut fitter: F) -> Result<Estimate>
where
    F: FnMut(&[f64]) -> Result<Estimate>,
{
    let mut best: Option<Estimate> = None;
    let mut failures = Vec::new();
    for (i, s) in starts.iter().enumerate() {
        match fitter(s) {
            Ok(mut est) => {
                est.start_index = i;
                let better = match &best {
                    None => true,
                    Some(b) => match (est.report.converged, b.report.converged) {
                        (true, false) => true,
                        (false, true) => false,
                        _ => est.prediction_error < b.prediction_error,
                    },
                };
                if better {
                    best = Some(est);
                }
            }
            Err(e) => failures.push(format!("start {i}: {e}")),
        }
    }
    best.ok_or_else(|| Error::NoSolution(failures.join("; ")))
}

/// Converts a unit start direction into a search point for `config`.
fn start_point(config: &ScoreConfig, alpha: &[f64]) -> Result<Vec<f64>> {
    match config.formulation {
        Formulation::Lagrange => Ok(alpha.to_vec()),
        Formulation::Parametrized => {
            let chart = &config.chart;
            if chart.kind == ChartKind::HalfSphere && alpha[chart.d - 1] < 0.0 {
                let flipped: Vec<f64> = alpha.iter().map(|v| -v).collect();
                return chart.from_sphere(&flipped);
            }
            chart.from_sphere(alpha)
        }
    }
}

/// Profile least-squares criterion `(1/n) sum (Y_i - psi_alpha(alpha^T X_i))^2`.
pub fn profile_sum_of_squares(data: &Dataset, alpha: &[f64]) -> Result<f64> {
    let (_, pe) = link_at(data, alpha)?;
    Ok(pe / data.n() as f64)
}

/// `H_n(alpha) = 1/(n(n-1)) sum_{i != j} 1{Y_i > Y_j} 1{t_i > t_j}` in
/// `O(n log n)` via a Fenwick tree over response ranks.
pub fn rank_correlation(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len();
    if n < 2 {
        return 0.0;
    }
    let mut ys: Vec<f64> = y.to_vec();
    ys.sort_unstable_by(f64::total_cmp);
    ys.dedup();
    let rank = |v: f64| ys.partition_point(|&u| u < v);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| t[a].total_cmp(&t[b]));
    let mut tree = vec![0u64; ys.len() + 1];
    let mut concordant: u64 = 0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && t[order[end]] == t[order[start]] {
            end += 1;
        }
        for &i in &order[start..end] {
            // number of earlier entries with rank < rank(y_i)
            let mut k = rank(y[i]);
            while k > 0 {
                concordant += tree[k];
                k &= k - 1;
            }
        }
        for &i in &order[start..end] {
            let mut k = rank(y[i]) + 1;
            while k < tree.len() {
                tree[k] += 1;
                k += k & k.wrapping_neg();
            }
        }
        start = end;
    }
    concordant as f64 / (n as f64 * (n as f64 - 1.0))
}

#[derive(Clone, Copy)]
enum Criterion {
    Score,
    LeastSquares,
    RankCorrelation,
}

fn pattern_fit_once(
    kind: EstimatorKind,
    data: &Dataset,
    config: &FitConfig,
    criterion: Criterion,
    start: &[f64],
) -> Result<Estimate> {
    let sc = &config.score;
    let x0 = start_point(sc, start)?;
    let objective = |p: &[f64]| -> Result<f64> {
        match criterion {
            Criterion::Score => score::score_objective(p, data, sc),
            Criterion::LeastSquares => profile_sum_of_squares(data, &sc.alpha_of(p)?),
            Criterion::RankCorrelation => {
                let alpha = sc.alpha_of(p)?;
                Ok(-rank_correlation(&data.projections(&alpha), data.y()))
            }
        }
    };
    objective(&x0)?;
    let report = optim::hooke_jeeves(|p| objective(p).unwrap_or(f64::INFINITY), &x0, &config.pattern);
    let alpha = sc.alpha_of(&report.solution)?;
    let bandwidth = match (criterion, sc.efficient) {
        (Criterion::Score, true) => Some(sc.bandwidth_rule.resolve(&data.projections(&alpha))?.value()),
        _ => None,
    };
    let (beta, chart) = match sc.formulation {
        Formulation::Parametrized => (Some(report.solution.clone()), Some(&sc.chart)),
        Formulation::Lagrange => (None, None),
    };
    let raw = RawFit {
        alpha,
        beta,
        criterion: report.objective_or_residual,
        report,
        bandwidth,
    };
    finish(kind, data, raw, chart, 0)
}

fn pattern_fit(kind: EstimatorKind, data: &Dataset, config: &FitConfig, criterion: Criterion) -> Result<Estimate> {
    config.validate(data.d())?;
    let starts = config.starts.points(data.d())?;
    multi_start(&starts, |s| pattern_fit_once(kind, data, config, criterion, s))
}

fn with_efficiency(config: &FitConfig, efficient: bool) -> FitConfig {
    let mut c = config.clone();
    c.score.efficient = efficient;
    c
}

pub fn fit_sse(data: &Dataset, config: &FitConfig) -> Result<Estimate> {
    pattern_fit(EstimatorKind::Sse, data, &with_efficiency(config, false), Criterion::Score)
}

pub fn fit_ese(data: &Dataset, config: &FitConfig) -> Result<Estimate> {
    pattern_fit(EstimatorKind::Ese, data, &with_efficiency(config, true), Criterion::Score)
}

pub fn fit_lse(data: &Dataset, config: &FitConfig) -> Result<Estimate> {
    pattern_fit(EstimatorKind::Lse, data, config, Criterion::LeastSquares)
}

/// Pattern search on `-H_n`; the criterion reported is `-H_n(alpha_hat)`.
pub fn fit_mrce(data: &Dataset, config: &FitConfig) -> Result<Estimate> {
    pattern_fit(EstimatorKind::Mrce, data, config, Criterion::RankCorrelation)
}

/// `sum (Y_i - alpha^T (X_i - Xbar))^2`.
pub fn linear_criterion(data: &Dataset, alpha: &[f64]) -> f64 {
    let mean = data.covariate_mean();
    data.rows()
        .zip(data.y())
        .map(|(r, y)| {
            let fitted: f64 = r.iter().zip(&mean).zip(alpha).map(|((x, m), a)| (x - m) * a).sum();
            (y - fitted).powi(2)
        })
        .sum()
}

fn ols_direction(s: &DMatrix<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
    s.clone()
        .cholesky()
        .map(|ch| ch.solve(c))
        .ok_or_else(|| Error::Singular("covariate covariance is not positive definite".into()))
}

/// Ordinary least squares of `Y` on the centred covariates, scaled to unit norm.
pub fn fit_hlflse(data: &Dataset) -> Result<Estimate> {
    let s = data.covariate_covariance();
    let c = data.covariate_response_moment();
    let ols = ols_direction(&s, &c)?;
    let ols = ols.as_slice().to_vec();
    let alpha = linalg::normalized(&ols).ok_or_else(|| Error::Degenerate("least-squares slope is zero".into()))?;
    let raw = RawFit {
        alpha,
        beta: None,
        criterion: linear_criterion(data, &ols),
        report: SolveReport {
            solution: ols,
            objective_or_residual: 0.0,
            evaluations: 0,
            converged: true,
            message: None,
        },
        bandwidth: None,
    };
    finish(EstimatorKind::Hlflse, data, raw, None, 0)
}

/// Norm used by a link-free constraint.
#[derive(Clone, Copy)]
enum Metric {
    /// `alpha^T S_n alpha = 1`
    Sample,
    /// `alpha^T alpha = 1`
    Identity,
}

fn quad(metric: Metric, s: &DMatrix<f64>, a: &DVector<f64>) -> f64 {
    match metric {
        Metric::Sample => a.dot(&(s * a)),
        Metric::Identity => a.dot(a),
    }
}

/// `(I - M a a^T)(c - S a)` with `M = S` or `I`; the residual moment form of
/// `(1/n)(I - M a a^T) sum (X_i - Xbar)(Y_i - a^T (X_i - Xbar))`.
fn link_free_field(metric: Metric, s: &DMatrix<f64>, c: &DVector<f64>, a: &DVector<f64>) -> DVector<f64> {
    let r = c - s * a;
    let proj = a.dot(&r);
    match metric {
        Metric::Sample => &r - (s * a) * proj,
        Metric::Identity => &r - a * proj,
    }
}

pub fn lflse_field(data: &Dataset, alpha: &[f64]) -> Vec<f64> {
    let s = data.covariate_covariance();
    let c = data.covariate_response_moment();
    link_free_field(Metric::Sample, &s, &c, &DVector::from_column_slice(alpha))
        .as_slice()
        .to_vec()
}

fn link_free_fit(kind: EstimatorKind, metric: Metric, data: &Dataset, opts: &LinkFreeOpts) -> Result<Estimate> {
    let s = data.covariate_covariance();
    let c = data.covariate_response_moment();
    let ols = ols_direction(&s, &c)?;
    let d = data.d();
    let scale = |v: DVector<f64>| -> Option<DVector<f64>> {
        let q = quad(metric, &s, &v);
        (q > 0.0 && q.is_finite()).then(|| v / q.sqrt())
    };
    let mut starts: Vec<DVector<f64>> = scale(ols).into_iter().collect();
    for u in random_directions(opts.random_starts, d, opts.seed) {
        starts.extend(scale(DVector::from_vec(u)));
    }

    let mut best: Option<(f64, SolveReport, usize)> = None;
    let mut notes = Vec::new();
    for (i, x0) in starts.iter().enumerate() {
        let report = optim::broyden(
            |a| {
                link_free_field(metric, &s, &c, &DVector::from_column_slice(a))
                    .as_slice()
                    .to_vec()
            },
            x0.as_slice(),
            &opts.broyden,
        );
        let a = DVector::from_column_slice(&report.solution);
        let violation = (quad(metric, &s, &a) - 1.0).abs();
        if !report.converged || !(violation <= opts.constraint_tol) {
            notes.push(format!(
                "start {i}: converged={} constraint violation {violation:e}",
                report.converged
            ));
            continue;
        }
        let crit = linear_criterion(data, &report.solution);
        if best.as_ref().is_none_or(|(b, _, _)| crit < *b) {
            best = Some((crit, report, i));
        }
    }
    let (criterion, report, idx) = best.ok_or_else(|| Error::NoSolution(notes.join("; ")))?;
    let raw = RawFit {
        alpha: report.solution.clone(),
        beta: None,
        criterion,
        report,
        bandwidth: None,
    };
    finish(kind, data, raw, None, idx)
}

/// Root of `(I - S_n a a^T) sum (X_i - Xbar)(Y_i - a^T (X_i - Xbar)) = 0` with
/// `a^T S_n a = 1`; the smallest least-squares criterion wins among roots.
pub fn fit_lflse(data: &Dataset, opts: &LinkFreeOpts) -> Result<Estimate> {
    link_free_fit(EstimatorKind::Lflse, Metric::Sample, data, opts)
}

/// Least squares restricted to the Euclidean unit sphere.
pub fn fit_linear_norm1(data: &Dataset, opts: &LinkFreeOpts) -> Result<Estimate> {
    link_free_fit(EstimatorKind::LinearNorm1, Metric::Identity, data, opts)
}

pub fn fit(kind: EstimatorKind, data: &Dataset, config: &FitConfig) -> Result<Estimate> {
    match kind {
        EstimatorKind::Sse => fit_sse(data, config),
        EstimatorKind::Ese => fit_ese(data, config),
        EstimatorKind::Lse => fit_lse(data, config),
        EstimatorKind::Mrce => fit_mrce(data, config),
        EstimatorKind::Hlflse => fit_hlflse(data),
        EstimatorKind::Lflse => fit_lflse(data, &config.link_free),
        EstimatorKind::LinearNorm1 => fit_linear_norm1(data, &config.link_free),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn brute_rank_correlation(t: &[f64], y: &[f64]) -> f64 {
        let n = t.len();
        let mut c = 0;
        for i in 0..n {
            for j in 0..n {
                if i != j && y[i] > y[j] && t[i] > t[j] {
                    c += 1;
                }
            }
        }
        c as f64 / (n * (n - 1)) as f64
    }

    #[test]
    fn rank_correlation_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.random_range(2..40);
            // coarse values force ties in both coordinates
            let t: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64).collect();
            let fast = rank_correlation(&t, &y);
            assert!((fast - brute_rank_correlation(&t, &y)).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&fast));
        }
    }

    #[test]
    fn two_point_rank_correlation() {
        assert_eq!(rank_correlation(&[2.0, 1.0], &[5.0, 3.0]), 0.5);
        assert_eq!(rank_correlation(&[1.0, 2.0], &[5.0, 3.0]), 0.0);
    }

    #[test]
    fn rank_correlation_ignores_monotone_response_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let t: Vec<f64> = (0..50).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..50).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ty: Vec<f64> = y.iter().map(|v: &f64| v.exp() * 3.0 + v.powi(3)).collect();
        assert_eq!(rank_correlation(&t, &y), rank_correlation(&t, &ty));
    }

    #[test]
    fn estimator_names_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.name().parse::<EstimatorKind>().unwrap(), k);
        }
        assert!("edr".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn random_grid_is_reproducible_and_folded() {
        let a = Starts::RandomGrid { count: 8, seed: 4 }.points(3).unwrap();
        let b = Starts::RandomGrid { count: 8, seed: 4 }.points(3).unwrap();
        assert_eq!(a, b);
        for p in &a {
            assert!((linalg::norm(p) - 1.0).abs() < 1e-12);
            assert!(p[0] > 0.0);
        }
        assert!(Starts::Given(vec![]).points(3).is_err());
        assert!(Starts::Given(vec![vec![1.0, 1.0, 0.0]]).points(3).is_err());
    }

    #[test]
    fn hlflse_recovers_exact_linear_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rows: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0]).collect();
        let data = Dataset::from_rows(&rows, y.clone()).unwrap();
        let est = fit_hlflse(&data).unwrap();
        assert!((est.alpha_hat[0] - 1.0).abs() < 1e-12);
        assert!(est.alpha_hat[1].abs() < 1e-12 && est.alpha_hat[2].abs() < 1e-12);
        let shifted = Dataset::from_rows(&rows, y.iter().map(|v| v + 7.0).collect()).unwrap();
        let est2 = fit_hlflse(&shifted).unwrap();
        for (a, b) in est.alpha_hat.iter().zip(&est2.alpha_hat) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hlflse_singular_gram() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let data = Dataset::from_rows(&rows, y).unwrap();
        assert!(matches!(fit_hlflse(&data), Err(Error::Singular(_))));
    }

    #[test]
    fn multi_start_with_one_start_is_a_single_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| rng.random_range(1.0..2.0)).collect()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>().powi(3) + rng.random_range(-1.0..1.0)).collect();
        let data = Dataset::from_rows(&rows, y).unwrap();
        let a0 = vec![1.0 / 3f64.sqrt(); 3];
        let cfg = FitConfig::new(3).unwrap().with_starts(Starts::Given(vec![a0.clone()]));
        let multi = fit_sse(&data, &cfg).unwrap();
        let single = pattern_fit_once(EstimatorKind::Sse, &data, &cfg, Criterion::Score, &a0).unwrap();
        assert_eq!(multi, single);
    }

    #[test]
    fn constant_responses_are_flagged() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * i % 7) as f64, 1.0 + i as f64 * 0.5]).collect();
        let data = Dataset::from_rows(&rows, vec![2.0; 20]).unwrap();
        let a0 = linalg::normalized(&[1.0, 1.0, 1.0]).unwrap();
        let cfg = FitConfig::new(3).unwrap().with_starts(Starts::Given(vec![a0.clone()]));
        let est = fit_ese(&data, &cfg).unwrap();
        assert!(est.degenerate);
        assert_eq!(est.criterion, 0.0);
        for (a, b) in est.alpha_hat.iter().zip(&a0) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
