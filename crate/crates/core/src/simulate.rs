//! Seeded synthetic data for the benchmark models and a Monte Carlo harness
//! producing `n` times the covariance of the estimates across replications.
//!
//! Replication `r` draws its data from `derive_seed(master, r)`; every
//! estimator gets its own stream derived from that seed and its fixed
//! [`EstimatorKind::index`], so summaries do not depend on the order of the
//! estimator list or on how replications are scheduled across threads.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{psd_sqrt, BenchmarkModel};
use crate::data::{self, Dataset};
use crate::error::{Error, Result};
use crate::estimators::{self, Estimate, EstimatorKind, FitConfig, Starts};
use crate::isotonic;
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariates {
    /// iid `U[1, 2]` components.
    Uniform12,
    StandardNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Cubic,
}

impl Link {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Self::Cubic => u * u * u,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub d: usize,
    pub covariates: Covariates,
    pub link: Link,
    pub noise_sd: f64,
    pub alpha0: Vec<f64>,
}

impl ModelSpec {
    pub fn new(d: usize, covariates: Covariates, link: Link, noise_sd: f64, alpha0: Vec<f64>) -> Result<Self> {
        let spec = Self {
            d,
            covariates,
            link,
            noise_sd,
            alpha0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform_cubic(d: usize) -> Result<Self> {
        Self::new(d, Covariates::Uniform12, Link::Cubic, 1.0, diagonal(d))
    }

    pub fn normal_cubic(d: usize) -> Result<Self> {
        Self::new(d, Covariates::StandardNormal, Link::Cubic, 1.0, diagonal(d))
    }

    pub fn from_benchmark(model: BenchmarkModel) -> Result<Self> {
        match model {
            BenchmarkModel::UniformCubicD3 => Self::uniform_cubic(3),
            BenchmarkModel::NormalCubic(d) => Self::normal_cubic(d),
        }
    }

    pub fn with_noise_sd(mut self, sd: f64) -> Result<Self> {
        self.noise_sd = sd;
        self.validate()?;
        Ok(self)
    }

    /// `noise_sd = 0` is accepted for noiseless checks.
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config(format!("dimension must be >= 2, got {}", self.d)));
        }
        if self.alpha0.len() != self.d {
            return Err(Error::Dimension {
                expected: self.d,
                got: self.alpha0.len(),
            });
        }
        data::check_unit(&self.alpha0)?;
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::Config(format!("noise_sd must be finite and >= 0, got {}", self.noise_sd)));
        }
        Ok(())
    }
}

fn diagonal(d: usize) -> Vec<f64> {
    vec![1.0 / (d as f64).sqrt(); d]
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(master + splitmix64(stream))`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master.wrapping_add(splitmix64(stream)))
}

/// `X` from the covariate law, `Y = psi(alpha0^T X) + noise_sd * eps`,
/// drawn from ChaCha8 seeded with `seed`. Rows are drawn one at a time:
/// `d` covariates then the noise term.
pub fn generate(spec: &ModelSpec, n: usize, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::InvalidData(format!("need at least 2 observations, got {n}")));
    }
    let d = spec.d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let start = x.len();
        for _ in 0..d {
            x.push(match spec.covariates {
                Covariates::Uniform12 => rng.random_range(1.0..2.0),
                Covariates::StandardNormal => StandardNormal.sample(&mut rng),
            });
        }
        let t = linalg::dot(&x[start..], &spec.alpha0);
        let eps: f64 = StandardNormal.sample(&mut rng);
        y.push(spec.link.eval(t) + spec.noise_sd * eps);
    }
    Dataset::new(d, x, y)
}

/// `(1/n) sum (psi_hat(alpha0^T X_i) - psi0(alpha0^T X_i))^2` for the
/// isotonic fit at the true direction.
pub fn link_l2_error(spec: &ModelSpec, n: usize, seed: u64) -> Result<f64> {
    let data = generate(spec, n, seed)?;
    let pd = data::project(&data, &spec.alpha0)?;
    let fit = isotonic::fit_isotonic(&pd);
    let total: f64 = pd
        .z
        .iter()
        .zip(&fit.values)
        .zip(&pd.w)
        .map(|((z, v), w)| *w as f64 * (v - spec.link.eval(*z)).powi(2))
        .sum();
    Ok(total / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimStarts {
    /// Start every search at the true `alpha0`.
    TrueAlpha,
    /// Random directions drawn per replication and estimator.
    RandomGrid(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    /// Score, chart and solver settings; its `starts` field is replaced per fit.
    pub fit: FitConfig,
    pub starts: SimStarts,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl MonteCarloConfig {
    pub fn new(d: usize) -> Result<Self> {
        Ok(Self {
            fit: FitConfig::new(d)?,
            starts: SimStarts::TrueAlpha,
            threads: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub estimator: EstimatorKind,
    pub result: std::result::Result<Estimate, String>,
    #[serde(skip)]
    pub seconds: f64,
}

impl FitOutcome {
    pub fn converged(&self) -> Option<&Estimate> {
        self.result.as_ref().ok().filter(|e| e.report.converged)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: usize,
    pub seed: u64,
    /// One outcome per requested estimator, in request order.
    pub outcomes: Vec<FitOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub estimator: EstimatorKind,
    /// Replications used (converged ones).
    pub reps: usize,
    pub n: usize,
    pub mean_alpha: Vec<f64>,
    /// `n` times the sample covariance (denominator `reps - 1`).
    pub n_cov: Vec<Vec<f64>>,
    pub failures: usize,
    pub wall_time: f64,
}

impl MonteCarloSummary {
    pub fn mean_diag(&self) -> f64 {
        (0..self.n_cov.len()).map(|i| self.n_cov[i][i]).sum::<f64>() / self.n_cov.len() as f64
    }
}

fn fit_config_for(
    spec: &ModelSpec,
    config: &MonteCarloConfig,
    kind: EstimatorKind,
    rep_seed: u64,
) -> FitConfig {
    let stream = derive_seed(rep_seed, 1 + kind.index());
    let mut fit = config.fit.clone();
    fit.starts = match config.starts {
        SimStarts::TrueAlpha => Starts::Given(vec![spec.alpha0.clone()]),
        SimStarts::RandomGrid(count) => Starts::RandomGrid { count, seed: stream },
    };
    fit.link_free.seed = stream;
    fit
}

fn run_one(
    spec: &ModelSpec,
    estimators: &[EstimatorKind],
    n: usize,
    master_seed: u64,
    config: &MonteCarloConfig,
    index: usize,
) -> Replication {
    let seed = derive_seed(master_seed, index as u64);
    let outcomes = match generate(spec, n, seed) {
        Ok(data) => estimators
            .iter()
            .map(|&kind| {
                let started = Instant::now();
                let cfg = fit_config_for(spec, config, kind, seed);
                let result = estimators::fit(kind, &data, &cfg).map_err(|e| e.to_string());
                FitOutcome {
                    estimator: kind,
                    result,
                    seconds: started.elapsed().as_secs_f64(),
                }
            })
            .collect(),
        Err(e) => estimators
            .iter()
            .map(|&kind| FitOutcome {
                estimator: kind,
                result: Err(e.to_string()),
                seconds: 0.0,
            })
            .collect(),
    };
    Replication { index, seed, outcomes }
}

fn validate_request(spec: &ModelSpec, estimators: &[EstimatorKind], reps: usize, config: &MonteCarloConfig) -> Result<()> {
    spec.validate()?;
    if reps < 2 {
        return Err(Error::Config(format!("need at least 2 replications, got {reps}")));
    }
    if estimators.is_empty() {
        return Err(Error::Config("no estimators requested".into()));
    }
    if config.threads == Some(0) {
        return Err(Error::Config("thread count must be positive".into()));
    }
    config.fit.validate(spec.d)
}

/// Fits every estimator on every replication. The returned list is ordered
/// by replication index whatever the thread count.
pub fn run_replications(
    spec: &ModelSpec,
    estimators: &[EstimatorKind],
    n: usize,
    reps: usize,
    master_seed: u64,
    config: &MonteCarloConfig,
) -> Result<Vec<Replication>> {
    validate_request(spec, estimators, reps, config)?;
    let job = |r: usize| run_one(spec, estimators, n, master_seed, config, r);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || (0..reps).into_par_iter().map(job).collect::<Vec<_>>();
        match config.threads {
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
                Ok(pool.install(run))
            }
            None => Ok(run()),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok((0..reps).map(job).collect())
    }
}

/// Mean and `n` times the sample covariance of a set of vectors.
pub fn scaled_covariance(samples: &[Vec<f64>], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = samples.first().map_or(0, Vec::len);
    let k = samples.len();
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= k as f64;
    }
    let mut cov = vec![vec![0.0; d]; d];
    if k >= 2 {
        for s in samples {
            for i in 0..d {
                for j in 0..d {
                    cov[i][j] += (s[i] - mean[i]) * (s[j] - mean[j]);
                }
            }
        }
        let scale = n as f64 / (k as f64 - 1.0);
        for row in &mut cov {
            for v in row.iter_mut() {
                *v *= scale;
            }
        }
    } else {
        cov = vec![vec![f64::NAN; d]; d];
    }
    (mean, cov)
}

pub fn summarize(replications: &[Replication], estimators: &[EstimatorKind], n: usize) -> Vec<MonteCarloSummary> {
    estimators
        .iter()
        .enumerate()
        .map(|(slot, &kind)| {
            let mut alphas = Vec::new();
            let mut failures = 0;
            let mut wall_time = 0.0;
            for rep in replications {
                let outcome = &rep.outcomes[slot];
                wall_time += outcome.seconds;
                match outcome.converged() {
                    Some(e) => alphas.push(e.alpha_hat.clone()),
                    None => failures += 1,
                }
            }
            let (mean_alpha, n_cov) = scaled_covariance(&alphas, n);
            MonteCarloSummary {
                estimator: kind,
                reps: alphas.len(),
                n,
                mean_alpha,
                n_cov,
                failures,
                wall_time,
            }
        })
        .collect()
}

/// Runs the replications and summarises over the converged fits.
pub fn monte_carlo(
    spec: &ModelSpec,
    estimators: &[EstimatorKind],
    n: usize,
    reps: usize,
    master_seed: u64,
    config: &MonteCarloConfig,
) -> Result<Vec<MonteCarloSummary>> {
    let replications = run_replications(spec, estimators, n, reps, master_seed, config)?;
    Ok(summarize(&replications, estimators, n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Samples {
    pub estimator: EstimatorKind,
    /// `sqrt(n/d) * |alpha_unit - alpha0|` per converged replication.
    pub samples: Vec<f64>,
    pub failures: usize,
}

pub fn l2_errors(replications: &[Replication], estimators: &[EstimatorKind], spec: &ModelSpec, n: usize) -> Vec<L2Samples> {
    let scale = (n as f64 / spec.d as f64).sqrt();
    estimators
        .iter()
        .enumerate()
        .map(|(slot, &kind)| {
            let mut samples = Vec::new();
            let mut failures = 0;
            for rep in replications {
                match rep.outcomes[slot].converged() {
                    Some(e) => samples.push(scale * linalg::distance(&e.alpha_unit, &spec.alpha0)),
                    None => failures += 1,
                }
            }
            L2Samples {
                estimator: kind,
                samples,
                failures,
            }
        })
        .collect()
}

pub fn l2_error_experiment(
    spec: &ModelSpec,
    estimators: &[EstimatorKind],
    n: usize,
    reps: usize,
    master_seed: u64,
    config: &MonteCarloConfig,
) -> Result<Vec<L2Samples>> {
    let replications = run_replications(spec, estimators, n, reps, master_seed, config)?;
    Ok(l2_errors(&replications, estimators, spec, n))
}

/// `count` draws from `N(0, cov)` for a positive semidefinite `cov`.
pub fn reference_samples(cov: &DMatrix<f64>, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let root = psd_sqrt(cov);
    let d = cov.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            (&root * z).as_slice().to_vec()
        })
        .collect()
}

/// `estimator,n,mu1..mud,sigma11..sigmadd,sigma12,...,reps,failures`, upper
/// off-diagonals in row-major order. Floats use the shortest round-trip form.
pub fn table_csv(summaries: &[MonteCarloSummary]) -> String {
    let d = summaries.first().map_or(0, |s| s.mean_alpha.len());
    let mut out = String::from("estimator,n");
    for i in 1..=d {
        write!(out, ",mu{i}").unwrap();
    }
    for i in 1..=d {
        write!(out, ",sigma{i}{i}").unwrap();
    }
    for i in 1..=d {
        for j in i + 1..=d {
            write!(out, ",sigma{i}{j}").unwrap();
        }
    }
    out.push_str(",reps,failures\n");
    for s in summaries {
        write!(out, "{},{}", s.estimator.name(), s.n).unwrap();
        for m in &s.mean_alpha {
            write!(out, ",{m}").unwrap();
        }
        for i in 0..d {
            write!(out, ",{}", s.n_cov[i][i]).unwrap();
        }
        for i in 0..d {
            for j in i + 1..d {
                write!(out, ",{}", s.n_cov[i][j]).unwrap();
            }
        }
        writeln!(out, ",{},{}", s.reps, s.failures).unwrap();
    }
    out
}

pub fn write_table(summaries: &[MonteCarloSummary], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, table_csv(summaries)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let spec = ModelSpec::uniform_cubic(3).unwrap();
        let a = generate(&spec, 50, 3).unwrap();
        let b = generate(&spec, 50, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate(&spec, 50, 4).unwrap());
    }

    #[test]
    fn uniform_index_mean() {
        let spec = ModelSpec::uniform_cubic(3).unwrap();
        let data = generate(&spec, 100_000, 1).unwrap();
        let t = data.projections(&spec.alpha0);
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        assert!((mean - 1.5 * 3f64.sqrt()).abs() < 0.01, "{mean}");
        assert!(data.x().iter().all(|v| (1.0..2.0).contains(v)));
    }

    #[test]
    fn noiseless_generation() {
        let spec = ModelSpec::uniform_cubic(3).unwrap().with_noise_sd(0.0).unwrap();
        let data = generate(&spec, 20, 9).unwrap();
        for (r, y) in data.rows().zip(data.y()) {
            assert_eq!(*y, linalg::dot(r, &spec.alpha0).powi(3));
        }
        assert!(ModelSpec::uniform_cubic(3).unwrap().with_noise_sd(-1.0).is_err());
    }

    #[test]
    fn bad_specs() {
        assert!(ModelSpec::new(3, Covariates::Uniform12, Link::Cubic, 1.0, vec![1.0, 1.0, 0.0]).is_err());
        assert!(ModelSpec::new(1, Covariates::Uniform12, Link::Cubic, 1.0, vec![1.0]).is_err());
        assert!(generate(&ModelSpec::normal_cubic(4).unwrap(), 1, 0).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> =
            (0..1000).flat_map(|r| [derive_seed(42, r), derive_seed(43, r)]).collect();
        assert_eq!(seeds.len(), 2000);
    }

    #[test]
    fn covariance_of_two_samples() {
        let (mean, cov) = scaled_covariance(&[vec![1.0, 2.0], vec![3.0, 0.0]], 10);
        assert_eq!(mean, vec![2.0, 1.0]);
        // sample covariance [[2, -2], [-2, 2]], times n = 10
        assert_eq!(cov, vec![vec![20.0, -20.0], vec![-20.0, 20.0]]);
    }

    #[test]
    fn two_replication_mean() {
        let spec = ModelSpec::normal_cubic(3).unwrap();
        let cfg = MonteCarloConfig::new(3).unwrap();
        let kinds = [EstimatorKind::Hlflse];
        let reps = run_replications(&spec, &kinds, 200, 2, 5, &cfg).unwrap();
        let s = &summarize(&reps, &kinds, 200)[0];
        let a0 = &reps[0].outcomes[0].result.as_ref().unwrap().alpha_hat;
        let a1 = &reps[1].outcomes[0].result.as_ref().unwrap().alpha_hat;
        for i in 0..3 {
            assert_eq!(s.mean_alpha[i], (a0[i] + a1[i]) / 2.0);
        }
        assert_eq!(s.reps, 2);
        assert_eq!(s.failures, 0);
    }

    #[test]
    fn estimator_order_does_not_matter() {
        let spec = ModelSpec::normal_cubic(3).unwrap();
        let cfg = MonteCarloConfig {
            starts: SimStarts::RandomGrid(2),
            ..MonteCarloConfig::new(3).unwrap()
        };
        let fwd = [EstimatorKind::Lflse, EstimatorKind::Hlflse, EstimatorKind::Sse];
        let rev = [EstimatorKind::Sse, EstimatorKind::Hlflse, EstimatorKind::Lflse];
        let a = monte_carlo(&spec, &fwd, 100, 3, 11, &cfg).unwrap();
        let b = monte_carlo(&spec, &rev, 100, 3, 11, &cfg).unwrap();
        for s in &a {
            let t = b.iter().find(|t| t.estimator == s.estimator).unwrap();
            assert_eq!(s.mean_alpha, t.mean_alpha);
            assert_eq!(s.n_cov, t.n_cov);
        }
    }

    #[test]
    fn table_layout() {
        let s = MonteCarloSummary {
            estimator: EstimatorKind::Sse,
            reps: 4,
            n: 10,
            mean_alpha: vec![0.5, 0.75],
            n_cov: vec![vec![1.0, -0.5], vec![-0.5, 2.0]],
            failures: 1,
            wall_time: 3.0,
        };
        assert_eq!(
            table_csv(&[s]),
            "estimator,n,mu1,mu2,sigma11,sigma22,sigma12,reps,failures\nsse,10,0.5,0.75,1,2,-0.5,4,1\n"
        );
    }

    #[test]
    fn reference_draws_have_target_covariance() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]);
        let draws = reference_samples(&cov, 40_000, 2);
        let (_, c) = scaled_covariance(&draws, 1);
        assert!((c[0][0] - 1.0).abs() < 0.03 && (c[0][1] + 0.5).abs() < 0.03);
    }

    #[test]
    fn link_error_is_small_and_shrinks() {
        let spec = ModelSpec::uniform_cubic(3).unwrap();
        let small = link_l2_error(&spec, 200, 1).unwrap();
        let large = link_l2_error(&spec, 5000, 1).unwrap();
        assert!(large < small);
    }
}
