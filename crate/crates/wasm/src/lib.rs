//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers or strings and returns a JSON string, so
//! the page needs no generated glue beyond `wasm-bindgen`'s own.

use monosi::asymptotics::BenchmarkModel;
use monosi::data;
use monosi::estimators::{self, EstimatorKind, FitConfig, Starts};
use monosi::isotonic::{self, IsotonicFit};
use monosi::score::{self, ScoreConfig};
use monosi::simulate::{self, ModelSpec};
use monosi::sphere::Chart;
use monosi::{Error, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 1500;
const MAX_N: usize = 20_000;
const MAX_GRID: usize = 81;

fn model_spec(model: &str, d: usize, noise_sd: f64) -> Result<ModelSpec> {
    let spec = ModelSpec::from_benchmark(BenchmarkModel::from_name(model, d)?)?;
    spec.with_noise_sd(noise_sd)
}

fn check_n(n: usize) -> Result<()> {
    if !(2..=MAX_N).contains(&n) {
        return Err(Error::Config(format!("n must lie in 2..={MAX_N}, got {n}")));
    }
    Ok(())
}

fn step_json(fit: &IsotonicFit) -> Value {
    json!({ "knots": fit.knots, "values": fit.values })
}

/// Scatter of `(alpha^T x, y)` thinned to at most `MAX_POINTS` pairs.
fn scatter(t: &[f64], y: &[f64]) -> Vec<[f64; 2]> {
    let stride = t.len().div_ceil(MAX_POINTS).max(1);
    t.iter().zip(y).step_by(stride).map(|(a, b)| [*a, *b]).collect()
}

fn truth_curve(spec: &ModelSpec, lo: f64, hi: f64) -> Vec<[f64; 2]> {
    (0..=200)
        .map(|k| {
            let u = lo + (hi - lo) * k as f64 / 200.0;
            [u, spec.link.eval(u)]
        })
        .collect()
}

/// Isotonic fit of the link at the true direction.
pub fn link_demo_value(model: &str, n: usize, seed: u64, noise_sd: f64) -> Result<Value> {
    check_n(n)?;
    let spec = model_spec(model, 3, noise_sd)?;
    let sample = simulate::generate(&spec, n, seed)?;
    let t = sample.projections(&spec.alpha0);
    let pd = data::project_values(&t, sample.y())?;
    let fit = isotonic::fit_isotonic(&pd);
    let (lo, hi) = (pd.z[0], pd.z[pd.m() - 1]);
    let l2 = fit
        .values
        .iter()
        .zip(&pd.z)
        .zip(&pd.w)
        .map(|((v, z), w)| *w as f64 * (v - spec.link.eval(*z)).powi(2))
        .sum::<f64>()
        / n as f64;
    Ok(json!({
        "points": scatter(&t, sample.y()),
        "fit": step_json(&fit),
        "truth": truth_curve(&spec, lo, hi),
        "blocks": fit.jumps().len() + 1,
        "l2_error": l2,
    }))
}

/// Score objective over a square of spherical-chart angles centred on the truth.
pub fn score_landscape_value(model: &str, n: usize, seed: u64, efficient: bool, grid: usize, radius: f64) -> Result<Value> {
    check_n(n)?;
    if !(3..=MAX_GRID).contains(&grid) {
        return Err(Error::Config(format!("grid must lie in 3..={MAX_GRID}, got {grid}")));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Config(format!("radius must be positive, got {radius}")));
    }
    let spec = model_spec(model, 3, 1.0)?;
    let sample = simulate::generate(&spec, n, seed)?;
    let chart = Chart::spherical(3)?;
    let config = ScoreConfig::parametrized(chart, efficient);
    let centre = chart.from_sphere(&spec.alpha0)?;
    let axis = |c: f64| -> Vec<f64> {
        (0..grid).map(|k| c - radius + 2.0 * radius * k as f64 / (grid - 1) as f64).collect()
    };
    let (b1, b2) = (axis(centre[0]), axis(centre[1]));
    let mut values = Vec::with_capacity(grid);
    for v in &b2 {
        let mut row = Vec::with_capacity(grid);
        for u in &b1 {
            let s = score::score_objective(&[*u, *v], &sample, &config)?;
            row.push(s.sqrt());
        }
        values.push(row);
    }
    Ok(json!({
        "beta1": b1,
        "beta2": b2,
        "values": values,
        "truth": centre,
        "efficient": efficient,
    }))
}

/// Fits one estimator to a freshly simulated sample, starting from the
/// least-squares direction and `starts - 1` random directions.
pub fn fit_demo_value(estimator: &str, model: &str, n: usize, seed: u64, starts: usize) -> Result<Value> {
    check_n(n)?;
    if starts == 0 || starts > 50 {
        return Err(Error::Config(format!("starts must lie in 1..=50, got {starts}")));
    }
    let kind: EstimatorKind = estimator.parse()?;
    let spec = model_spec(model, 3, 1.0)?;
    let sample = simulate::generate(&spec, n, seed)?;
    let mut points = vec![estimators::fit_hlflse(&sample)?.alpha_unit];
    points.extend(estimators::random_directions(starts - 1, 3, simulate::derive_seed(seed, 1)));
    let config = FitConfig::new(3)?.with_starts(Starts::Given(points));
    let est = estimators::fit(kind, &sample, &config)?;
    let t = sample.projections(&est.alpha_unit);
    let (lo, hi) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let mut out = est.to_json(None);
    if let Value::Object(map) = &mut out {
        map.insert("alpha0".into(), json!(spec.alpha0));
        map.insert("error".into(), json!(monosi::linalg::distance(&est.alpha_unit, &spec.alpha0)));
        map.insert("points".into(), json!(scatter(&t, sample.y())));
        map.insert("truth".into(), json!(truth_curve(&spec, lo, hi)));
        map.insert("fit".into(), step_json(&est.link_fit));
    }
    Ok(out)
}

fn to_js(v: Result<Value>) -> std::result::Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn link_demo(model: &str, n: usize, seed: u32, noise_sd: f64) -> std::result::Result<String, JsError> {
    to_js(link_demo_value(model, n, seed.into(), noise_sd))
}

#[wasm_bindgen]
pub fn score_landscape(
    model: &str,
    n: usize,
    seed: u32,
    efficient: bool,
    grid: usize,
    radius: f64,
) -> std::result::Result<String, JsError> {
    to_js(score_landscape_value(model, n, seed.into(), efficient, grid, radius))
}

#[wasm_bindgen]
pub fn fit_demo(estimator: &str, model: &str, n: usize, seed: u32, starts: usize) -> std::result::Result<String, JsError> {
    to_js(fit_demo_value(estimator, model, n, seed.into(), starts))
}
