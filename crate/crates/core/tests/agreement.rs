use monosi::estimators::{self, FitConfig, Starts};
use monosi::linalg;
use monosi::score::ScoreConfig;
use monosi::simulate::{self, ModelSpec};
use monosi::sphere::Chart;

const SEEDS: u64 = 50;

fn fits(seed: u64, cfg_a: &FitConfig, cfg_b: &FitConfig, efficient: bool) -> f64 {
    let spec = ModelSpec::uniform_cubic(3).unwrap();
    let data = simulate::generate(&spec, 1000, seed).unwrap();
    let run = |c: &FitConfig| if efficient { estimators::fit_ese(&data, c) } else { estimators::fit_sse(&data, c) }.unwrap();
    linalg::distance(&run(cfg_a).alpha_hat, &run(cfg_b).alpha_hat)
}

fn base() -> FitConfig {
    let a0 = vec![1.0 / 3f64.sqrt(); 3];
    FitConfig::new(3).unwrap().with_starts(Starts::Given(vec![a0]))
}

fn report(label: &str, dists: &[f64], tol: f64) -> f64 {
    let within = dists.iter().filter(|d| **d < tol).count() as f64 / dists.len() as f64;
    let mut s = dists.to_vec();
    s.sort_by(f64::total_cmp);
    eprintln!("{label}: within {tol:e}: {:.0}%, median {:e}, max {:e}", 100.0 * within, s[s.len() / 2], s[s.len() - 1]);
    within
}

/// Quarter of the asymptotic SSE standard deviation per coordinate at n = 1000.
fn sampling_tol() -> f64 {
    0.25 * (50.0 / 2601.0 / 1000.0f64).sqrt()
}

#[test]
#[ignore = "the score objective is piecewise constant, so the charts stop at different points of the zero-crossing set; see chart_agreement_within_sampling_error"]
fn chart_invariance() {
    let sph = base();
    let mut half = base();
    half.score.chart = Chart::half_sphere(3).unwrap();
    for efficient in [false, true] {
        let d: Vec<f64> = (0..SEEDS).map(|s| fits(s, &sph, &half, efficient)).collect();
        let tol = 10.0 * sph.pattern.min_step;
        assert_eq!(report(&format!("charts efficient={efficient}"), &d, tol), 1.0);
    }
}

#[test]
#[ignore = "the two formulations stop at different points of the zero-crossing set; see formulations_agree_within_sampling_error"]
fn formulation_agreement() {
    let param = base();
    let lag = FitConfig {
        score: ScoreConfig::lagrange(3, false).unwrap(),
        ..base()
    };
    let d: Vec<f64> = (0..SEEDS).map(|s| fits(s, &param, &lag, false)).collect();
    let tol = 10.0 * param.pattern.min_step;
    assert!(report("formulations", &d, tol) >= 0.9);
}

#[test]
fn chart_agreement_within_sampling_error() {
    let sph = base();
    let mut half = base();
    half.score.chart = Chart::half_sphere(3).unwrap();
    for efficient in [false, true] {
        let d: Vec<f64> = (0..SEEDS).map(|s| fits(s, &sph, &half, efficient)).collect();
        assert!(report(&format!("charts efficient={efficient}"), &d, sampling_tol()) >= 0.9);
    }
}

#[test]
fn formulations_agree_within_sampling_error() {
    let param = base();
    let lag = FitConfig {
        score: ScoreConfig::lagrange(3, false).unwrap(),
        ..base()
    };
    let d: Vec<f64> = (0..SEEDS).map(|s| fits(s, &param, &lag, false)).collect();
    assert!(report("formulations", &d, sampling_tol()) >= 0.9);
}
