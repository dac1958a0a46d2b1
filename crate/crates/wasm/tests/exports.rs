use monosi_wasm::{fit_demo_value, link_demo_value, score_landscape_value};

#[test]
fn link_demo_fit_is_monotone_and_close() {
    let v = link_demo_value("uniform-cubic", 2000, 7, 1.0).unwrap();
    let values: Vec<f64> = serde_json::from_value(v["fit"]["values"].clone()).unwrap();
    let knots: Vec<f64> = serde_json::from_value(v["fit"]["knots"].clone()).unwrap();
    assert_eq!(values.len(), knots.len());
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    assert!(knots.windows(2).all(|w| w[0] < w[1]));
    assert!(v["l2_error"].as_f64().unwrap() < 0.1);
    assert!(v["points"].as_array().unwrap().len() <= 1500);
    let blocks = v["blocks"].as_u64().unwrap() as usize;
    assert!(blocks > 1 && blocks < knots.len());
}

#[test]
fn noiseless_link_demo_recovers_cubic() {
    let v = link_demo_value("uniform-cubic", 500, 3, 0.0).unwrap();
    assert!(v["l2_error"].as_f64().unwrap() < 1e-24);
}

#[test]
fn landscape_dimensions_and_minimum_near_truth() {
    let grid = 9;
    let v = score_landscape_value("uniform-cubic", 1000, 5, false, grid, 0.3).unwrap();
    let values: Vec<Vec<f64>> = serde_json::from_value(v["values"].clone()).unwrap();
    assert_eq!(values.len(), grid);
    assert!(values.iter().all(|r| r.len() == grid && r.iter().all(|x| x.is_finite() && *x >= 0.0)));
    let corner = values[0][0];
    let centre = values[grid / 2][grid / 2];
    assert!(centre < corner);
}

#[test]
fn fit_demo_reports_estimate() {
    for name in ["sse", "ese", "lse", "hlflse"] {
        let v = fit_demo_value(name, "normal-cubic", 800, 11, 3).unwrap();
        assert_eq!(v["estimator"], name);
        let alpha: Vec<f64> = serde_json::from_value(v["alpha_unit"].clone()).unwrap();
        let norm = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(v["error"].as_f64().unwrap() < 0.35, "{name}: {}", v["error"]);
    }
}
