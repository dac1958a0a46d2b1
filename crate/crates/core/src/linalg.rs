//! Small vector helpers shared by the estimators.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Scales `a` to unit Euclidean norm; `None` for a zero or non-finite vector.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    (n.is_finite() && n > 0.0).then(|| a.iter().map(|v| v / n).collect())
}

/// Flips the sign of `a` so that its first nonzero component is positive.
/// Returns whether a flip happened.
pub fn apply_sign_convention(a: &mut [f64]) -> bool {
    match a.iter().find(|v| **v != 0.0) {
        Some(v) if *v < 0.0 => {
            a.iter_mut().for_each(|v| *v = -*v);
            true
        }
        _ => false,
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
