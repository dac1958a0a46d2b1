//! Reference covariances for the two benchmark models and the chart-based
//! Moore-Penrose sandwich `A^- Sigma A^-`.
//!
//! Every closed-form benchmark matrix is a rational multiple of the centring
//! matrix `M_d = d I - 1 1^T`; the multiples are kept as exact fractions.

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::Chart;

pub const PENROSE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkModel {
    /// `X ~ U[1,2]^3`, `psi(x) = x^3`, `eps ~ N(0,1)`.
    UniformCubicD3,
    /// `X ~ N(0, I_d)`, `psi(x) = x^3`, `eps ~ N(0,1)`.
    NormalCubic(usize),
}

impl BenchmarkModel {
    pub fn from_name(name: &str, d: usize) -> Result<Self> {
        let model = match name {
            "uniform-cubic" if d == 3 => Self::UniformCubicD3,
            "uniform-cubic" => {
                return Err(Error::Config(format!(
                    "closed-form references for the uniform model exist only for d = 3, got {d}"
                )))
            }
            "normal-cubic" => Self::NormalCubic(d),
            other => return Err(Error::Config(format!("unknown model {other:?}"))),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::NormalCubic(d) if *d < 2 => Err(Error::Config(format!("dimension must be >= 2, got {d}"))),
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::UniformCubicD3 => 3,
            Self::NormalCubic(d) => *d,
        }
    }

    pub fn alpha0(&self) -> Vec<f64> {
        let d = self.dim();
        vec![1.0 / (d as f64).sqrt(); d]
    }
}

/// `scale * (d I - 1 1^T)` with an exact rational scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaledCentering {
    pub scale: Ratio<i64>,
    pub d: usize,
}

impl ScaledCentering {
    pub fn new(numer: i64, denom: i64, d: usize) -> Self {
        Self {
            scale: Ratio::new(numer, denom),
            d,
        }
    }

    pub fn scale_f64(&self) -> f64 {
        *self.scale.numer() as f64 / *self.scale.denom() as f64
    }

    /// Exact diagonal `(d - 1) * scale`.
    pub fn diagonal(&self) -> Ratio<i64> {
        self.scale * (self.d as i64 - 1)
    }

    pub fn diagonal_f64(&self) -> f64 {
        self.scale_f64() * (self.d as f64 - 1.0)
    }

    /// Exact off-diagonal `-scale`.
    pub fn off_diagonal(&self) -> Ratio<i64> {
        -self.scale
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let c = self.scale_f64();
        let d = self.d;
        DMatrix::from_fn(d, d, |i, j| if i == j { c * (d as f64 - 1.0) } else { -c })
    }
}

/// A reference row from the benchmark simulation tables: `n = None` is the
/// asymptotic row. Entries are `sigma_11, sigma_22, ...` and the upper
/// off-diagonals `sigma_12, sigma_13, ..., sigma_23, ...`, as far as printed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableValue {
    pub estimator: String,
    pub n: Option<usize>,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl TableValue {
    fn new(estimator: &str, n: Option<usize>, diag: &[f64], offdiag: &[f64]) -> Self {
        Self {
            estimator: estimator.to_string(),
            n,
            diag: diag.to_vec(),
            offdiag: offdiag.to_vec(),
        }
    }

    pub fn mean_diag(&self) -> f64 {
        self.diag.iter().sum::<f64>() / self.diag.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReference {
    pub model: BenchmarkModel,
    pub alpha0: Vec<f64>,
    pub a: Option<ScaledCentering>,
    pub sigma: Option<ScaledCentering>,
    pub a_tilde: Option<ScaledCentering>,
    pub sigma_tilde: Option<ScaledCentering>,
    pub sse_cov: Option<ScaledCentering>,
    /// Efficient (ESE) covariance; `Sigma_d` for the normal model.
    pub ese_cov: Option<ScaledCentering>,
    pub table_values: Vec<TableValue>,
}

impl AsymptoticReference {
    pub fn table_entry(&self, estimator: &str, n: Option<usize>) -> Option<&TableValue> {
        self.table_values.iter().find(|t| t.estimator == estimator && t.n == n)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mat = |m: &Option<ScaledCentering>| -> serde_json::Value {
            match m {
                None => serde_json::Value::Null,
                Some(s) => {
                    let full = s.to_matrix();
                    let rows: Vec<Vec<f64>> = (0..s.d).map(|i| full.row(i).iter().copied().collect()).collect();
                    serde_json::json!({
                        "scale": format!("{}/{}", s.scale.numer(), s.scale.denom()),
                        "matrix": rows,
                    })
                }
            }
        };
        serde_json::json!({
            "model": self.model,
            "alpha0": self.alpha0,
            "A": mat(&self.a),
            "Sigma": mat(&self.sigma),
            "Atilde": mat(&self.a_tilde),
            "Sigmatilde": mat(&self.sigma_tilde),
            "sse_cov": mat(&self.sse_cov),
            "ese_cov": mat(&self.ese_cov),
            "table_values": self.table_values,
        })
    }
}

fn uniform_table() -> Vec<TableValue> {
    vec![
        TableValue::new("sse", Some(500), &[0.0209, 0.0214, 0.0207], &[-0.0100, -0.0100, -0.0106]),
        TableValue::new("sse", Some(1000), &[0.0204, 0.0209, 0.0206], &[-0.0104, -0.0101, -0.0105]),
        TableValue::new("sse", Some(2000), &[0.0201, 0.0205, 0.0203], &[]),
        TableValue::new("sse", None, &[0.0192], &[-0.0096]),
        TableValue::new("ese", Some(500), &[0.0204, 0.0208, 0.0200], &[]),
        TableValue::new("ese", Some(1000), &[0.0199, 0.0203, 0.0200], &[-0.01001, -0.0099, -0.0102]),
        TableValue::new("ese", Some(2000), &[0.0195, 0.0199, 0.0197], &[]),
        TableValue::new("ese", None, &[0.0187], &[-0.0093]),
        TableValue::new("lse", Some(1000), &[0.0496, 0.0500, 0.0496], &[-0.0250, -0.0246, -0.0250]),
        TableValue::new("mrce", Some(500), &[0.0171], &[]),
        TableValue::new("mrce", Some(1000), &[0.0343, 0.0333, 0.0339], &[]),
        TableValue::new("mrce", None, &[0.0214], &[-0.0107]),
    ]
}

fn normal_table_d3() -> Vec<TableValue> {
    vec![
        TableValue::new("sse", Some(1000), &[0.1234, 0.1248, 0.1213], &[]),
        TableValue::new("sse", None, &[0.0741], &[-0.0370]),
        TableValue::new("ese", Some(1000), &[0.0433, 0.0432, 0.0418], &[-0.0223, -0.0209, -0.0210]),
        TableValue::new("ese", None, &[0.0247], &[-0.0123]),
        TableValue::new("lse", Some(1000), &[0.1011, 0.0982, 0.1004], &[]),
        TableValue::new("mrce", Some(1000), &[0.4875], &[]),
        TableValue::new("mrce", None, &[0.3583], &[-0.1791]),
        TableValue::new("hlflse", Some(1000), &[0.5205, 0.5130, 0.5080], &[-0.2634, -0.2564, -0.2500]),
        TableValue::new("hlflse", None, &[0.5185], &[-0.2593]),
        TableValue::new("lflse", Some(1000), &[0.6763, 0.6945, 0.6467], &[-0.0857, -0.0775, -0.0838]),
        // 37/54 and -5/54
        TableValue::new("lflse", None, &[0.68518], &[-0.09259]),
        // 22/27 and -11/27
        TableValue::new("linear-norm1", None, &[0.8148], &[-0.4074]),
    ]
}

pub fn benchmark_matrices(model: BenchmarkModel) -> Result<AsymptoticReference> {
    model.validate()?;
    let alpha0 = model.alpha0();
    Ok(match model {
        BenchmarkModel::UniformCubicD3 => AsymptoticReference {
            model,
            alpha0,
            // JS^T A JS = diag(17/15, 17/10) in the d = 3 angular chart
            a: Some(ScaledCentering::new(17, 30, 3)),
            sigma: Some(ScaledCentering::new(1, 36, 3)),
            a_tilde: Some(ScaledCentering::new(89953, 7560, 3)),
            sigma_tilde: Some(ScaledCentering::new(89953, 7560, 3)),
            sse_cov: Some(ScaledCentering::new(25, 2601, 3)),
            ese_cov: Some(ScaledCentering::new(840, 89953, 3)),
            table_values: uniform_table(),
        },
        BenchmarkModel::NormalCubic(d) => AsymptoticReference {
            model,
            alpha0,
            a: None,
            sigma: None,
            a_tilde: None,
            sigma_tilde: None,
            sse_cov: None,
            ese_cov: Some(ScaledCentering::new(1, 27 * d as i64, d)),
            table_values: if d == 3 { normal_table_d3() } else { Vec::new() },
        },
    })
}

/// `J (J^T A J)^{-1} J^T` at `beta0 = chart^{-1}(alpha0)`.
pub fn chart_pseudo_inverse(a: &DMatrix<f64>, alpha0: &[f64], chart: &Chart) -> Result<DMatrix<f64>> {
    let d = chart.d;
    if a.nrows() != d || a.ncols() != d || alpha0.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: a.nrows(),
        });
    }
    let beta0 = chart.from_sphere(alpha0)?;
    let j = chart.jacobian(&beta0)?;
    let inner = j.transpose() * a * &j;
    let inv = inner
        .clone()
        .lu()
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Singular("J^T A J is singular at the chart point of alpha0".into()))?;
    if (&inner * &inv - DMatrix::identity(d - 1, d - 1)).amax() > 1e-8 {
        return Err(Error::Singular("J^T A J is numerically singular".into()));
    }
    Ok(&j * inv * j.transpose())
}

/// `A^- Sigma A^-` with the chart form of the pseudo-inverse.
pub fn sandwich_covariance(a: &DMatrix<f64>, sigma: &DMatrix<f64>, alpha0: &[f64], chart: &Chart) -> Result<DMatrix<f64>> {
    if sigma.shape() != a.shape() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            got: sigma.nrows(),
        });
    }
    let pinv = chart_pseudo_inverse(a, alpha0, chart)?;
    Ok(&pinv * sigma * &pinv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenroseReport {
    pub passed: bool,
    pub max_deviation: f64,
}

/// Checks `AXA = A`, `XAX = X`, `(AX)^T = AX` and `(XA)^T = XA`.
pub fn penrose_check(a: &DMatrix<f64>, x: &DMatrix<f64>) -> PenroseReport {
    if !a.is_square() || a.shape() != x.shape() {
        return PenroseReport {
            passed: false,
            max_deviation: f64::INFINITY,
        };
    }
    let ax = a * x;
    let xa = x * a;
    let devs = [
        (&ax * a - a).amax(),
        (&xa * x - x).amax(),
        (ax.transpose() - &ax).amax(),
        (xa.transpose() - &xa).amax(),
    ];
    let max_deviation = devs.iter().copied().fold(0.0, f64::max);
    PenroseReport {
        passed: max_deviation <= PENROSE_TOL,
        max_deviation,
    }
}

/// Matrix square root `V diag(sqrt(max(lambda, 0))) V^T` of a symmetric
/// positive semidefinite matrix.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let root = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()));
    &eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::ChartKind;

    fn eigen_pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
        let eig = m.clone().symmetric_eigen();
        let scale = eig.eigenvalues.amax();
        let inv = eig.eigenvalues.map(|l| if l.abs() > 1e-12 * scale { 1.0 / l } else { 0.0 });
        &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
    }

    fn uniform() -> AsymptoticReference {
        benchmark_matrices(BenchmarkModel::UniformCubicD3).unwrap()
    }

    #[test]
    fn exact_uniform_scales() {
        let r = uniform();
        assert_eq!(r.sse_cov.unwrap().diagonal(), Ratio::new(50, 2601));
        assert_eq!(r.ese_cov.unwrap().diagonal(), Ratio::new(1680, 89953));
        assert_eq!(r.sse_cov.unwrap().off_diagonal(), Ratio::new(-25, 2601));
        // ESE: A~ = Sigma~ so the sandwich collapses to A~^-, and (c M)^- = M / (9c)
        assert_eq!(r.a_tilde.unwrap().scale.recip() / 9, r.ese_cov.unwrap().scale);
        // SSE: (c M)^- (s M) (c M)^- = s / (9 c^2) M
        let c = r.a.unwrap().scale;
        let s = r.sigma.unwrap().scale;
        assert_eq!(s / (c * c * 9), r.sse_cov.unwrap().scale);
    }

    #[test]
    fn curvature_matrix_matches_chart_display() {
        let r = uniform();
        let chart = Chart::spherical(3).unwrap();
        let j = chart.jacobian(&chart.from_sphere(&r.alpha0).unwrap()).unwrap();
        let inner = j.transpose() * r.a.unwrap().to_matrix() * &j;
        assert!((inner[(0, 0)] - 17.0 / 15.0).abs() < 1e-12);
        assert!((inner[(1, 1)] - 17.0 / 10.0).abs() < 1e-12);
        assert!(inner[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn uniform_sandwich_and_penrose() {
        let r = uniform();
        let a = r.a.unwrap().to_matrix();
        let sigma = r.sigma.unwrap().to_matrix();
        let want = r.sse_cov.unwrap().to_matrix();
        for kind in [ChartKind::Spherical, ChartKind::HalfSphere] {
            let chart = Chart::new(kind, 3).unwrap();
            let pinv = chart_pseudo_inverse(&a, &r.alpha0, &chart).unwrap();
            let rep = penrose_check(&a, &pinv);
            assert!(rep.passed, "{kind:?}: {}", rep.max_deviation);
            assert!((&pinv - eigen_pinv(&a)).amax() < 1e-12);
            let got = sandwich_covariance(&a, &sigma, &r.alpha0, &chart).unwrap();
            assert!((got - &want).amax() < 1e-12);
        }
    }

    #[test]
    fn sandwich_annihilates_alpha0() {
        let r = uniform();
        let chart = Chart::spherical(3).unwrap();
        let cov = sandwich_covariance(
            &r.a_tilde.unwrap().to_matrix(),
            &r.sigma_tilde.unwrap().to_matrix(),
            &r.alpha0,
            &chart,
        )
        .unwrap();
        let a0 = DVector::from_column_slice(&r.alpha0);
        assert!((&cov * &a0).amax() < 1e-12);
        assert!((&cov - r.ese_cov.unwrap().to_matrix()).amax() < 1e-12);
        assert_eq!(cov.rank(1e-10), 2);
    }

    #[test]
    fn penrose_trivia() {
        let i = DMatrix::<f64>::identity(4, 4);
        let rep = penrose_check(&i, &i);
        assert!(rep.passed && rep.max_deviation == 0.0);
        let a = uniform().a.unwrap().to_matrix();
        assert!(!penrose_check(&a, &a).passed);
        assert!(!penrose_check(&a, &DMatrix::identity(2, 2)).passed);
    }

    #[test]
    fn normal_efficient_covariance() {
        let r = benchmark_matrices(BenchmarkModel::NormalCubic(3)).unwrap();
        let e = r.ese_cov.unwrap();
        assert_eq!(e.diagonal(), Ratio::new(2, 81));
        assert!((e.diagonal_f64() - 0.0247).abs() < 5e-5);
        let r5 = benchmark_matrices(BenchmarkModel::NormalCubic(5)).unwrap();
        let m = r5.ese_cov.unwrap().to_matrix();
        assert!((m.trace() - 4.0 / 27.0).abs() < 1e-15);
        assert!(benchmark_matrices(BenchmarkModel::NormalCubic(1)).is_err());
    }

    #[test]
    fn table_constants_match_fractions() {
        let u = uniform();
        let n3 = benchmark_matrices(BenchmarkModel::NormalCubic(3)).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 5e-5;
        assert!(close(u.table_entry("sse", None).unwrap().diag[0], 50.0 / 2601.0));
        assert!(close(u.table_entry("ese", None).unwrap().diag[0], 1680.0 / 89953.0));
        assert!(close(n3.table_entry("ese", None).unwrap().diag[0], 2.0 / 81.0));
        assert!(close(n3.table_entry("sse", None).unwrap().diag[0], 2.0 / 27.0));
        assert!(close(n3.table_entry("lflse", None).unwrap().diag[0], 37.0 / 54.0));
        assert!(close(n3.table_entry("lflse", None).unwrap().offdiag[0], -5.0 / 54.0));
        assert!(close(n3.table_entry("linear-norm1", None).unwrap().diag[0], 22.0 / 27.0));
        assert!(close(n3.table_entry("linear-norm1", None).unwrap().offdiag[0], -11.0 / 27.0));
        assert!(close(n3.table_entry("hlflse", None).unwrap().diag[0], 14.0 / 27.0));
    }

    #[test]
    fn json_export_has_fractions() {
        let v = uniform().to_json();
        assert_eq!(v["sse_cov"]["scale"], "25/2601");
        assert_eq!(v["sse_cov"]["matrix"][0][1], -25.0 / 2601.0);
        assert!(v["Sigma"]["matrix"].is_array());
        assert!(benchmark_matrices(BenchmarkModel::NormalCubic(4)).unwrap().to_json()["A"].is_null());
    }

    #[test]
    fn model_names() {
        assert_eq!(BenchmarkModel::from_name("uniform-cubic", 3).unwrap(), BenchmarkModel::UniformCubicD3);
        assert!(BenchmarkModel::from_name("uniform-cubic", 4).is_err());
        assert_eq!(BenchmarkModel::from_name("normal-cubic", 5).unwrap(), BenchmarkModel::NormalCubic(5));
        assert!(BenchmarkModel::from_name("logistic", 3).is_err());
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let m = benchmark_matrices(BenchmarkModel::NormalCubic(4)).unwrap().ese_cov.unwrap().to_matrix();
        let r = psd_sqrt(&m);
        assert!((&r * &r - &m).amax() < 1e-14);
    }
}
