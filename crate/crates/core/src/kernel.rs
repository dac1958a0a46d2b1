//! Triweight kernel, the range-based bandwidth rule, and the kernel-smoothed
//! derivative of the isotonic link obtained by convolving the kernel with
//! its jumps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotonic::{IsotonicFit, JumpSet};

const TRIWEIGHT_NORM: f64 = 35.0 / 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelSpec {
    #[default]
    Triweight,
}

impl KernelSpec {
    pub fn support(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    pub fn value(&self, u: f64) -> f64 {
        kernel_value(u)
    }
}

/// `K(u) = 35/32 (1 - u^2)^3` on `[-1, 1]`.
pub fn kernel_value(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        let t = 1.0 - u * u;
        TRIWEIGHT_NORM * t * t * t
    } else {
        0.0
    }
}

/// `K'(u)`.
pub fn kernel_derivative(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        let t = 1.0 - u * u;
        -6.0 * TRIWEIGHT_NORM * u * t * t
    } else {
        0.0
    }
}

/// `K''(u)`.
pub fn kernel_second_derivative(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        let t = 1.0 - u * u;
        TRIWEIGHT_NORM * (-6.0 * t * t + 24.0 * u * u * t)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h.is_finite() {
            Ok(Self(h))
        } else {
            Err(Error::Config(format!("bandwidth must be positive, got {h}")))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// `h = 0.5 * range(projections) * n^(-1/7)`.
pub fn default_bandwidth(projections: &[f64], n: usize) -> Result<Bandwidth> {
    let (lo, hi) = projections
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::Degenerate("projections have zero range".into()));
    }
    Bandwidth::new(0.5 * range * (n.max(1) as f64).powf(-1.0 / 7.0))
}

/// Smoothed derivative `(1/h) sum_j K((u - tau_j)/h) delta_j` of an isotonic
/// fit. Within `h` of either end of the knot range the value at the nearest
/// interior point is used, which is what a linear continuation of the link
/// past the boundary induces.
#[derive(Debug, Clone)]
pub struct DerivativeEstimator {
    jumps: JumpSet,
    h: f64,
    lo: f64,
    hi: f64,
}

impl DerivativeEstimator {
    pub fn new(fit: &IsotonicFit, h: Bandwidth) -> Self {
        Self::from_jumps(fit.jumps(), fit.knots[0], fit.knots[fit.len() - 1], h)
    }

    pub fn from_jumps(jumps: JumpSet, first_knot: f64, last_knot: f64, h: Bandwidth) -> Self {
        let h = h.value();
        let (mut lo, mut hi) = (first_knot + h, last_knot - h);
        if lo > hi {
            // knot range narrower than 2h
            lo = 0.5 * (first_knot + last_knot);
            hi = lo;
        }
        Self { jumps, h, lo, hi }
    }

    pub fn clamp(&self, u: f64) -> f64 {
        u.clamp(self.lo, self.hi)
    }

    /// Convolution sum at `u` without the boundary clamp.
    pub fn interior(&self, u: f64) -> f64 {
        let locs = &self.jumps.locations;
        let start = locs.partition_point(|&t| t < u - self.h);
        let end = locs.partition_point(|&t| t <= u + self.h);
        let s: f64 = (start..end)
            .map(|j| kernel_value((u - locs[j]) / self.h) * self.jumps.sizes[j])
            .sum();
        s / self.h
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.interior(self.clamp(u))
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }
}

pub fn derivative_estimate(fit: &IsotonicFit, u: f64, h: Bandwidth) -> f64 {
    DerivativeEstimator::new(fit, h).eval(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn kernel_values() {
        assert_eq!(kernel_value(0.0), 35.0 / 32.0);
        for u in [-1.0, 1.0] {
            assert_eq!(kernel_value(u), 0.0);
            assert_eq!(kernel_derivative(u), 0.0);
            assert_eq!(kernel_second_derivative(u), 0.0);
        }
        assert_eq!(kernel_value(1.5), 0.0);
        assert_eq!(kernel_value(0.3), kernel_value(-0.3));
    }

    #[test]
    fn kernel_integrates_to_one() {
        let total = simpson(kernel_value, -1.0, 1.0, 2000);
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn kernel_derivatives_match_finite_differences() {
        let e = 1e-5;
        for u in [-0.9, -0.4, 0.0, 0.25, 0.8] {
            let fd = (kernel_value(u + e) - kernel_value(u - e)) / (2.0 * e);
            assert!((fd - kernel_derivative(u)).abs() < 1e-8);
            let fd2 = (kernel_derivative(u + e) - kernel_derivative(u - e)) / (2.0 * e);
            assert!((fd2 - kernel_second_derivative(u)).abs() < 1e-7);
        }
    }

    #[test]
    fn bandwidth_rule() {
        let h = default_bandwidth(&[0.0, 2.0, 1.0], 128).unwrap();
        assert!((h.value() - 0.5).abs() < 1e-15);
        assert_eq!(default_bandwidth(&[3.0, 4.0], 1).unwrap().value(), 0.5);
        let h2 = default_bandwidth(&[0.0, 4.0], 128).unwrap();
        assert!((h2.value() - 2.0 * h.value()).abs() < 1e-15);
        assert!(default_bandwidth(&[1.0, 1.0], 10).is_err());
        assert!(Bandwidth::new(0.0).is_err());
    }

    fn single_jump() -> IsotonicFit {
        IsotonicFit {
            knots: vec![-2.0, 0.0, 2.0],
            values: vec![0.0, 1.0, 1.0],
            weights: vec![1, 1, 1],
        }
    }

    #[test]
    fn one_jump_interior_and_boundary() {
        let fit = single_jump();
        let h = Bandwidth::new(1.0).unwrap();
        assert_eq!(derivative_estimate(&fit, 0.0, h), 35.0 / 32.0);
        assert_eq!(derivative_estimate(&fit, 2.0, h), 0.0);
        assert_eq!(derivative_estimate(&fit, 1.7, h), derivative_estimate(&fit, 1.0, h));
    }

    #[test]
    fn narrow_range_uses_midpoint() {
        let fit = single_jump();
        let est = DerivativeEstimator::new(&fit, Bandwidth::new(3.0).unwrap());
        assert_eq!(est.clamp(-5.0), 0.0);
        assert_eq!(est.clamp(5.0), 0.0);
        assert_eq!(est.eval(1.9), kernel_value(0.0) / 3.0);
    }

    #[test]
    fn cubic_staircase_derivative() {
        // 1000 equal-width steps of x^3 on [1, 2]
        let m = 1000;
        let knots: Vec<f64> = (0..=m).map(|i| 1.0 + i as f64 / m as f64).collect();
        let values: Vec<f64> = knots.iter().map(|x| x.powi(3)).collect();
        let fit = IsotonicFit {
            weights: vec![1; knots.len()],
            knots,
            values,
        };
        let got = derivative_estimate(&fit, 1.5, Bandwidth::new(0.1).unwrap());
        assert!((got - 6.75).abs() < 2e-2, "{got}");
    }

    #[test]
    fn linear_in_jump_sizes() {
        let fit = IsotonicFit {
            knots: vec![0.0, 0.5, 0.9, 1.4, 3.0],
            values: vec![0.0, 0.2, 1.0, 1.1, 2.0],
            weights: vec![1; 5],
        };
        let h = Bandwidth::new(0.6).unwrap();
        let base = DerivativeEstimator::new(&fit, h);
        let scaled = DerivativeEstimator::from_jumps(fit.jumps().scaled(2.5), 0.0, 3.0, h);
        for u in [-1.0, 0.3, 0.8, 1.2, 2.0, 3.5] {
            assert!((scaled.eval(u) - 2.5 * base.eval(u)).abs() < 1e-12);
            assert!(base.eval(u) >= 0.0);
        }
    }

    #[test]
    fn interior_estimate_is_twice_differentiable() {
        let fit = IsotonicFit {
            knots: vec![0.0, 0.5, 0.9, 1.4, 3.0],
            values: vec![0.0, 0.2, 1.0, 1.1, 2.0],
            weights: vec![1; 5],
        };
        let h = 0.6;
        let est = DerivativeEstimator::new(&fit, Bandwidth::new(h).unwrap());
        let j = fit.jumps();
        // closed-form first and second derivatives of the convolution sum
        let d1 = |u: f64| -> f64 {
            j.locations.iter().zip(&j.sizes).map(|(t, s)| kernel_derivative((u - t) / h) * s).sum::<f64>() / (h * h)
        };
        let d2 = |u: f64| -> f64 {
            j.locations.iter().zip(&j.sizes).map(|(t, s)| kernel_second_derivative((u - t) / h) * s).sum::<f64>()
                / (h * h * h)
        };
        let e = 1e-5;
        // includes points where a jump enters or leaves the window (|u - tau| = h)
        for u in [0.65, 1.1, 1.5, 2.0, 1.4 + h] {
            let fd = (est.interior(u + e) - est.interior(u - e)) / (2.0 * e);
            assert!((fd - d1(u)).abs() < 1e-6, "u={u}");
            let e2 = 1e-7;
            let fd2 = (d1(u + e2) - d1(u - e2)) / (2.0 * e2);
            // K''' jumps at the window edge, so the central difference is only first order there
            assert!((fd2 - d2(u)).abs() < 1e-4, "u={u}");
        }
    }
}
