//! Derivative-free pattern search for the step-function score objectives and
//! a Broyden root finder for the smooth link-free equations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternSearchOpts {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_evals: usize,
}

impl Default for PatternSearchOpts {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            min_step: 1e-8,
            max_evals: 1_000_000,
        }
    }
}

impl PatternSearchOpts {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_step > 0.0 && self.min_step < self.initial_step && self.initial_step.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < min_step < initial_step, got {} and {}",
                self.min_step, self.initial_step
            )));
        }
        if self.max_evals == 0 {
            return Err(Error::Config("max_evals must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BroydenOpts {
    pub residual_tol: f64,
    pub max_iters: usize,
    pub fd_step: f64,
}

impl Default for BroydenOpts {
    fn default() -> Self {
        Self {
            residual_tol: 1e-12,
            max_iters: 200,
            fd_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// Objective value (pattern search) or residual norm (Broyden).
    pub objective_or_residual: f64,
    pub evaluations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

struct Counted<F> {
    f: F,
    evals: usize,
    max: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.max
    }
}

/// Greedy coordinate probes `+e_1, -e_1, ..., +e_k, -e_k` around `x`.
fn explore<F: FnMut(&[f64]) -> f64>(f: &mut Counted<F>, x: &[f64], fx: f64, step: f64) -> (Vec<f64>, f64) {
    let mut best = x.to_vec();
    let mut fbest = fx;
    for i in 0..x.len() {
        let orig = best[i];
        let mut moved = false;
        for dir in [1.0, -1.0] {
            if f.exhausted() {
                best[i] = orig;
                return (best, fbest);
            }
            best[i] = orig + dir * step;
            let v = f.call(&best);
            if v < fbest {
                fbest = v;
                moved = true;
                break;
            }
        }
        if !moved {
            best[i] = orig;
        }
    }
    (best, fbest)
}

/// Hooke-Jeeves pattern search with step halving down to `min_step`.
///
/// The final exploratory sweep is always made with step exactly `min_step`,
/// so on convergence no single coordinate probe of that size improves `f`.
pub fn hooke_jeeves<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], opts: &PatternSearchOpts) -> SolveReport {
    let mut f = Counted {
        f,
        evals: 0,
        max: opts.max_evals,
    };
    let mut base = x0.to_vec();
    let mut fbase = f.call(&base);
    let mut step = opts.initial_step;
    let converged = loop {
        if f.exhausted() {
            break false;
        }
        let (mut xn, mut fnew) = explore(&mut f, &base, fbase, step);
        if fnew < fbase {
            loop {
                let pattern: Vec<f64> = xn.iter().zip(&base).map(|(a, b)| 2.0 * a - b).collect();
                base = xn;
                fbase = fnew;
                if f.exhausted() {
                    break;
                }
                let fp = f.call(&pattern);
                let (xe, fe) = explore(&mut f, &pattern, fp, step);
                // a probe that undoes the pattern step lands on `base` up to
                // round-off; that is not progress
                let moved = xe.iter().zip(&base).any(|(a, b)| (a - b).abs() >= 0.5 * step);
                if fe < fbase && moved {
                    xn = xe;
                    fnew = fe;
                } else {
                    break;
                }
            }
        } else if step <= opts.min_step {
            break true;
        } else {
            step = (0.5 * step).max(opts.min_step);
        }
    };
    SolveReport {
        solution: base,
        objective_or_residual: fbase,
        evaluations: f.evals,
        converged,
        message: (!converged).then(|| "evaluation budget exhausted".to_string()),
    }
}

fn norm(v: &DVector<f64>) -> f64 {
    v.norm()
}

/// Broyden's method with a finite-difference initial Jacobian, rank-one
/// ("good") updates and step halving.
pub fn broyden<F: FnMut(&[f64]) -> Vec<f64>>(mut f: F, x0: &[f64], opts: &BroydenOpts) -> SolveReport {
    const MAX_HALVINGS: usize = 30;
    let k = x0.len();
    let mut evals = 0;
    let mut eval = |x: &DVector<f64>| -> DVector<f64> {
        evals += 1;
        DVector::from_vec(f(x.as_slice()))
    };
    let mut x = DVector::from_column_slice(x0);
    let mut fx = eval(&x);
    let report = |x: &DVector<f64>, r: f64, evals: usize, ok: bool, msg: Option<&str>| SolveReport {
        solution: x.as_slice().to_vec(),
        objective_or_residual: r,
        evaluations: evals,
        converged: ok,
        message: msg.map(str::to_string),
    };
    if fx.len() != k {
        return report(&x, f64::INFINITY, 1, false, Some("field dimension differs from input"));
    }
    if norm(&fx) <= opts.residual_tol {
        return report(&x, norm(&fx), 1, true, None);
    }

    let mut jac = DMatrix::zeros(k, k);
    for c in 0..k {
        let h = opts.fd_step * x[c].abs().max(1.0);
        let mut xp = x.clone();
        xp[c] += h;
        let fp = eval(&xp);
        jac.set_column(c, &((fp - &fx) / h));
    }

    for _ in 0..opts.max_iters {
        let Some(dx) = jac.clone().lu().solve(&(-&fx)) else {
            return report(&x, norm(&fx), evals, false, Some("singular Jacobian"));
        };
        let f0 = norm(&fx);
        let mut t = 1.0;
        let mut x_try = &x + &dx;
        let mut f_try = eval(&x_try);
        let mut halvings = 0;
        while !(norm(&f_try) < f0) && halvings < MAX_HALVINGS {
            t *= 0.5;
            halvings += 1;
            x_try = &x + &dx * t;
            f_try = eval(&x_try);
        }
        if !(norm(&f_try) < f0) {
            x_try = &x + &dx;
            f_try = eval(&x_try);
        }
        if !f_try.iter().all(|v| v.is_finite()) {
            return report(&x, f0, evals, false, Some("diverged"));
        }
        let s = &x_try - &x;
        let ss = s.dot(&s);
        if ss == 0.0 {
            let ok = norm(&fx) <= opts.residual_tol;
            return report(&x, norm(&fx), evals, ok, (!ok).then_some("stagnated"));
        }
        let y = &f_try - &fx;
        let corr = (y - &jac * &s) / ss;
        jac += corr * s.transpose();
        x = x_try;
        fx = f_try;
        if norm(&fx) <= opts.residual_tol {
            return report(&x, norm(&fx), evals, true, None);
        }
    }
    report(&x, norm(&fx), evals, false, Some("iteration limit reached"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_quadratic() {
        let opts = PatternSearchOpts::default();
        let r = hooke_jeeves(|x| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2), &[0.0, 0.0], &opts);
        assert!(r.converged);
        assert!((r.solution[0] - 1.0).abs() <= opts.min_step);
        assert!((r.solution[1] + 2.0).abs() <= opts.min_step);
    }

    #[test]
    fn constant_objective_returns_start() {
        let r = hooke_jeeves(|_| 3.0, &[0.2, -0.4], &PatternSearchOpts::default());
        assert!(r.converged);
        assert_eq!(r.solution, vec![0.2, -0.4]);
        // one failed sweep per step size 0.5, 0.25, ..., 1e-8
        let sweeps = (0.5f64 / 1e-8).log2().ceil() as usize + 1;
        assert_eq!(r.evaluations, 1 + 4 * sweeps);
    }

    #[test]
    fn never_worse_than_start_and_budget_respected() {
        let opts = PatternSearchOpts {
            max_evals: 50,
            ..Default::default()
        };
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = hooke_jeeves(rosen, &[-1.2, 1.0], &opts);
        assert!(!r.converged);
        assert!(r.evaluations <= 50);
        assert!(r.objective_or_residual <= rosen(&[-1.2, 1.0]));
    }

    #[test]
    fn nan_is_never_accepted() {
        let r = hooke_jeeves(
            |x| if x[0] > 0.1 { f64::NAN } else { (x[0] - 1.0).powi(2) },
            &[0.0],
            &PatternSearchOpts::default(),
        );
        assert!(r.solution[0] <= 0.1 && r.objective_or_residual.is_finite());
    }

    #[test]
    fn broyden_linear() {
        let r = broyden(
            |x| vec![2.0 * x[0] - 2.0, 3.0 * x[1] - 3.0],
            &[0.0, 0.0],
            &BroydenOpts::default(),
        );
        assert!(r.converged);
        assert!((r.solution[0] - 1.0).abs() < 1e-12 && (r.solution[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn broyden_cubic() {
        let r = broyden(|x| vec![x[0].powi(3) - 8.0], &[3.0], &BroydenOpts::default());
        assert!(r.converged);
        assert!((r.solution[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn broyden_reports_singular_jacobian() {
        let r = broyden(|x| vec![1.0 + 0.0 * x[0], 1.0], &[0.0, 0.0], &BroydenOpts::default());
        assert!(!r.converged);
        assert!(r.message.is_some());
    }

    #[test]
    fn invalid_opts() {
        let bad = PatternSearchOpts {
            initial_step: 1e-9,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(PatternSearchOpts::default().validate().is_ok());
    }
}
