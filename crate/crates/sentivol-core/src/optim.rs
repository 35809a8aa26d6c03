//! Derivative-free-input quasi-Newton minimization.
//!
//! The likelihood code exposes only function values, so gradients and
//! Hessians come from finite differences with per-coordinate scaled steps.
//! The minimizer is BFGS with a backtracking Armijo line search: it only ever
//! accepts improvements, which makes the recorded objective trace monotone.
//! Objectives signal an invalid point by returning `f64::INFINITY`; the line
//! search then simply backtracks away from it.

use nalgebra::{DMatrix, DVector};

/// Step used by [`central_gradient`], `eps^(1/3)`, the usual optimum for a
/// second-order central difference.
pub fn central_step() -> f64 {
    f64::EPSILON.cbrt()
}

/// Step used by [`five_point_gradient`], `eps^(1/5)`.
pub fn five_point_step() -> f64 {
    f64::EPSILON.powf(0.2)
}

/// Step used by [`central_hessian`], `eps^(1/4)`.
pub fn hessian_step() -> f64 {
    f64::EPSILON.powf(0.25)
}

/// Per-coordinate step `rel * max(|x_i|, 1)`. The floor keeps the step
/// strictly positive when a coordinate sits at zero.
fn scaled_step(x: f64, rel: f64) -> f64 {
    rel * x.abs().max(1.0)
}

/// Second-order central difference gradient, `(f(x+h) - f(x-h)) / 2h`.
pub fn central_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = scaled_step(x[i], rel_step);
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Fourth-order five-point stencil gradient,
/// `(f(x-2h) - 8 f(x-h) + 8 f(x+h) - f(x+2h)) / 12h`. Used as an independent
/// reference when validating [`central_gradient`].
pub fn five_point_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = scaled_step(x[i], rel_step);
        let mut at = |v: f64| {
            probe[i] = v;
            let out = f(&probe);
            probe[i] = x[i];
            out
        };
        let fm2 = at(x[i] - 2.0 * h);
        let fm1 = at(x[i] - h);
        let fp1 = at(x[i] + h);
        let fp2 = at(x[i] + 2.0 * h);
        g[i] = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    }
    g
}

/// Symmetric numerical Hessian from second-order central differences.
pub fn central_hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel_step: f64) -> DMatrix<f64> {
    let n = x.len();
    let f0 = f(x);
    let mut h = DMatrix::zeros(n, n);
    let steps: Vec<f64> = x.iter().map(|xi| scaled_step(*xi, rel_step)).collect();
    let mut probe = x.to_vec();
    let eval = |probe: &mut Vec<f64>, i: usize, di: f64, j: usize, dj: f64| {
        probe[i] += di;
        probe[j] += dj;
        let v = f(probe);
        probe[i] = x[i];
        probe[j] = x[j];
        v
    };
    for i in 0..n {
        let hi = steps[i];
        let fp = eval(&mut probe, i, hi, i, 0.0);
        let fm = eval(&mut probe, i, -hi, i, 0.0);
        h[(i, i)] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in (i + 1)..n {
            let hj = steps[j];
            let fpp = eval(&mut probe, i, hi, j, hj);
            let fpm = eval(&mut probe, i, hi, j, -hj);
            let fmp = eval(&mut probe, i, -hi, j, hj);
            let fmm = eval(&mut probe, i, -hi, j, -hj);
            let v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

#[derive(Debug, Clone)]
pub struct MinimizeOptions {
    /// Stop when the gradient infinity norm falls below this.
    pub gradient_tolerance: f64,
    /// Stop after two consecutive steps whose relative improvement is below this.
    pub value_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            gradient_tolerance: 1e-6,
            value_tolerance: 1e-12,
            max_iterations: 500,
        }
    }
}

/// Result of a minimization run. `trace` holds the objective after the start
/// and each accepted step; it is non-increasing by construction.
#[derive(Debug, Clone)]
pub struct Optimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Line search could not find an improving step (ended at FD noise floor).
    pub stalled: bool,
    pub trace: Vec<f64>,
}

const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK_FACTOR: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

/// BFGS minimization of `f` from `x0`. The objective may return
/// `f64::INFINITY` to mark invalid regions; the start itself must be valid.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], options: &MinimizeOptions) -> Optimum {
    let n = x0.len();
    let rel = central_step();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = f(x.as_slice());
    let mut trace = vec![fx];
    let fail = |x: DVector<f64>, fx: f64, trace: Vec<f64>, iterations: usize| Optimum {
        x: x.as_slice().to_vec(),
        value: fx,
        gradient_norm: f64::INFINITY,
        iterations,
        converged: false,
        stalled: true,
        trace,
    };
    if !fx.is_finite() {
        return fail(x, fx, trace, 0);
    }
    let mut g = DVector::from_vec(central_gradient(f, x.as_slice(), rel));
    if g.iter().any(|v| !v.is_finite()) {
        return fail(x, fx, trace, 0);
    }

    let mut inv_hessian = DMatrix::<f64>::identity(n, n);
    let mut first_update_pending = true;
    let mut small_improvements = 0usize;
    let mut stalled = false;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        if inf_norm(&g) < options.gradient_tolerance {
            converged = true;
            break;
        }

        let mut direction = -(&inv_hessian * &g);
        let mut slope = g.dot(&direction);
        if slope >= 0.0 {
            // Curvature information went bad; restart from steepest descent.
            inv_hessian = DMatrix::identity(n, n);
            first_update_pending = true;
            direction = -g.clone();
            slope = g.dot(&direction);
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate = &x + &direction * alpha;
            let fc = f(candidate.as_slice());
            if fc.is_finite() && fc <= fx + ARMIJO_C1 * alpha * slope {
                accepted = Some((candidate, fc));
                break;
            }
            alpha *= BACKTRACK_FACTOR;
        }
        let Some((x_new, f_new)) = accepted else {
            stalled = true;
            break;
        };

        let g_new = DVector::from_vec(central_gradient(f, x_new.as_slice(), rel));
        if g_new.iter().any(|v| !v.is_finite()) {
            stalled = true;
            x = x_new;
            fx = f_new;
            trace.push(fx);
            iterations += 1;
            break;
        }

        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-10 * s.norm() * y.norm() {
            if first_update_pending {
                // Nocedal-style initial scaling before the first update.
                let scale = sy / y.dot(&y);
                if scale.is_finite() && scale > 0.0 {
                    inv_hessian = DMatrix::identity(n, n) * scale;
                }
                first_update_pending = false;
            }
            let rho = 1.0 / sy;
            let identity = DMatrix::<f64>::identity(n, n);
            let left = &identity - (&s * y.transpose()) * rho;
            let right = &identity - (&y * s.transpose()) * rho;
            inv_hessian = &left * inv_hessian * &right + (&s * s.transpose()) * rho;
        }

        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(fx);
        iterations += 1;

        if improvement <= options.value_tolerance * (1.0 + fx.abs()) {
            small_improvements += 1;
            if small_improvements >= 2 {
                converged = true;
                break;
            }
        } else {
            small_improvements = 0;
        }
    }

    let gradient_norm = inf_norm(&g);
    if !converged && gradient_norm < options.gradient_tolerance {
        converged = true;
    }
    Optimum {
        x: x.as_slice().to_vec(),
        value: fx,
        gradient_norm,
        iterations,
        converged,
        stalled,
        trace,
    }
}
