//! Maximizers for the softened profile log-likelihood.
//!
//! BFGS with a strong-Wolfe line search (the default for the quadratic
//! boundary, whose objective is smooth and low-dimensional) and ADAM (the
//! default for the network boundary, where the landscape is rough and the
//! parameter count larger), plus a deterministic multi-start driver that
//! runs seeded restarts in parallel and keeps the best.
//!
//! Both optimizers work on a plain packed parameter vector and a closure
//! returning `(value, gradient)`; they maximize, negating internally where
//! the textbook formulation minimizes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{init_params, BoundaryFamily, BoundaryParams, InitStrategy};
use crate::grid::{EvalGrid, TransformSpec};
use crate::likelihood::{objective_and_gradient, PENALTY_OBJECTIVE};
use crate::{Error, Result};

/// Which optimizer runs the restarts (each family has a natural default).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Bfgs,
    Adam,
}

/// Tuning knobs shared by both optimizers and the multi-start driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimOptions {
    pub max_iters_bfgs: usize,
    pub max_iters_adam: usize,
    /// Sup-norm gradient threshold for BFGS convergence.
    pub grad_tol: f64,
    /// Objective-improvement threshold (relative to `1 + |value|`).
    pub obj_tol: f64,
    pub adam_step: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// ADAM stops early after this many consecutive steps without an
    /// improvement of at least `obj_tol`.
    pub adam_patience: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Hidden width for network-boundary initialization.
    pub hidden: usize,
    /// Overrides the family's default optimizer when set.
    pub optimizer: Option<OptimizerKind>,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            max_iters_bfgs: 500,
            max_iters_adam: 2000,
            grad_tol: 1e-6,
            obj_tol: 1e-10,
            adam_step: 1e-2,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            adam_patience: 200,
            restarts: 16,
            seed: 0,
            hidden: 32,
            optimizer: None,
        }
    }
}

/// Why an optimizer run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    GradTol,
    ObjTol,
    MaxIters,
    /// The run ended on the degenerate-partition penalty plateau.
    Degenerate,
}

/// Outcome of a single optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimRun {
    pub theta: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub reason: TerminationReason,
    /// Objective value at the start and after each accepted iterate;
    /// non-decreasing for BFGS by construction.
    pub trace: Vec<f64>,
}

fn reason_for_final(loglik: f64, reason: TerminationReason) -> TerminationReason {
    // Anything still at (or below half of) the penalty level never left the
    // degenerate plateau.
    if loglik <= PENALTY_OBJECTIVE / 2.0 {
        TerminationReason::Degenerate
    } else {
        reason
    }
}

/// Strong-Wolfe line search for minimization along `p` from `0`, given
/// `phi(alpha)` returning value and directional derivative. Returns the
/// accepted step, or `None` when no acceptable step exists (the caller
/// treats that as convergence).
#[allow(clippy::too_many_arguments)]
fn wolfe_search<F: FnMut(f64) -> (f64, f64)>(
    mut phi: F,
    phi0: f64,
    dphi0: f64,
    c1: f64,
    c2: f64,
) -> Option<(f64, f64, f64)> {
    const MAX_BRACKET: usize = 20;
    const MAX_ZOOM: usize = 30;
    const ALPHA_MAX: f64 = 1e6;

    fn zoom<F: FnMut(f64) -> (f64, f64)>(
        phi: &mut F,
        phi0: f64,
        dphi0: f64,
        c1: f64,
        c2: f64,
        mut lo: f64,
        mut phi_lo: f64,
        mut hi: f64,
    ) -> Option<(f64, f64, f64)> {
        for _ in 0..MAX_ZOOM {
            let a = 0.5 * (lo + hi);
            let (v, d) = phi(a);
            if v > phi0 + c1 * a * dphi0 || v >= phi_lo {
                hi = a;
            } else {
                if d.abs() <= -c2 * dphi0 {
                    return Some((a, v, d));
                }
                if d * (hi - lo) >= 0.0 {
                    hi = lo;
                }
                lo = a;
                phi_lo = v;
            }
            if (hi - lo).abs() < 1e-16 * lo.abs().max(1.0) {
                break;
            }
        }
        // Sufficient decrease alone is still a usable step.
        if lo > 0.0 && phi_lo < phi0 + c1 * lo * dphi0 {
            let (v, d) = phi(lo);
            return Some((lo, v, d));
        }
        None
    }

    let mut a_prev = 0.0;
    let mut phi_prev = phi0;
    let mut a = 1.0;
    for i in 0..MAX_BRACKET {
        let (v, d) = phi(a);
        if v > phi0 + c1 * a * dphi0 || (i > 0 && v >= phi_prev) {
            return zoom(&mut phi, phi0, dphi0, c1, c2, a_prev, phi_prev, a);
        }
        if d.abs() <= -c2 * dphi0 {
            return Some((a, v, d));
        }
        if d >= 0.0 {
            return zoom(&mut phi, phi0, dphi0, c1, c2, a, v, a_prev);
        }
        a_prev = a;
        phi_prev = v;
        a = (2.0 * a).min(ALPHA_MAX);
        if a_prev >= ALPHA_MAX {
            break;
        }
    }
    None
}

/// BFGS ascent with a strong-Wolfe line search (c1 = 1e-4, c2 = 0.9).
///
/// The inverse-Hessian approximation starts at the identity, is rescaled
/// after the first accepted step, and skips updates whose curvature
/// `s'y` is not safely positive. The returned value never falls below the
/// initial objective.
pub fn bfgs_maximize<F: FnMut(&[f64]) -> (f64, Vec<f64>)>(
    mut objective: F,
    init: &[f64],
    opts: &OptimOptions,
) -> Result<OptimRun> {
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    const CURVATURE_MIN: f64 = 1e-10;

    let p = init.len();
    // Work in minimization form: phi = -f, grad_phi = -grad_f.
    let mut eval = |theta: &[f64]| -> Result<(f64, Vec<f64>)> {
        let (f, mut grad) = objective(theta);
        if !f.is_finite() {
            return Err(Error::NonFiniteObjective);
        }
        for d in &mut grad {
            *d = -*d;
        }
        Ok((-f, grad))
    };

    let mut x = init.to_vec();
    let (mut fx, mut gx) = eval(&x)?;
    let mut trace = vec![-fx];
    // Row-major inverse-Hessian approximation.
    let mut h = vec![0.0; p * p];
    for j in 0..p {
        h[j * p + j] = 1.0;
    }
    let mut first_update = true;

    let mut iterations = 0;
    let mut reason = TerminationReason::MaxIters;
    for _ in 0..opts.max_iters_bfgs {
        if gx.iter().all(|d| d.abs() <= opts.grad_tol) {
            reason = TerminationReason::GradTol;
            break;
        }
        // Search direction -H g, falling back to steepest descent if the
        // approximation has lost positive definiteness.
        let mut dir = vec![0.0; p];
        for j in 0..p {
            let mut acc = 0.0;
            for k in 0..p {
                acc += h[j * p + k] * gx[k];
            }
            dir[j] = -acc;
        }
        let mut dphi0: f64 = dir.iter().zip(&gx).map(|(d, g)| d * g).sum();
        if dphi0 >= 0.0 {
            for j in 0..p {
                for k in 0..p {
                    h[j * p + k] = if j == k { 1.0 } else { 0.0 };
                }
            }
            first_update = true;
            for (d, g) in dir.iter_mut().zip(&gx) {
                *d = -*g;
            }
            dphi0 = -gx.iter().map(|g| g * g).sum::<f64>();
            if dphi0 == 0.0 {
                reason = TerminationReason::GradTol;
                break;
            }
        }

        let mut probe_grad: Vec<f64> = Vec::new();
        let mut probe_err = None;
        let step = {
            let line = |alpha: f64| -> (f64, f64) {
                let xa: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + alpha * di).collect();
                match eval(&xa) {
                    Ok((v, g)) => {
                        let d = g.iter().zip(&dir).map(|(gi, di)| gi * di).sum();
                        probe_grad = g;
                        (v, d)
                    }
                    Err(e) => {
                        probe_err = Some(e);
                        (f64::INFINITY, f64::INFINITY)
                    }
                }
            };
            wolfe_search(line, fx, dphi0, C1, C2)
        };
        if let Some(e) = probe_err {
            return Err(e);
        }
        let Some((alpha, f_new, _)) = step else {
            // No acceptable step along any direction we can build: treat as
            // converged on the objective.
            reason = TerminationReason::ObjTol;
            break;
        };
        let x_new: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + alpha * di).collect();
        // The last line-search evaluation was at the accepted alpha, so the
        // stored gradient matches x_new; re-evaluate defensively otherwise.
        let g_new = if probe_grad.len() == p {
            probe_grad
        } else {
            eval(&x_new)?.1
        };

        iterations += 1;
        trace.push(-f_new);
        let improvement = fx - f_new;

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&gx).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > CURVATURE_MIN {
            if first_update {
                // Scale the identity to the first curvature estimate before
                // the first update (Nocedal & Wright eq. 6.20).
                let yy: f64 = y.iter().map(|v| v * v).sum();
                if yy > 0.0 {
                    let scale = sy / yy;
                    for j in 0..p {
                        for k in 0..p {
                            h[j * p + k] = if j == k { scale } else { 0.0 };
                        }
                    }
                }
                first_update = false;
            }
            let rho = 1.0 / sy;
            let mut hy = vec![0.0; p];
            for j in 0..p {
                let mut acc = 0.0;
                for k in 0..p {
                    acc += h[j * p + k] * y[k];
                }
                hy[j] = acc;
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            let coef = rho * (1.0 + rho * yhy);
            for j in 0..p {
                for k in 0..p {
                    h[j * p + k] += coef * s[j] * s[k] - rho * (s[j] * hy[k] + hy[j] * s[k]);
                }
            }
        }

        x = x_new;
        fx = f_new;
        gx = g_new;

        if improvement.abs() <= opts.obj_tol * (1.0 + fx.abs()) {
            reason = TerminationReason::ObjTol;
            break;
        }
    }
    if reason == TerminationReason::MaxIters && gx.iter().all(|d| d.abs() <= opts.grad_tol) {
        reason = TerminationReason::GradTol;
    }

    let loglik = -fx;
    Ok(OptimRun {
        theta: x,
        loglik,
        iterations,
        reason: reason_for_final(loglik, reason),
        trace,
    })
}

/// ADAM ascent with bias correction, returning the best-seen iterate.
///
/// Stops at `max_iters_adam` or once the best objective has not improved
/// by `obj_tol` for `adam_patience` consecutive steps.
pub fn adam_maximize<F: FnMut(&[f64]) -> (f64, Vec<f64>)>(
    mut objective: F,
    init: &[f64],
    opts: &OptimOptions,
) -> Result<OptimRun> {
    let p = init.len();
    let mut theta = init.to_vec();
    let (f0, mut grad) = objective(&theta);
    if !f0.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    let mut best = f0;
    let mut best_theta = theta.clone();
    let mut trace = vec![f0];

    let mut m = vec![0.0; p];
    let mut v = vec![0.0; p];
    let mut stall = 0usize;
    let mut iterations = 0;
    let mut reason = TerminationReason::MaxIters;
    for t in 1..=opts.max_iters_adam {
        for j in 0..p {
            m[j] = opts.adam_beta1 * m[j] + (1.0 - opts.adam_beta1) * grad[j];
            v[j] = opts.adam_beta2 * v[j] + (1.0 - opts.adam_beta2) * grad[j] * grad[j];
            let m_hat = m[j] / (1.0 - opts.adam_beta1.powi(t as i32));
            let v_hat = v[j] / (1.0 - opts.adam_beta2.powi(t as i32));
            theta[j] += opts.adam_step * m_hat / (v_hat.sqrt() + opts.adam_epsilon);
        }
        let (f, g) = objective(&theta);
        if !f.is_finite() {
            return Err(Error::NonFiniteObjective);
        }
        grad = g;
        iterations = t;
        trace.push(f);
        if f > best + opts.obj_tol {
            stall = 0;
        } else {
            stall += 1;
        }
        if f > best {
            best = f;
            best_theta.copy_from_slice(&theta);
        }
        if stall >= opts.adam_patience {
            reason = TerminationReason::ObjTol;
            break;
        }
    }

    Ok(OptimRun {
        theta: best_theta,
        loglik: best,
        iterations,
        reason: reason_for_final(best, reason),
        trace,
    })
}

/// One restart's bookkeeping inside a [`FitResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub index: usize,
    /// Seed of this restart's private RNG, derived from `(seed, index)`.
    pub init_seed: u64,
    pub loglik: f64,
    pub iterations: usize,
    pub reason: TerminationReason,
}

/// A fitted boundary with its restart history and the coordinate transform
/// it was fitted under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: BoundaryFamily,
    pub params: BoundaryParams,
    pub loglik: f64,
    pub restarts: Vec<RestartRecord>,
    pub transform: TransformSpec,
}

/// SplitMix64-style mixer: gives each restart an independent, reproducible
/// stream regardless of execution order.
fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E3779B97F4A7C15)
        .wrapping_add(index.wrapping_mul(0xD1B54A32D192ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Fits a boundary of `family` to the (transformed) grid with seeded
/// multi-start: QP restarts begin at the signed-axis hyperplanes and then
/// random draws, network restarts at fan-in-scaled random weights. Restarts
/// run in parallel; the best non-degenerate restart wins, with ties going
/// to the lower index. The result is a pure function of
/// `(grid, family, opts, transform)`.
pub fn multi_start_fit(
    grid: &EvalGrid,
    family: BoundaryFamily,
    opts: &OptimOptions,
    transform: &TransformSpec,
) -> Result<FitResult> {
    assert!(opts.restarts >= 1, "restarts must be at least 1");
    if transform.dim() != grid.dim() {
        return Err(Error::DimMismatch {
            expected: grid.dim(),
            got: transform.dim(),
        });
    }
    let m = grid.dim();
    let optimizer = opts.optimizer.unwrap_or(match family {
        BoundaryFamily::Qp => OptimizerKind::Bfgs,
        BoundaryFamily::Nn => OptimizerKind::Adam,
    });

    let runs: Result<Vec<(RestartRecord, BoundaryParams)>> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let init_seed = derive_seed(opts.seed, r as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(init_seed);
            let strategy = if r < 2 * m {
                InitStrategy::AxisLines { index: r }
            } else {
                InitStrategy::Random
            };
            let params = init_params(family, m, opts.hidden, strategy, &mut rng);
            let init = params.to_packed();
            let objective = |theta: &[f64]| -> (f64, Vec<f64>) {
                let candidate = params.with_packed(theta).expect("packed length fixed");
                objective_and_gradient(grid, &candidate)
            };
            let run = match optimizer {
                OptimizerKind::Bfgs => bfgs_maximize(objective, &init, opts)?,
                OptimizerKind::Adam => adam_maximize(objective, &init, opts)?,
            };
            let record = RestartRecord {
                index: r,
                init_seed,
                loglik: run.loglik,
                iterations: run.iterations,
                reason: run.reason,
            };
            Ok((
                record,
                params.with_packed(&run.theta).expect("packed length fixed"),
            ))
        })
        .collect();
    let runs = runs?;

    let mut best: Option<usize> = None;
    for (i, (record, _)) in runs.iter().enumerate() {
        if record.reason == TerminationReason::Degenerate {
            continue;
        }
        // Strict comparison keeps the lowest index on ties.
        if best.is_none_or(|b| record.loglik > runs[b].0.loglik) {
            best = Some(i);
        }
    }
    let Some(best) = best else {
        return Err(Error::AllRestartsDegenerate(opts.restarts));
    };
    let params = runs[best].1.clone();
    let loglik = runs[best].0.loglik;
    Ok(FitResult {
        family,
        params,
        loglik,
        restarts: runs.into_iter().map(|(record, _)| record).collect(),
        transform: transform.clone(),
    })
}
