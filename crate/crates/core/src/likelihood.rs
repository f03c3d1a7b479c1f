//! The softened profile log-likelihood core.
//!
//! For a candidate boundary, each point gets a sigmoid weight
//! `s_i = sigmoid(g(u_i))` toward side 2. The two side means and the pooled
//! variance are profiled out in closed form, leaving an objective that
//! depends on the boundary parameters only through the weights:
//!
//! ```text
//! loglik = -(n/2) * ln(2 * pi * sigma2_hat) - n/2,
//! sigma2_hat = (RSS1 + RSS2) / n.
//! ```
//!
//! The module also carries the explicit two-sum form of the objective
//! (used as an independent oracle for the closed form), the hard-assignment
//! variant, and the exhaustive 1-D split search that the soft method must
//! reduce to in one dimension.

use crate::boundary::BoundaryParams;
use crate::grid::EvalGrid;
use crate::{Error, Result};

/// Minimum effective mass (in points) a side may hold before the partition
/// counts as degenerate: half a point.
pub const MASS_EPSILON: f64 = 0.5;

/// Objective value substituted for degenerate partitions inside the
/// optimizers, so line searches can step back instead of erroring.
pub const PENALTY_OBJECTIVE: f64 = -1e15;

/// Numerically stable logistic function, clamped to the open interval
/// (0, 1): saturation returns the nearest representable value instead of
/// exactly 0 or 1, so `ln` and `1 - s` stay usable downstream.
pub fn sigmoid(x: f64) -> f64 {
    let s = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Per-point side-2 weights `s_i` with the two effective masses.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftWeights {
    s: Vec<f64>,
    mass1: f64,
    mass2: f64,
}

impl SoftWeights {
    /// Weights from boundary values: `s_i = sigmoid(g_i)`.
    pub fn from_g(g: &[f64]) -> Result<Self> {
        if let Some(row) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                column: "g".into(),
                row,
            });
        }
        Self::from_s(g.iter().map(|&v| sigmoid(v)).collect())
    }

    /// Wraps explicit weights; each must lie strictly inside (0, 1).
    pub fn from_s(s: Vec<f64>) -> Result<Self> {
        if let Some(row) = s
            .iter()
            .position(|v| !v.is_finite() || *v <= 0.0 || *v >= 1.0)
        {
            return Err(Error::NonFiniteValue {
                column: "s".into(),
                row,
            });
        }
        let mass2: f64 = s.iter().sum();
        let mass1 = s.len() as f64 - mass2;
        Ok(Self { s, mass1, mass2 })
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Effective number of points on side 1, `sum(1 - s_i)`.
    pub fn mass1(&self) -> f64 {
        self.mass1
    }

    /// Effective number of points on side 2, `sum(s_i)`.
    pub fn mass2(&self) -> f64 {
        self.mass2
    }
}

/// Floor for the pooled variance estimate, scaled to the data so perfectly
/// separable metrics do not send the objective to `ln(0)`.
pub fn sigma2_floor(z: &[f64]) -> f64 {
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    1e-12 * (1.0 + var)
}

/// Profiled-out estimates for one candidate boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftFitStats {
    /// Weighted mean of side 1 (the `g <= 0` side).
    pub mu1: f64,
    /// Weighted mean of side 2.
    pub mu2: f64,
    pub rss1: f64,
    pub rss2: f64,
    /// Pooled variance `(rss1 + rss2)/n`, floored at [`sigma2_floor`].
    pub sigma2: f64,
    pub loglik: f64,
}

/// Weighted two-group Gaussian MLEs and the closed-form log-likelihood.
///
/// Errors with [`Error::DegeneratePartition`] when either side's effective
/// mass falls below [`MASS_EPSILON`].
pub fn soft_mle(weights: &SoftWeights, z: &[f64]) -> Result<SoftFitStats> {
    assert_eq!(weights.len(), z.len(), "weights/metric length mismatch");
    let n = z.len() as f64;
    let (m1, m2) = (weights.mass1(), weights.mass2());
    let mass = m1.min(m2);
    if mass < MASS_EPSILON {
        return Err(Error::DegeneratePartition {
            mass,
            floor: MASS_EPSILON,
        });
    }
    let s = weights.s();
    let mut sum1 = 0.0;
    let mut sum2 = 0.0;
    for (si, zi) in s.iter().zip(z) {
        sum1 += (1.0 - si) * zi;
        sum2 += si * zi;
    }
    let mu1 = sum1 / m1;
    let mu2 = sum2 / m2;
    let mut rss1 = 0.0;
    let mut rss2 = 0.0;
    for (si, zi) in s.iter().zip(z) {
        rss1 += (1.0 - si) * (zi - mu1) * (zi - mu1);
        rss2 += si * (zi - mu2) * (zi - mu2);
    }
    let sigma2 = ((rss1 + rss2) / n).max(sigma2_floor(z));
    let loglik = -(n / 2.0) * (2.0 * std::f64::consts::PI * sigma2).ln() - n / 2.0;
    Ok(SoftFitStats {
        mu1,
        mu2,
        rss1,
        rss2,
        sigma2,
        loglik,
    })
}

/// The explicit two-sum form of the softened objective: the weighted sum of
/// per-side Gaussian log-densities at the profiled-out estimates. Kept as a
/// verification oracle for the closed form in [`soft_mle`]; the two agree
/// to rounding whenever the variance floor is inactive.
pub fn soft_profile_loglik_twoterm(weights: &SoftWeights, z: &[f64]) -> Result<f64> {
    let stats = soft_mle(weights, z)?;
    let norm = -0.5 * (2.0 * std::f64::consts::PI * stats.sigma2).ln();
    let mut total = 0.0;
    for (si, zi) in weights.s().iter().zip(z) {
        let d1 = zi - stats.mu1;
        let d2 = zi - stats.mu2;
        total += (1.0 - si) * (norm - d1 * d1 / (2.0 * stats.sigma2));
        total += si * (norm - d2 * d2 / (2.0 * stats.sigma2));
    }
    Ok(total)
}

/// Hard-assignment profile log-likelihood: the limit of the softened form
/// with weights in {0, 1}. `on_side2[i]` marks the points of side 2.
pub fn hard_profile_loglik(on_side2: &[bool], z: &[f64]) -> Result<f64> {
    assert_eq!(on_side2.len(), z.len(), "assignment/metric length mismatch");
    let n2 = on_side2.iter().filter(|&&b| b).count();
    let n1 = z.len() - n2;
    if n1 == 0 || n2 == 0 {
        return Err(Error::EmptySide);
    }
    let n = z.len() as f64;
    let mut sum1 = 0.0;
    let mut sum2 = 0.0;
    for (&b, zi) in on_side2.iter().zip(z) {
        if b {
            sum2 += zi;
        } else {
            sum1 += zi;
        }
    }
    let mu1 = sum1 / n1 as f64;
    let mu2 = sum2 / n2 as f64;
    let mut rss = 0.0;
    for (&b, zi) in on_side2.iter().zip(z) {
        let d = zi - if b { mu2 } else { mu1 };
        rss += d * d;
    }
    let sigma2 = (rss / n).max(sigma2_floor(z));
    Ok(-(n / 2.0) * (2.0 * std::f64::consts::PI * sigma2).ln() - n / 2.0)
}

/// Result of the exhaustive 1-D split search.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    /// Threshold: the largest coordinate assigned to side 1.
    pub omega: f64,
    /// Number of (sorted) points on side 1.
    pub split_index: usize,
    /// Log-likelihood of every candidate split, in sorted order.
    pub profile: Vec<f64>,
}

/// Exhaustive 1-D change-point search: evaluates the hard profile
/// log-likelihood at every split of the sorted coordinates and returns the
/// argmax, breaking ties toward the smaller threshold.
pub fn grid_search_split_1d(u: &[f64], z: &[f64]) -> Result<SplitResult> {
    assert_eq!(u.len(), z.len(), "coordinate/metric length mismatch");
    let n = u.len();
    if n < 4 {
        return Err(Error::TooFewPoints(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| u[a].total_cmp(&u[b]));
    let sorted_u: Vec<f64> = order.iter().map(|&i| u[i]).collect();
    let sorted_z: Vec<f64> = order.iter().map(|&i| z[i]).collect();
    if sorted_u.first() == sorted_u.last() {
        return Err(Error::NoDistinctSplit);
    }
    let mut profile = Vec::with_capacity(n - 1);
    let mut best = f64::NEG_INFINITY;
    let mut best_k = 1;
    for k in 1..n {
        let side2: Vec<bool> = (0..n).map(|i| i >= k).collect();
        let ll = hard_profile_loglik(&side2, &sorted_z)?;
        if ll > best {
            best = ll;
            best_k = k;
        }
        profile.push(ll);
    }
    Ok(SplitResult {
        omega: sorted_u[best_k - 1],
        split_index: best_k,
        profile,
    })
}

/// The optimizer-facing objective: softened profile log-likelihood of the
/// boundary on the (transformed) grid, and its exact gradient with respect
/// to the packed boundary parameters.
///
/// Since the side means and pooled variance maximize the inner problem,
/// the gradient only flows through the weights (envelope form):
///
/// ```text
/// dL/dw_k = sum_i s_i (1 - s_i) [(z_i - mu1)^2 - (z_i - mu2)^2] / (2 sigma2)
///           * dg(u_i)/dw_k
/// ```
///
/// Degenerate candidates — a side with effective mass below
/// [`MASS_EPSILON`], or a non-finite boundary value — yield the finite
/// penalty ([`PENALTY_OBJECTIVE`], zero gradient) instead of an error, so
/// the optimization landscape is total.
pub fn objective_and_gradient(grid: &EvalGrid, params: &BoundaryParams) -> (f64, Vec<f64>) {
    let p = params.packed_len();
    let g: Vec<f64> = grid.points().map(|u| params.eval(u)).collect();
    if g.iter().any(|v| !v.is_finite()) {
        return (PENALTY_OBJECTIVE, vec![0.0; p]);
    }
    let weights = SoftWeights::from_g(&g).expect("finite g checked above");
    let stats = match soft_mle(&weights, grid.metrics()) {
        Ok(stats) => stats,
        Err(_) => return (PENALTY_OBJECTIVE, vec![0.0; p]),
    };
    let mut grad = vec![0.0; p];
    let z = grid.metrics();
    for (i, u) in grid.points().enumerate() {
        let si = weights.s()[i];
        let d1 = z[i] - stats.mu1;
        let d2 = z[i] - stats.mu2;
        let coeff = si * (1.0 - si) * (d1 * d1 - d2 * d2) / (2.0 * stats.sigma2);
        if coeff != 0.0 {
            params.accumulate_grad(u, coeff, &mut grad);
        }
    }
    (stats.loglik, grad)
}
