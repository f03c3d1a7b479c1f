//! Central finite-difference gradient checking.
//!
//! Used by the unit and acceptance tests to validate every analytic
//! gradient in the crate; exposed publicly so downstream experiments can
//! check custom objectives the same way.

/// Central-difference gradient of `f` at `theta` with step `h`:
/// `(f(theta + h e_k) - f(theta - h e_k)) / 2h` per coordinate.
pub fn central_fd<F: FnMut(&[f64]) -> f64>(mut f: F, theta: &[f64], h: f64) -> Vec<f64> {
    let mut work = theta.to_vec();
    (0..theta.len())
        .map(|k| {
            let orig = work[k];
            work[k] = orig + h;
            let up = f(&work);
            work[k] = orig - h;
            let down = f(&work);
            work[k] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Worst per-component relative error between two gradients, with the
/// denominator floored at 1 so near-zero components compare absolutely.
pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1.0))
        .fold(0.0, f64::max)
}
