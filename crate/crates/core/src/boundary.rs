//! Boundary-function families `g(u; w)`.
//!
//! Two parameterizations of the scalar field whose zero level set is the
//! fitted boundary: a quadratic polynomial (any conic section in 2-D) and a
//! one-hidden-layer tanh network. Both expose evaluation and the exact
//! gradient with respect to a packed parameter vector, which is all the
//! optimizers need.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which boundary family to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFamily {
    /// Quadratic polynomial `u'Au + b'u + c`.
    Qp,
    /// Two-layer network `w2' tanh(W1 u + b1) + b2`.
    Nn,
}

/// Quadratic-polynomial boundary: `g(u) = u'Au + b'u + c` with `A`
/// symmetric. For `m = 2` these are the six conic coefficients.
///
/// The packed parameter vector (for the optimizer) is the upper triangle of
/// `A` row-major, then `b`, then `c` — `m(m+1)/2 + m + 1` entries — so the
/// redundant symmetric copy of each off-diagonal entry is never exposed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpParams {
    #[serde(rename = "dim")]
    m: usize,
    /// Full `m x m` matrix, row-major, kept exactly symmetric.
    a: Vec<f64>,
    b: Vec<f64>,
    c: f64,
}

impl QpParams {
    /// Builds from matrix rows; `a` is symmetrized as `(A + A')/2`, so an
    /// asymmetric input encodes the same quadratic form.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: f64) -> Result<Self> {
        let m = b.len();
        if a.len() != m || a.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidParams(format!(
                "quadratic matrix must be {m}x{m} to match b"
            )));
        }
        let mut flat = vec![0.0; m * m];
        for j in 0..m {
            for k in 0..m {
                flat[j * m + k] = 0.5 * (a[j][k] + a[k][j]);
            }
        }
        if flat.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) || !c.is_finite()
        {
            return Err(Error::InvalidParams(
                "non-finite quadratic coefficient".into(),
            ));
        }
        Ok(Self { m, a: flat, b, c })
    }

    /// Number of packed parameters for dimension `m`.
    pub fn packed_len(m: usize) -> usize {
        m * (m + 1) / 2 + m + 1
    }

    /// Rebuilds from a packed vector (upper triangle of `A`, `b`, `c`).
    pub fn from_packed(m: usize, theta: &[f64]) -> Result<Self> {
        if theta.len() != Self::packed_len(m) {
            return Err(Error::DimMismatch {
                expected: Self::packed_len(m),
                got: theta.len(),
            });
        }
        let mut a = vec![0.0; m * m];
        let mut idx = 0;
        for j in 0..m {
            for k in j..m {
                a[j * m + k] = theta[idx];
                a[k * m + j] = theta[idx];
                idx += 1;
            }
        }
        let b = theta[idx..idx + m].to_vec();
        let c = theta[idx + m];
        Ok(Self { m, a, b, c })
    }

    pub fn to_packed(&self) -> Vec<f64> {
        let m = self.m;
        let mut theta = Vec::with_capacity(Self::packed_len(m));
        for j in 0..m {
            for k in j..m {
                theta.push(self.a[j * m + k]);
            }
        }
        theta.extend_from_slice(&self.b);
        theta.push(self.c);
        theta
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// `u'Au + b'u + c`.
    pub fn eval(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.m, "point dimension mismatch");
        let m = self.m;
        let mut quad = 0.0;
        for j in 0..m {
            let row: f64 = self.a[j * m..(j + 1) * m]
                .iter()
                .zip(u)
                .map(|(a, x)| a * x)
                .sum();
            quad += u[j] * row;
        }
        let lin: f64 = self.b.iter().zip(u).map(|(bj, uj)| bj * uj).sum();
        quad + lin + self.c
    }

    /// Adds `coeff * dg/dtheta` into `acc` (packed layout). Off-diagonal
    /// upper-triangle entries get the factor 2 because each represents the
    /// pair `A_jk = A_kj`.
    pub fn accumulate_grad(&self, u: &[f64], coeff: f64, acc: &mut [f64]) {
        assert_eq!(u.len(), self.m, "point dimension mismatch");
        let m = self.m;
        debug_assert_eq!(acc.len(), Self::packed_len(m));
        let mut idx = 0;
        for j in 0..m {
            for k in j..m {
                let d = if j == k {
                    u[j] * u[j]
                } else {
                    2.0 * u[j] * u[k]
                };
                acc[idx] += coeff * d;
                idx += 1;
            }
        }
        for j in 0..m {
            acc[idx + j] += coeff * u[j];
        }
        acc[idx + m] += coeff;
    }
}

/// Two-layer tanh-network boundary: `g(u) = w2' tanh(W1 u + b1) + b2`.
///
/// Packed layout: `W1` row-major (one row per hidden unit), then `b1`,
/// `w2`, `b2` — `H(m + 2) + 1` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnParams {
    #[serde(rename = "dim")]
    m: usize,
    hidden: usize,
    /// `hidden x m`, row-major.
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl NnParams {
    pub fn new(w1: Vec<Vec<f64>>, b1: Vec<f64>, w2: Vec<f64>, b2: f64) -> Result<Self> {
        let hidden = b1.len();
        if hidden == 0 {
            return Err(Error::InvalidParams(
                "hidden width must be at least 1".into(),
            ));
        }
        if w1.len() != hidden || w2.len() != hidden {
            return Err(Error::InvalidParams(
                "W1 rows, b1 and w2 must share the hidden width".into(),
            ));
        }
        let m = w1[0].len();
        if w1.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidParams("ragged W1".into()));
        }
        let flat: Vec<f64> = w1.into_iter().flatten().collect();
        if flat.iter().any(|v| !v.is_finite())
            || b1.iter().any(|v| !v.is_finite())
            || w2.iter().any(|v| !v.is_finite())
            || !b2.is_finite()
        {
            return Err(Error::InvalidParams("non-finite network weight".into()));
        }
        Ok(Self {
            m,
            hidden,
            w1: flat,
            b1,
            w2,
            b2,
        })
    }

    pub fn packed_len(m: usize, hidden: usize) -> usize {
        hidden * (m + 2) + 1
    }

    pub fn from_packed(m: usize, hidden: usize, theta: &[f64]) -> Result<Self> {
        if theta.len() != Self::packed_len(m, hidden) {
            return Err(Error::DimMismatch {
                expected: Self::packed_len(m, hidden),
                got: theta.len(),
            });
        }
        let w1 = theta[..hidden * m].to_vec();
        let b1 = theta[hidden * m..hidden * (m + 1)].to_vec();
        let w2 = theta[hidden * (m + 1)..hidden * (m + 2)].to_vec();
        let b2 = theta[hidden * (m + 2)];
        Ok(Self {
            m,
            hidden,
            w1,
            b1,
            w2,
            b2,
        })
    }

    pub fn to_packed(&self) -> Vec<f64> {
        let mut theta = Vec::with_capacity(Self::packed_len(self.m, self.hidden));
        theta.extend_from_slice(&self.w1);
        theta.extend_from_slice(&self.b1);
        theta.extend_from_slice(&self.w2);
        theta.push(self.b2);
        theta
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    fn activations(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.m, "point dimension mismatch");
        (0..self.hidden)
            .map(|h| {
                let row = &self.w1[h * self.m..(h + 1) * self.m];
                let pre: f64 = row.iter().zip(u).map(|(w, x)| w * x).sum::<f64>() + self.b1[h];
                pre.tanh()
            })
            .collect()
    }

    /// `w2' tanh(W1 u + b1) + b2`.
    pub fn eval(&self, u: &[f64]) -> f64 {
        let t = self.activations(u);
        self.w2.iter().zip(&t).map(|(w, th)| w * th).sum::<f64>() + self.b2
    }

    /// Adds `coeff * dg/dtheta` into `acc` (packed layout), backpropagating
    /// through the single hidden layer with `tanh' = 1 - tanh^2`.
    pub fn accumulate_grad(&self, u: &[f64], coeff: f64, acc: &mut [f64]) {
        let t = self.activations(u);
        let (m, hidden) = (self.m, self.hidden);
        debug_assert_eq!(acc.len(), Self::packed_len(m, hidden));
        for h in 0..hidden {
            let d = coeff * self.w2[h] * (1.0 - t[h] * t[h]);
            for (j, &uj) in u.iter().enumerate() {
                acc[h * m + j] += d * uj;
            }
            acc[hidden * m + h] += d;
            acc[hidden * (m + 1) + h] += coeff * t[h];
        }
        acc[hidden * (m + 2)] += coeff;
    }
}

/// A fitted or candidate boundary of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BoundaryParams {
    Qp(QpParams),
    Nn(NnParams),
}

impl BoundaryParams {
    pub fn family(&self) -> BoundaryFamily {
        match self {
            Self::Qp(_) => BoundaryFamily::Qp,
            Self::Nn(_) => BoundaryFamily::Nn,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Qp(p) => p.dim(),
            Self::Nn(p) => p.dim(),
        }
    }

    pub fn packed_len(&self) -> usize {
        match self {
            Self::Qp(p) => QpParams::packed_len(p.dim()),
            Self::Nn(p) => NnParams::packed_len(p.dim(), p.hidden()),
        }
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            Self::Qp(p) => p.eval(u),
            Self::Nn(p) => p.eval(u),
        }
    }

    pub fn accumulate_grad(&self, u: &[f64], coeff: f64, acc: &mut [f64]) {
        match self {
            Self::Qp(p) => p.accumulate_grad(u, coeff, acc),
            Self::Nn(p) => p.accumulate_grad(u, coeff, acc),
        }
    }

    /// Full parameter gradient at one point (packed layout).
    pub fn grad_params(&self, u: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.packed_len()];
        self.accumulate_grad(u, 1.0, &mut acc);
        acc
    }

    pub fn to_packed(&self) -> Vec<f64> {
        match self {
            Self::Qp(p) => p.to_packed(),
            Self::Nn(p) => p.to_packed(),
        }
    }

    /// Rebuilds parameters of the same family/shape from a packed vector.
    pub fn with_packed(&self, theta: &[f64]) -> Result<Self> {
        match self {
            Self::Qp(p) => Ok(Self::Qp(QpParams::from_packed(p.dim(), theta)?)),
            Self::Nn(p) => Ok(Self::Nn(NnParams::from_packed(p.dim(), p.hidden(), theta)?)),
        }
    }
}

/// Initialization scheme for one optimizer restart (meaningful for the QP
/// family; the network always uses the fan-in scheme below).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    /// Hyperplane through the standardized origin: `A = 0`, `c = 0`, and
    /// `b` a unit direction — the `2m` signed coordinate axes for
    /// `index < 2m`, a random unit direction beyond that.
    AxisLines { index: usize },
    /// Every packed parameter drawn from `Normal(0, 0.5)`.
    Random,
}

fn random_unit_direction<R: Rng>(m: usize, rng: &mut R) -> Vec<f64> {
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    loop {
        let v: Vec<f64> = (0..m).map(|_| std_normal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Draws initial boundary parameters for one restart.
///
/// QP follows `strategy`; the network ignores it and draws `W1` and `w2`
/// from `Normal(0, 1/sqrt(fan_in))` with zero biases, so `g(0) = 0` exactly
/// and the initial surface is centered on the standardized data.
pub fn init_params<R: Rng>(
    family: BoundaryFamily,
    m: usize,
    hidden: usize,
    strategy: InitStrategy,
    rng: &mut R,
) -> BoundaryParams {
    match family {
        BoundaryFamily::Qp => {
            let theta = match strategy {
                InitStrategy::AxisLines { index } => {
                    let b = if index < 2 * m {
                        let mut b = vec![0.0; m];
                        b[index % m] = if index < m { 1.0 } else { -1.0 };
                        b
                    } else {
                        random_unit_direction(m, rng)
                    };
                    let mut theta = vec![0.0; QpParams::packed_len(m)];
                    let tri = m * (m + 1) / 2;
                    theta[tri..tri + m].copy_from_slice(&b);
                    theta
                }
                InitStrategy::Random => {
                    let dist = Normal::new(0.0, 0.5).unwrap();
                    (0..QpParams::packed_len(m))
                        .map(|_| dist.sample(rng))
                        .collect()
                }
            };
            BoundaryParams::Qp(QpParams::from_packed(m, &theta).expect("packed length"))
        }
        BoundaryFamily::Nn => {
            let w1_dist = Normal::new(0.0, 1.0 / (m as f64).sqrt()).unwrap();
            let w2_dist = Normal::new(0.0, 1.0 / (hidden as f64).sqrt()).unwrap();
            let w1: Vec<f64> = (0..hidden * m).map(|_| w1_dist.sample(rng)).collect();
            let w2: Vec<f64> = (0..hidden).map(|_| w2_dist.sample(rng)).collect();
            let mut theta = Vec::with_capacity(NnParams::packed_len(m, hidden));
            theta.extend_from_slice(&w1);
            theta.extend(std::iter::repeat_n(0.0, hidden)); // b1
            theta.extend_from_slice(&w2);
            theta.push(0.0); // b2
            BoundaryParams::Nn(NnParams::from_packed(m, hidden, &theta).expect("packed length"))
        }
    }
}
