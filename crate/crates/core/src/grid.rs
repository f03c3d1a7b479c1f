//! Evaluation grids: the set of tried configurations and their metric
//! values, CSV ingestion, the log-standardize coordinate transform and its
//! inverse, and a synthetic-grid generator used by the test suites.

use std::io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::boundary::QpParams;
use crate::{Error, Result};

/// Whether lower or higher metric values are favorable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Lower metric values are better (losses, error rates, BIC).
    MinimizeIsGood,
    /// Higher metric values are better (accuracy, likelihood).
    MaximizeIsGood,
}

/// A set of `n` evaluated configurations in `R^m` with one metric value each.
///
/// Immutable after construction; all fitting code shares it by reference.
/// Points need not form a lattice and duplicates are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    dim: usize,
    /// Row-major `n * dim` coordinates.
    coords: Vec<f64>,
    metrics: Vec<f64>,
    names: Vec<String>,
    direction: Direction,
}

impl EvalGrid {
    /// Builds a grid from per-point coordinate vectors.
    ///
    /// Requires at least 4 points (one effective point per side plus room
    /// to estimate a variance), finite coordinates and metrics, and
    /// consistent dimensions.
    pub fn new(
        points: Vec<Vec<f64>>,
        metrics: Vec<f64>,
        names: Vec<String>,
        direction: Direction,
    ) -> Result<Self> {
        let n = points.len();
        if n < 4 {
            return Err(Error::TooFewPoints(n));
        }
        let dim = names.len();
        let mut coords = Vec::with_capacity(n * dim);
        for (row, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            for (j, &v) in p.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue {
                        column: names[j].clone(),
                        row,
                    });
                }
                coords.push(v);
            }
        }
        if metrics.len() != n {
            return Err(Error::DimMismatch {
                expected: n,
                got: metrics.len(),
            });
        }
        if let Some(row) = metrics.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFiniteValue {
                column: "<metric>".into(),
                row,
            });
        }
        Ok(Self {
            dim,
            coords,
            metrics,
            names,
            direction,
        })
    }

    pub fn len(&self) -> usize {
        self.metrics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metrics.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn metrics(&self) -> &[f64] {
        &self.metrics
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Per-dimension `(min, max)` over all points.
    pub fn data_range(&self) -> Vec<(f64, f64)> {
        let mut range = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for p in self.points() {
            for (j, &v) in p.iter().enumerate() {
                range[j].0 = range[j].0.min(v);
                range[j].1 = range[j].1.max(v);
            }
        }
        range
    }

    /// True when every metric value is identical.
    pub fn metric_is_constant(&self) -> bool {
        self.metrics.windows(2).all(|w| w[0] == w[1])
    }
}

/// Reads an evaluation grid from CSV. The header row is required; the
/// `metric_column` holds the metric and every other column is a coordinate,
/// in file order.
pub fn load_grid<R: io::Read>(
    source: R,
    metric_column: &str,
    direction: Direction,
) -> Result<EvalGrid> {
    load_grid_ignoring(source, metric_column, direction, &[])
}

/// Like [`load_grid`] but skipping the named non-coordinate columns
/// (e.g. the `label` column written by the synthetic generator).
pub fn load_grid_ignoring<R: io::Read>(
    source: R,
    metric_column: &str,
    direction: Direction,
    ignore: &[&str],
) -> Result<EvalGrid> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let header = reader.headers()?.clone();
    let metric_idx = header
        .iter()
        .position(|h| h == metric_column)
        .ok_or_else(|| Error::MissingColumn(metric_column.to_string()))?;
    let coord_idx: Vec<usize> = (0..header.len())
        .filter(|&j| j != metric_idx && !ignore.contains(&&header[j]))
        .collect();
    let names: Vec<String> = coord_idx.iter().map(|&j| header[j].to_string()).collect();

    let mut points = Vec::new();
    let mut metrics = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |j: usize| -> Result<f64> {
            let cell = record.get(j).unwrap_or("");
            let v: f64 = cell.trim().parse().map_err(|_| Error::NonNumericCell {
                column: header[j].to_string(),
                row,
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    column: header[j].to_string(),
                    row,
                });
            }
            Ok(v)
        };
        let mut p = Vec::with_capacity(coord_idx.len());
        for &j in &coord_idx {
            p.push(parse(j)?);
        }
        points.push(p);
        metrics.push(parse(metric_idx)?);
    }
    EvalGrid::new(points, metrics, names, direction)
}

/// Per-dimension choice of coordinate transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformMode {
    /// Natural log, then standardize to zero mean and unit standard deviation.
    LogStd,
    /// Leave the coordinate untouched.
    Passthrough,
}

/// Fitted per-dimension transform constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DimTransform {
    /// `v = (ln u - mean) / sd`; constants are in natural-log units.
    LogStd {
        mean: f64,
        sd: f64,
    },
    Passthrough,
}

/// The coordinate transform fitted on a grid, applicable to any point of
/// the same dimension and exactly invertible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub dims: Vec<DimTransform>,
}

impl TransformSpec {
    /// Identity transform in `m` dimensions.
    pub fn passthrough(m: usize) -> Self {
        Self {
            dims: vec![DimTransform::Passthrough; m],
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Maps a point from user units to transformed units.
    pub fn forward_point(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dims.len() {
            return Err(Error::DimMismatch {
                expected: self.dims.len(),
                got: u.len(),
            });
        }
        let mut out = Vec::with_capacity(u.len());
        for (j, (&x, t)) in u.iter().zip(&self.dims).enumerate() {
            match t {
                DimTransform::LogStd { mean, sd } => {
                    if x <= 0.0 {
                        return Err(Error::NonPositiveCoordinate {
                            name: format!("#{j}"),
                            row: 0,
                        });
                    }
                    out.push((x.ln() - mean) / sd);
                }
                DimTransform::Passthrough => out.push(x),
            }
        }
        Ok(out)
    }

    /// Maps a point from transformed units back to user units:
    /// `exp(sd * v + mean)` on log-standardized dimensions, identity
    /// elsewhere.
    pub fn inverse_point(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dims.len() {
            return Err(Error::DimMismatch {
                expected: self.dims.len(),
                got: u.len(),
            });
        }
        Ok(u.iter()
            .zip(&self.dims)
            .map(|(&v, t)| match t {
                DimTransform::LogStd { mean, sd } => (sd * v + mean).exp(),
                DimTransform::Passthrough => v,
            })
            .collect())
    }
}

/// Chooses a transform mode per dimension: passthrough wherever
/// log-standardization is undefined (a non-positive coordinate, or a
/// constant column whose log spread would be zero), log-standardize
/// otherwise.
pub fn auto_modes(grid: &EvalGrid) -> Vec<TransformMode> {
    (0..grid.dim())
        .map(|j| {
            let first = grid.point(0)[j];
            let constant = grid.points().all(|p| p[j] == first);
            if constant || grid.points().any(|p| p[j] <= 0.0) {
                TransformMode::Passthrough
            } else {
                TransformMode::LogStd
            }
        })
        .collect()
}

/// Fits the log-standardize transform on the grid and applies it.
///
/// Each transformed dimension of the output has sample mean 0 and sample
/// standard deviation 1 (the `n - 1` denominator). Dimensions marked
/// [`TransformMode::Passthrough`] are copied unchanged.
pub fn fit_transform(
    grid: &EvalGrid,
    modes: &[TransformMode],
) -> Result<(EvalGrid, TransformSpec)> {
    if modes.len() != grid.dim() {
        return Err(Error::DimMismatch {
            expected: grid.dim(),
            got: modes.len(),
        });
    }
    let n = grid.len();
    let mut dims = Vec::with_capacity(grid.dim());
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(grid.dim());
    for (j, mode) in modes.iter().enumerate() {
        let col: Vec<f64> = grid.points().map(|p| p[j]).collect();
        match mode {
            TransformMode::Passthrough => {
                dims.push(DimTransform::Passthrough);
                columns.push(col);
            }
            TransformMode::LogStd => {
                if let Some(row) = col.iter().position(|&x| x <= 0.0) {
                    return Err(Error::NonPositiveCoordinate {
                        name: grid.names()[j].clone(),
                        row,
                    });
                }
                let logs: Vec<f64> = col.iter().map(|x| x.ln()).collect();
                let mean = logs.iter().sum::<f64>() / n as f64;
                let ss: f64 = logs.iter().map(|l| (l - mean) * (l - mean)).sum();
                let sd = (ss / (n - 1) as f64).sqrt();
                if sd <= 0.0 {
                    return Err(Error::ConstantDimension(grid.names()[j].clone()));
                }
                columns.push(logs.iter().map(|l| (l - mean) / sd).collect());
                dims.push(DimTransform::LogStd { mean, sd });
            }
        }
    }
    let points: Vec<Vec<f64>> = (0..n)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    let out = EvalGrid::new(
        points,
        grid.metrics().to_vec(),
        grid.names().to_vec(),
        grid.direction(),
    )?;
    Ok((out, TransformSpec { dims }))
}

/// Recipe for a synthetic lattice grid with a known quadratic boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Lattice resolution per dimension (each at least 2).
    pub shape: Vec<usize>,
    /// Inclusive coordinate range per dimension.
    pub ranges: Vec<(f64, f64)>,
    /// True boundary; points with `g(u) <= 0` take mean `mu1`.
    pub truth: QpParams,
    pub mu1: f64,
    pub mu2: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        let m = self.truth.dim();
        if self.shape.len() != m || self.ranges.len() != m {
            return Err(Error::InvalidSynthSpec(format!(
                "shape/ranges must match boundary dimension {m}"
            )));
        }
        if self.shape.iter().any(|&k| k < 2) {
            return Err(Error::InvalidSynthSpec(
                "lattice shape must be >= 2 per dimension".into(),
            ));
        }
        if self
            .ranges
            .iter()
            .any(|&(lo, hi)| lo >= hi || !lo.is_finite() || !hi.is_finite())
        {
            return Err(Error::InvalidSynthSpec(
                "ranges must be finite with lo < hi".into(),
            ));
        }
        if self.noise_sd < 0.0 || !self.noise_sd.is_finite() {
            return Err(Error::InvalidSynthSpec(
                "noise standard deviation must be finite and >= 0".into(),
            ));
        }
        if !self.mu1.is_finite() || !self.mu2.is_finite() {
            return Err(Error::InvalidSynthSpec(
                "region means must be finite".into(),
            ));
        }
        let n: usize = self.shape.iter().product();
        if n < 4 {
            return Err(Error::InvalidSynthSpec(format!(
                "lattice has {n} points, need at least 4"
            )));
        }
        Ok(())
    }
}

/// Generates a lattice grid whose metric steps from `mu1` to `mu2` across
/// the true boundary, plus Gaussian noise. Returns the grid and the true
/// side per point (1 where `g(u) <= 0`, else 2).
///
/// A pure function of the spec: equal specs produce byte-identical grids.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<(EvalGrid, Vec<u8>)> {
    spec.validate()?;
    let m = spec.truth.dim();
    let n: usize = spec.shape.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd.max(f64::MIN_POSITIVE)).expect("valid noise sd");

    let mut points = Vec::with_capacity(n);
    let mut metrics = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    // Row-major over the lattice, first dimension slowest.
    let mut index = vec![0usize; m];
    for _ in 0..n {
        let u: Vec<f64> = (0..m)
            .map(|j| {
                let (lo, hi) = spec.ranges[j];
                let steps = (spec.shape[j] - 1) as f64;
                lo + (hi - lo) * index[j] as f64 / steps
            })
            .collect();
        let side1 = spec.truth.eval(&u) <= 0.0;
        let mean = if side1 { spec.mu1 } else { spec.mu2 };
        let eps = if spec.noise_sd > 0.0 {
            noise.sample(&mut rng)
        } else {
            0.0
        };
        points.push(u);
        metrics.push(mean + eps);
        labels.push(if side1 { 1 } else { 2 });
        for j in (0..m).rev() {
            index[j] += 1;
            if index[j] < spec.shape[j] {
                break;
            }
            index[j] = 0;
        }
    }
    let names: Vec<String> = if m == 2 {
        vec!["x".into(), "y".into()]
    } else {
        (1..=m).map(|j| format!("u{j}")).collect()
    };
    let grid = EvalGrid::new(points, metrics, names, Direction::MinimizeIsGood)?;
    Ok((grid, labels))
}

/// Writes a grid in the ingestion CSV schema (coordinates, then `z`), with
/// the true side appended as a `label` column when given.
pub fn write_grid_csv<W: io::Write>(grid: &EvalGrid, labels: Option<&[u8]>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = grid.names().to_vec();
    header.push("z".into());
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for i in 0..grid.len() {
        let mut rec: Vec<String> = grid.point(i).iter().map(|v| v.to_string()).collect();
        rec.push(grid.metrics()[i].to_string());
        if let Some(l) = labels {
            rec.push(l[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_1col(xs: &[f64]) -> EvalGrid {
        EvalGrid::new(
            xs.iter().map(|&x| vec![x, 1.0]).collect(),
            vec![0.0; xs.len()],
            vec!["x".into(), "y".into()],
            Direction::MinimizeIsGood,
        )
        .unwrap()
    }

    #[test]
    fn load_basic_csv() {
        let csv = "l1,l2,bic\n1,2,10\n2,3,9\n3,4,8\n4,5,7\n";
        let g = load_grid(csv.as_bytes(), "bic", Direction::MinimizeIsGood).unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.len(), 4);
        assert_eq!(g.names(), &["l1".to_string(), "l2".to_string()]);
        assert_eq!(g.point(2), &[3.0, 4.0]);
        assert_eq!(g.metrics(), &[10.0, 9.0, 8.0, 7.0]);
    }

    #[test]
    fn load_rejects_nan_metric() {
        let csv = "a,b,z\n1,2,NaN\n2,3,1\n3,4,1\n4,5,1\n";
        let err = load_grid(csv.as_bytes(), "z", Direction::MinimizeIsGood).unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { .. }), "{err}");
    }

    #[test]
    fn load_rejects_three_rows() {
        let csv = "a,z\n1,1\n2,2\n3,3\n";
        let err = load_grid(csv.as_bytes(), "z", Direction::MinimizeIsGood).unwrap_err();
        assert!(matches!(err, Error::TooFewPoints(3)), "{err}");
    }

    #[test]
    fn load_rejects_missing_column_and_text_cell() {
        let csv = "a,z\n1,1\n2,2\n3,3\n4,4\n";
        let err = load_grid(csv.as_bytes(), "bic", Direction::MinimizeIsGood).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(_)));
        let csv = "a,z\n1,1\nx,2\n3,3\n4,4\n";
        let err = load_grid(csv.as_bytes(), "z", Direction::MinimizeIsGood).unwrap_err();
        assert!(matches!(err, Error::NonNumericCell { row: 1, .. }), "{err}");
    }

    #[test]
    fn load_ignoring_drops_label_column() {
        let csv = "x,y,z,label\n1,2,0,1\n2,3,0,1\n3,4,5,2\n4,5,5,2\n";
        let g =
            load_grid_ignoring(csv.as_bytes(), "z", Direction::MinimizeIsGood, &["label"]).unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.names(), &["x".to_string(), "y".to_string()]);
    }

    #[test]
    fn log_std_of_powers_of_ten() {
        // ln gives (0, 2.3026, 4.6052); sample mean 2.3026, sample SD 2.3026.
        let g = EvalGrid::new(
            vec![vec![1.0], vec![10.0], vec![100.0], vec![10.0]],
            vec![0.0; 4],
            vec!["x".into()],
            Direction::MinimizeIsGood,
        )
        .unwrap();
        // Use only the three-point column example via a 4th repeated value:
        // check the closed form on the distinct three instead.
        let logs: Vec<f64> = [1.0f64, 10.0, 100.0].iter().map(|x| x.ln()).collect();
        let mean = logs.iter().sum::<f64>() / 3.0;
        let sd = (logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / 2.0).sqrt();
        let standardized: Vec<f64> = logs.iter().map(|l| (l - mean) / sd).collect();
        for (s, want) in standardized.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((s - want).abs() < 1e-12);
        }
        // And the fitted transform on the real grid has exact unit stats.
        let (t, _) = fit_transform(&g, &[TransformMode::LogStd]).unwrap();
        let col: Vec<f64> = t.points().map(|p| p[0]).collect();
        let m = col.iter().sum::<f64>() / 4.0;
        let s = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 3.0).sqrt();
        assert!(m.abs() < 1e-12);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_column_is_rejected() {
        let e = std::f64::consts::E;
        let g = grid_1col(&[e, e, e, e]);
        let err =
            fit_transform(&g, &[TransformMode::LogStd, TransformMode::Passthrough]).unwrap_err();
        assert!(matches!(err, Error::ConstantDimension(_)), "{err}");
    }

    #[test]
    fn non_positive_coordinate_is_rejected() {
        let g = grid_1col(&[1.0, 2.0, 0.0, 4.0]);
        let err = fit_transform(&g, &[TransformMode::LogStd, TransformMode::LogStd]).unwrap_err();
        assert!(
            matches!(err, Error::NonPositiveCoordinate { row: 2, .. }),
            "{err}"
        );
    }

    #[test]
    fn inverse_point_matches_fitted_constants() {
        let g = grid_1col(&[1.0, 10.0, 100.0, 10.0]);
        let (_, spec) =
            fit_transform(&g, &[TransformMode::LogStd, TransformMode::Passthrough]).unwrap();
        // u = 0 maps back to the geometric mean exp(mean of logs).
        let back = spec.inverse_point(&[0.0, 0.54]).unwrap();
        let mean_log = [1.0f64, 10.0, 100.0, 10.0]
            .iter()
            .map(|x| x.ln())
            .sum::<f64>()
            / 4.0;
        assert!((back[0] - mean_log.exp()).abs() < 1e-12);
        assert_eq!(back[1], 0.54);
    }

    #[test]
    fn inverse_point_unit_spec() {
        let spec = TransformSpec {
            dims: vec![DimTransform::LogStd { mean: 0.0, sd: 1.0 }],
        };
        let back = spec.inverse_point(&[1.0]).unwrap();
        assert!((back[0] - std::f64::consts::E).abs() < 1e-12);
        assert!(matches!(
            spec.inverse_point(&[1.0, 2.0]).unwrap_err(),
            Error::DimMismatch { .. }
        ));
    }

    #[test]
    fn auto_modes_marks_non_positive_dims() {
        let g = EvalGrid::new(
            vec![
                vec![1.0, -1.0],
                vec![2.0, 1.0],
                vec![3.0, 2.0],
                vec![4.0, 3.0],
            ],
            vec![0.0; 4],
            vec!["a".into(), "b".into()],
            Direction::MinimizeIsGood,
        )
        .unwrap();
        assert_eq!(
            auto_modes(&g),
            vec![TransformMode::LogStd, TransformMode::Passthrough]
        );
    }

    #[test]
    fn auto_modes_leaves_constant_positive_dims_alone() {
        // A constant column has zero log spread, so auto must not pick
        // log-std for it even though every value is positive.
        let g = EvalGrid::new(
            vec![
                vec![1.0, 5.0],
                vec![2.0, 5.0],
                vec![3.0, 5.0],
                vec![4.0, 5.0],
            ],
            vec![0.0; 4],
            vec!["a".into(), "b".into()],
            Direction::MinimizeIsGood,
        )
        .unwrap();
        let modes = auto_modes(&g);
        assert_eq!(
            modes,
            vec![TransformMode::LogStd, TransformMode::Passthrough]
        );
        assert!(fit_transform(&g, &modes).is_ok());
    }

    fn unit_circle() -> QpParams {
        QpParams::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0], -1.0).unwrap()
    }

    #[test]
    fn synthetic_zero_noise_is_two_valued() {
        let spec = SynthSpec {
            shape: vec![5, 5],
            ranges: vec![(-2.0, 2.0), (-2.0, 2.0)],
            truth: unit_circle(),
            mu1: 0.0,
            mu2: 10.0,
            noise_sd: 0.0,
            seed: 1,
        };
        let (g, labels) = generate_synthetic(&spec).unwrap();
        assert_eq!(g.len(), 25);
        for (z, l) in g.metrics().iter().zip(&labels) {
            assert_eq!(*z, if *l == 1 { 0.0 } else { 10.0 });
        }
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SynthSpec {
            shape: vec![6, 6],
            ranges: vec![(-2.0, 2.0), (-2.0, 2.0)],
            truth: unit_circle(),
            mu1: 0.0,
            mu2: 10.0,
            noise_sd: 1.0,
            seed: 7,
        };
        let (a, la) = generate_synthetic(&spec).unwrap();
        let (b, lb) = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
    }

    #[test]
    fn synthetic_labels_match_brute_force_circle_count() {
        let spec = SynthSpec {
            shape: vec![20, 20],
            ranges: vec![(-2.0, 2.0), (-2.0, 2.0)],
            truth: unit_circle(),
            mu1: 0.0,
            mu2: 10.0,
            noise_sd: 1.0,
            seed: 3,
        };
        let (g, labels) = generate_synthetic(&spec).unwrap();
        let mut inside = 0usize;
        for a in 0..20 {
            for b in 0..20 {
                let x = -2.0 + 4.0 * a as f64 / 19.0;
                let y = -2.0 + 4.0 * b as f64 / 19.0;
                if x * x + y * y <= 1.0 {
                    inside += 1;
                }
            }
        }
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), inside);
        for (p, l) in g.points().zip(&labels) {
            let r2 = p[0] * p[0] + p[1] * p[1];
            assert_eq!(*l == 1, r2 <= 1.0);
        }
    }

    #[test]
    fn csv_round_trip_with_labels() {
        let spec = SynthSpec {
            shape: vec![4, 4],
            ranges: vec![(-2.0, 2.0), (-2.0, 2.0)],
            truth: unit_circle(),
            mu1: 0.0,
            mu2: 10.0,
            noise_sd: 0.5,
            seed: 9,
        };
        let (g, labels) = generate_synthetic(&spec).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&g, Some(&labels), &mut buf).unwrap();
        let back =
            load_grid_ignoring(&buf[..], "z", Direction::MinimizeIsGood, &["label"]).unwrap();
        assert_eq!(back, g);
    }
}
