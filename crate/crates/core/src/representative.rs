//! Post-fit selection of a recommended configuration.
//!
//! The fitted boundary partitions the grid (`g <= 0` is side 1). Each
//! side's center of gravity uses `|z|` as the point mass — shifted first
//! when metrics are non-positive — and the segment joining the two centers
//! is intersected with the zero level set. That intersection is the
//! representative boundary point; the nearest evaluated grid point is
//! reported beside it, optionally restricted to the favorable side.
//!
//! All geometry happens in transformed coordinates; user-unit values are
//! derived through the inverse transform for reporting only. The
//! construction is stated for two dimensions in the source method; the
//! component-wise weighted means generalize it to any `m`.

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryParams;
use crate::grid::{Direction, EvalGrid};
use crate::optimize::FitResult;
use crate::{Error, Result};

/// Index sets of the two sides. Side 1 is `g(u_i) <= 0`, boundary points
/// included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub indices1: Vec<usize>,
    pub indices2: Vec<usize>,
}

/// Splits the grid by the sign of the fitted boundary. Errors with
/// [`Error::EmptySide`] when every point lands on one side.
pub fn partition(grid: &EvalGrid, params: &BoundaryParams) -> Result<PartitionResult> {
    let mut indices1 = Vec::new();
    let mut indices2 = Vec::new();
    for (i, u) in grid.points().enumerate() {
        if params.eval(u) <= 0.0 {
            indices1.push(i);
        } else {
            indices2.push(i);
        }
    }
    if indices1.is_empty() || indices2.is_empty() {
        return Err(Error::EmptySide);
    }
    Ok(PartitionResult { indices1, indices2 })
}

/// Which side improves the metric, judged by mean metric value under the
/// grid's direction; ties go to side 1.
pub fn good_side(grid: &EvalGrid, part: &PartitionResult) -> u8 {
    let mean =
        |idx: &[usize]| idx.iter().map(|&i| grid.metrics()[i]).sum::<f64>() / idx.len() as f64;
    let (m1, m2) = (mean(&part.indices1), mean(&part.indices2));
    let side1_good = match grid.direction() {
        Direction::MinimizeIsGood => m1 <= m2,
        Direction::MaximizeIsGood => m1 >= m2,
    };
    if side1_good {
        1
    } else {
        2
    }
}

/// How metric values become point masses for the centers of gravity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MassPolicy {
    /// Every point weighs the same (used when the metric is constant).
    Unit,
    /// Mass is `|z_i + shift|`; the shift keeps all masses positive.
    Shifted { shift: f64 },
}

/// Picks the mass policy for a metric vector: no shift when all values are
/// positive, otherwise a shift of `-min(z) + 0.05 * range`, and unit masses
/// for a constant metric (where relative weights carry no information).
pub fn mass_policy(z: &[f64]) -> MassPolicy {
    let min = z.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        MassPolicy::Unit
    } else if min <= 0.0 {
        MassPolicy::Shifted {
            shift: -min + 0.05 * (max - min),
        }
    } else {
        MassPolicy::Shifted { shift: 0.0 }
    }
}

/// Mass-weighted mean of the chosen points, component-wise.
pub fn cog(grid: &EvalGrid, indices: &[usize], policy: MassPolicy) -> Result<Vec<f64>> {
    if indices.is_empty() {
        return Err(Error::ZeroMass);
    }
    let mut center = vec![0.0; grid.dim()];
    let mut total = 0.0;
    for &i in indices {
        let mass = match policy {
            MassPolicy::Unit => 1.0,
            MassPolicy::Shifted { shift } => (grid.metrics()[i] + shift).abs(),
        };
        total += mass;
        for (c, &x) in center.iter_mut().zip(grid.point(i)) {
            *c += mass * x;
        }
    }
    if total <= 0.0 {
        return Err(Error::ZeroMass);
    }
    for c in &mut center {
        *c /= total;
    }
    Ok(center)
}

/// Where the COG segment meets the zero level set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub point: Vec<f64>,
    /// Segment parameter: `point = p1 + t (p2 - p1)`, `t` in [0, 1].
    pub t: f64,
    /// Sign changes found along the segment by the pre-scan; more than one
    /// means the boundary wiggles across the segment and the first
    /// crossing from the `p1` end was chosen.
    pub crossings: usize,
}

/// Intersects the segment `p1 -> p2` with `g = 0`: a 1024-sample pre-scan
/// locates the first sign change from the `p1` end, then bisection refines
/// it to `|g| <= 1e-10`. Errors with [`Error::NoSignChange`] when both ends
/// lie on the same side.
pub fn boundary_intersection(
    params: &BoundaryParams,
    p1: &[f64],
    p2: &[f64],
) -> Result<Intersection> {
    const SCAN: usize = 1024;
    const TOL: f64 = 1e-10;

    assert_eq!(p1.len(), p2.len(), "segment endpoint dimension mismatch");
    let at = |t: f64| -> Vec<f64> { p1.iter().zip(p2).map(|(a, b)| a + t * (b - a)).collect() };
    let h = |t: f64| params.eval(&at(t));

    let h0 = h(0.0);
    let h1 = h(1.0);
    if (h0 > 0.0) == (h1 > 0.0) && h0 != 0.0 && h1 != 0.0 {
        return Err(Error::NoSignChange);
    }
    if h0.abs() <= TOL {
        return Ok(Intersection {
            point: p1.to_vec(),
            t: 0.0,
            crossings: 1,
        });
    }

    let mut samples = Vec::with_capacity(SCAN + 1);
    for k in 0..=SCAN {
        samples.push(h(k as f64 / SCAN as f64));
    }
    let mut crossings = 0;
    let mut first: Option<usize> = None;
    for k in 1..=SCAN {
        if (samples[k - 1] > 0.0) != (samples[k] > 0.0) {
            crossings += 1;
            if first.is_none() {
                first = Some(k);
            }
        }
    }
    let Some(k) = first else {
        // An endpoint sitting exactly on the level set is still a hit.
        if h1.abs() <= TOL {
            return Ok(Intersection {
                point: p2.to_vec(),
                t: 1.0,
                crossings: 1,
            });
        }
        return Err(Error::NoSignChange);
    };

    let mut t_lo = (k - 1) as f64 / SCAN as f64;
    let mut t_hi = k as f64 / SCAN as f64;
    let lo_positive = samples[k - 1] > 0.0;
    let mut t_mid = t_lo;
    let mut h_mid = samples[k - 1];
    for _ in 0..200 {
        if h_mid.abs() <= TOL {
            break;
        }
        t_mid = 0.5 * (t_lo + t_hi);
        h_mid = h(t_mid);
        if (h_mid > 0.0) == lo_positive {
            t_lo = t_mid;
        } else {
            t_hi = t_mid;
        }
    }
    Ok(Intersection {
        point: at(t_mid),
        t: t_mid,
        crossings,
    })
}

/// Candidate set for the nearest-grid-point snap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Restriction {
    All,
    Side1,
    Side2,
}

/// Euclidean-nearest grid point to `point` (transformed coordinates),
/// restricted to one side of the partition if asked; ties go to the lowest
/// index.
pub fn nearest_grid_point(
    grid: &EvalGrid,
    point: &[f64],
    restriction: Restriction,
    part: &PartitionResult,
) -> Result<(usize, Vec<f64>)> {
    let all: Vec<usize>;
    let candidates: &[usize] = match restriction {
        Restriction::All => {
            all = (0..grid.len()).collect();
            &all
        }
        Restriction::Side1 => &part.indices1,
        Restriction::Side2 => &part.indices2,
    };
    if candidates.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    let mut best = candidates[0];
    let mut best_d2 = f64::INFINITY;
    for &i in candidates {
        let d2: f64 = grid
            .point(i)
            .iter()
            .zip(point)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if d2 < best_d2 {
            best_d2 = d2;
            best = i;
        }
    }
    Ok((best, grid.point(best).to_vec()))
}

/// Options for [`representative_point`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RepOptions {
    /// Restrict the nearest-grid-point snap to the favorable side.
    pub restrict_good_side: bool,
}

/// Everything the pipeline reports about the recommended configuration.
/// Vectors are in transformed coordinates, with `_user` twins mapped back
/// through the fit's transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeResult {
    pub cog1: Vec<f64>,
    pub cog2: Vec<f64>,
    pub cog1_user: Vec<f64>,
    pub cog2_user: Vec<f64>,
    /// The point on the boundary between the two centers of gravity.
    pub boundary_point: Vec<f64>,
    pub boundary_point_user: Vec<f64>,
    /// Segment parameter of `boundary_point` between `cog1` (0) and
    /// `cog2` (1).
    pub t: f64,
    pub segment_crossings: usize,
    pub nearest_index: usize,
    pub nearest_point: Vec<f64>,
    pub nearest_point_user: Vec<f64>,
    pub good_side: u8,
    pub restricted_to_good_side: bool,
    pub mass_policy: MassPolicy,
}

/// Full post-fit pipeline: partition, centers of gravity, boundary
/// intersection, nearest grid point. `grid` must be the same transformed
/// grid the fit ran on.
pub fn representative_point(
    grid: &EvalGrid,
    fit: &FitResult,
    options: &RepOptions,
) -> Result<RepresentativeResult> {
    if fit.params.dim() != grid.dim() {
        return Err(Error::DimMismatch {
            expected: grid.dim(),
            got: fit.params.dim(),
        });
    }
    let part = partition(grid, &fit.params)?;
    let policy = mass_policy(grid.metrics());
    let cog1 = cog(grid, &part.indices1, policy)?;
    let cog2 = cog(grid, &part.indices2, policy)?;
    let hit = boundary_intersection(&fit.params, &cog1, &cog2)?;
    let good = good_side(grid, &part);
    let restriction = if options.restrict_good_side {
        if good == 1 {
            Restriction::Side1
        } else {
            Restriction::Side2
        }
    } else {
        Restriction::All
    };
    let (nearest_index, nearest_point) = nearest_grid_point(grid, &hit.point, restriction, &part)?;

    let inv = |v: &[f64]| fit.transform.inverse_point(v);
    Ok(RepresentativeResult {
        cog1_user: inv(&cog1)?,
        cog2_user: inv(&cog2)?,
        boundary_point_user: inv(&hit.point)?,
        nearest_point_user: inv(&nearest_point)?,
        cog1,
        cog2,
        boundary_point: hit.point,
        t: hit.t,
        segment_crossings: hit.crossings,
        nearest_index,
        nearest_point,
        good_side: good,
        restricted_to_good_side: options.restrict_good_side,
        mass_policy: policy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{NnParams, QpParams};
    use crate::grid::{Direction, TransformSpec};
    use crate::optimize::FitResult;

    fn grid2(points: Vec<Vec<f64>>, z: Vec<f64>, dir: Direction) -> EvalGrid {
        EvalGrid::new(points, z, vec!["x".into(), "y".into()], dir).unwrap()
    }

    fn unit_circle() -> BoundaryParams {
        BoundaryParams::Qp(
            QpParams::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0], -1.0).unwrap(),
        )
    }

    fn vertical_line(at: f64) -> BoundaryParams {
        BoundaryParams::Qp(QpParams::new(vec![vec![0.0; 2]; 2], vec![1.0, 0.0], -at).unwrap())
    }

    #[test]
    fn partition_sides_and_tie_rule() {
        let g = grid2(
            vec![
                vec![0.0, 0.0],
                vec![2.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 3.0],
            ],
            vec![1.0, 2.0, 3.0, 4.0],
            Direction::MinimizeIsGood,
        );
        let part = partition(&g, &unit_circle()).unwrap();
        // Interior and the boundary point (g = 0) are side 1.
        assert_eq!(part.indices1, vec![0, 2]);
        assert_eq!(part.indices2, vec![1, 3]);
    }

    #[test]
    fn partition_swaps_under_negation() {
        let g = grid2(
            vec![
                vec![0.0, 0.5],
                vec![2.0, 0.0],
                vec![0.3, 0.1],
                vec![5.0, 3.0],
            ],
            vec![1.0, 2.0, 3.0, 4.0],
            Direction::MinimizeIsGood,
        );
        let p = unit_circle();
        let negated = p
            .with_packed(&p.to_packed().iter().map(|v| -v).collect::<Vec<_>>())
            .unwrap();
        let a = partition(&g, &p).unwrap();
        let b = partition(&g, &negated).unwrap();
        // Negation flips strict/non-strict at g = 0, but no point here sits
        // exactly on the circle.
        assert_eq!(a.indices1, b.indices2);
        assert_eq!(a.indices2, b.indices1);
    }

    #[test]
    fn partition_rejects_one_sided() {
        let g = grid2(
            vec![
                vec![0.0, 0.0],
                vec![0.1, 0.0],
                vec![0.0, 0.2],
                vec![0.1, 0.1],
            ],
            vec![1.0, 2.0, 3.0, 4.0],
            Direction::MinimizeIsGood,
        );
        assert!(matches!(
            partition(&g, &unit_circle()).unwrap_err(),
            Error::EmptySide
        ));
    }

    #[test]
    fn cog_hand_cases() {
        let g = grid2(
            vec![
                vec![0.0, 0.0],
                vec![2.0, 0.0],
                vec![0.0, 0.0],
                vec![1.0, 0.0],
            ],
            vec![5.0, 5.0, 1.0, 3.0],
            Direction::MinimizeIsGood,
        );
        // Equal masses at (0,0) and (2,0).
        let c = cog(&g, &[0, 1], mass_policy(g.metrics())).unwrap();
        assert_eq!(c, vec![1.0, 0.0]);
        // Masses 1 and 3 at x = 0 and x = 1.
        let c = cog(&g, &[2, 3], MassPolicy::Shifted { shift: 0.0 }).unwrap();
        assert!((c[0] - 0.75).abs() < 1e-15);
        // A single point is its own center.
        let c = cog(&g, &[1], MassPolicy::Unit).unwrap();
        assert_eq!(c, vec![2.0, 0.0]);
        assert!(matches!(
            cog(&g, &[], MassPolicy::Unit).unwrap_err(),
            Error::ZeroMass
        ));
    }

    #[test]
    fn cog_invariant_to_order_and_mass_scale() {
        let g = grid2(
            vec![
                vec![0.0, 1.0],
                vec![2.0, 0.0],
                vec![1.0, 4.0],
                vec![3.0, 2.0],
            ],
            vec![1.0, 2.0, 3.0, 4.0],
            Direction::MinimizeIsGood,
        );
        let scaled = grid2(
            g.points().map(|p| p.to_vec()).collect(),
            g.metrics().iter().map(|z| 7.0 * z).collect(),
            Direction::MinimizeIsGood,
        );
        let policy = MassPolicy::Shifted { shift: 0.0 };
        let a = cog(&g, &[0, 2, 3], policy).unwrap();
        let b = cog(&g, &[3, 0, 2], policy).unwrap();
        let c = cog(&scaled, &[0, 2, 3], policy).unwrap();
        for j in 0..2 {
            assert!((a[j] - b[j]).abs() < 1e-12);
            assert!((a[j] - c[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_policy_cases() {
        assert_eq!(mass_policy(&[2.0, 2.0, 2.0]), MassPolicy::Unit);
        assert_eq!(mass_policy(&[1.0, 5.0]), MassPolicy::Shifted { shift: 0.0 });
        // min = -3, range = 8: shift = 3 + 0.4.
        match mass_policy(&[-3.0, 5.0]) {
            MassPolicy::Shifted { shift } => assert!((shift - 3.4).abs() < 1e-15),
            other => panic!("unexpected policy {other:?}"),
        }
    }

    #[test]
    fn intersection_circle_and_line() {
        let hit = boundary_intersection(&unit_circle(), &[0.0, 0.0], &[2.0, 0.0]).unwrap();
        assert!((hit.point[0] - 1.0).abs() < 1e-9);
        assert!(hit.point[1].abs() < 1e-15);
        assert_eq!(hit.crossings, 1);

        let hit = boundary_intersection(&vertical_line(0.5), &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((hit.point[0] - 0.5).abs() < 1e-9);
        assert!((hit.t - 0.5).abs() < 1e-9);
    }

    #[test]
    fn intersection_requires_opposite_sides() {
        let err = boundary_intersection(&unit_circle(), &[2.0, 0.0], &[3.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NoSignChange));
    }

    #[test]
    fn intersection_picks_first_of_three_roots() {
        // Three tanh steps of alternating sign give g with roots near
        // u = 0.2, 0.5 and 0.8 along the segment 0 -> 1.
        let k = 10.0;
        let p = BoundaryParams::Nn(
            NnParams::new(
                vec![vec![k], vec![k], vec![k]],
                vec![-0.2 * k, -0.5 * k, -0.8 * k],
                vec![1.0, -1.0, 1.0],
                0.0,
            )
            .unwrap(),
        );
        let hit = boundary_intersection(&p, &[0.0], &[1.0]).unwrap();
        assert_eq!(hit.crossings, 3);
        // Independent fine scan for the first root.
        let mut first = None;
        let mut prev = p.eval(&[0.0]);
        for i in 1..=1_000_000 {
            let t = i as f64 / 1e6;
            let v = p.eval(&[t]);
            if (prev > 0.0) != (v > 0.0) {
                first = Some(t);
                break;
            }
            prev = v;
        }
        let first = first.unwrap();
        assert!(
            (hit.t - first).abs() < 1e-5,
            "t = {}, scan = {first}",
            hit.t
        );
        assert!(p.eval(&hit.point).abs() <= 1e-10);
    }

    #[test]
    fn nearest_point_rules() {
        let g = grid2(
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 1.0],
            ],
            vec![1.0, 2.0, 3.0, 4.0],
            Direction::MinimizeIsGood,
        );
        let part = PartitionResult {
            indices1: vec![0, 1],
            indices2: vec![2, 3],
        };
        // Exact hit returns the point itself.
        let (i, p) = nearest_grid_point(&g, &[1.0, 0.0], Restriction::All, &part).unwrap();
        assert_eq!((i, p), (1, vec![1.0, 0.0]));
        // Equidistant from all four corners: lowest index wins.
        let (i, _) = nearest_grid_point(&g, &[0.5, 0.5], Restriction::All, &part).unwrap();
        assert_eq!(i, 0);
        // Off-center point snaps to the closest corner.
        let (i, _) = nearest_grid_point(&g, &[0.4, 0.0], Restriction::All, &part).unwrap();
        assert_eq!(i, 0);
        // Restriction limits the candidates.
        let (i, _) = nearest_grid_point(&g, &[0.4, 0.0], Restriction::Side2, &part).unwrap();
        assert_eq!(i, 2);
        let empty = PartitionResult {
            indices1: vec![],
            indices2: (0..4).collect(),
        };
        assert!(matches!(
            nearest_grid_point(&g, &[0.0, 0.0], Restriction::Side1, &empty).unwrap_err(),
            Error::EmptyCandidateSet
        ));
    }

    fn fit_with(params: BoundaryParams) -> FitResult {
        FitResult {
            family: params.family(),
            params,
            loglik: 0.0,
            restarts: vec![],
            transform: TransformSpec::passthrough(2),
        }
    }

    #[test]
    fn representative_point_on_mirrored_data() {
        // Mirror-symmetric about x = 0 with a vertical boundary there.
        let mut points = Vec::new();
        let mut z = Vec::new();
        for &x in &[-2.0, -1.0, 1.0, 2.0] {
            for &y in &[0.0, 1.0] {
                points.push(vec![x, y]);
                z.push(if x < 0.0 { 0.0 } else { 10.0 });
            }
        }
        let g = grid2(points, z, Direction::MinimizeIsGood);
        let fit = fit_with(vertical_line(0.0));
        let rep = representative_point(&g, &fit, &RepOptions::default()).unwrap();
        assert!(rep.boundary_point[0].abs() < 1e-6);
        assert!(rep.t >= 0.0 && rep.t <= 1.0);
        assert!(fit.params.eval(&rep.boundary_point).abs() <= 1e-8);
        // Metric is lower (better) on the left: side 1 under g = x.
        assert_eq!(rep.good_side, 1);
        match rep.mass_policy {
            MassPolicy::Shifted { shift } => assert!((shift - 0.5).abs() < 1e-12),
            other => panic!("unexpected policy {other:?}"),
        }
    }

    #[test]
    fn representative_point_constant_metric_uses_centroids() {
        let g = grid2(
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ],
            vec![5.0; 4],
            Direction::MinimizeIsGood,
        );
        let fit = fit_with(vertical_line(0.5));
        let rep = representative_point(&g, &fit, &RepOptions::default()).unwrap();
        assert_eq!(rep.mass_policy, MassPolicy::Unit);
        assert_eq!(rep.cog1, vec![0.0, 0.5]);
        assert_eq!(rep.cog2, vec![1.0, 0.5]);
        assert!((rep.boundary_point[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn restriction_snaps_to_good_side() {
        let mut points = Vec::new();
        let mut z = Vec::new();
        for &x in &[0.0, 1.0, 2.0, 3.0] {
            for &y in &[0.0, 1.0] {
                points.push(vec![x, y]);
                // Higher is better on the right under MaximizeIsGood.
                z.push(x);
            }
        }
        let g = grid2(points, z, Direction::MaximizeIsGood);
        let fit = fit_with(vertical_line(1.4));
        let restricted = representative_point(
            &g,
            &fit,
            &RepOptions {
                restrict_good_side: true,
            },
        )
        .unwrap();
        assert_eq!(restricted.good_side, 2);
        assert!(restricted.restricted_to_good_side);
        // Boundary point sits near x = 1.4; the snap must stay on side 2
        // (x > 1.4) even though x = 1 is closer.
        assert!(restricted.nearest_point[0] >= 2.0);
        let free = representative_point(&g, &fit, &RepOptions::default()).unwrap();
        assert!(free.nearest_point[0] <= 1.0);
    }

    #[test]
    fn user_units_run_through_the_inverse_transform() {
        use crate::grid::{fit_transform, TransformMode};
        let g = grid2(
            vec![
                vec![1.0, 1.0],
                vec![10.0, 1.0],
                vec![100.0, 2.0],
                vec![1000.0, 2.0],
            ],
            vec![0.0, 0.0, 5.0, 5.0],
            Direction::MinimizeIsGood,
        );
        let (tg, spec) =
            fit_transform(&g, &[TransformMode::LogStd, TransformMode::Passthrough]).unwrap();
        let mut fit = fit_with(vertical_line(0.0));
        fit.transform = spec.clone();
        let rep = representative_point(&tg, &fit, &RepOptions::default()).unwrap();
        let back = spec.inverse_point(&rep.boundary_point).unwrap();
        for (a, b) in rep.boundary_point_user.iter().zip(&back) {
            assert_eq!(a, b);
        }
        // The nearest point corresponds to an actual input configuration.
        let orig: Vec<f64> = g.point(rep.nearest_index).to_vec();
        for (a, b) in rep.nearest_point_user.iter().zip(&orig) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
        }
    }
}
