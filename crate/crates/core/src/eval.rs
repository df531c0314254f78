//! Evaluation metrics: mask decoding, pose errors, control errors, direction
//! accuracy at intersections and map fidelity.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::geom::{distance_to_polyline, PlanarPoint};
use crate::roadmap::{BinaryImage, MapError, RoadMap, SegmentId};
use crate::scalar::{lit, pairwise_sum, wrap_degrees, Real};
use crate::trajectory::{ego_to_map, ControlCommand, Pose, Trajectory, HORIZON};

/// Radius in pixels of the reference dot.
pub const DOT_RADIUS_PX: f64 = 15.0;
/// Accepted dot area as a fraction of the reference dot area.
pub const DOT_AREA_RANGE: (f64, f64) = (0.25, 1.75);
/// Predicted points further than this from every candidate are off-road.
pub const OFF_ROAD_M: f64 = 15.0;
/// Points whose best right and best wrong candidates are closer than this
/// in distance are too ambiguous to score.
pub const BORDERLINE_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("metrics undefined for empty input")]
    Empty,
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Binary mask placed in the planar frame. Pixel `(col, row)` sits at
/// `origin + (col * mpp, -row * mpp)`: columns run east, rows run south.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskImage<T> {
    pub image: BinaryImage,
    pub meters_per_pixel: T,
    pub origin: PlanarPoint<T>,
}

impl<T: Real> MaskImage<T> {
    pub fn new(
        image: BinaryImage,
        meters_per_pixel: T,
        origin: PlanarPoint<T>,
    ) -> Result<Self, EvalError> {
        if image.width() == 0 || image.height() == 0 {
            return Err(EvalError::InvalidInput("mask must not be empty".into()));
        }
        if !(meters_per_pixel > T::zero()) || !meters_per_pixel.is_finite() {
            return Err(EvalError::InvalidInput(
                "meters per pixel must be positive".into(),
            ));
        }
        Ok(Self {
            image,
            meters_per_pixel,
            origin,
        })
    }

    pub fn to_planar(&self, col: T, row: T) -> PlanarPoint<T> {
        PlanarPoint::new(
            self.origin.x + col * self.meters_per_pixel,
            self.origin.y - row * self.meters_per_pixel,
        )
    }
}

/// A connected set of pixels: its size and centroid in pixel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub area: usize,
    pub col: f64,
    pub row: f64,
}

/// Largest 8-connected component; equal areas go to the one whose first
/// pixel comes first in row-major order.
pub fn largest_component(img: &BinaryImage) -> Option<Component> {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; w * h];
    let mut best: Option<Component> = None;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if seen[start] || !img.get(start % w, start / w) {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut cols = Vec::new();
        let mut rows = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (c, r) = (i % w, i / w);
            cols.push(c as f64);
            rows.push(r as f64);
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (nc, nr) = (c as i64 + dc, r as i64 + dr);
                    if nc < 0 || nr < 0 || nc >= w as i64 || nr >= h as i64 {
                        continue;
                    }
                    let j = nr as usize * w + nc as usize;
                    if !seen[j] && img.get(nc as usize, nr as usize) {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        let area = cols.len();
        if best.is_none_or(|b| area > b.area) {
            best = Some(Component {
                area,
                col: pairwise_sum(&cols) / area as f64,
                row: pairwise_sum(&rows) / area as f64,
            });
        }
    }
    best
}

/// Position and, when the orientation mask has a dot, heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodedPose<T> {
    pub p: PlanarPoint<T>,
    pub heading: Option<T>,
}

/// Decodes a pose from a position dot mask and an orientation half-dot
/// mask. Returns `None` when the position dot is missing or its area is
/// outside the accepted range.
pub fn decode_pose_from_masks<T: Real>(
    position: &MaskImage<T>,
    orientation: &MaskImage<T>,
) -> Result<Option<DecodedPose<T>>, EvalError> {
    if position.image.width() != orientation.image.width()
        || position.image.height() != orientation.image.height()
        || position.meters_per_pixel != orientation.meters_per_pixel
        || position.origin != orientation.origin
    {
        return Err(EvalError::InvalidInput(
            "position and orientation masks must share size and frame".into(),
        ));
    }
    let Some(dot) = largest_component(&position.image) else {
        return Ok(None);
    };
    let reference = std::f64::consts::PI * DOT_RADIUS_PX * DOT_RADIUS_PX;
    let ratio = dot.area as f64 / reference;
    if ratio < DOT_AREA_RANGE.0 || ratio > DOT_AREA_RANGE.1 {
        return Ok(None);
    }
    let p = position.to_planar(lit(dot.col), lit(dot.row));
    let heading = largest_component(&orientation.image).and_then(|half| {
        let q = position.to_planar(lit(half.col), lit(half.row));
        let d = q - p;
        (d.norm() > T::zero()).then(|| d.heading())
    });
    Ok(Some(DecodedPose { p, heading }))
}

/// Response rate and error statistics of one quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseMetrics<T> {
    pub response_rate: T,
    /// Over responding samples; `None` when nothing responded.
    pub mean: Option<T>,
    pub median: Option<T>,
}

/// Mean by pairwise summation.
pub fn mean<T: Real>(values: &[T]) -> Option<T> {
    (!values.is_empty()).then(|| pairwise_sum(values) / lit(values.len() as f64))
}

/// Median by sorting; the average of the middle two for even lengths.
pub fn median<T: Real>(values: &[T]) -> Option<T> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    match v.len() {
        0 => None,
        n if n % 2 == 1 => Some(v[n / 2]),
        n => Some((v[n / 2 - 1] + v[n / 2]) / lit(2.0)),
    }
}

fn metrics<T: Real>(errors: &[T], total: usize) -> PoseMetrics<T> {
    PoseMetrics {
        response_rate: lit::<T>(errors.len() as f64) / lit(total as f64),
        mean: mean(errors),
        median: median(errors),
    }
}

/// Position errors in meters and orientation errors in degrees.
pub fn pose_metrics<T: Real>(
    preds: &[Option<DecodedPose<T>>],
    truths: &[Pose<T>],
) -> Result<(PoseMetrics<T>, PoseMetrics<T>), EvalError> {
    if preds.len() != truths.len() {
        return Err(EvalError::InvalidInput(format!(
            "{} predictions for {} truths",
            preds.len(),
            truths.len()
        )));
    }
    if preds.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut pos = Vec::new();
    let mut ori = Vec::new();
    for (pred, truth) in preds.iter().zip(truths) {
        let Some(pred) = pred else { continue };
        pos.push(pred.p.distance(&truth.p));
        if let Some(h) = pred.heading {
            ori.push(angle_error_deg(h.to_degrees(), truth.heading.to_degrees()));
        }
    }
    Ok((metrics(&pos, preds.len()), metrics(&ori, preds.len())))
}

/// Absolute wrapped difference of two angles in degrees, in [0, 180].
pub fn angle_error_deg<T: Real>(a: T, b: T) -> T {
    wrap_degrees(a - b).abs()
}

/// Per-second mean absolute errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlMae<T> {
    pub speed: [T; HORIZON],
    pub angle: [T; HORIZON],
}

pub fn control_mae<T: Real>(
    pred: &[[ControlCommand<T>; HORIZON]],
    truth: &[[ControlCommand<T>; HORIZON]],
) -> Result<ControlMae<T>, EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::InvalidInput(format!(
            "{} predicted command sets for {} truths",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut speed = [T::zero(); HORIZON];
    let mut angle = [T::zero(); HORIZON];
    for n in 0..HORIZON {
        let s: Vec<T> = pred
            .iter()
            .zip(truth)
            .map(|(p, t)| (p[n].speed - t[n].speed).abs())
            .collect();
        let a: Vec<T> = pred
            .iter()
            .zip(truth)
            .map(|(p, t)| angle_error_deg(p[n].steering, t[n].steering))
            .collect();
        speed[n] = mean(&s).unwrap_or_else(T::nan);
        angle[n] = mean(&a).unwrap_or_else(T::nan);
    }
    Ok(ControlMae { speed, angle })
}

/// Direction accuracy per horizon second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionReport<T> {
    /// `None` where nothing was counted.
    pub accuracy: [Option<T>; HORIZON],
    pub counted: [usize; HORIZON],
    pub correct: [usize; HORIZON],
}

/// One scored situation: the vehicle's true current pose, its predicted
/// ego-frame trajectory and the node route it actually drives.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSample<T> {
    pub pose: Pose<T>,
    pub prediction: Trajectory<T>,
    pub route: Vec<crate::roadmap::NodeId>,
}

/// Scores how often predicted points land closest to the driven branch.
///
/// A sample counts when its true position lies inside an intersection disc
/// (the nearest containing center) that its route passes through, with a
/// driven incoming edge and at least two mapped ways out. The candidates are
/// the turns from that incoming edge and the edges they lead to. Each
/// predicted point is projected onto the candidates; it is skipped when
/// further than 15 m from all of them, or when the best candidate on the
/// route and the best one off it are within 1 m of each other.
pub fn direction_accuracy<T: Real>(
    samples: &[DirectionSample<T>],
    map: &RoadMap<T>,
) -> Result<DirectionReport<T>, EvalError> {
    let mut counted = [0usize; HORIZON];
    let mut correct = [0usize; HORIZON];
    let topo = map.topology();
    for s in samples {
        let route_edges = map.route_segments(&s.route)?;
        let on_route: BTreeSet<SegmentId> = route_edges.iter().copied().collect();
        let Some(node) = topo
            .nodes()
            .iter()
            .filter(|n| s.pose.p.distance(&n.center) <= n.radius)
            .min_by(|a, b| {
                s.pose
                    .p
                    .distance(&a.center)
                    .partial_cmp(&s.pose.p.distance(&b.center))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.id.cmp(&b.id))
            })
        else {
            continue;
        };
        let Some(i) = s.route.iter().position(|n| *n == node.id) else {
            continue;
        };
        if i == 0 || i + 1 >= s.route.len() {
            continue;
        }
        let Some(e_in) = topo.edge_between(s.route[i - 1], node.id) else {
            continue;
        };
        let mut candidates = Vec::new();
        for e_out in topo.out_edges(node.id) {
            let turn = SegmentId::Turn(e_in.id, e_out.id);
            if map.segment(turn).is_some() {
                candidates.push(turn);
                candidates.push(SegmentId::Edge(e_out.id));
            }
        }
        if candidates.len() < 4 {
            continue;
        }
        let (right, wrong): (Vec<SegmentId>, Vec<SegmentId>) =
            candidates.iter().partition(|c| on_route.contains(c));
        if right.is_empty() {
            continue;
        }
        for (n, q) in s.prediction.points.iter().enumerate() {
            let q = ego_to_map(&s.pose, *q);
            let Some(best) = map.project_onto(q, &candidates) else {
                continue;
            };
            if best.dist > lit(OFF_ROAD_M) {
                continue;
            }
            let r = map.project_onto(q, &right).map(|p| p.dist);
            let w = map.project_onto(q, &wrong).map(|p| p.dist);
            if let (Some(r), Some(w)) = (r, w) {
                if (r - w).abs() < lit(BORDERLINE_M) {
                    continue;
                }
            }
            counted[n] += 1;
            if on_route.contains(&best.segment) {
                correct[n] += 1;
            }
        }
    }
    let accuracy = std::array::from_fn(|n| {
        (counted[n] > 0).then(|| lit::<T>(correct[n] as f64) / lit(counted[n] as f64))
    });
    Ok(DirectionReport {
        accuracy,
        counted,
        correct,
    })
}

/// Distance statistics of a built map against reference polylines.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport<T> {
    pub mean: T,
    pub max: T,
    pub points: usize,
    /// Mean distance per segment.
    pub per_segment: BTreeMap<SegmentId, T>,
    pub max_adjacency_gap: T,
    /// Built segments without a reference.
    pub unmatched: Vec<SegmentId>,
    /// Reference segments the map lacks.
    pub missing: Vec<SegmentId>,
}

/// Measures every built polyline point against the reference polyline of
/// the same segment id.
pub fn map_fidelity<T: Real>(
    map: &RoadMap<T>,
    truth: &BTreeMap<SegmentId, Vec<PlanarPoint<T>>>,
) -> Result<FidelityReport<T>, EvalError> {
    let mut all = Vec::new();
    let mut per_segment = BTreeMap::new();
    let mut unmatched = Vec::new();
    for (id, seg) in map.segments() {
        let Some(reference) = truth.get(id) else {
            unmatched.push(*id);
            continue;
        };
        let d: Vec<T> = seg
            .polyline
            .iter()
            .map(|p| distance_to_polyline(*p, reference))
            .collect();
        per_segment.insert(*id, mean(&d).unwrap_or_else(T::zero));
        all.extend(d);
    }
    if all.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(FidelityReport {
        mean: mean(&all).unwrap_or_else(T::zero),
        max: all.iter().copied().fold(T::zero(), T::max),
        points: all.len(),
        per_segment,
        max_adjacency_gap: map.max_adjacency_gap(),
        unmatched,
        missing: truth
            .keys()
            .filter(|id| map.segment(**id).is_none())
            .copied()
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disc(img: &mut BinaryImage, cx: f64, cy: f64, r: f64, half_towards: Option<f64>) {
        for row in 0..img.height() {
            for col in 0..img.width() {
                let (dx, dy) = (col as f64 - cx, cy - row as f64);
                if dx * dx + dy * dy > r * r {
                    continue;
                }
                if let Some(h) = half_towards {
                    if dx * h.cos() + dy * h.sin() <= 0.0 {
                        continue;
                    }
                }
                img.set(col, row, true);
            }
        }
    }

    fn mask(img: BinaryImage) -> MaskImage<f64> {
        MaskImage::new(img, 1.0, PlanarPoint::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn disc_centroid_and_area_filter() {
        let mut a = BinaryImage::new(200, 120);
        disc(&mut a, 100.0, 60.0, 15.0, None);
        let d = decode_pose_from_masks(&mask(a.clone()), &mask(BinaryImage::new(200, 120)))
            .unwrap()
            .unwrap();
        assert!(d.p.distance(&PlanarPoint::new(100.0, -60.0)) < 0.5);
        assert_eq!(d.heading, None);
        let mut small = BinaryImage::new(200, 120);
        disc(&mut small, 50.0, 50.0, 6.0, None);
        assert_eq!(
            decode_pose_from_masks(&mask(small), &mask(a)).unwrap(),
            None
        );
    }

    #[test]
    fn half_disc_heading_east() {
        let mut a = BinaryImage::new(100, 100);
        disc(&mut a, 50.0, 50.0, 15.0, None);
        let mut b = BinaryImage::new(100, 100);
        disc(&mut b, 50.0, 50.0, 15.0, Some(0.0));
        let d = decode_pose_from_masks(&mask(a), &mask(b.clone()))
            .unwrap()
            .unwrap();
        assert!(d.heading.unwrap().to_degrees().abs() < 2.0);
        // Brute-force centroid of the half disc.
        let (mut sc, mut sr, mut n) = (0.0, 0.0, 0.0);
        for row in 0..100 {
            for col in 0..100 {
                if b.get(col, row) {
                    sc += col as f64;
                    sr += row as f64;
                    n += 1.0;
                }
            }
        }
        let c = largest_component(&b).unwrap();
        assert!((c.col - sc / n).abs() < 1e-12 && (c.row - sr / n).abs() < 1e-12);
    }

    #[test]
    fn largest_component_wins_and_uses_diagonals() {
        let mut img = BinaryImage::new(10, 10);
        img.set(0, 0, true);
        for k in 3..7 {
            img.set(k, k, true);
        }
        let c = largest_component(&img).unwrap();
        assert_eq!(c.area, 4);
        assert_eq!((c.col, c.row), (4.5, 4.5));
        assert_eq!(largest_component(&BinaryImage::new(4, 4)), None);
    }

    #[test]
    fn mismatched_masks() {
        let a = mask(BinaryImage::new(10, 10));
        let b = mask(BinaryImage::new(10, 11));
        assert!(decode_pose_from_masks(&a, &b).is_err());
    }

    #[test]
    fn pose_metric_examples() {
        let truths: Vec<Pose<f64>> = (0..4)
            .map(|k| Pose::new(k as f64, PlanarPoint::new(k as f64, 0.0), 0.5))
            .collect();
        let exact: Vec<_> = truths
            .iter()
            .map(|t| {
                Some(DecodedPose {
                    p: t.p,
                    heading: Some(t.heading),
                })
            })
            .collect();
        let (p, o) = pose_metrics(&exact, &truths).unwrap();
        assert_eq!(
            (p.response_rate, p.mean, p.median),
            (1.0, Some(0.0), Some(0.0))
        );
        assert_eq!(o.mean, Some(0.0));
        let half: Vec<_> = truths
            .iter()
            .enumerate()
            .map(|(k, t)| {
                (k % 2 == 0).then(|| DecodedPose {
                    p: t.p + PlanarPoint::new(6.0, 8.0),
                    heading: None,
                })
            })
            .collect();
        let (p, o) = pose_metrics(&half, &truths).unwrap();
        assert_eq!(
            (p.response_rate, p.mean, p.median),
            (0.5, Some(10.0), Some(10.0))
        );
        assert_eq!((o.response_rate, o.mean), (0.0, None));
        assert_eq!(pose_metrics::<f64>(&[], &[]), Err(EvalError::Empty));
    }

    #[test]
    fn statistics_match_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 1..60 {
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..100.0)).collect();
            let naive_mean = v.iter().sum::<f64>() / n as f64;
            assert!((mean(&v).unwrap() - naive_mean).abs() < 1e-12);
            let mut s = v.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let m = if n % 2 == 1 {
                s[n / 2]
            } else {
                0.5 * (s[n / 2 - 1] + s[n / 2])
            };
            assert_eq!(median(&v).unwrap(), m);
        }
    }

    #[test]
    fn control_mae_examples() {
        let cmds = |bias: f64, turn: f64| -> [ControlCommand<f64>; HORIZON] {
            std::array::from_fn(|n| ControlCommand {
                interval: n + 1,
                speed: 10.0 + bias,
                steering: turn,
            })
        };
        let z = control_mae(&[cmds(0.0, 5.0)], &[cmds(0.0, 5.0)]).unwrap();
        assert!(z.speed.iter().chain(&z.angle).all(|v| *v == 0.0));
        let b = control_mae(
            &[cmds(1.0, 179.0), cmds(1.0, 0.0)],
            &[cmds(0.0, -179.0), cmds(0.0, 0.0)],
        )
        .unwrap();
        for n in 0..HORIZON {
            assert_eq!(b.speed[n], 1.0);
            assert!((b.angle[n] - 1.0).abs() < 1e-12);
        }
        assert!(control_mae(&[cmds(0.0, 0.0)], &[]).is_err());
    }
}
