//! Ego-frame trajectories, their loss, control commands and pose smoothing.
//!
//! The ego frame has its origin at the vehicle and +y along its heading, so
//! +x points to the right. Headings are radians counterclockwise from east.

use thiserror::Error;

use crate::geo::TimedSample;
use crate::geom::PlanarPoint;
use crate::polyfit::{fit_points, FitError};
use crate::scalar::{lit, pairwise_sum, wrap_angle, wrap_degrees, Real};

/// Number of future points, one per second.
pub const HORIZON: usize = 7;

/// Below this speed (m/s) a heading cannot be observed.
pub const STANDSTILL_SPEED: f64 = 0.5;

/// Interval displacements below this (m) carry the previous steering over.
pub const MIN_DISPLACEMENT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("window [{from}, {to}] s is too sparse: {got} samples, need {needed}")]
    WindowTooSparse {
        from: f64,
        to: f64,
        got: usize,
        needed: usize,
    },
    #[error("heading undefined: speed {speed:.3} m/s at t = {t} s")]
    HeadingUndefined { t: f64, speed: f64 },
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Seven ego-frame points at t = 1..7 s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory<T> {
    pub points: [PlanarPoint<T>; HORIZON],
}

impl<T: Real> Trajectory<T> {
    pub fn new(points: [PlanarPoint<T>; HORIZON]) -> Result<Self, TrajectoryError> {
        if points.iter().all(PlanarPoint::is_finite) {
            Ok(Self { points })
        } else {
            Err(TrajectoryError::InvalidInput(
                "trajectory points must be finite".into(),
            ))
        }
    }

    /// Map-frame positions of the points for a vehicle at `pose`.
    pub fn to_map_frame(&self, pose: &Pose<T>) -> [PlanarPoint<T>; HORIZON] {
        self.points.map(|q| ego_to_map(pose, q))
    }

    /// Ego-frame trajectory of map-frame points seen from `pose`.
    pub fn from_map_frame(pose: &Pose<T>, points: [PlanarPoint<T>; HORIZON]) -> Self {
        Self {
            points: points.map(|p| map_to_ego(pose, p)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T> {
    pub t: T,
    pub p: PlanarPoint<T>,
    /// Radians in (-pi, pi].
    pub heading: T,
}

impl<T: Real> Pose<T> {
    pub fn new(t: T, p: PlanarPoint<T>, heading: T) -> Self {
        Self {
            t,
            p,
            heading: wrap_angle(heading),
        }
    }

    fn axes(&self) -> (PlanarPoint<T>, PlanarPoint<T>) {
        let (s, c) = self.heading.sin_cos();
        (PlanarPoint::new(c, s), PlanarPoint::new(s, -c))
    }
}

pub fn ego_to_map<T: Real>(pose: &Pose<T>, q: PlanarPoint<T>) -> PlanarPoint<T> {
    let (fwd, right) = pose.axes();
    pose.p + right * q.x + fwd * q.y
}

pub fn map_to_ego<T: Real>(pose: &Pose<T>, p: PlanarPoint<T>) -> PlanarPoint<T> {
    let (fwd, right) = pose.axes();
    let d = p - pose.p;
    PlanarPoint::new(d.dot(&right), d.dot(&fwd))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand<T> {
    /// 1..=7.
    pub interval: usize,
    /// m/s.
    pub speed: T,
    /// Heading change over the interval, degrees in (-180, 180]; positive
    /// is a left turn.
    pub steering: T,
}

/// Mean Euclidean distance between corresponding points.
pub fn trajectory_loss<T: Real>(pred: &Trajectory<T>, truth: &Trajectory<T>) -> T {
    let d: Vec<T> = pred
        .points
        .iter()
        .zip(&truth.points)
        .map(|(p, q)| p.distance(q))
        .collect();
    pairwise_sum(&d) / lit(HORIZON as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthConfig<T> {
    pub degree: usize,
    /// Extra seconds of context, split evenly before t0 and after t0 + 7.
    pub fit_window: T,
}

impl<T: Real> Default for GroundTruthConfig<T> {
    fn default() -> Self {
        Self {
            degree: 4,
            fit_window: lit(2.0),
        }
    }
}

/// Fits one time polynomial around `[t0, t0 + 7]` and reads the pose at
/// `t0` and the following seven seconds from it.
pub fn ground_truth_trajectory<T: Real>(
    trace: &[TimedSample<T>],
    t0: T,
    config: &GroundTruthConfig<T>,
) -> Result<(Pose<T>, Trajectory<T>), TrajectoryError> {
    let half = config.fit_window / lit(2.0);
    if !(half >= T::zero()) || !t0.is_finite() {
        return Err(TrajectoryError::InvalidInput(
            "fit window must be non-negative and t0 finite".into(),
        ));
    }
    let lo = t0 - half;
    let hi = t0 + lit(HORIZON as f64) + half;
    let eps = lit::<T>(1e-9);
    let inside: Vec<&TimedSample<T>> = trace
        .iter()
        .filter(|s| s.t >= lo - eps && s.t <= hi + eps)
        .collect();
    let needed = config.degree + 1;
    let covered = trace.first().is_some_and(|s| s.t <= lo + eps)
        && trace.last().is_some_and(|s| s.t >= hi - eps);
    if !covered || inside.len() < needed {
        return Err(TrajectoryError::WindowTooSparse {
            from: lo.to_f64().unwrap_or(f64::NAN),
            to: hi.to_f64().unwrap_or(f64::NAN),
            got: inside.len(),
            needed,
        });
    }
    let params: Vec<T> = inside.iter().map(|s| s.t - t0).collect();
    let pts: Vec<PlanarPoint<T>> = inside.iter().map(|s| s.p).collect();
    let curve = fit_points(&params, &pts, config.degree)?;
    let (dx, dy) = curve.derivative_at(&T::zero());
    let speed = dx.hypot(dy);
    if speed < lit(STANDSTILL_SPEED) {
        return Err(TrajectoryError::HeadingUndefined {
            t: t0.to_f64().unwrap_or(f64::NAN),
            speed: speed.to_f64().unwrap_or(f64::NAN),
        });
    }
    let pose = Pose::new(t0, curve.point_at(&T::zero()), dy.atan2(dx));
    let mut future = [PlanarPoint::origin(); HORIZON];
    for (n, slot) in future.iter_mut().enumerate() {
        *slot = curve.point_at(&lit((n + 1) as f64));
    }
    Ok((pose, Trajectory::from_map_frame(&pose, future)))
}

/// Per-second speed and steering. Interval 0 heads along ego +y.
pub fn derive_controls<T: Real>(traj: &Trajectory<T>) -> [ControlCommand<T>; HORIZON] {
    let mut out = [ControlCommand {
        interval: 0,
        speed: T::zero(),
        steering: T::zero(),
    }; HORIZON];
    let mut prev_point = PlanarPoint::origin();
    let mut prev_heading = T::FRAC_PI_2();
    let mut prev_steering = T::zero();
    for (n, cmd) in out.iter_mut().enumerate() {
        let step = traj.points[n] - prev_point;
        let speed = step.norm();
        let steering = if speed < lit(MIN_DISPLACEMENT) {
            prev_steering
        } else {
            wrap_degrees((step.heading() - prev_heading).to_degrees())
        };
        prev_heading = prev_heading + steering.to_radians();
        prev_steering = steering;
        prev_point = traj.points[n];
        *cmd = ControlCommand {
            interval: n + 1,
            speed,
            steering,
        };
    }
    out
}

/// Integrates commands from the ego origin heading along +y.
pub fn dead_reckon<T: Real>(controls: &[ControlCommand<T>]) -> Vec<PlanarPoint<T>> {
    let mut heading = T::FRAC_PI_2();
    let mut at = PlanarPoint::origin();
    controls
        .iter()
        .map(|c| {
            heading = heading + c.steering.to_radians();
            at = at + PlanarPoint::from_heading(heading) * c.speed;
            at
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothConfig<T> {
    /// Seconds.
    pub window: T,
    pub degree: usize,
}

impl<T: Real> Default for SmoothConfig<T> {
    fn default() -> Self {
        Self {
            window: lit(2.0),
            degree: 2,
        }
    }
}

/// Replaces each pose by a local time-polynomial fit over the poses within
/// `window / 2` seconds. Near either end the window is shifted inward so it
/// keeps its full width. Poses whose window holds fewer than `degree + 1`
/// poses, or whose fit is singular, pass through unchanged; so does the
/// heading where the fitted speed is below the standstill threshold.
pub fn smooth_poses<T: Real>(
    poses: &[Pose<T>],
    config: &SmoothConfig<T>,
) -> Result<Vec<Pose<T>>, TrajectoryError> {
    if !(config.window > T::zero()) || !config.window.is_finite() {
        return Err(TrajectoryError::InvalidInput(format!(
            "smoothing window must be positive, got {}",
            config.window
        )));
    }
    if poses.windows(2).any(|w| !(w[1].t >= w[0].t)) {
        return Err(TrajectoryError::InvalidInput(
            "poses must be time-sorted".into(),
        ));
    }
    let (Some(first), Some(last)) = (poses.first(), poses.last()) else {
        return Ok(Vec::new());
    };
    let half = config.window / lit(2.0);
    let eps = lit::<T>(1e-9);
    let mut out = Vec::with_capacity(poses.len());
    for pose in poses {
        let mut lo = pose.t - half;
        let mut hi = pose.t + half;
        if lo < first.t {
            lo = first.t;
            hi = lo + config.window;
        } else if hi > last.t {
            hi = last.t;
            lo = hi - config.window;
        }
        let near: Vec<&Pose<T>> = poses
            .iter()
            .filter(|q| q.t >= lo - eps && q.t <= hi + eps)
            .collect();
        if near.len() < config.degree + 1 {
            out.push(*pose);
            continue;
        }
        let params: Vec<T> = near.iter().map(|q| q.t - pose.t).collect();
        let pts: Vec<PlanarPoint<T>> = near.iter().map(|q| q.p).collect();
        let Ok(curve) = fit_points(&params, &pts, config.degree) else {
            out.push(*pose);
            continue;
        };
        let (dx, dy) = curve.derivative_at(&T::zero());
        let heading = if dx.hypot(dy) < lit(STANDSTILL_SPEED) {
            pose.heading
        } else {
            dy.atan2(dx)
        };
        out.push(Pose::new(pose.t, curve.point_at(&T::zero()), heading));
    }
    Ok(out)
}
