//! Ground-truth trajectory plans: pose sequences with bounded steps.

use super::env::{Environment, HarnessError};
use crate::geometry::{normalize_angle, Point2, RigidTransform2};

pub const MAX_STEP_TRANSLATION: f64 = 0.2;
pub const MAX_STEP_ROTATION: f64 = 0.2;

/// A sequence of ground-truth robot poses at scan times. Consecutive poses
/// stay within 0.2 m and 0.2 rad.
#[derive(Debug, Clone)]
pub struct TrajectoryPlan {
    poses: Vec<RigidTransform2>,
}

impl TrajectoryPlan {
    pub fn new(poses: Vec<RigidTransform2>) -> Result<Self, HarnessError> {
        for (i, pair) in poses.windows(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            let dt = ((b.translation()[0] - a.translation()[0]).powi(2)
                + (b.translation()[1] - a.translation()[1]).powi(2))
            .sqrt();
            let dr = normalize_angle(b.rotation() - a.rotation()).abs();
            if dt > MAX_STEP_TRANSLATION + 1e-9 || dr > MAX_STEP_ROTATION + 1e-9 {
                return Err(HarnessError::StepTooLarge {
                    index: i + 1,
                    translation: dt,
                    rotation: dr,
                });
            }
        }
        Ok(Self { poses })
    }

    pub fn poses(&self) -> &[RigidTransform2] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Interpolate a pose path through waypoints: translation steps of at most
/// `step_m`, heading along the direction of travel, with in-place rotation
/// interpolation at turns.
pub fn path_through_waypoints(
    waypoints: &[Point2],
    step_m: f64,
) -> Result<TrajectoryPlan, HarnessError> {
    assert!(step_m > 0.0 && step_m <= MAX_STEP_TRANSLATION);
    let mut poses: Vec<RigidTransform2> = Vec::new();
    let mut heading = 0.0f64;
    for pair in waypoints.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let dist = dx.hypot(dy);
        if dist < 1e-12 {
            continue;
        }
        let target_heading = dy.atan2(dx);
        // Rotate in place before moving.
        let mut delta = normalize_angle(target_heading - heading);
        while delta.abs() > MAX_STEP_ROTATION {
            let step = delta.signum() * MAX_STEP_ROTATION;
            heading = normalize_angle(heading + step);
            poses.push(RigidTransform2::new([a.x, a.y], heading));
            delta = normalize_angle(target_heading - heading);
        }
        heading = target_heading;
        let steps = (dist / step_m).ceil() as usize;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            poses.push(RigidTransform2::new(
                [a.x + t * dx, a.y + t * dy],
                heading,
            ));
        }
    }
    if poses.is_empty() {
        if let Some(p) = waypoints.first() {
            poses.push(RigidTransform2::new([p.x, p.y], 0.0));
        }
    }
    TrajectoryPlan::new(poses)
}

/// Boustrophedon sweep over a room's free interior.
pub fn serpentine_plan(
    env: &Environment,
    margin_m: f64,
    row_spacing_m: f64,
    step_m: f64,
) -> Result<TrajectoryPlan, HarnessError> {
    let r = env.resolution();
    let (w, h) = env.dimensions();
    let (max_x, max_y) = (w as f64 * r, h as f64 * r);
    let lo_x = margin_m;
    let hi_x = max_x - margin_m;
    let lo_y = margin_m;
    let hi_y = max_y - margin_m;
    if hi_x <= lo_x || hi_y <= lo_y {
        return Err(HarnessError::InfeasibleSpec(
            "sweep margin leaves no interior".into(),
        ));
    }
    let mut waypoints = Vec::new();
    let rows = ((hi_y - lo_y) / row_spacing_m).ceil() as usize + 1;
    for row in 0..rows {
        let y = (lo_y + row as f64 * row_spacing_m).min(hi_y);
        if row % 2 == 0 {
            waypoints.push(Point2::new(lo_x, y));
            waypoints.push(Point2::new(hi_x, y));
        } else {
            waypoints.push(Point2::new(hi_x, y));
            waypoints.push(Point2::new(lo_x, y));
        }
    }
    path_through_waypoints(&waypoints, step_m)
}

/// Laps around the rectangle inset from the bitmap edges by `inset_m`.
/// `laps` may be fractional; more than one lap revisits the start.
pub fn rectangle_loop_plan(
    env: &Environment,
    inset_m: f64,
    laps: f64,
    step_m: f64,
) -> Result<TrajectoryPlan, HarnessError> {
    let r = env.resolution();
    let (w, h) = env.dimensions();
    let lo_x = inset_m;
    let hi_x = w as f64 * r - inset_m;
    let lo_y = inset_m;
    let hi_y = h as f64 * r - inset_m;
    if hi_x <= lo_x || hi_y <= lo_y {
        return Err(HarnessError::InfeasibleSpec("loop inset leaves no interior".into()));
    }
    let corners = [
        Point2::new(lo_x, lo_y),
        Point2::new(hi_x, lo_y),
        Point2::new(hi_x, hi_y),
        Point2::new(lo_x, hi_y),
    ];
    let segments = (laps * 4.0).ceil() as usize;
    let mut waypoints = Vec::with_capacity(segments + 1);
    for i in 0..=segments {
        waypoints.push(corners[i % 4]);
    }
    path_through_waypoints(&waypoints, step_m)
}

/// Laps around a ring corridor's centerline.
pub fn ring_plan(
    env: &Environment,
    corridor_m: f64,
    laps: f64,
    step_m: f64,
) -> Result<TrajectoryPlan, HarnessError> {
    let wall = 2.0 * env.resolution();
    rectangle_loop_plan(env, wall + corridor_m / 2.0, laps, step_m)
}
