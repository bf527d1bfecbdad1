//! Simulated 2D laser rangefinder over a ground-truth bitmap.

use super::env::{Environment, HarnessError};
use crate::geometry::{Point2, RigidTransform2};
use crate::grid::Scan;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarConfig {
    pub num_beams: u32,
    /// Meters. Beams whose first wall intersection lies beyond produce no hit.
    pub max_range: f64,
    /// Radians, centered on the robot heading. `2*PI` is a full sweep.
    pub angle_span: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            num_beams: 256,
            max_range: 8.0,
            angle_span: std::f64::consts::TAU,
        }
    }
}

/// Hit points land this many cells past the wall-face intersection, along
/// the beam. The nudge keeps the point strictly inside the occupied cell so
/// the containing-cell lookup is unambiguous, and keeps the ray from
/// traveling inside the wall row the way snapping to the cell center would.
const HIT_NUDGE_CELLS: f64 = 1e-4;

/// Cast all beams from the true pose and return the scan in the sensor frame
/// (origin at zero, hits relative to the robot).
pub fn simulate_scan(
    env: &Environment,
    true_pose: &RigidTransform2,
    lidar: &LidarConfig,
) -> Result<Scan, HarnessError> {
    let position = Point2::new(true_pose.translation()[0], true_pose.translation()[1]);
    if !env.is_free_point(position) {
        return Err(HarnessError::PoseInOccupiedCell {
            x: position.x,
            y: position.y,
        });
    }
    let to_sensor = true_pose.invert();
    let mut hits = Vec::new();
    let n = lidar.num_beams.max(1);
    for beam in 0..n {
        let angle = true_pose.rotation() - lidar.angle_span / 2.0
            + lidar.angle_span * (beam as f64 + 0.5) / n as f64;
        if let Some(t_cells) = first_occupied_entry(env, position, angle, lidar.max_range) {
            let r = env.resolution();
            let distance = (t_cells + HIT_NUDGE_CELLS) * r;
            let world = Point2::new(
                position.x + distance * angle.cos(),
                position.y + distance * angle.sin(),
            );
            hits.push(to_sensor.project_point(world));
        }
    }
    Ok(Scan::new(Point2::new(0.0, 0.0), hits))
}

/// Walk the unit-cell lattice along a ray; returns the entry parameter (in
/// cells) of the first occupied cell within range. At an exact corner
/// crossing both side cells are examined so the ray cannot tunnel through a
/// diagonal wall joint.
fn first_occupied_entry(
    env: &Environment,
    from: Point2,
    angle: f64,
    max_range: f64,
) -> Option<f64> {
    let r = env.resolution();
    let start = (from.x / r, from.y / r);
    let (dir_x, dir_y) = (angle.cos(), angle.sin());
    let range_cells = max_range / r;

    let (mut cx, mut cy) = crate::ray::cell_of(start.0, start.1);
    let step_x: i32 = if dir_x > 0.0 { 1 } else { -1 };
    let step_y: i32 = if dir_y > 0.0 { 1 } else { -1 };
    let next_boundary = |c: i32, step: i32| if step > 0 { (c + 1) as f64 } else { c as f64 };
    let mut t_max_x = if dir_x != 0.0 {
        (next_boundary(cx, step_x) - start.0) / dir_x
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dir_y != 0.0 {
        (next_boundary(cy, step_y) - start.1) / dir_y
    } else {
        f64::INFINITY
    };
    let t_delta_x = if dir_x != 0.0 { 1.0 / dir_x.abs() } else { f64::INFINITY };
    let t_delta_y = if dir_y != 0.0 { 1.0 / dir_y.abs() } else { f64::INFINITY };

    loop {
        let t_next = t_max_x.min(t_max_y);
        if t_next > range_cells {
            return None;
        }
        if t_max_x < t_max_y {
            cx += step_x;
            t_max_x += t_delta_x;
        } else if t_max_y < t_max_x {
            cy += step_y;
            t_max_y += t_delta_y;
        } else {
            for side in [(cx, cy + step_y), (cx + step_x, cy)] {
                if env.is_occupied(side) {
                    return Some(t_next);
                }
            }
            cx += step_x;
            cy += step_y;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        }
        if env.is_occupied((cx, cy)) {
            return Some(t_next);
        }
        if !env.in_bounds((cx, cy)) {
            return None;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::env::{generate_environment, EnvironmentSpec};

    fn room_10m() -> Environment {
        generate_environment(
            1,
            &EnvironmentSpec::Room {
                width_m: 10.0,
                height_m: 10.0,
                obstacles: 0,
            },
            0.05,
        )
        .unwrap()
    }

    #[test]
    fn short_range_in_large_room_sees_nothing() {
        let env = room_10m();
        let pose = RigidTransform2::from_translation(5.1, 5.1);
        let lidar = LidarConfig {
            num_beams: 64,
            max_range: 3.0,
            ..LidarConfig::default()
        };
        let scan = simulate_scan(&env, &pose, &lidar).unwrap();
        assert!(scan.hits.is_empty());
    }

    #[test]
    fn perpendicular_wall_hit_distance() {
        let env = room_10m();
        // Wall face at x = 10.1 (interior spans 0.1 .. 10.1); robot 2 m away.
        let pose = RigidTransform2::from_translation(8.1, 5.1);
        let lidar = LidarConfig {
            num_beams: 1,
            max_range: 8.0,
            angle_span: 0.0,
        };
        let scan = simulate_scan(&env, &pose, &lidar).unwrap();
        assert_eq!(scan.hits.len(), 1);
        // The hit snaps to the wall cell center: within half a cell of the
        // 2 m wall face along the beam, and half a cell laterally.
        let hit = scan.hits[0];
        assert!((hit.x - 2.0).abs() <= 0.05 / 2.0 + 1e-9, "range {}", hit.x);
        assert!(hit.y.abs() <= 0.05 / 2.0 + 1e-9, "lateral {}", hit.y);
    }

    #[test]
    fn closed_room_all_beams_hit() {
        let env = room_10m();
        let pose = RigidTransform2::new([5.1, 5.1], 0.3);
        let lidar = LidarConfig {
            num_beams: 360,
            max_range: 20.0,
            angle_span: std::f64::consts::TAU,
        };
        let scan = simulate_scan(&env, &pose, &lidar).unwrap();
        assert_eq!(scan.hits.len(), 360);
        for hit in &scan.hits {
            // Every hit lands on an occupied env cell when mapped back.
            let world = pose.project_point(*hit);
            assert!(env.is_occupied(env.cell_of(world)));
        }
    }

    #[test]
    fn pose_in_wall_errors() {
        let env = room_10m();
        let pose = RigidTransform2::from_translation(0.01, 0.01);
        assert!(matches!(
            simulate_scan(&env, &pose, &LidarConfig::default()),
            Err(HarnessError::PoseInOccupiedCell { .. })
        ));
    }
}
