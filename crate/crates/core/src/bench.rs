//! Benchmark machinery: time the incremental detector and the naive
//! full-recomputation baseline over the same event stream, and report the
//! metric schema a SLAM-coupled deployment would (latency distributions,
//! update frequency, skipped and optimization event counts).

use crate::detector::{run_detector, LatencySummary, RunMetrics, SkipPolicy};
use crate::event::{Event, PoseGraphSolution};
use crate::frontier::incremental::DetectorError;
use crate::frontier::{DetectorConfig, IncrementalDetector, NaiveDetector};
use crate::geometry::RigidTransform2;
use crate::grid::{CellClass, Submap};
use crate::harness::{
    generate_environment, rectangle_loop_plan, EnvironmentSpec, HarnessError, LidarConfig,
    Scenario, SimConfig,
};
use crate::oracle::assemble_global_map;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

/// Everything one benchmark run reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub scenario: String,
    /// Incremental detector run: update/optimization latencies, update
    /// frequency, skipped and optimization event counts, stab counters.
    pub incremental: RunMetrics,
    /// Naive full-recomputation run over the same events.
    pub naive: RunMetrics,
    /// Median of repeated optimization handling on the final state,
    /// microseconds.
    pub median_optimization_us: f64,
    /// Median of repeated naive full recomputations on the final state,
    /// microseconds.
    pub median_naive_recompute_us: f64,
    /// Free cells of the merged final map (the area driver of the naive
    /// cost).
    pub free_area_cells: usize,
    /// Total local frontier size over all submaps (the perimeter driver of
    /// the optimization cost).
    pub local_frontier_perimeter: usize,
    pub global_frontier_points: usize,
    pub submaps: usize,
}

fn median(samples: &mut [f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    samples[samples.len() / 2]
}

/// Shift every pose of a solution by one cell; rigid, so stab outcomes are
/// unchanged and repeated optimization handling does identical work.
fn shifted(solution: &PoseGraphSolution, dx: f64) -> PoseGraphSolution {
    PoseGraphSolution {
        epoch: solution.epoch + 1,
        poses: solution
            .poses
            .iter()
            .map(|(id, pose)| {
                let t = pose.translation();
                (
                    *id,
                    RigidTransform2::new([t[0] + dx, t[1]], pose.rotation()),
                )
            })
            .collect(),
    }
}

/// Run both strategies over the events and measure.
pub fn bench_events(
    name: &str,
    events: &[Event],
    config: DetectorConfig,
    skip: SkipPolicy,
    optimization_reps: usize,
) -> Result<BenchReport, DetectorError> {
    let mut incremental = IncrementalDetector::new(config);
    let incremental_run = run_detector(events, &mut incremental, skip)?;

    let mut naive = NaiveDetector::new();
    let naive_run = run_detector(events, &mut naive, skip)?;

    // Median optimization latency from repeated handling on the final state,
    // alternating between two rigidly shifted solutions.
    let resolution = incremental
        .known_submaps()
        .next()
        .map(|(_, s)| s.resolution())
        .unwrap_or(0.05);
    let base = incremental.current_poses().clone();
    let mut samples = Vec::with_capacity(optimization_reps);
    if !base.poses.is_empty() {
        for rep in 0..optimization_reps {
            let solution = if rep % 2 == 0 {
                shifted(&base, resolution)
            } else {
                base.clone()
            };
            let start = Instant::now();
            incremental.handle_optimization(&solution)?;
            samples.push(start.elapsed().as_secs_f64() * 1e6);
        }
    }
    let median_optimization_us = median(&mut samples);

    // Median naive recompute on the final state.
    let pairs: Vec<(Arc<Submap>, RigidTransform2)> = incremental
        .known_submaps()
        .map(|(id, s)| (s.clone(), *incremental.current_poses().pose(id).unwrap()))
        .collect();
    let mut naive_samples = Vec::new();
    let mut free_area_cells = 0;
    for _ in 0..optimization_reps.min(7).max(1) {
        let start = Instant::now();
        let grid = assemble_global_map(&pairs);
        let frontier = crate::oracle::naive_global_frontier(&grid);
        naive_samples.push(start.elapsed().as_secs_f64() * 1e6);
        std::hint::black_box(&frontier);
        free_area_cells = grid
            .cells()
            .filter(|c| grid.class_at(*c) == CellClass::Free)
            .count();
    }
    let median_naive_recompute_us = median(&mut naive_samples);

    let local_frontier_perimeter = incremental
        .known_submaps()
        .map(|(id, _)| incremental.local_frontier(id).map_or(0, |lf| lf.len()))
        .sum();

    Ok(BenchReport {
        scenario: name.to_string(),
        incremental: incremental_run.metrics,
        naive: naive_run.metrics,
        median_optimization_us,
        median_naive_recompute_us,
        free_area_cells,
        local_frontier_perimeter,
        global_frontier_points: incremental.global_frontier().total_points(),
        submaps: incremental.known_submaps().count(),
    })
}

/// Scenario family for the perimeter-vs-area scaling comparison: a convex
/// room fully visible from a short fixed loop at its center. Doubling the
/// side quadruples the free area while the trajectory, submap count, and
/// local frontier perimeter stay put.
pub fn area_scaling_scenario(side_m: f64) -> Result<Scenario, HarnessError> {
    let env = generate_environment(
        0,
        &EnvironmentSpec::Room {
            width_m: side_m,
            height_m: side_m,
            obstacles: 0,
        },
        0.05,
    )?;
    // Small loop at the room center, identical across sizes.
    let inset = side_m / 2.0 - 0.6 + 0.1;
    let plan = rectangle_loop_plan(&env, inset, 1.0, 0.15)?;
    let config = SimConfig {
        resolution: 0.05,
        scans_per_submap: 12,
        p_hit: 0.55,
        p_miss: 0.49,
        lidar: LidarConfig {
            num_beams: 2048,
            max_range: 2.0 * side_m,
            angle_span: std::f64::consts::TAU,
        },
        drift: crate::harness::DriftModel {
            translation_bias: [0.0008, 0.0005],
            translation_noise_std: 0.0,
            rotation_noise_std: 0.0,
            seed: 11,
        },
        optimization_cadence: 2,
        correction: crate::harness::CorrectionPolicy::SnapToTruth,
    };
    Ok(Scenario {
        name: format!("area-scaling-{side_m}m"),
        env,
        plan,
        config,
    })
}
