//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Tolerances and thresholds are pinned here, not
//! configurable.

use std::sync::Arc;
use std::time::Instant;
use submap_frontier::bench::{area_scaling_scenario, bench_events};
use submap_frontier::detector::{run_detector, SkipPolicy};
use submap_frontier::event::Event;
use submap_frontier::frontier::{detect_local_frontier, DetectorConfig, IncrementalDetector};
use submap_frontier::geometry::{Point2, RigidTransform2};
use submap_frontier::grid::{
    classify_storage, probability_to_storage, storage_half_quantum, storage_to_probability,
    CellClass, Scan, Submap, SubmapId,
};
use submap_frontier::harness::{loop_closure_scenario, verification_suite};
use submap_frontier::oracle::{assemble_global_map, naive_global_frontier};
use submap_frontier::verification::verify_events;

/// Criteria 1 and 2 share the fixed tolerance set.
const SCENARIO_COUNT: usize = 20;
const MAX_SUBMAPS: usize = 20;
const MAX_SCENARIO_SECONDS: f64 = 120.0;
const MAX_MERGE_CONFLICT_FRACTION: f64 = 0.001;
const MIN_LOOP_DRIFT_CELLS: f64 = 10.0;

fn strict_config() -> DetectorConfig {
    DetectorConfig {
        epsilon: 0.0,
        smoothing: false,
        baking_submaps: 0,
        check_invariants: false,
    }
}

fn count_submaps(events: &[Event]) -> usize {
    let mut ids = std::collections::BTreeSet::new();
    for event in events {
        if let Event::ScanInserted { submaps, .. } = event {
            for s in submaps {
                ids.insert(s.id());
            }
        }
    }
    ids.len()
}

/// Criteria 1 + 2: oracle completeness and soundness over the randomized
/// scenario suite, checked after every event.
#[test]
fn criterion_1_2_oracle_completeness_and_soundness() {
    let scenarios = verification_suite(SCENARIO_COUNT).unwrap();
    assert!(scenarios.len() >= 20);
    let mut total_missing = 0usize;
    let mut total_hard = 0usize;
    let mut total_conflicts = 0usize;
    let mut total_points = 0usize;
    for scenario in &scenarios {
        let start = Instant::now();
        let events = scenario.events().unwrap();
        assert!(
            count_submaps(&events) <= MAX_SUBMAPS,
            "{}: too many submaps",
            scenario.name
        );
        let outcome = verify_events(&events, strict_config(), 1).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        assert!(
            elapsed < MAX_SCENARIO_SECONDS,
            "{}: {elapsed:.1}s exceeds the desk-scale budget",
            scenario.name
        );
        total_missing += outcome.total_missing;
        total_hard += outcome.total_hard_extras;
        total_conflicts += outcome.total_merge_conflict_extras;
        total_points += outcome.total_detector_points;
        assert_eq!(
            outcome.total_missing, 0,
            "{}: oracle frontier points missing from the detector",
            scenario.name
        );
        assert_eq!(
            outcome.total_hard_extras, 0,
            "{}: detector reported points the merged map rejects",
            scenario.name
        );
    }
    let fraction = total_conflicts as f64 / total_points.max(1) as f64;
    assert!(
        fraction < MAX_MERGE_CONFLICT_FRACTION,
        "merge-conflict extras {total_conflicts}/{total_points} exceed 0.1%"
    );
    println!(
        "[PASS] criterion 1 (completeness): 0 missing over {SCENARIO_COUNT} scenarios ({total_points} points checked)"
    );
    println!(
        "[PASS] criterion 2 (soundness): {total_hard} hard extras, merge-conflict fraction {:.5}% < 0.1%",
        fraction * 100.0
    );
    assert_eq!(total_missing, 0);
}

/// Criterion 3: loop closure with >= 10 cells of accumulated drift, clean
/// immediately after the snap-to-truth optimization event.
#[test]
fn criterion_3_loop_closure_robustness() {
    let scenario = loop_closure_scenario(1).unwrap();
    let resolution = scenario.config.resolution;
    let events = scenario.events().unwrap();

    // Measure the correction applied by the first optimization event.
    let mut previous_poses: Option<submap_frontier::event::PoseGraphSolution> = None;
    let mut max_correction_cells = 0.0f64;
    let mut optimization_index = None;
    for (i, event) in events.iter().enumerate() {
        match event {
            Event::ScanInserted { poses, .. } => {
                if optimization_index.is_none() {
                    previous_poses = Some(poses.clone());
                }
            }
            Event::OptimizationDone { solution } if optimization_index.is_none() => {
                let before = previous_poses.as_ref().expect("scans precede optimization");
                for (id, pose) in &solution.poses {
                    if let Some(old) = before.pose(*id) {
                        let dt = pose.translation();
                        let ot = old.translation();
                        let cells = ((dt[0] - ot[0]).abs().max((dt[1] - ot[1]).abs())) / resolution;
                        max_correction_cells = max_correction_cells.max(cells);
                    }
                }
                optimization_index = Some(i);
            }
            _ => {}
        }
    }
    let optimization_index = optimization_index.expect("scenario contains an optimization event");
    assert!(
        max_correction_cells >= MIN_LOOP_DRIFT_CELLS,
        "accumulated drift {max_correction_cells:.1} cells below the 10-cell requirement"
    );

    let outcome = verify_events(&events, strict_config(), 1).unwrap();
    assert_eq!(outcome.total_missing, 0, "missing points after loop closure");
    assert_eq!(outcome.total_hard_extras, 0, "hard extras after loop closure");
    // The event right after the optimization must have been verified clean.
    assert!(outcome
        .reports
        .iter()
        .any(|(i, r)| *i == optimization_index && r.is_clean()));
    println!(
        "[PASS] criterion 3 (loop closure): {max_correction_cells:.1}-cell correction at event {optimization_index}, frontier valid immediately after"
    );
}

/// Criterion 4: forced skipping of non-final updates leaves the final
/// frontier exactly equal to the full run's.
#[test]
fn criterion_4_skip_equivalence() {
    let scenarios = verification_suite(4).unwrap();
    for scenario in &scenarios {
        let events = scenario.events().unwrap();
        let mut full = IncrementalDetector::new(strict_config());
        let mut skipping = IncrementalDetector::new(strict_config());
        let full_run = run_detector(&events, &mut full, SkipPolicy::None).unwrap();
        let skip_run = run_detector(&events, &mut skipping, SkipPolicy::FinishedOnly).unwrap();
        assert!(
            skip_run.metrics.submap_update_events_skipped > 0,
            "{}: skip mode processed everything",
            scenario.name
        );
        assert_eq!(
            full.global_frontier(),
            skipping.global_frontier(),
            "{}: final frontier differs under forced skipping",
            scenario.name
        );
        assert_eq!(
            full_run.metrics.submap_update_events_total,
            skip_run.metrics.submap_update_events_total
        );
    }
    println!("[PASS] criterion 4 (skip equivalence): final frontiers identical with non-final updates skipped");
}

/// Criterion 5: optimization handling scales with frontier perimeter, the
/// naive recomputation with map area.
#[test]
fn criterion_5_perimeter_vs_area_scaling() {
    let small = area_scaling_scenario(5.0).unwrap();
    let large = area_scaling_scenario(10.0).unwrap();
    let small_events = small.events().unwrap();
    let large_events = large.events().unwrap();
    let config = strict_config();
    let report_small = bench_events(
        &small.name,
        &small_events,
        config.clone(),
        SkipPolicy::None,
        31,
    )
    .unwrap();
    let report_large =
        bench_events(&large.name, &large_events, config, SkipPolicy::None, 31).unwrap();

    let area_growth = report_large.free_area_cells as f64 / report_small.free_area_cells as f64;
    let perimeter_growth = report_large.local_frontier_perimeter.max(1) as f64
        / report_small.local_frontier_perimeter.max(1) as f64;
    assert!(
        area_growth > 3.5,
        "scenario family must grow free area ~4x (got {area_growth:.2}x)"
    );
    assert!(
        perimeter_growth < 1.5,
        "scenario family must keep perimeter growth < 1.5x (got {perimeter_growth:.2}x)"
    );

    let optimization_growth =
        report_large.median_optimization_us / report_small.median_optimization_us.max(1.0);
    let naive_growth =
        report_large.median_naive_recompute_us / report_small.median_naive_recompute_us.max(1.0);
    assert!(
        optimization_growth < 2.0,
        "optimization handling grew {optimization_growth:.2}x (>= 2x) while perimeter grew {perimeter_growth:.2}x"
    );
    assert!(
        naive_growth > 3.0,
        "naive recomputation grew only {naive_growth:.2}x (expected > 3x with {area_growth:.2}x area)"
    );
    println!(
        "[PASS] criterion 5 (scaling): area x{area_growth:.2}, perimeter x{perimeter_growth:.2} => optimization x{optimization_growth:.2} (< 2), naive x{naive_growth:.2} (> 3)"
    );
}

/// Criterion 6: repeating an optimization with unchanged poses rejects each
/// failing local frontier point with exactly one stabbing test.
#[test]
fn criterion_6_hint_effectiveness() {
    let scenario = verification_suite(2).unwrap().remove(1);
    let events = scenario.events().unwrap();
    let mut detector = IncrementalDetector::new(strict_config());
    for event in &events {
        detector.handle_event(event).unwrap();
    }
    let poses = detector.current_poses().clone();
    detector.handle_optimization(&poses).unwrap();
    detector.reset_stats();
    detector.handle_optimization(&poses).unwrap();
    let stats = detector.stats();
    assert!(stats.failing_points > 0, "scenario produced no failing points");
    assert_eq!(
        stats.stab_tests_for_failing_points, stats.failing_points,
        "failing points must be rejected by their hint on the first test"
    );
    assert_eq!(stats.hint_rejections, stats.failing_points);
    println!(
        "[PASS] criterion 6 (hints): {} failing points rejected with {} stabbing tests",
        stats.failing_points, stats.stab_tests_for_failing_points
    );
}

/// Criterion 7: exact unit conformance of thresholding, clamping, storage
/// mapping, and the single-submap naive/local frontier equality.
#[test]
fn criterion_7_unit_conformance() {
    // Thresholding rule.
    assert_eq!(classify_storage(probability_to_storage(0.3), 0.0), CellClass::Free);
    assert_eq!(classify_storage(probability_to_storage(0.7), 0.0), CellClass::Occupied);
    assert_eq!(classify_storage(0, 0.0), CellClass::Unobserved);
    assert_eq!(
        classify_storage(probability_to_storage(0.48), 0.04),
        CellClass::Unobserved
    );

    // Clamping to [0.1, 0.9] and the storage endpoints.
    assert_eq!(probability_to_storage(0.0), 1);
    assert_eq!(probability_to_storage(1.0), 65535);
    assert_eq!(probability_to_storage(0.1), 1);
    assert_eq!(probability_to_storage(0.9), 65535);
    assert_eq!(probability_to_storage(0.5), 32768);

    // Round trip within half a quantum over a dense probability sweep.
    let half = storage_half_quantum();
    for i in 0..=10_000 {
        let p = 0.1 + 0.8 * i as f64 / 10_000.0;
        let back = storage_to_probability(probability_to_storage(p));
        assert!((back - p).abs() <= half + 1e-12, "p={p}");
    }

    // Single-submap equality: naive frontier of the merged map under the
    // identity pose equals the local frontier, as exact cell sets.
    let mut submap = Submap::new(SubmapId(0), 0.05, 100);
    for row in 0..12 {
        let y = (2.0 + row as f64 + 0.5) * 0.05;
        let scan = Scan::new(
            Point2::new(0.125, y),
            vec![Point2::new(0.125 + 0.8, y), Point2::new(0.125 - 0.04, y)],
        );
        submap.insert_scan(&scan, 0.55, 0.49).unwrap();
    }
    let submap = Arc::new(submap);
    let grid = assemble_global_map(&[(submap.clone(), RigidTransform2::identity())]);
    let naive: std::collections::BTreeSet<(i32, i32)> = naive_global_frontier(&grid)
        .iter()
        .map(|p| grid.nearest_cell(*p))
        .collect();
    let local: std::collections::BTreeSet<(i32, i32)> = detect_local_frontier(
        &submap,
        &DetectorConfig::default(),
        None,
    )
    .cells()
    .collect();
    assert_eq!(naive, local, "naive and local frontier disagree");
    assert!(!naive.is_empty());
    println!("[PASS] criterion 7 (unit conformance): thresholding, clamping, storage round-trip, single-submap equality all exact");
}

/// Criterion 8: the benchmark reports the full metric schema of the paper's
/// table (latency mean/stddev, update frequency, skipped and optimization
/// event counts), even though the absolute figures are machine-bound.
#[test]
fn criterion_8_bench_metric_schema() {
    let scenario = verification_suite(1).unwrap().remove(0);
    let events = scenario.events().unwrap();
    let report = bench_events(
        &scenario.name,
        &events,
        strict_config(),
        SkipPolicy::FinishedOnly,
        5,
    )
    .unwrap();
    let json = serde_json::to_value(&report).unwrap();
    let metrics = &json["incremental"];
    for field in [
        "update_latency",
        "optimization_latency",
        "update_frequency_hz",
        "submap_update_events_total",
        "submap_update_events_processed",
        "submap_update_events_skipped",
        "optimization_events",
    ] {
        assert!(!metrics[field].is_null(), "schema missing {field}");
    }
    for field in ["mean_us", "stddev_us", "count"] {
        assert!(
            !metrics["update_latency"][field].is_null(),
            "latency schema missing {field}"
        );
    }
    assert!(report.incremental.submap_update_events_skipped > 0);
    assert!(report.incremental.update_frequency_hz > 0.0);
    assert!(!json["naive"].is_null());
    println!(
        "[PASS] criterion 8 (metric schema): frequency {:.1} Hz, {} skipped / {} total updates, {} optimization events",
        report.incremental.update_frequency_hz,
        report.incremental.submap_update_events_skipped,
        report.incremental.submap_update_events_total,
        report.incremental.optimization_events
    );
}
