//! Replay-based verification: drive the incremental detector over an event
//! stream and compare its frontier against the brute-force oracle after
//! events.

use crate::event::Event;
use crate::frontier::incremental::DetectorError;
use crate::frontier::{DetectorConfig, IncrementalDetector};
use crate::geometry::RigidTransform2;
use crate::grid::Submap;
use crate::oracle::{assemble_global_map, compare, naive_global_frontier, ComparisonReport};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Aggregated verification result over one event stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationOutcome {
    pub events: usize,
    pub verified_events: usize,
    pub total_missing: usize,
    pub total_hard_extras: usize,
    pub total_merge_conflict_extras: usize,
    /// Detector points summed over verified events; denominator of the
    /// merge-conflict fraction.
    pub total_detector_points: usize,
    /// Per verified event: (event index, report).
    #[serde(skip)]
    pub reports: Vec<(usize, ComparisonReport)>,
}

impl VerificationOutcome {
    pub fn is_clean(&self) -> bool {
        self.total_missing == 0 && self.total_hard_extras == 0
    }

    pub fn merge_conflict_fraction(&self) -> f64 {
        if self.total_detector_points == 0 {
            0.0
        } else {
            self.total_merge_conflict_extras as f64 / self.total_detector_points as f64
        }
    }
}

/// Compare the detector's current frontier against a fresh oracle
/// recomputation of the same submaps and poses.
pub fn compare_against_oracle(detector: &IncrementalDetector) -> ComparisonReport {
    let pairs: Vec<(Arc<Submap>, RigidTransform2)> = detector
        .known_submaps()
        .map(|(id, submap)| {
            let pose = detector
                .current_poses()
                .pose(id)
                .expect("detector state always holds poses for known submaps");
            (submap.clone(), *pose)
        })
        .collect();
    let grid = assemble_global_map(&pairs);
    let oracle_points = naive_global_frontier(&grid);
    compare(&detector.frontier_points_vec(), &oracle_points, &grid)
}

/// Replay `events` through a fresh incremental detector, comparing against
/// the oracle after every `oracle_every`-th event (and always after
/// optimization events). `oracle_every` of 1 verifies after every event.
pub fn verify_events(
    events: &[Event],
    config: DetectorConfig,
    oracle_every: usize,
) -> Result<VerificationOutcome, DetectorError> {
    let mut detector = IncrementalDetector::new(config);
    let mut outcome = VerificationOutcome {
        events: events.len(),
        verified_events: 0,
        total_missing: 0,
        total_hard_extras: 0,
        total_merge_conflict_extras: 0,
        total_detector_points: 0,
        reports: Vec::new(),
    };
    let cadence = oracle_every.max(1);
    for (i, event) in events.iter().enumerate() {
        detector.handle_event(event)?;
        let verify_now = i % cadence == 0
            || i + 1 == events.len()
            || matches!(event, Event::OptimizationDone { .. });
        if !verify_now {
            continue;
        }
        let report = compare_against_oracle(&detector);
        outcome.verified_events += 1;
        outcome.total_missing += report.missing.len();
        outcome.total_hard_extras += report.hard_extras.len();
        outcome.total_merge_conflict_extras += report.merge_conflict_extras.len();
        outcome.total_detector_points += report.detector_total;
        outcome.reports.push((i, report));
    }
    Ok(outcome)
}

impl IncrementalDetector {
    /// Flattened current frontier as a vector (helper for comparisons).
    pub fn frontier_points_vec(&self) -> Vec<crate::geometry::Point2> {
        self.global_frontier().all_points()
    }
}
