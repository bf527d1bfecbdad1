//! The detector strategy interface, the by-name registry, and the event loop
//! driving a strategy over a SLAM event stream.
//!
//! Two strategies exist: `incremental` (frontier maintenance constrained to
//! active submaps, robust to loop closure) and `naive` (full global map
//! reassembly per event, the baseline). Both consume the same events and can
//! be selected at runtime by name.

use crate::event::{Event, EventKind};
use crate::frontier::incremental::DetectorError;
use crate::frontier::{
    DetectorConfig, DetectorStats, FrontierUpdate, IncrementalDetector, NaiveDetector,
};
use crate::geometry::Point2;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

/// A frontier detection strategy driven by SLAM events.
pub trait FrontierDetector: Send {
    fn name(&self) -> &'static str;

    /// Consume one event; returns the published frontier updates.
    fn handle_event(&mut self, event: &Event) -> Result<Vec<FrontierUpdate>, DetectorError>;

    /// Current whole-map frontier: every valid global frontier point.
    fn frontier_points(&self) -> Vec<Point2>;

    fn stats(&self) -> DetectorStats;
}

impl FrontierDetector for IncrementalDetector {
    fn name(&self) -> &'static str {
        "incremental"
    }

    fn handle_event(&mut self, event: &Event) -> Result<Vec<FrontierUpdate>, DetectorError> {
        IncrementalDetector::handle_event(self, event)
    }

    fn frontier_points(&self) -> Vec<Point2> {
        self.global_frontier().all_points()
    }

    fn stats(&self) -> DetectorStats {
        IncrementalDetector::stats(self)
    }
}

impl FrontierDetector for NaiveDetector {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn handle_event(&mut self, event: &Event) -> Result<Vec<FrontierUpdate>, DetectorError> {
        NaiveDetector::handle_event(self, event)
    }

    fn frontier_points(&self) -> Vec<Point2> {
        self.frontier().to_vec()
    }

    fn stats(&self) -> DetectorStats {
        NaiveDetector::stats(self)
    }
}

/// Names accepted by [`build_detector`].
pub const DETECTOR_NAMES: &[&str] = &["incremental", "naive"];

#[derive(Debug, Error)]
#[error("unknown detector '{0}' (expected one of: incremental, naive)")]
pub struct UnknownDetector(pub String);

/// Instantiate a detector strategy by registry name.
pub fn build_detector(
    name: &str,
    config: DetectorConfig,
) -> Result<Box<dyn FrontierDetector>, UnknownDetector> {
    match name {
        "incremental" => Ok(Box::new(IncrementalDetector::new(config))),
        "naive" => Ok(Box::new(NaiveDetector::new())),
        other => Err(UnknownDetector(other.to_string())),
    }
}

/// Policy for dropping submap-update events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkipPolicy {
    /// Process every event.
    None,
    /// Process only finishing submap updates (plus the last update in the
    /// queue, which nothing newer supersedes). Deterministic; the final
    /// frontier is identical to processing everything because observed cells
    /// of an active submap never revert to unobserved.
    FinishedOnly,
    /// Drop an update only when the inbound queue already holds a newer
    /// update for every submap it covers. Over a fully-known queue this
    /// degenerates to `FinishedOnly`; live, it adapts to backlog.
    Adaptive,
}

impl std::str::FromStr for SkipPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(SkipPolicy::None),
            "finished-only" => Ok(SkipPolicy::FinishedOnly),
            "adaptive" => Ok(SkipPolicy::Adaptive),
            other => Err(format!("unknown skip policy '{other}'")),
        }
    }
}

/// Decide which events of a queue to process under a skip policy.
///
/// Optimization events and finish markers are never skipped; neither is a
/// finishing submap update nor the final submap update of the queue.
pub fn plan_skips(events: &[Event], policy: SkipPolicy) -> Vec<bool> {
    match policy {
        SkipPolicy::None => vec![false; events.len()],
        SkipPolicy::FinishedOnly | SkipPolicy::Adaptive => {
            let last_scan = events
                .iter()
                .rposition(|e| matches!(e, Event::ScanInserted { .. }));
            events
                .iter()
                .enumerate()
                .map(|(i, event)| match event {
                    Event::ScanInserted { .. } => {
                        !event.is_finishing_update() && Some(i) != last_scan
                    }
                    _ => false,
                })
                .collect()
        }
    }
}

/// Latency distribution over processed events of one kind, in microseconds.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct LatencySummary {
    pub count: usize,
    pub mean_us: f64,
    pub stddev_us: f64,
    pub min_us: f64,
    pub max_us: f64,
}

impl LatencySummary {
    pub fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let count = samples.len();
        let mean = samples.iter().sum::<f64>() / count as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / count as f64;
        Self {
            count,
            mean_us: mean,
            stddev_us: var.sqrt(),
            min_us: samples.iter().cloned().fold(f64::INFINITY, f64::min),
            max_us: samples.iter().cloned().fold(0.0, f64::max),
        }
    }
}

/// Metrics of one detector run, mirroring the fields a SLAM-coupled
/// deployment reports: per-event latency, update frequency, skipped and
/// optimization event counts.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunMetrics {
    pub detector: String,
    pub submap_update_events_total: usize,
    pub submap_update_events_processed: usize,
    pub submap_update_events_skipped: usize,
    pub optimization_events: usize,
    pub update_latency: LatencySummary,
    pub optimization_latency: LatencySummary,
    /// 1 / mean submap-update latency.
    pub update_frequency_hz: f64,
    pub stats: DetectorStats,
}

/// Result of driving a detector over an event stream: the published update
/// stream (per processed event) and run metrics.
pub struct DetectorRun {
    pub updates: Vec<(usize, Vec<FrontierUpdate>)>,
    pub metrics: RunMetrics,
}

/// Drive a detector over an event queue, applying the skip policy and
/// recording per-event latency.
pub fn run_detector(
    events: &[Event],
    detector: &mut dyn FrontierDetector,
    policy: SkipPolicy,
) -> Result<DetectorRun, DetectorError> {
    let skips = plan_skips(events, policy);
    let mut updates = Vec::new();
    let mut update_latencies = Vec::new();
    let mut optimization_latencies = Vec::new();
    let mut metrics = RunMetrics {
        detector: detector.name().to_string(),
        ..RunMetrics::default()
    };

    for (i, event) in events.iter().enumerate() {
        let kind = event.kind();
        if kind == EventKind::ScanInserted {
            metrics.submap_update_events_total += 1;
        }
        if skips[i] {
            metrics.submap_update_events_skipped += 1;
            continue;
        }
        let start = Instant::now();
        let published = detector.handle_event(event)?;
        let elapsed_us = start.elapsed().as_secs_f64() * 1e6;
        match kind {
            EventKind::ScanInserted => {
                metrics.submap_update_events_processed += 1;
                update_latencies.push(elapsed_us);
            }
            EventKind::OptimizationDone => {
                metrics.optimization_events += 1;
                optimization_latencies.push(elapsed_us);
            }
            EventKind::SubmapFinished => {}
        }
        if !published.is_empty() {
            updates.push((i, published));
        }
    }

    metrics.update_latency = LatencySummary::from_samples(&update_latencies);
    metrics.optimization_latency = LatencySummary::from_samples(&optimization_latencies);
    metrics.update_frequency_hz = if metrics.update_latency.mean_us > 0.0 {
        1e6 / metrics.update_latency.mean_us
    } else {
        0.0
    };
    metrics.stats = detector.stats();
    Ok(DetectorRun { updates, metrics })
}
