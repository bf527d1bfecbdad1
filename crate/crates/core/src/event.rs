//! SLAM events consumed by the frontier detector.
//!
//! Two kinds of events matter for frontier detection: submap updates (a scan
//! was inserted into the active submaps) and pose graph optimization events.
//! Submap-finished markers are carried as their own event so consumers can
//! distinguish final updates without diffing snapshots.

use crate::geometry::RigidTransform2;
use crate::grid::{Submap, SubmapId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// A pose graph solution: the global pose of every submap, plus an epoch
/// counter that increases with each optimization.
///
/// Serialized as an id-ordered list of (id, pose) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseGraphSolution {
    pub epoch: u64,
    #[serde(with = "pose_pairs")]
    pub poses: BTreeMap<SubmapId, RigidTransform2>,
}

mod pose_pairs {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        poses: &BTreeMap<SubmapId, RigidTransform2>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(poses.iter().map(|(id, pose)| (*id, *pose)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<SubmapId, RigidTransform2>, D::Error> {
        let pairs = Vec::<(SubmapId, RigidTransform2)>::deserialize(deserializer)?;
        Ok(pairs.into_iter().collect())
    }
}

impl PoseGraphSolution {
    pub fn new() -> Self {
        Self {
            epoch: 0,
            poses: BTreeMap::new(),
        }
    }

    pub fn pose(&self, id: SubmapId) -> Option<&RigidTransform2> {
        self.poses.get(&id)
    }
}

impl Default for PoseGraphSolution {
    fn default() -> Self {
        Self::new()
    }
}

/// One SLAM event. Submap snapshots are immutable copies: the detector never
/// reads a grid that is still being mutated.
#[derive(Debug, Clone)]
pub enum Event {
    /// A scan was inserted into the active submaps. Carries fresh snapshots
    /// of every active submap (including one that just finished) and the
    /// current pose solution.
    ScanInserted {
        submaps: Vec<Arc<Submap>>,
        poses: PoseGraphSolution,
    },
    /// The identified submap reached its scan quota. Always preceded by the
    /// `ScanInserted` event whose snapshot has the finished flag set.
    SubmapFinished { id: SubmapId },
    /// Pose graph optimization produced a new solution covering all submaps.
    OptimizationDone { solution: PoseGraphSolution },
}

impl Event {
    pub fn kind(&self) -> EventKind {
        match self {
            Event::ScanInserted { .. } => EventKind::ScanInserted,
            Event::SubmapFinished { .. } => EventKind::SubmapFinished,
            Event::OptimizationDone { .. } => EventKind::OptimizationDone,
        }
    }

    /// True when any snapshot in a scan-insertion event is finished; such
    /// events are final updates and are never skipped.
    pub fn is_finishing_update(&self) -> bool {
        match self {
            Event::ScanInserted { submaps, .. } => submaps.iter().any(|s| s.is_finished()),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    ScanInserted,
    SubmapFinished,
    OptimizationDone,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EventKind::ScanInserted => write!(f, "scan"),
            EventKind::SubmapFinished => write!(f, "finished"),
            EventKind::OptimizationDone => write!(f, "optimized"),
        }
    }
}
