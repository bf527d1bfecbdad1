//! Naive frontier detection strategy: reassemble the complete global map and
//! run edge detection after every event.
//!
//! The cost of each step is proportional to the global map *area*, which is
//! what makes this approach infeasible for large maps. It shares no code with
//! the incremental path beyond the submap grids themselves, so it doubles as
//! an independent reference.

use super::{DetectorStats, FrontierUpdate};
use crate::event::{Event, PoseGraphSolution};
use crate::frontier::incremental::DetectorError;
use crate::geometry::{Point2, RigidTransform2};
use crate::grid::{Submap, SubmapId};
use crate::oracle::{assemble_global_map, naive_global_frontier};
use std::collections::BTreeMap;
use std::sync::Arc;

pub struct NaiveDetector {
    submaps: BTreeMap<SubmapId, Arc<Submap>>,
    poses: BTreeMap<SubmapId, RigidTransform2>,
    frontier: Vec<Point2>,
}

impl NaiveDetector {
    pub fn new() -> Self {
        Self {
            submaps: BTreeMap::new(),
            poses: BTreeMap::new(),
            frontier: Vec::new(),
        }
    }

    pub fn frontier(&self) -> &[Point2] {
        &self.frontier
    }

    pub fn handle_event(&mut self, event: &Event) -> Result<Vec<FrontierUpdate>, DetectorError> {
        match event {
            Event::ScanInserted { submaps, poses } => {
                for snapshot in submaps {
                    let id = snapshot.id();
                    poses.pose(id).ok_or(DetectorError::MissingPose(id))?;
                    self.submaps.insert(id, snapshot.clone());
                }
                self.absorb_poses(poses);
                self.recompute()
            }
            Event::OptimizationDone { solution } => {
                for id in self.submaps.keys() {
                    solution.pose(*id).ok_or(DetectorError::MissingPose(*id))?;
                }
                self.absorb_poses(solution);
                self.recompute()
            }
            Event::SubmapFinished { .. } => Ok(Vec::new()),
        }
    }

    fn absorb_poses(&mut self, solution: &PoseGraphSolution) {
        for (id, pose) in &solution.poses {
            self.poses.insert(*id, *pose);
        }
    }

    /// Full recomputation: merge everything, then edge-detect. Publishes one
    /// whole-map replacement update under the reserved id.
    fn recompute(&mut self) -> Result<Vec<FrontierUpdate>, DetectorError> {
        let pairs: Vec<(Arc<Submap>, RigidTransform2)> = self
            .submaps
            .iter()
            .map(|(id, s)| {
                let pose = self
                    .poses
                    .get(id)
                    .copied()
                    .ok_or(DetectorError::MissingPose(*id))?;
                Ok((s.clone(), pose))
            })
            .collect::<Result<_, DetectorError>>()?;
        let grid = assemble_global_map(&pairs);
        self.frontier = naive_global_frontier(&grid);
        Ok(vec![FrontierUpdate::new(
            SubmapId::WHOLE_MAP,
            self.frontier.clone(),
        )])
    }

    pub fn stats(&self) -> DetectorStats {
        DetectorStats::default()
    }
}

impl Default for NaiveDetector {
    fn default() -> Self {
        Self::new()
    }
}
