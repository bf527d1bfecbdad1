//! Incremental frontier maintenance constrained to active submaps, with a
//! full recomputation pass after pose graph optimization.
//!
//! Between optimization events all stored global frontier points are valid.
//! Submap updates re-detect the active submaps' local frontiers from scratch
//! (submaps are bounded, so this does not grow with map size) and invalidate
//! covered points of intersecting finished submaps; optimization events
//! re-project and re-test every local frontier point under the new poses,
//! trying each point's failing-submap hint first.

use super::{
    detect_local_frontier, BakingContext, DetectorConfig, DetectorStats,
    FrontierUpdate, GlobalFrontier, LocalFrontier, StabTarget,
};
use crate::event::{Event, PoseGraphSolution};
use crate::geometry::{BoundingBox, RigidTransform2};
use crate::grid::{GridError, Submap, SubmapId};
use crate::spatial_index::{BoundingBoxIndex, IndexError};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("pose solution is missing a pose for submap {0}")]
    MissingPose(SubmapId),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

pub struct IncrementalDetector {
    config: DetectorConfig,
    /// Latest immutable snapshot of every known submap.
    submaps: BTreeMap<SubmapId, Arc<Submap>>,
    /// Pose of each submap when first seen; stays fixed across optimizations
    /// and anchors the baking tests.
    unoptimized_poses: BTreeMap<SubmapId, RigidTransform2>,
    finished: BTreeSet<SubmapId>,
    local_frontiers: BTreeMap<SubmapId, LocalFrontier>,
    global_frontier: GlobalFrontier,
    index: BoundingBoxIndex,
    poses: PoseGraphSolution,
    stats: DetectorStats,
}

impl IncrementalDetector {
    pub fn new(config: DetectorConfig) -> Self {
        Self {
            config,
            submaps: BTreeMap::new(),
            unoptimized_poses: BTreeMap::new(),
            finished: BTreeSet::new(),
            local_frontiers: BTreeMap::new(),
            global_frontier: GlobalFrontier::default(),
            index: BoundingBoxIndex::new(),
            poses: PoseGraphSolution::new(),
            stats: DetectorStats::default(),
        }
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn stats(&self) -> DetectorStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats.reset();
    }

    pub fn global_frontier(&self) -> &GlobalFrontier {
        &self.global_frontier
    }

    pub fn local_frontier(&self, id: SubmapId) -> Option<&LocalFrontier> {
        self.local_frontiers.get(&id)
    }

    pub fn known_submaps(&self) -> impl Iterator<Item = (SubmapId, &Arc<Submap>)> {
        self.submaps.iter().map(|(id, s)| (*id, s))
    }

    pub fn current_poses(&self) -> &PoseGraphSolution {
        &self.poses
    }

    pub fn handle_event(&mut self, event: &Event) -> Result<Vec<FrontierUpdate>, DetectorError> {
        let updates = match event {
            Event::ScanInserted { submaps, poses } => self.handle_submap_updates(submaps, poses)?,
            Event::OptimizationDone { solution } => self.handle_optimization(solution)?,
            Event::SubmapFinished { id } => {
                debug_assert!(
                    self.submaps.get(id).map_or(true, |s| s.is_finished()),
                    "finish marker for submap {id} before its final update"
                );
                Vec::new()
            }
        };
        if self.config.check_invariants {
            self.assert_validity_invariant();
        }
        Ok(updates)
    }

    /// Handling of updates to active submaps.
    ///
    /// Assumes no optimization event occurred since the previous call: all
    /// existing global frontiers of finished submaps are still valid.
    pub fn handle_submap_updates(
        &mut self,
        snapshots: &[Arc<Submap>],
        poses: &PoseGraphSolution,
    ) -> Result<Vec<FrontierUpdate>, DetectorError> {
        let mut updated: BTreeSet<SubmapId> = BTreeSet::new();
        let event_ids: Vec<SubmapId> = snapshots.iter().map(|s| s.id()).collect();
        for snapshot in snapshots {
            let id = snapshot.id();
            poses.pose(id).ok_or(DetectorError::MissingPose(id))?;
            self.submaps.insert(id, snapshot.clone());
            self.unoptimized_poses
                .entry(id)
                .or_insert_with(|| *poses.pose(id).unwrap());
            updated.insert(id);
        }
        self.poses = poses.clone();

        let mut final_boxes: Vec<(SubmapId, BoundingBox)> = Vec::new();
        for snapshot in snapshots {
            let si = snapshot.id();
            if snapshot.is_empty() {
                self.local_frontiers.insert(si, LocalFrontier::new(si));
                self.global_frontier.clear_submap(si);
                continue;
            }
            let pose_si = *poses.pose(si).unwrap();
            let bbox = snapshot.global_bounding_box(&pose_si)?;
            let intersecting = self.index.query_intersecting(&bbox);

            // Dense local frontier detection from scratch on the new grid.
            let baking = self.baking_context(si)?;
            let mut local = detect_local_frontier(snapshot, &self.config, baking.as_ref());

            // Candidates: intersecting finished submaps plus the other active
            // submaps of this event.
            let mut candidate_ids = intersecting.clone();
            for other in &event_ids {
                if *other != si && !candidate_ids.contains(other) && !self.submaps[other].is_empty()
                {
                    candidate_ids.push(*other);
                }
            }
            let targets = self.stab_targets(&candidate_ids, poses)?;

            self.global_frontier.clear_submap(si);
            for cell in local.cells().collect::<Vec<_>>() {
                let projected = pose_si.project_point(snapshot.cell_center(cell));
                match self.test_point(projected, None, &targets) {
                    None => self.global_frontier.insert(si, cell, projected),
                    Some(failing) => local.set_hint(cell, failing),
                }
            }
            self.local_frontiers.insert(si, local);

            // The new version of si may cover existing valid points of the
            // intersecting finished submaps; re-test those against si only.
            let si_target = StabTarget::new(snapshot.clone(), &pose_si);
            for sj in intersecting {
                for (cell, point) in self.global_frontier.entries_of(sj) {
                    self.stats.stab_tests += 1;
                    if !si_target.test(point, self.config.epsilon) {
                        self.global_frontier.remove(sj, cell);
                        updated.insert(sj);
                    }
                }
            }

            if snapshot.is_finished() && !self.index.contains(si) {
                final_boxes.push((si, bbox));
            }
        }

        for (id, bbox) in final_boxes {
            self.index.insert(id, bbox)?;
            self.finished.insert(id);
        }

        Ok(self.publish(updated.into_iter()))
    }

    /// Handling of pose graph optimization events.
    ///
    /// Rebuilds the bounding box index under the new poses, discards the
    /// entire global frontier, and re-projects and re-tests every local
    /// frontier point. Local frontiers themselves stay valid: finished grids
    /// are immutable.
    pub fn handle_optimization(
        &mut self,
        solution: &PoseGraphSolution,
    ) -> Result<Vec<FrontierUpdate>, DetectorError> {
        for id in self.submaps.keys() {
            solution.pose(*id).ok_or(DetectorError::MissingPose(*id))?;
        }
        self.poses = solution.clone();

        let mut entries = Vec::new();
        for id in &self.finished {
            let submap = &self.submaps[id];
            if submap.is_empty() {
                continue;
            }
            entries.push((*id, submap.global_bounding_box(solution.pose(*id).unwrap())?));
        }
        self.index.rebuild(entries)?;

        self.global_frontier.clear_all();
        let ids: Vec<SubmapId> = self.submaps.keys().copied().collect();
        let active_ids: Vec<SubmapId> = ids
            .iter()
            .copied()
            .filter(|id| !self.finished.contains(id))
            .collect();
        for si in &ids {
            let snapshot = self.submaps[si].clone();
            self.global_frontier.clear_submap(*si);
            if snapshot.is_empty() {
                continue;
            }
            let pose_si = *solution.pose(*si).unwrap();
            let bbox = snapshot.global_bounding_box(&pose_si)?;
            let mut candidate_ids: Vec<SubmapId> = self
                .index
                .query_intersecting(&bbox)
                .into_iter()
                .filter(|id| id != si)
                .collect();
            for other in &active_ids {
                if other != si && !candidate_ids.contains(other) && !self.submaps[other].is_empty()
                {
                    candidate_ids.push(*other);
                }
            }
            let targets = self.stab_targets(&candidate_ids, solution)?;

            let mut local = self
                .local_frontiers
                .remove(si)
                .unwrap_or_else(|| LocalFrontier::new(*si));
            for cell in local.cells().collect::<Vec<_>>() {
                let projected = pose_si.project_point(snapshot.cell_center(cell));
                // Try the failing-submap hint first when present: a point
                // that keeps failing is rejected on its first test.
                let hint = local.hint(cell);
                match self.test_point(projected, hint, &targets) {
                    None => self.global_frontier.insert(*si, cell, projected),
                    Some(failing) => local.set_hint(cell, failing),
                }
            }
            self.local_frontiers.insert(*si, local);
        }

        Ok(self.publish(ids.into_iter()))
    }

    /// Test a point against the candidates; `None` means pass. Counts every
    /// executed stabbing test, attributing the spend of failing points.
    fn test_point(
        &mut self,
        point: crate::geometry::Point2,
        hint: Option<SubmapId>,
        targets: &[StabTarget],
    ) -> Option<SubmapId> {
        let mut executed = 0u64;
        if let Some(hint_id) = hint {
            if let Some(pose) = self.poses.pose(hint_id).copied() {
                if let Some(submap) = self.submaps.get(&hint_id) {
                    executed += 1;
                    let target = StabTarget::new(submap.clone(), &pose);
                    if !target.test(point, self.config.epsilon) {
                        self.stats.stab_tests += executed;
                        self.stats.stab_tests_for_failing_points += executed;
                        self.stats.failing_points += 1;
                        self.stats.hint_rejections += 1;
                        return Some(hint_id);
                    }
                }
            }
        }
        for target in targets {
            if Some(target.id()) == hint {
                continue;
            }
            executed += 1;
            if !target.test(point, self.config.epsilon) {
                self.stats.stab_tests += executed;
                self.stats.stab_tests_for_failing_points += executed;
                self.stats.failing_points += 1;
                return Some(target.id());
            }
        }
        self.stats.stab_tests += executed;
        self.stats.passing_points += 1;
        None
    }

    fn stab_targets(
        &self,
        ids: &[SubmapId],
        poses: &PoseGraphSolution,
    ) -> Result<Vec<StabTarget>, DetectorError> {
        ids.iter()
            .map(|id| {
                let pose = poses.pose(*id).ok_or(DetectorError::MissingPose(*id))?;
                Ok(StabTarget::new(self.submaps[id].clone(), pose))
            })
            .collect()
    }

    fn baking_context(&self, si: SubmapId) -> Result<Option<BakingContext>, DetectorError> {
        if self.config.baking_submaps == 0 {
            return Ok(None);
        }
        let own_pose = *self
            .unoptimized_poses
            .get(&si)
            .ok_or(DetectorError::MissingPose(si))?;
        let targets: Vec<StabTarget> = self
            .submaps
            .range(..si)
            .rev()
            .take(self.config.baking_submaps as usize)
            .filter(|(_, s)| !s.is_empty())
            .map(|(id, s)| StabTarget::new(s.clone(), &self.unoptimized_poses[id]))
            .collect();
        if targets.is_empty() {
            return Ok(None);
        }
        Ok(Some(BakingContext { own_pose, targets }))
    }

    fn publish(&self, ids: impl Iterator<Item = SubmapId>) -> Vec<FrontierUpdate> {
        ids.map(|id| FrontierUpdate::new(id, self.global_frontier.points_of(id)))
            .collect()
    }

    /// Exhaustively re-check that every stored point passes the stabbing
    /// test against every submap. Test-mode only; quadratic.
    fn assert_validity_invariant(&self) {
        for owner in self.global_frontier.submaps().collect::<Vec<_>>() {
            for (cell, point) in self.global_frontier.entries_of(owner) {
                for (id, submap) in &self.submaps {
                    let pose = self
                        .poses
                        .pose(*id)
                        .expect("validity check requires a full pose solution");
                    let target = StabTarget::new(submap.clone(), pose);
                    assert!(
                        target.test(point, self.config.epsilon),
                        "stored frontier point {point:?} (submap {owner}, cell {cell:?}) \
                         stabs an observed cell of submap {id}"
                    );
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::grid::Scan;

    fn config() -> DetectorConfig {
        DetectorConfig {
            check_invariants: true,
            ..DetectorConfig::default()
        }
    }

    /// A submap whose free area is a filled square of `side` cells starting
    /// at cell (1, 1), produced by sweeping horizontal rays.
    fn square_submap(id: u64, side: i32, quota: u32, finish: bool) -> Arc<Submap> {
        let r = 0.05;
        let mut s = Submap::new(SubmapId(id), r, quota);
        for row in 0..side {
            let y = (1.0 + row as f64 + 0.5) * r;
            let scan = Scan::new(
                Point2::new(1.5 * r, y),
                vec![Point2::new((1.0 + side as f64 + 0.5) * r, y)],
            );
            s.insert_scan(&scan, 0.55, 0.49).unwrap();
        }
        if finish {
            while !s.is_finished() {
                s.insert_scan(&Scan::new(Point2::new(0.0, 0.0), vec![]), 0.55, 0.49)
                    .unwrap();
            }
        }
        Arc::new(s)
    }

    fn solution(entries: &[(SubmapId, RigidTransform2)]) -> PoseGraphSolution {
        PoseGraphSolution {
            epoch: 0,
            poses: entries.iter().copied().collect(),
        }
    }

    #[test]
    fn single_submap_frontier_is_projected_local_frontier() {
        let mut detector = IncrementalDetector::new(config());
        let submap = square_submap(0, 6, 100, false);
        let poses = solution(&[(SubmapId(0), RigidTransform2::from_translation(1.0, 2.0))]);
        let updates = detector
            .handle_submap_updates(&[submap.clone()], &poses)
            .unwrap();
        assert_eq!(updates.len(), 1);
        let local = detect_local_frontier(&submap, &config(), None);
        assert_eq!(updates[0].count, local.len());
        assert!(updates[0].count > 0);
        let pose = poses.pose(SubmapId(0)).unwrap();
        let expected: Vec<Point2> = local
            .cells()
            .map(|c| pose.project_point(submap.cell_center(c)))
            .collect();
        assert_eq!(updates[0].points, expected);
    }

    #[test]
    fn missing_pose_errors() {
        let mut detector = IncrementalDetector::new(config());
        let submap = square_submap(0, 4, 100, false);
        let empty = PoseGraphSolution::new();
        assert!(matches!(
            detector.handle_submap_updates(&[submap], &empty),
            Err(DetectorError::MissingPose(SubmapId(0)))
        ));
    }

    #[test]
    fn overlapping_submap_discards_covered_candidates() {
        // Two identical squares at the same pose: every frontier candidate of
        // the second lands inside the first one's observed area or frontier
        // band. Points in the observed area must be discarded.
        let mut detector = IncrementalDetector::new(config());
        let a = square_submap(0, 8, 8, true);
        let b = square_submap(1, 8, 100, false);
        let id0 = SubmapId(0);
        let id1 = SubmapId(1);
        let pose = RigidTransform2::identity();
        let poses = solution(&[(id0, pose), (id1, pose)]);
        detector.handle_submap_updates(&[a], &poses).unwrap();
        let updates = detector.handle_submap_updates(&[b.clone()], &poses).unwrap();
        let update_b = updates.iter().find(|u| u.submap_id == id1).unwrap();
        // Identical grids: the local frontiers coincide, and frontier cells of
        // b stab unobserved cells of a, so they all survive.
        let local_b = detect_local_frontier(&b, &config(), None);
        assert_eq!(update_b.count, local_b.len());

        // Now a submap whose free area covers the other's frontier band: a
        // larger square shifted so its interior overlaps b's frontier cells.
        let big = square_submap(2, 14, 14, true);
        let poses = solution(&[
            (id0, pose),
            (id1, pose),
            (SubmapId(2), RigidTransform2::from_translation(-0.1, -0.1)),
        ]);
        let updates = detector.handle_submap_updates(&[big], &poses).unwrap();
        // b's frontier shrank: its points now stab free cells of submap 2.
        let update_b = updates.iter().find(|u| u.submap_id == id1);
        if let Some(u) = update_b {
            assert!(u.count < local_b.len());
        }
    }

    #[test]
    fn active_submap_invalidates_finished_neighbour() {
        let mut detector = IncrementalDetector::new(config());
        let finished = square_submap(0, 6, 6, true);
        let pose = RigidTransform2::identity();
        let poses = solution(&[(SubmapId(0), pose)]);
        let before = detector
            .handle_submap_updates(&[finished], &poses)
            .unwrap();
        let count_before = before[0].count;
        assert!(count_before > 0);

        // An active submap whose free square covers part of the finished
        // submap's frontier ring.
        let active = square_submap(1, 10, 100, false);
        let poses = solution(&[
            (SubmapId(0), pose),
            (SubmapId(1), RigidTransform2::from_translation(0.05, 0.05)),
        ]);
        let updates = detector.handle_submap_updates(&[active], &poses).unwrap();
        let neighbour = updates.iter().find(|u| u.submap_id == SubmapId(0));
        let neighbour = neighbour.expect("invalidated neighbour must be republished");
        assert!(neighbour.count < count_before);
    }

    #[test]
    fn optimization_with_identical_poses_is_noop() {
        let mut detector = IncrementalDetector::new(config());
        let a = square_submap(0, 6, 6, true);
        let b = square_submap(1, 6, 100, false);
        let pose_a = RigidTransform2::from_translation(0.0, 0.0);
        let pose_b = RigidTransform2::from_translation(1.0, 0.0);
        let poses = solution(&[(SubmapId(0), pose_a), (SubmapId(1), pose_b)]);
        detector.handle_submap_updates(&[a, b], &poses).unwrap();
        let before = detector.global_frontier().clone();
        let updates = detector.handle_optimization(&poses).unwrap();
        assert_eq!(detector.global_frontier(), &before);
        // Every submap is republished after optimization.
        assert_eq!(updates.len(), 2);
    }

    #[test]
    fn optimization_translates_disjoint_submaps_rigidly() {
        let mut detector = IncrementalDetector::new(config());
        let a = square_submap(0, 6, 6, true);
        let b = square_submap(1, 6, 6, true);
        let pose_a = RigidTransform2::from_translation(0.0, 0.0);
        let pose_b = RigidTransform2::from_translation(5.0, 0.0);
        let poses = solution(&[(SubmapId(0), pose_a), (SubmapId(1), pose_b)]);
        detector.handle_submap_updates(&[a], &poses).unwrap();
        detector.handle_submap_updates(&[b], &poses).unwrap();
        let before = detector.global_frontier().all_points();

        let shift = RigidTransform2::from_translation(10.0, 0.0);
        let moved = solution(&[
            (SubmapId(0), shift.compose(&pose_a)),
            (SubmapId(1), shift.compose(&pose_b)),
        ]);
        detector.handle_optimization(&moved).unwrap();
        let after = detector.global_frontier().all_points();
        assert_eq!(before.len(), after.len());
        for (p, q) in before.iter().zip(after.iter()) {
            assert!((q.x - p.x - 10.0).abs() < 1e-9);
            assert!((q.y - p.y).abs() < 1e-9);
        }
    }

    #[test]
    fn hint_rejects_failing_points_in_one_test() {
        let mut detector = IncrementalDetector::new(config());
        // Two overlapping squares; some of each one's candidates fail against
        // the other.
        let a = square_submap(0, 8, 8, true);
        let b = square_submap(1, 8, 8, true);
        let pose_a = RigidTransform2::identity();
        let pose_b = RigidTransform2::from_translation(0.15, 0.0);
        let poses = solution(&[(SubmapId(0), pose_a), (SubmapId(1), pose_b)]);
        detector.handle_submap_updates(&[a], &poses).unwrap();
        detector.handle_submap_updates(&[b], &poses).unwrap();

        // First optimization populates hints for failing points.
        detector.handle_optimization(&poses).unwrap();
        detector.reset_stats();
        // Repeating with unchanged poses must reject each failing point with
        // exactly one stabbing test.
        detector.handle_optimization(&poses).unwrap();
        let stats = detector.stats();
        assert!(stats.failing_points > 0);
        assert_eq!(stats.stab_tests_for_failing_points, stats.failing_points);
        assert_eq!(stats.hint_rejections, stats.failing_points);
    }

    #[test]
    fn baking_excludes_cells_permanently() {
        let bake_config = DetectorConfig {
            baking_submaps: 4,
            check_invariants: true,
            ..DetectorConfig::default()
        };
        let mut detector = IncrementalDetector::new(bake_config.clone());
        let a = square_submap(0, 10, 10, true);
        let b = square_submap(1, 6, 6, true);
        let pose = RigidTransform2::identity();
        // b overlaps a under unoptimized poses: half of b's candidates fall
        // in a's free area and are baked out.
        let poses = solution(&[(SubmapId(0), pose), (SubmapId(1), pose)]);
        detector.handle_submap_updates(&[a.clone()], &poses).unwrap();
        detector.handle_submap_updates(&[b.clone()], &poses).unwrap();

        let unbaked = detect_local_frontier(&b, &DetectorConfig::default(), None);
        let baked = detector.local_frontier(SubmapId(1)).unwrap().clone();
        assert!(baked.len() < unbaked.len(), "baking must exclude cells");

        // A synthetic optimization pulls the submaps far apart; the excluded
        // cells must stay excluded because local frontiers are not
        // recomputed.
        let apart = solution(&[
            (SubmapId(0), RigidTransform2::from_translation(100.0, 0.0)),
            (SubmapId(1), pose),
        ]);
        detector.handle_optimization(&apart).unwrap();
        assert_eq!(detector.local_frontier(SubmapId(1)).unwrap().len(), baked.len());
        // Without overlap every remaining candidate is now valid.
        assert_eq!(
            detector.global_frontier().points_of(SubmapId(1)).len(),
            baked.len()
        );
    }
}
