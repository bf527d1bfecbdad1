//! The simulated local trajectory builder: maintains the active submap pair,
//! inserts scans at drifted odometric poses, and synthesizes pose graph
//! solutions.
//!
//! Submap local frames are axis-aligned translations of the odometric frame
//! with origins snapped to the cell lattice, and every synthesized pose
//! solution is a whole-cell translation. Every submap lattice therefore
//! coincides with the global lattice, which is the discretization convention
//! that makes the detector-vs-oracle comparison exact. Scans themselves are
//! inserted at the unquantized drifted pose relative to the submap origin, so
//! grid content is unaffected by the snapping.

use super::env::HarnessError;
use crate::event::{Event, PoseGraphSolution};
use crate::geometry::RigidTransform2;
use crate::grid::{Scan, Submap, SubmapId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// How a simulated optimization corrects submap poses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionPolicy {
    /// Every submap pose moves to (the lattice snap of) its ground-truth
    /// origin.
    SnapToTruth,
    /// The last submap's correction is distributed linearly along the chain:
    /// the i-th of N submaps is displaced by i/N of the end correction.
    Interpolated,
}

#[derive(Debug, Clone, Copy)]
pub struct SubmapMeta {
    /// Quantized odometric origin of the submap's local frame.
    pub origin_odo: [f64; 2],
    /// Ground-truth position of that same physical point.
    pub origin_true: [f64; 2],
}

pub struct TrajectoryBuilder {
    resolution: f64,
    scans_per_submap: u32,
    p_hit: f64,
    p_miss: f64,
    next_id: u64,
    active: Vec<Submap>,
    meta: BTreeMap<SubmapId, SubmapMeta>,
    solution: PoseGraphSolution,
    /// Odometric-to-global translation correction, a whole-cell vector;
    /// updated after each optimization so new submaps spawn consistently
    /// with the optimized map.
    correction: [f64; 2],
    finished_count: usize,
}

impl TrajectoryBuilder {
    pub fn new(resolution: f64, scans_per_submap: u32, p_hit: f64, p_miss: f64) -> Self {
        assert!(scans_per_submap >= 2);
        Self {
            resolution,
            scans_per_submap,
            p_hit,
            p_miss,
            next_id: 0,
            active: Vec::new(),
            meta: BTreeMap::new(),
            solution: PoseGraphSolution::new(),
            correction: [0.0, 0.0],
            finished_count: 0,
        }
    }

    pub fn solution(&self) -> &PoseGraphSolution {
        &self.solution
    }

    pub fn finished_count(&self) -> usize {
        self.finished_count
    }

    pub fn meta(&self, id: SubmapId) -> Option<&SubmapMeta> {
        self.meta.get(&id)
    }

    pub fn submap_ids(&self) -> impl Iterator<Item = SubmapId> + '_ {
        self.meta.keys().copied()
    }

    fn quantize(&self, v: f64) -> f64 {
        (v / self.resolution).round() * self.resolution
    }

    fn spawn(&mut self, quota: u32, odo_pose: &RigidTransform2, true_pose: &RigidTransform2) {
        let id = SubmapId(self.next_id);
        self.next_id += 1;
        let odo_t = odo_pose.translation();
        let true_t = true_pose.translation();
        let origin_odo = [self.quantize(odo_t[0]), self.quantize(odo_t[1])];
        // The true position of the quantized odometric origin: shift by the
        // current drift (odo minus true).
        let origin_true = [
            origin_odo[0] - (odo_t[0] - true_t[0]),
            origin_odo[1] - (odo_t[1] - true_t[1]),
        ];
        self.meta.insert(id, SubmapMeta { origin_odo, origin_true });
        self.solution.poses.insert(
            id,
            RigidTransform2::from_translation(
                origin_odo[0] + self.correction[0],
                origin_odo[1] + self.correction[1],
            ),
        );
        self.active.push(Submap::new(id, self.resolution, quota));
    }

    /// Process one scan: spawn submaps as needed, insert the scan into every
    /// active submap in its local frame, emit the resulting events.
    ///
    /// Bootstrap gives the first submap a half quota, which staggers the pair
    /// so one submap finishes every `scans_per_submap / 2` scans from the
    /// start.
    pub fn step(
        &mut self,
        sensor_scan: &Scan,
        odo_pose: &RigidTransform2,
        true_pose: &RigidTransform2,
    ) -> Result<Vec<Event>, HarnessError> {
        if self.next_id == 0 {
            self.spawn(self.scans_per_submap.div_ceil(2), odo_pose, true_pose);
            self.spawn(self.scans_per_submap, odo_pose, true_pose);
        } else if self.active.len() < 2 {
            self.spawn(self.scans_per_submap, odo_pose, true_pose);
        }

        for submap in &mut self.active {
            let meta = &self.meta[&submap.id()];
            let local_pose = RigidTransform2::new(
                [
                    odo_pose.translation()[0] - meta.origin_odo[0],
                    odo_pose.translation()[1] - meta.origin_odo[1],
                ],
                odo_pose.rotation(),
            );
            let local_scan = Scan::new(
                local_pose.project_point(sensor_scan.origin),
                sensor_scan
                    .hits
                    .iter()
                    .map(|h| local_pose.project_point(*h))
                    .collect(),
            );
            submap
                .insert_scan(&local_scan, self.p_hit, self.p_miss)
                .expect("active submaps are never finished");
        }

        let mut events = vec![Event::ScanInserted {
            submaps: self.active.iter().map(|s| Arc::new(s.clone())).collect(),
            poses: self.solution.clone(),
        }];
        let mut remaining = Vec::new();
        for submap in self.active.drain(..) {
            if submap.is_finished() {
                events.push(Event::SubmapFinished { id: submap.id() });
                self.finished_count += 1;
            } else {
                remaining.push(submap);
            }
        }
        self.active = remaining;
        Ok(events)
    }

    /// Produce a pose graph optimization event covering every submap.
    pub fn trigger_optimization(&mut self, policy: CorrectionPolicy) -> Event {
        let ids: Vec<SubmapId> = self.meta.keys().copied().collect();
        let count = ids.len();
        match policy {
            CorrectionPolicy::SnapToTruth => {
                for id in &ids {
                    let meta = &self.meta[id];
                    self.solution.poses.insert(
                        *id,
                        RigidTransform2::from_translation(
                            self.quantize(meta.origin_true[0]),
                            self.quantize(meta.origin_true[1]),
                        ),
                    );
                }
            }
            CorrectionPolicy::Interpolated => {
                let last = *ids.last().expect("optimization requires submaps");
                let last_meta = &self.meta[&last];
                let current = self.solution.poses[&last].translation();
                let end_correction = [
                    self.quantize(last_meta.origin_true[0]) - current[0],
                    self.quantize(last_meta.origin_true[1]) - current[1],
                ];
                for (i, id) in ids.iter().enumerate() {
                    let fraction = (i + 1) as f64 / count as f64;
                    let t = self.solution.poses[id].translation();
                    self.solution.poses.insert(
                        *id,
                        RigidTransform2::from_translation(
                            self.quantize(t[0] + fraction * end_correction[0]),
                            self.quantize(t[1] + fraction * end_correction[1]),
                        ),
                    );
                }
            }
        }
        if let Some(last) = ids.last() {
            let meta = &self.meta[last];
            let t = self.solution.poses[last].translation();
            self.correction = [t[0] - meta.origin_odo[0], t[1] - meta.origin_odo[1]];
        }
        self.solution.epoch += 1;
        Event::OptimizationDone {
            solution: self.solution.clone(),
        }
    }
}
