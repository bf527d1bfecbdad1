//! Frontier detection over occupancy-grid submaps.
//!
//! A *local frontier* cell is an unobserved cell adjacent to a free cell of
//! the same submap; local frontiers are candidates for the *global frontier*.
//! A projected candidate survives if it passes the stabbing query test
//! against every other submap: the cell of that submap nearest to the point
//! must be unobserved (or the point must fall outside the submap's extent).

pub mod incremental;
mod naive;

pub use incremental::IncrementalDetector;
pub use naive::NaiveDetector;

use crate::geometry::{Point2, RigidTransform2};
use crate::grid::{CellClass, ClassifiedGrid, Submap, SubmapId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Absolute cell coordinate within a submap's local lattice.
pub type CellCoord = (i32, i32);

/// Detector tuning knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Cells with probability in `[0.5 - epsilon, 0.5]` count as unobserved.
    pub epsilon: f64,
    /// Smoothed frontier rule: >= 2 free and >= 2 unobserved Moore neighbours.
    pub smoothing: bool,
    /// Number of preceding submaps to bake negative stab results against
    /// (under unoptimized poses). 0 disables baking.
    pub baking_submaps: u32,
    /// Re-check the validity invariant of every stored point after each
    /// event. Expensive; intended for tests.
    pub check_invariants: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            smoothing: false,
            baking_submaps: 0,
            check_invariants: false,
        }
    }
}

const MOORE_NEIGHBOURS: [(i32, i32); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Local frontier predicate on a classified grid. Cells outside the grid
/// count as unobserved neighbours.
///
/// Without smoothing: an unobserved cell with at least one free Moore
/// neighbour. With smoothing: at least 2 free and at least 2 unobserved
/// neighbours.
pub fn is_local_frontier_cell(grid: &ClassifiedGrid, cell: CellCoord, smoothing: bool) -> bool {
    if grid.class_at(cell) != CellClass::Unobserved {
        return false;
    }
    let mut free = 0;
    let mut unobserved = 0;
    for (dx, dy) in MOORE_NEIGHBOURS {
        match grid.class_at((cell.0 + dx, cell.1 + dy)) {
            CellClass::Free => free += 1,
            CellClass::Unobserved => unobserved += 1,
            CellClass::Occupied => {}
        }
    }
    if smoothing {
        free >= 2 && unobserved >= 2
    } else {
        free >= 1
    }
}

/// The local frontier of one submap: the set of its frontier cells, plus a
/// per-cell memo of which submap last caused a stabbing test failure. Hints
/// are tried first on re-tests, rejecting failing points in one test.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFrontier {
    owner: SubmapId,
    cells: BTreeSet<CellCoord>,
    hints: BTreeMap<CellCoord, SubmapId>,
}

impl LocalFrontier {
    pub fn new(owner: SubmapId) -> Self {
        Self {
            owner,
            cells: BTreeSet::new(),
            hints: BTreeMap::new(),
        }
    }

    pub fn owner(&self) -> SubmapId {
        self.owner
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: CellCoord) -> bool {
        self.cells.contains(&cell)
    }

    pub fn cells(&self) -> impl Iterator<Item = CellCoord> + '_ {
        self.cells.iter().copied()
    }

    pub fn insert(&mut self, cell: CellCoord) {
        self.cells.insert(cell);
    }

    pub fn hint(&self, cell: CellCoord) -> Option<SubmapId> {
        self.hints.get(&cell).copied()
    }

    /// Record the submap that failed this cell's stabbing test. A newer
    /// failure overwrites an older hint.
    pub fn set_hint(&mut self, cell: CellCoord, failing: SubmapId) {
        debug_assert!(self.cells.contains(&cell));
        self.hints.insert(cell, failing);
    }
}

/// Detect the local frontier of a submap from scratch.
///
/// With baking enabled, candidates failing a stabbing test against the given
/// temporally-previous submaps under unoptimized poses are excluded for good:
/// the exclusion persists across pose changes because the local frontier of a
/// finished submap is never recomputed.
pub fn detect_local_frontier(
    submap: &Submap,
    config: &DetectorConfig,
    baking: Option<&BakingContext>,
) -> LocalFrontier {
    let mut frontier = LocalFrontier::new(submap.id());
    if submap.is_empty() {
        return frontier;
    }
    let classified = submap.classify(config.epsilon);
    for cell in classified.cells() {
        if !is_local_frontier_cell(&classified, cell, config.smoothing) {
            continue;
        }
        if let Some(ctx) = baking {
            let projected = ctx.own_pose.project_point(submap.cell_center(cell));
            if ctx
                .targets
                .iter()
                .any(|target| !target.test(projected, config.epsilon))
            {
                continue;
            }
        }
        frontier.insert(cell);
    }
    frontier
}

/// Previous submaps (under unoptimized poses) used to bake negative stab
/// results into local frontier detection.
pub struct BakingContext {
    pub own_pose: RigidTransform2,
    pub targets: Vec<StabTarget>,
}

/// A submap prepared for stabbing queries: its grid plus the precomputed
/// inverse of its global pose.
pub struct StabTarget {
    submap: std::sync::Arc<Submap>,
    inverse_pose: RigidTransform2,
}

impl StabTarget {
    pub fn new(submap: std::sync::Arc<Submap>, pose: &RigidTransform2) -> Self {
        Self {
            submap,
            inverse_pose: pose.invert(),
        }
    }

    pub fn id(&self) -> SubmapId {
        self.submap.id()
    }

    /// Stabbing query test: true (pass) when the nearest cell to the point is
    /// unobserved or the point falls outside the submap's grid extent.
    pub fn test(&self, point_global: Point2, epsilon: f64) -> bool {
        let local = self.inverse_pose.project_point(point_global);
        match self.submap.local_extent() {
            Err(_) => true,
            Ok(extent) if !extent.contains(local) => true,
            Ok(_) => {
                self.submap.class_at(self.submap.nearest_cell(local), epsilon)
                    == CellClass::Unobserved
            }
        }
    }
}

/// Stabbing query test against a single submap under its global pose.
pub fn stabbing_query_test(
    point_global: Point2,
    submap: &std::sync::Arc<Submap>,
    pose: &RigidTransform2,
    epsilon: f64,
) -> bool {
    StabTarget::new(submap.clone(), pose).test(point_global, epsilon)
}

/// The set of valid global frontier points, grouped by owning submap. Each
/// stored point is the projection of a cell of the owner's local frontier
/// under the current pose solution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GlobalFrontier {
    by_submap: BTreeMap<SubmapId, BTreeMap<CellCoord, Point2>>,
}

impl GlobalFrontier {
    pub fn clear_submap(&mut self, id: SubmapId) {
        self.by_submap.insert(id, BTreeMap::new());
    }

    pub fn clear_all(&mut self) {
        for points in self.by_submap.values_mut() {
            points.clear();
        }
    }

    pub fn insert(&mut self, id: SubmapId, cell: CellCoord, point: Point2) {
        self.by_submap.entry(id).or_default().insert(cell, point);
    }

    pub fn points_of(&self, id: SubmapId) -> Vec<Point2> {
        self.by_submap
            .get(&id)
            .map(|m| m.values().copied().collect())
            .unwrap_or_default()
    }

    pub fn entries_of(&self, id: SubmapId) -> Vec<(CellCoord, Point2)> {
        self.by_submap
            .get(&id)
            .map(|m| m.iter().map(|(c, p)| (*c, *p)).collect())
            .unwrap_or_default()
    }

    pub fn remove(&mut self, id: SubmapId, cell: CellCoord) {
        if let Some(points) = self.by_submap.get_mut(&id) {
            points.remove(&cell);
        }
    }

    pub fn submaps(&self) -> impl Iterator<Item = SubmapId> + '_ {
        self.by_submap.keys().copied()
    }

    /// All valid points across submaps (may contain coincident points owned
    /// by different submaps).
    pub fn all_points(&self) -> Vec<Point2> {
        self.by_submap
            .values()
            .flat_map(|m| m.values().copied())
            .collect()
    }

    pub fn total_points(&self) -> usize {
        self.by_submap.values().map(|m| m.len()).sum()
    }
}

/// A published frontier update: the full replacement set of one submap's
/// global frontier points. Consumers stay stateless per submap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierUpdate {
    pub submap_id: SubmapId,
    pub count: usize,
    pub points: Vec<Point2>,
}

impl FrontierUpdate {
    pub fn new(submap_id: SubmapId, points: Vec<Point2>) -> Self {
        Self {
            submap_id,
            count: points.len(),
            points,
        }
    }
}

/// Counters describing stabbing-query work; used to verify hint
/// effectiveness and by the benchmark report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorStats {
    pub stab_tests: u64,
    /// Stab tests spent on points that ended up failing.
    pub stab_tests_for_failing_points: u64,
    pub failing_points: u64,
    pub passing_points: u64,
    /// Failing points rejected by their hint on the first test.
    pub hint_rejections: u64,
}

impl DetectorStats {
    pub fn reset(&mut self) {
        *self = DetectorStats::default();
    }
}
