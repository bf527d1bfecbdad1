//! Occupancy-grid submaps: 16-bit probability storage, Bayesian scan
//! insertion, cell classification, grid growth, and submap finishing.
//!
//! A submap is a growable 2D grid of occupancy probabilities with a local
//! frame. Cells are addressed by *absolute* integer cell coordinates: cell
//! `(cx, cy)` covers the local-frame square `[cx*r, (cx+1)*r) x [cy*r,
//! (cy+1)*r)`. The backing array may be re-offset as the grid grows, but the
//! absolute coordinate of a cell — and hence its position in the local frame —
//! never changes.

use crate::geometry::{transformed_bounding_box, BoundingBox, Point2, RigidTransform2};
use crate::ray::{cell_of, supercover_line};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Lower bound of stored occupancy probabilities.
pub const PROBABILITY_MIN: f64 = 0.1;
/// Upper bound of stored occupancy probabilities.
pub const PROBABILITY_MAX: f64 = 0.9;
/// Number of distinct observed storage values (1..=65535).
const STORAGE_STEPS: f64 = 65534.0;

/// Maximum error of a probability -> storage -> probability round trip.
pub fn storage_half_quantum() -> f64 {
    (PROBABILITY_MAX - PROBABILITY_MIN) / STORAGE_STEPS / 2.0
}

/// Map a probability in [0.1, 0.9] onto storage values 1..=65535. Values
/// outside the interval are clamped first. Storage 0 is the unobserved
/// sentinel and is never produced here.
pub fn probability_to_storage(p: f64) -> u16 {
    let clamped = p.clamp(PROBABILITY_MIN, PROBABILITY_MAX);
    1 + ((clamped - PROBABILITY_MIN) / (PROBABILITY_MAX - PROBABILITY_MIN) * STORAGE_STEPS).round()
        as u16
}

/// Inverse of [`probability_to_storage`] for observed storage values.
pub fn storage_to_probability(storage: u16) -> f64 {
    debug_assert!(storage != 0, "unobserved sentinel has no probability");
    PROBABILITY_MIN + (storage - 1) as f64 / STORAGE_STEPS * (PROBABILITY_MAX - PROBABILITY_MIN)
}

/// Occupancy class of a cell after thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellClass {
    Free,
    Occupied,
    Unobserved,
}

/// Threshold a storage value: free below `0.5 - epsilon`, occupied above 0.5,
/// unobserved otherwise. The band `[0.5 - epsilon, 0.5]` treats barely-free
/// cells as unobserved so single spurious long-range rays do not produce a
/// false frontier.
pub fn classify_storage(storage: u16, epsilon: f64) -> CellClass {
    if storage == 0 {
        return CellClass::Unobserved;
    }
    let p = storage_to_probability(storage);
    if p > 0.5 {
        CellClass::Occupied
    } else if p < 0.5 - epsilon {
        CellClass::Free
    } else {
        CellClass::Unobserved
    }
}

/// A single sensor observation of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observation {
    Hit,
    Miss,
}

fn odds(p: f64) -> f64 {
    p / (1.0 - p)
}

fn probability_from_odds(o: f64) -> f64 {
    o / (1.0 + o)
}

/// Bayesian update of one cell. The first observation takes the observation
/// probability directly; afterwards odds multiply and the result is clamped
/// back into [0.1, 0.9].
pub fn bayes_update(storage: u16, observation: Observation, p_hit: f64, p_miss: f64) -> u16 {
    debug_assert!(p_hit > 0.5 && p_miss < 0.5);
    let obs_p = match observation {
        Observation::Hit => p_hit,
        Observation::Miss => p_miss,
    };
    if storage == 0 {
        return probability_to_storage(obs_p);
    }
    let updated = probability_from_odds(odds(storage_to_probability(storage)) * odds(obs_p));
    probability_to_storage(updated)
}

/// One lidar scan expressed in the frame it is inserted in: the rangefinder
/// origin plus the hit points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scan {
    pub origin: Point2,
    pub hits: Vec<Point2>,
}

impl Scan {
    pub fn new(origin: Point2, hits: Vec<Point2>) -> Self {
        Self { origin, hits }
    }
}

/// Identifier of a submap; allocated monotonically by the trajectory builder.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SubmapId(pub u64);

impl SubmapId {
    /// Reserved id used by whole-map frontier publications (the naive
    /// detector has no per-submap granularity).
    pub const WHOLE_MAP: SubmapId = SubmapId(u64::MAX);
}

impl std::fmt::Display for SubmapId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("scan inserted into finished submap {0}")]
    InsertIntoFinished(SubmapId),
    #[error("submap {0} has an empty grid")]
    EmptyGrid(SubmapId),
}

/// A growable occupancy grid with a local frame, immutable once finished.
///
/// The grid keeps at least a one-cell unobserved margin around every updated
/// cell, so every frontier cell of the submap is itself an allocated cell and
/// the extent bounding box covers all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submap {
    id: SubmapId,
    resolution: f64,
    /// Absolute cell coordinate of array index (0, 0).
    offset: [i32; 2],
    width: usize,
    height: usize,
    cells: Vec<u16>,
    inserted_scans: u32,
    /// Number of scans after which this submap is finished.
    scan_quota: u32,
    finished: bool,
}

impl Submap {
    pub fn new(id: SubmapId, resolution: f64, scan_quota: u32) -> Self {
        assert!(resolution > 0.0 && scan_quota > 0);
        Self {
            id,
            resolution,
            offset: [0, 0],
            width: 0,
            height: 0,
            cells: Vec::new(),
            inserted_scans: 0,
            scan_quota,
            finished: false,
        }
    }

    /// Rebuild a submap from its serialized record fields.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        id: SubmapId,
        resolution: f64,
        offset: [i32; 2],
        width: usize,
        height: usize,
        cells: Vec<u16>,
        inserted_scans: u32,
        scan_quota: u32,
        finished: bool,
    ) -> Self {
        assert_eq!(cells.len(), width * height);
        Self {
            id,
            resolution,
            offset,
            width,
            height,
            cells,
            inserted_scans,
            scan_quota,
            finished,
        }
    }

    pub fn id(&self) -> SubmapId {
        self.id
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn inserted_scans(&self) -> u32 {
        self.inserted_scans
    }

    pub fn scan_quota(&self) -> u32 {
        self.scan_quota
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn offset(&self) -> [i32; 2] {
        self.offset
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Row-major storage values (rows along y, columns along x).
    pub fn raw_cells(&self) -> &[u16] {
        &self.cells
    }

    fn index_of(&self, cell: (i32, i32)) -> Option<usize> {
        let kx = cell.0 - self.offset[0];
        let ky = cell.1 - self.offset[1];
        if kx < 0 || ky < 0 || kx as usize >= self.width || ky as usize >= self.height {
            None
        } else {
            Some(ky as usize * self.width + kx as usize)
        }
    }

    /// Storage value at an absolute cell coordinate; cells outside the
    /// allocated grid are unobserved.
    pub fn storage_at(&self, cell: (i32, i32)) -> u16 {
        self.index_of(cell).map_or(0, |i| self.cells[i])
    }

    pub fn class_at(&self, cell: (i32, i32), epsilon: f64) -> CellClass {
        classify_storage(self.storage_at(cell), epsilon)
    }

    /// Absolute cell containing a local-frame point (boundary points belong
    /// to the cell with the larger index).
    pub fn cell_containing(&self, p: Point2) -> (i32, i32) {
        cell_of(p.x / self.resolution, p.y / self.resolution)
    }

    /// Absolute cell whose center is nearest to a local-frame point. Ties
    /// break toward the smaller cell coordinate so the lookup is
    /// deterministic.
    pub fn nearest_cell(&self, p: Point2) -> (i32, i32) {
        (
            nearest_center_index(p.x / self.resolution),
            nearest_center_index(p.y / self.resolution),
        )
    }

    /// Center of an absolute cell in the local frame.
    pub fn cell_center(&self, cell: (i32, i32)) -> Point2 {
        Point2::new(
            (cell.0 as f64 + 0.5) * self.resolution,
            (cell.1 as f64 + 0.5) * self.resolution,
        )
    }

    /// Local-frame extent of the allocated grid.
    pub fn local_extent(&self) -> Result<BoundingBox, GridError> {
        if self.is_empty() {
            return Err(GridError::EmptyGrid(self.id));
        }
        Ok(BoundingBox::new(
            Point2::new(
                self.offset[0] as f64 * self.resolution,
                self.offset[1] as f64 * self.resolution,
            ),
            Point2::new(
                (self.offset[0] as f64 + self.width as f64) * self.resolution,
                (self.offset[1] as f64 + self.height as f64) * self.resolution,
            ),
        ))
    }

    /// Axis-aligned global-frame box containing the four projected corners of
    /// the grid extent.
    pub fn global_bounding_box(&self, pose: &RigidTransform2) -> Result<BoundingBox, GridError> {
        Ok(transformed_bounding_box(&self.local_extent()?, pose))
    }

    /// Insert one scan: every hit cell receives a hit update, every cell the
    /// ray from the origin traverses (excluding hit cells) receives a miss
    /// update, and each cell is updated at most once per scan with hit taking
    /// precedence. Increments the scan count and finishes the submap when the
    /// quota is reached.
    pub fn insert_scan(&mut self, scan: &Scan, p_hit: f64, p_miss: f64) -> Result<(), GridError> {
        if self.finished {
            return Err(GridError::InsertIntoFinished(self.id));
        }
        if !scan.hits.is_empty() {
            let origin_cell = self.cell_containing(scan.origin);
            let mut min = origin_cell;
            let mut max = origin_cell;
            let mut hit_cells = BTreeSet::new();
            for hit in &scan.hits {
                let c = self.cell_containing(*hit);
                min = (min.0.min(c.0), min.1.min(c.1));
                max = (max.0.max(c.0), max.1.max(c.1));
                hit_cells.insert(c);
            }
            // Margin keeps an unobserved ring around observed cells so every
            // frontier cell stays inside the allocated extent.
            self.ensure_cell_range((min.0 - 1, min.1 - 1), (max.0 + 1, max.1 + 1));

            let grid_origin = (
                scan.origin.x / self.resolution,
                scan.origin.y / self.resolution,
            );
            let mut miss_cells = BTreeSet::new();
            for hit in &scan.hits {
                let grid_hit = (hit.x / self.resolution, hit.y / self.resolution);
                for cell in supercover_line(grid_origin, grid_hit) {
                    if !hit_cells.contains(&cell) {
                        miss_cells.insert(cell);
                    }
                }
            }
            for cell in &hit_cells {
                self.update_cell(*cell, Observation::Hit, p_hit, p_miss);
            }
            for cell in &miss_cells {
                self.update_cell(*cell, Observation::Miss, p_hit, p_miss);
            }
        }
        self.inserted_scans += 1;
        if self.inserted_scans == self.scan_quota {
            self.finished = true;
        }
        Ok(())
    }

    fn update_cell(&mut self, cell: (i32, i32), obs: Observation, p_hit: f64, p_miss: f64) {
        let idx = self
            .index_of(cell)
            .expect("updated cell must be inside the grown grid");
        self.cells[idx] = bayes_update(self.cells[idx], obs, p_hit, p_miss);
    }

    /// Grow the backing array so the inclusive absolute cell range fits,
    /// doubling toward the needed side for amortized O(1) growth. Existing
    /// cells keep their absolute coordinates.
    fn ensure_cell_range(&mut self, min: (i32, i32), max: (i32, i32)) {
        if self.is_empty() {
            self.offset = [min.0, min.1];
            self.width = (max.0 - min.0 + 1) as usize;
            self.height = (max.1 - min.1 + 1) as usize;
            self.cells = vec![0; self.width * self.height];
            return;
        }
        let mut new_min = [self.offset[0], self.offset[1]];
        let mut new_max = [
            self.offset[0] + self.width as i32 - 1,
            self.offset[1] + self.height as i32 - 1,
        ];
        let req_min = [min.0, min.1];
        let req_max = [max.0, max.1];
        let mut changed = false;
        for axis in 0..2 {
            let size = new_max[axis] - new_min[axis] + 1;
            while req_min[axis] < new_min[axis] {
                new_min[axis] -= size.max(new_min[axis] - req_min[axis]);
                changed = true;
            }
            while req_max[axis] > new_max[axis] {
                new_max[axis] += size.max(req_max[axis] - new_max[axis]);
                changed = true;
            }
        }
        if !changed {
            return;
        }
        let new_width = (new_max[0] - new_min[0] + 1) as usize;
        let new_height = (new_max[1] - new_min[1] + 1) as usize;
        let mut new_cells = vec![0u16; new_width * new_height];
        let dx = (self.offset[0] - new_min[0]) as usize;
        let dy = (self.offset[1] - new_min[1]) as usize;
        for row in 0..self.height {
            let src = row * self.width;
            let dst = (row + dy) * new_width + dx;
            new_cells[dst..dst + self.width].copy_from_slice(&self.cells[src..src + self.width]);
        }
        self.offset = [new_min[0], new_min[1]];
        self.width = new_width;
        self.height = new_height;
        self.cells = new_cells;
    }

    /// Classify the whole grid. One integer-threshold pass over the backing
    /// array; equivalent to elementwise [`classify_storage`].
    pub fn classify(&self, epsilon: f64) -> ClassifiedGrid {
        let (free_max, occupied_min) = storage_thresholds(epsilon);
        let classes = self
            .cells
            .iter()
            .map(|&s| {
                if s == 0 {
                    CellClass::Unobserved
                } else if s >= occupied_min {
                    CellClass::Occupied
                } else if s <= free_max {
                    CellClass::Free
                } else {
                    CellClass::Unobserved
                }
            })
            .collect();
        ClassifiedGrid {
            offset: self.offset,
            width: self.width,
            height: self.height,
            classes,
        }
    }
}

/// Integer storage thresholds equivalent to the float thresholding rule:
/// free iff `1 <= s <= free_max`, occupied iff `s >= occupied_min`.
fn storage_thresholds(epsilon: f64) -> (u16, u16) {
    let free_bound = 0.5 - epsilon;
    let approx = ((free_bound - PROBABILITY_MIN) / (PROBABILITY_MAX - PROBABILITY_MIN)
        * STORAGE_STEPS) as i64
        + 1;
    let mut free_max = approx.clamp(0, 65535) as u16;
    while free_max >= 1 && storage_to_probability(free_max) >= free_bound {
        free_max -= 1;
    }
    while free_max < 65535 && storage_to_probability(free_max + 1) < free_bound {
        free_max += 1;
    }
    let mut occupied_min = 32768u16;
    while occupied_min > 1 && storage_to_probability(occupied_min - 1) > 0.5 {
        occupied_min -= 1;
    }
    while storage_to_probability(occupied_min) <= 0.5 {
        occupied_min += 1;
    }
    (free_max, occupied_min)
}

/// Elementwise classification of a submap grid, sharing its cell addressing.
#[derive(Debug, Clone)]
pub struct ClassifiedGrid {
    offset: [i32; 2],
    width: usize,
    height: usize,
    classes: Vec<CellClass>,
}

impl ClassifiedGrid {
    pub fn offset(&self) -> [i32; 2] {
        self.offset
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Class at an absolute cell coordinate; outside the grid is unobserved.
    pub fn class_at(&self, cell: (i32, i32)) -> CellClass {
        let kx = cell.0 - self.offset[0];
        let ky = cell.1 - self.offset[1];
        if kx < 0 || ky < 0 || kx as usize >= self.width || ky as usize >= self.height {
            CellClass::Unobserved
        } else {
            self.classes[ky as usize * self.width + kx as usize]
        }
    }

    /// Absolute coordinates of all allocated cells, row-major.
    pub fn cells(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        let (ox, oy) = (self.offset[0], self.offset[1]);
        let width = self.width as i32;
        (0..self.height as i32)
            .flat_map(move |ky| (0..width).map(move |kx| (ox + kx, oy + ky)))
    }
}

/// Index of the cell whose center is nearest to a grid-space coordinate,
/// with half-way ties resolved toward the smaller index.
pub(crate) fn nearest_center_index(grid_coord: f64) -> i32 {
    (grid_coord - 1.0).ceil() as i32
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn storage_endpoints() {
        assert_eq!(probability_to_storage(0.1), 1);
        assert_eq!(probability_to_storage(0.9), 65535);
        assert_eq!(probability_to_storage(0.5), 32768);
        // Out-of-range probabilities clamp before mapping.
        assert_eq!(probability_to_storage(0.01), 1);
        assert_eq!(probability_to_storage(0.99), 65535);
    }

    #[test]
    fn classify_rule() {
        assert_eq!(classify_storage(probability_to_storage(0.3), 0.0), CellClass::Free);
        assert_eq!(classify_storage(0, 0.0), CellClass::Unobserved);
        assert_eq!(classify_storage(probability_to_storage(0.7), 0.0), CellClass::Occupied);
        // 0.48 falls in the uncertain band [0.46, 0.5] for epsilon 0.04.
        assert_eq!(
            classify_storage(probability_to_storage(0.48), 0.04),
            CellClass::Unobserved
        );
        assert_eq!(classify_storage(probability_to_storage(0.48), 0.0), CellClass::Free);
    }

    #[test]
    fn bayes_first_observation() {
        assert_eq!(
            storage_to_probability(bayes_update(0, Observation::Hit, 0.55, 0.49)),
            storage_to_probability(probability_to_storage(0.55))
        );
    }

    #[test]
    fn bayes_clamps_at_upper_bound() {
        let s = probability_to_storage(0.9);
        assert_eq!(bayes_update(s, Observation::Hit, 0.55, 0.49), s);
    }

    #[test]
    fn bayes_odds_product() {
        // odds(0.55) * odds(0.49) => p ~ 0.540
        let s = bayes_update(probability_to_storage(0.55), Observation::Miss, 0.55, 0.49);
        let expected = (0.55 / 0.45) * (0.49 / 0.51);
        let expected_p = expected / (1.0 + expected);
        assert!((storage_to_probability(s) - expected_p).abs() < 2.0 * storage_half_quantum());
    }

    #[test]
    fn two_hits_compose() {
        let s1 = bayes_update(0, Observation::Hit, 0.55, 0.49);
        let s2 = bayes_update(s1, Observation::Hit, 0.55, 0.49);
        let expected = (0.55f64 / 0.45).powi(2);
        let expected_p = expected / (1.0 + expected);
        assert!((expected_p - 0.599).abs() < 1e-3);
        assert!((storage_to_probability(s2) - expected_p).abs() < 2.0 * storage_half_quantum());
    }

    fn submap() -> Submap {
        Submap::new(SubmapId(0), 0.05, 10)
    }

    #[test]
    fn insert_scan_ray_counts() {
        let mut s = submap();
        // Origin at the center of cell (0,0); hit 3 cells to the right.
        let scan = Scan::new(
            Point2::new(0.025, 0.025),
            vec![Point2::new(0.175, 0.025)],
        );
        s.insert_scan(&scan, 0.55, 0.49).unwrap();
        let mut occupied = 0;
        let mut free = 0;
        let classified = s.classify(0.0);
        for cell in classified.cells() {
            match classified.class_at(cell) {
                CellClass::Occupied => occupied += 1,
                CellClass::Free => free += 1,
                CellClass::Unobserved => {}
            }
        }
        assert_eq!(occupied, 1);
        assert_eq!(free, 3);
        assert_eq!(s.class_at((3, 0), 0.0), CellClass::Occupied);
        for cx in 0..3 {
            assert_eq!(s.class_at((cx, 0), 0.0), CellClass::Free);
        }
    }

    #[test]
    fn empty_scan_still_counts() {
        let mut s = submap();
        s.insert_scan(&Scan::new(Point2::new(0.0, 0.0), vec![]), 0.55, 0.49)
            .unwrap();
        assert_eq!(s.inserted_scans(), 1);
        assert!(s.is_empty());
    }

    #[test]
    fn finishing_and_immutability() {
        let mut s = Submap::new(SubmapId(7), 0.05, 2);
        let scan = Scan::new(Point2::new(0.025, 0.025), vec![Point2::new(0.225, 0.025)]);
        s.insert_scan(&scan, 0.55, 0.49).unwrap();
        assert!(!s.is_finished());
        s.insert_scan(&scan, 0.55, 0.49).unwrap();
        assert!(s.is_finished());
        assert!(matches!(
            s.insert_scan(&scan, 0.55, 0.49),
            Err(GridError::InsertIntoFinished(SubmapId(7)))
        ));
    }

    #[test]
    fn growth_preserves_cell_positions() {
        let mut s = submap();
        let scan = Scan::new(Point2::new(0.025, 0.025), vec![Point2::new(0.225, 0.025)]);
        s.insert_scan(&scan, 0.55, 0.49).unwrap();
        let before: Vec<((i32, i32), u16)> = {
            let c = s.classify(0.0);
            c.cells().map(|cell| (cell, s.storage_at(cell))).collect()
        };
        // Force growth far to the negative side.
        let scan2 = Scan::new(Point2::new(0.025, 0.025), vec![Point2::new(-1.0, -1.0)]);
        s.insert_scan(&scan2, 0.55, 0.49).unwrap();
        for (cell, storage) in before {
            if cell == (0, 0) || storage == 0 {
                continue; // origin cell re-updated by the second ray
            }
            let after = s.storage_at(cell);
            // Cells not on the second ray are untouched.
            if after != storage {
                let updated = bayes_update(storage, Observation::Miss, 0.55, 0.49);
                assert_eq!(after, updated);
            }
        }
        assert_eq!(s.class_at((-20, -20), 0.0), CellClass::Occupied);
    }

    #[test]
    fn empty_grid_bounding_box_errors() {
        let s = submap();
        assert!(matches!(
            s.global_bounding_box(&RigidTransform2::identity()),
            Err(GridError::EmptyGrid(_))
        ));
    }

    #[test]
    fn extent_box_matches_cell_count() {
        let mut s = submap();
        // Hits spanning 10x10 cells starting at the origin cell.
        let scan = Scan::new(
            Point2::new(0.025, 0.025),
            vec![Point2::new(0.475, 0.475)],
        );
        s.insert_scan(&scan, 0.55, 0.49).unwrap();
        let ext = s.local_extent().unwrap();
        // 10 observed-range cells plus the one-cell margin each side.
        assert!((ext.max.x - ext.min.x - 0.6).abs() < 1e-12);
        let bb = s.global_bounding_box(&RigidTransform2::identity()).unwrap();
        assert_eq!(bb, ext);
    }

    #[test]
    fn nearest_cell_tie_breaks_low() {
        let s = submap();
        // Exactly on the boundary between cells 0 and 1 (equidistant centers).
        assert_eq!(s.nearest_cell(Point2::new(0.05, 0.05)), (0, 0));
        assert_eq!(s.nearest_cell(Point2::new(0.051, 0.02)), (1, 0));
        assert_eq!(s.nearest_cell(Point2::new(-0.01, 0.0)), (-1, -1));
    }

    #[test]
    fn classify_grid_matches_elementwise() {
        let mut s = submap();
        let scan = Scan::new(
            Point2::new(0.025, 0.025),
            vec![Point2::new(0.475, 0.225), Point2::new(-0.2, 0.1)],
        );
        s.insert_scan(&scan, 0.55, 0.49).unwrap();
        for eps in [0.0, 0.04, 0.2] {
            let grid = s.classify(eps);
            for cell in grid.cells() {
                assert_eq!(
                    grid.class_at(cell),
                    classify_storage(s.storage_at(cell), eps),
                    "cell {cell:?} eps {eps}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn storage_roundtrip_half_quantum(p in 0.1..0.9f64) {
            let back = storage_to_probability(probability_to_storage(p));
            prop_assert!((back - p).abs() <= storage_half_quantum() + 1e-12);
        }

        /// Once observed, a cell never reverts to unobserved over any scan
        /// sequence (the entropy-monotonicity property that licenses
        /// incremental invalidation).
        #[test]
        fn observed_cells_stay_observed(
            hits in proptest::collection::vec((0i32..12, 0i32..12), 1..20),
            seed in 0u64..1000,
        ) {
            let _ = seed;
            let mut s = Submap::new(SubmapId(1), 0.05, 1000);
            let mut observed: BTreeSet<(i32, i32)> = BTreeSet::new();
            for chunk in hits.chunks(3) {
                let points = chunk
                    .iter()
                    .map(|(cx, cy)| Point2::new((*cx as f64 + 0.5) * 0.05, (*cy as f64 + 0.5) * 0.05))
                    .collect();
                s.insert_scan(&Scan::new(Point2::new(0.025, 0.025), points), 0.55, 0.49).unwrap();
                let grid = s.classify(0.0);
                let now: BTreeSet<(i32, i32)> = grid
                    .cells()
                    .filter(|c| s.storage_at(*c) != 0)
                    .collect();
                for cell in &observed {
                    prop_assert!(now.contains(cell), "cell {cell:?} became unobserved");
                    prop_assert!(grid.class_at(*cell) != CellClass::Unobserved);
                }
                observed = now;
            }
        }
    }
}
