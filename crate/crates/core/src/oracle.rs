//! Brute-force reference: assemble the full global map from all submaps under
//! a pose solution and run naive full-map frontier edge detection.
//!
//! This module exists to be obviously correct, not fast. It is the
//! correctness baseline the detector is compared against and the "naive"
//! approach timed by the benchmark. Pure functions over immutable inputs.

use crate::geometry::{BoundingBox, Point2, RigidTransform2};
use crate::grid::{
    classify_storage, storage_to_probability, CellClass, Submap,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::Arc;

/// Occupancy classes over a global lattice anchored at the origin.
///
/// A cell is unobserved iff every submap's stabbing lookup at the cell center
/// is unobserved or out of extent; otherwise the observed probabilities fuse
/// by odds product and classify by thresholding.
#[derive(Debug, Clone)]
pub struct GlobalGrid {
    resolution: f64,
    min_cell: (i32, i32),
    width: usize,
    height: usize,
    classes: Vec<CellClass>,
}

impl GlobalGrid {
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn min_cell(&self) -> (i32, i32) {
        self.min_cell
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn class_at(&self, cell: (i32, i32)) -> CellClass {
        let kx = cell.0 - self.min_cell.0;
        let ky = cell.1 - self.min_cell.1;
        if kx < 0 || ky < 0 || kx as usize >= self.width || ky as usize >= self.height {
            CellClass::Unobserved
        } else {
            self.classes[ky as usize * self.width + kx as usize]
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        let (ox, oy) = self.min_cell;
        let width = self.width as i32;
        (0..self.height as i32).flat_map(move |ky| (0..width).map(move |kx| (ox + kx, oy + ky)))
    }

    pub fn cell_center(&self, cell: (i32, i32)) -> Point2 {
        Point2::new(
            (cell.0 as f64 + 0.5) * self.resolution,
            (cell.1 as f64 + 0.5) * self.resolution,
        )
    }

    /// Lattice cell whose center is nearest to a point, with the same
    /// low-index tie rule the stabbing lookup uses.
    pub fn nearest_cell(&self, p: Point2) -> (i32, i32) {
        (
            crate::grid::nearest_center_index(p.x / self.resolution),
            crate::grid::nearest_center_index(p.y / self.resolution),
        )
    }
}

/// Merge all submaps into a global occupancy grid under the given poses.
///
/// Per global cell center, each submap contributes its nearest-cell value
/// (the same stabbing semantics the detector uses). Observed values fuse by
/// odds product — symmetric and order-independent — and classify with
/// epsilon 0; a fused probability of exactly 0.5 counts as occupied so that
/// observed cells never mint frontier.
pub fn assemble_global_map(
    submaps: &[(Arc<Submap>, RigidTransform2)],
) -> GlobalGrid {
    let resolution = submaps
        .first()
        .map(|(s, _)| s.resolution())
        .unwrap_or(0.05);
    let mut bounds: Option<BoundingBox> = None;
    let mut prepared = Vec::new();
    for (submap, pose) in submaps {
        debug_assert_eq!(submap.resolution(), resolution);
        if submap.is_empty() {
            continue;
        }
        let bbox = submap
            .global_bounding_box(pose)
            .expect("non-empty submap has an extent");
        bounds = Some(match bounds {
            None => bbox,
            Some(b) => BoundingBox::new(
                Point2::new(b.min.x.min(bbox.min.x), b.min.y.min(bbox.min.y)),
                Point2::new(b.max.x.max(bbox.max.x), b.max.y.max(bbox.max.y)),
            ),
        });
        prepared.push((submap.clone(), pose.invert(), bbox));
    }
    let Some(bounds) = bounds else {
        return GlobalGrid {
            resolution,
            min_cell: (0, 0),
            width: 0,
            height: 0,
            classes: Vec::new(),
        };
    };

    // One extra ring so every frontier cell of the union is inside the grid.
    let min_cell = (
        (bounds.min.x / resolution).floor() as i32 - 1,
        (bounds.min.y / resolution).floor() as i32 - 1,
    );
    let max_cell = (
        (bounds.max.x / resolution).ceil() as i32 + 1,
        (bounds.max.y / resolution).ceil() as i32 + 1,
    );
    let width = (max_cell.0 - min_cell.0 + 1) as usize;
    let height = (max_cell.1 - min_cell.1 + 1) as usize;
    let mut classes = vec![CellClass::Unobserved; width * height];

    for ky in 0..height {
        for kx in 0..width {
            let cell = (min_cell.0 + kx as i32, min_cell.1 + ky as i32);
            let center = Point2::new(
                (cell.0 as f64 + 0.5) * resolution,
                (cell.1 as f64 + 0.5) * resolution,
            );
            let mut odds: Option<f64> = None;
            for (submap, inverse_pose, bbox) in &prepared {
                if !bbox.contains(center) {
                    continue;
                }
                let local = inverse_pose.project_point(center);
                match submap.local_extent() {
                    Ok(extent) if extent.contains(local) => {
                        let storage = submap.storage_at(submap.nearest_cell(local));
                        if classify_storage(storage, 0.0) == CellClass::Unobserved {
                            continue;
                        }
                        let p = storage_to_probability(storage);
                        let o = p / (1.0 - p);
                        odds = Some(odds.map_or(o, |acc| acc * o));
                    }
                    _ => {}
                }
            }
            if let Some(odds) = odds {
                let p = odds / (1.0 + odds);
                classes[ky * width + kx] = if p < 0.5 {
                    CellClass::Free
                } else {
                    CellClass::Occupied
                };
            }
        }
    }

    GlobalGrid {
        resolution,
        min_cell,
        width,
        height,
        classes,
    }
}

/// Naive frontier edge detection on a merged global map: centers of all
/// unobserved cells 8-adjacent to a free cell.
pub fn naive_global_frontier(grid: &GlobalGrid) -> Vec<Point2> {
    let mut points = Vec::new();
    for cell in grid.cells() {
        if grid.class_at(cell) != CellClass::Unobserved {
            continue;
        }
        let free_adjacent = (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                (dx != 0 || dy != 0) && grid.class_at((cell.0 + dx, cell.1 + dy)) == CellClass::Free
            })
        });
        if free_adjacent {
            points.push(grid.cell_center(cell));
        }
    }
    points
}

/// Outcome of matching a detector frontier against the oracle frontier.
///
/// Points match when they snap to the same lattice cell, i.e. lie within half
/// a cell of each other per axis. `missing` are completeness violations and
/// must be empty. Extras split into the tolerated merge-conflict case (the
/// point's merged-map cell is unobserved but no longer free-adjacent, because
/// occupied evidence from other submaps overruled the free cell) and hard
/// extras, which must be empty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub matched: usize,
    pub detector_total: usize,
    pub oracle_total: usize,
    pub missing: Vec<Point2>,
    pub hard_extras: Vec<Point2>,
    pub merge_conflict_extras: Vec<Point2>,
}

impl ComparisonReport {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty() && self.hard_extras.is_empty()
    }
}

impl std::fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "matched {} / oracle {} (missing {}, hard extras {}, merge-conflict extras {})",
            self.matched,
            self.oracle_total,
            self.missing.len(),
            self.hard_extras.len(),
            self.merge_conflict_extras.len()
        )
    }
}

/// Match a detector frontier point set against the oracle's, within half a
/// cell, and classify unmatched detector points using the merged map.
pub fn compare(
    detector_points: &[Point2],
    oracle_points: &[Point2],
    grid: &GlobalGrid,
) -> ComparisonReport {
    let oracle_cells: BTreeSet<(i32, i32)> =
        oracle_points.iter().map(|p| grid.nearest_cell(*p)).collect();
    let detector_cells: BTreeSet<(i32, i32)> = detector_points
        .iter()
        .map(|p| grid.nearest_cell(*p))
        .collect();

    let mut missing = Vec::new();
    for p in oracle_points {
        if !detector_cells.contains(&grid.nearest_cell(*p)) {
            missing.push(*p);
        }
    }

    let mut hard_extras = Vec::new();
    let mut merge_conflict_extras = Vec::new();
    let mut matched = 0;
    let mut seen: BTreeSet<(i32, i32)> = BTreeSet::new();
    for p in detector_points {
        let cell = grid.nearest_cell(*p);
        if !seen.insert(cell) {
            continue; // coincident points from different submaps count once
        }
        if oracle_cells.contains(&cell) {
            matched += 1;
        } else if grid.class_at(cell) == CellClass::Unobserved {
            merge_conflict_extras.push(*p);
        } else {
            hard_extras.push(*p);
        }
    }

    ComparisonReport {
        matched,
        detector_total: seen.len(),
        oracle_total: oracle_cells.len(),
        missing,
        hard_extras,
        merge_conflict_extras,
    }
}
