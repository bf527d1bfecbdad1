//! Ground-truth environments for the simulator: occupancy bitmaps with
//! guaranteed-connected free space.

use crate::geometry::Point2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("infeasible environment spec: {0}")]
    InfeasibleSpec(String),
    #[error("robot pose ({x:.3}, {y:.3}) is inside an occupied cell")]
    PoseInOccupiedCell { x: f64, y: f64 },
    #[error("trajectory step {index} exceeds limits: {translation:.3} m, {rotation:.3} rad")]
    StepTooLarge {
        index: usize,
        translation: f64,
        rotation: f64,
    },
}

/// Environment shapes the generator knows how to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnvironmentSpec {
    /// A walled rectangular room, optionally with scattered box obstacles.
    Room {
        width_m: f64,
        height_m: f64,
        #[serde(default)]
        obstacles: u32,
    },
    /// A rectangular ring corridor: outer walls plus an occupied inner block,
    /// leaving a free cycle of the given corridor width.
    RingCorridor {
        width_m: f64,
        height_m: f64,
        corridor_m: f64,
    },
}

/// Ground-truth occupancy bitmap anchored at the origin; cell (i, j) covers
/// `[i*r, (i+1)*r) x [j*r, (j+1)*r)`. Cells outside the bitmap are neither
/// free nor occupied: rays leaving the bitmap never return.
#[derive(Debug, Clone)]
pub struct Environment {
    resolution: f64,
    width: usize,
    height: usize,
    occupied: Vec<bool>,
    seed: u64,
}

const WALL_CELLS: i32 = 2;

impl Environment {
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn in_bounds(&self, cell: (i32, i32)) -> bool {
        cell.0 >= 0 && cell.1 >= 0 && (cell.0 as usize) < self.width && (cell.1 as usize) < self.height
    }

    pub fn is_occupied(&self, cell: (i32, i32)) -> bool {
        self.in_bounds(cell) && self.occupied[cell.1 as usize * self.width + cell.0 as usize]
    }

    /// Free means inside the bitmap and not occupied.
    pub fn is_free(&self, cell: (i32, i32)) -> bool {
        self.in_bounds(cell) && !self.occupied[cell.1 as usize * self.width + cell.0 as usize]
    }

    pub fn cell_of(&self, p: Point2) -> (i32, i32) {
        crate::ray::cell_of(p.x / self.resolution, p.y / self.resolution)
    }

    pub fn cell_center(&self, cell: (i32, i32)) -> Point2 {
        Point2::new(
            (cell.0 as f64 + 0.5) * self.resolution,
            (cell.1 as f64 + 0.5) * self.resolution,
        )
    }

    pub fn is_free_point(&self, p: Point2) -> bool {
        self.is_free(self.cell_of(p))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        let width = self.width as i32;
        (0..self.height as i32)
            .flat_map(move |y| (0..width).map(move |x| (x, y)))
            .filter(|c| self.is_free(*c))
    }
}

/// Build an environment. Deterministic for a given seed and spec.
pub fn generate_environment(
    seed: u64,
    spec: &EnvironmentSpec,
    resolution: f64,
) -> Result<Environment, HarnessError> {
    match spec {
        EnvironmentSpec::Room {
            width_m,
            height_m,
            obstacles,
        } => room(seed, *width_m, *height_m, *obstacles, resolution),
        EnvironmentSpec::RingCorridor {
            width_m,
            height_m,
            corridor_m,
        } => ring(seed, *width_m, *height_m, *corridor_m, resolution),
    }
}

fn cells(m: f64, r: f64) -> i32 {
    (m / r).round() as i32
}

fn blank(width: i32, height: i32, resolution: f64, seed: u64) -> Environment {
    Environment {
        resolution,
        width: width as usize,
        height: height as usize,
        occupied: vec![false; (width * height) as usize],
        seed,
    }
}

fn fill(env: &mut Environment, x0: i32, y0: i32, x1: i32, y1: i32, occupied: bool) {
    for y in y0.max(0)..y1.min(env.height as i32) {
        for x in x0.max(0)..x1.min(env.width as i32) {
            env.occupied[y as usize * env.width + x as usize] = occupied;
        }
    }
}

fn room(
    seed: u64,
    width_m: f64,
    height_m: f64,
    obstacles: u32,
    resolution: f64,
) -> Result<Environment, HarnessError> {
    let w = cells(width_m, resolution) + 2 * WALL_CELLS;
    let h = cells(height_m, resolution) + 2 * WALL_CELLS;
    let interior = (w - 2 * WALL_CELLS, h - 2 * WALL_CELLS);
    if interior.0 < 8 || interior.1 < 8 {
        return Err(HarnessError::InfeasibleSpec(format!(
            "room interior {}x{} cells is too small",
            interior.0, interior.1
        )));
    }
    let mut env = blank(w, h, resolution, seed);
    fill(&mut env, 0, 0, w, h, true);
    fill(&mut env, WALL_CELLS, WALL_CELLS, w - WALL_CELLS, h - WALL_CELLS, false);

    if obstacles > 0 {
        // Boxes at least 0.6 m from walls and each other: every free region
        // stays connected through the gaps.
        let gap = cells(0.6, resolution);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut placed: Vec<(i32, i32, i32, i32)> = Vec::new();
        let mut attempts = 0;
        while placed.len() < obstacles as usize && attempts < 200 {
            attempts += 1;
            let bw = rng.gen_range(4..=10);
            let bh = rng.gen_range(4..=10);
            let lo_x = WALL_CELLS + gap;
            let hi_x = w - WALL_CELLS - gap - bw;
            let lo_y = WALL_CELLS + gap;
            let hi_y = h - WALL_CELLS - gap - bh;
            if hi_x <= lo_x || hi_y <= lo_y {
                break;
            }
            let x = rng.gen_range(lo_x..hi_x);
            let y = rng.gen_range(lo_y..hi_y);
            let clear = placed.iter().all(|(px, py, pw, ph)| {
                x + bw + gap <= *px || px + pw + gap <= x || y + bh + gap <= *py || py + ph + gap <= y
            });
            if clear {
                fill(&mut env, x, y, x + bw, y + bh, true);
                placed.push((x, y, bw, bh));
            }
        }
    }
    Ok(env)
}

fn ring(
    seed: u64,
    width_m: f64,
    height_m: f64,
    corridor_m: f64,
    resolution: f64,
) -> Result<Environment, HarnessError> {
    let w = cells(width_m, resolution) + 2 * WALL_CELLS;
    let h = cells(height_m, resolution) + 2 * WALL_CELLS;
    let corridor = cells(corridor_m, resolution);
    let inner_w = w - 2 * WALL_CELLS - 2 * corridor;
    let inner_h = h - 2 * WALL_CELLS - 2 * corridor;
    if corridor < 6 || inner_w < 4 || inner_h < 4 {
        return Err(HarnessError::InfeasibleSpec(format!(
            "ring corridor {corridor} cells wide with {inner_w}x{inner_h} inner block"
        )));
    }
    let mut env = blank(w, h, resolution, seed);
    fill(&mut env, 0, 0, w, h, true);
    fill(&mut env, WALL_CELLS, WALL_CELLS, w - WALL_CELLS, h - WALL_CELLS, false);
    let ix = WALL_CELLS + corridor;
    let iy = WALL_CELLS + corridor;
    fill(&mut env, ix, iy, ix + inner_w, iy + inner_h, true);
    Ok(env)
}
