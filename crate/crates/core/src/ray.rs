//! Exact integer grid-line traversal.
//!
//! A supercover-style walk over the unit lattice: cell (i, j) covers the
//! half-open square [i, i+1) x [j, j+1). The traversal reports every cell the
//! segment passes through; at an exact corner crossing it also reports both
//! side cells, so the sequence never cuts diagonally across unvisited space.
//! Sampling-based or Bresenham walks can skip cells and miss frontier cells;
//! this walk cannot.

/// Cell containing a point in grid coordinates (unit cells). Points on a cell
/// boundary belong to the cell with the larger index.
pub fn cell_of(x: f64, y: f64) -> (i32, i32) {
    (x.floor() as i32, y.floor() as i32)
}

/// All cells touched by the segment from `from` to `to`, in grid coordinates.
///
/// The sequence starts at the cell containing `from`, ends at the cell
/// containing `to`, and consecutive cells are always 8-adjacent.
pub fn supercover_line(from: (f64, f64), to: (f64, f64)) -> Vec<(i32, i32)> {
    let (mut cx, mut cy) = cell_of(from.0, from.1);
    let (ex, ey) = cell_of(to.0, to.1);
    let mut cells = vec![(cx, cy)];
    if (cx, cy) == (ex, ey) {
        return cells;
    }

    let dx = to.0 - from.0;
    let dy = to.1 - from.1;
    let step_x: i32 = if dx > 0.0 { 1 } else { -1 };
    let step_y: i32 = if dy > 0.0 { 1 } else { -1 };

    // Parameter t in [0, 1] along the segment at which the next vertical /
    // horizontal grid line is crossed.
    let next_boundary = |c: i32, step: i32| -> f64 {
        if step > 0 {
            (c + 1) as f64
        } else {
            c as f64
        }
    };
    let mut t_max_x = if dx != 0.0 {
        (next_boundary(cx, step_x) - from.0) / dx
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy != 0.0 {
        (next_boundary(cy, step_y) - from.1) / dy
    } else {
        f64::INFINITY
    };
    let t_delta_x = if dx != 0.0 { 1.0 / dx.abs() } else { f64::INFINITY };
    let t_delta_y = if dy != 0.0 { 1.0 / dy.abs() } else { f64::INFINITY };

    // Every cell the segment touches lies inside the bounding box of the two
    // endpoint cells; an endpoint lying exactly on a grid line would otherwise
    // produce a spurious step past the end cell.
    let bx = (cx.min(ex), cx.max(ex));
    let by = (cy.min(ey), cy.max(ey));
    let in_range = |x: i32, y: i32| x >= bx.0 && x <= bx.1 && y >= by.0 && y <= by.1;

    while (cx, cy) != (ex, ey) {
        let step_x_exits = !in_range(cx + step_x, cy.clamp(by.0, by.1));
        let step_y_exits = !in_range(cx.clamp(bx.0, bx.1), cy + step_y);
        if t_max_x < t_max_y {
            if step_x_exits {
                t_max_x = f64::INFINITY;
                continue;
            }
            cx += step_x;
            t_max_x += t_delta_x;
        } else if t_max_y < t_max_x {
            if step_y_exits {
                t_max_y = f64::INFINITY;
                continue;
            }
            cy += step_y;
            t_max_y += t_delta_y;
        } else if t_max_x.is_infinite() {
            break;
        } else if step_x_exits {
            t_max_x = f64::INFINITY;
            continue;
        } else if step_y_exits {
            t_max_y = f64::INFINITY;
            continue;
        } else {
            // Exact corner crossing: include both side cells, then step
            // diagonally. Keeps the walk gap-free.
            cells.push((cx, cy + step_y));
            cells.push((cx + step_x, cy));
            cx += step_x;
            cy += step_y;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        }
        cells.push((cx, cy));
    }
    cells
}
