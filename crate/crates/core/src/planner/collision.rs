//! Straight-line traversability check against a cost map.

use crate::costmap::CostMap;
use crate::frame::WindowSpec;

/// Every cell whose closed square touches the segment between two
/// robot-frame points, as signed `(column, row)` indices. May include cells
/// outside the window.
pub fn supercover_cells(window: &WindowSpec, from: (f64, f64), to: (f64, f64)) -> Vec<(i64, i64)> {
    let (x0, y0) = window.to_cell_coords(from.0, from.1);
    let (x1, y1) = window.to_cell_coords(to.0, to.1);
    supercover_cell_coords((x0, y0), (x1, y1))
}

/// Same as [`supercover_cells`] but for points already in continuous cell coordinates.
pub fn supercover_cell_coords(p0: (f64, f64), p1: (f64, f64)) -> Vec<(i64, i64)> {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (ymin, ymax) = (y0.min(y1), y0.max(y1));
    let x_at = |y: f64| {
        if y1 == y0 {
            x0
        } else {
            x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        }
    };
    let mut cells = Vec::new();
    let first = ymin.ceil() as i64 - 1;
    let last = ymax.floor() as i64;
    for j in first..=last {
        let lo = ymin.max(j as f64);
        let hi = ymax.min(j as f64 + 1.0);
        if lo > hi {
            continue;
        }
        let (a, b) = if y1 == y0 {
            (x0.min(x1), x0.max(x1))
        } else {
            let (xa, xb) = (x_at(lo), x_at(hi));
            (xa.min(xb), xa.max(xb))
        };
        for i in (a.ceil() as i64 - 1)..=(b.floor() as i64) {
            cells.push((i, j));
        }
    }
    cells
}

/// True if any in-window cell on the segment costs at least `threshold`.
pub fn check_collision_line(map: &CostMap, from: (f64, f64), to: (f64, f64), threshold: f64) -> bool {
    let (w, h) = map.dims();
    supercover_cells(&map.window(), from, to).into_iter().any(|(i, j)| {
        i >= 0 && j >= 0 && (i as usize) < w && (j as usize) < h && map.get(i as usize, j as usize) >= threshold
    })
}
