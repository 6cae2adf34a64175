//! Robot-centric window geometry.
//!
//! The window is `width × height` cells centred on the vehicle. Column `x`
//! runs across the vehicle from its left (`x = 0`) to its right
//! (`x = width - 1`); row `y` runs from behind the vehicle (`y = 0`) to ahead
//! of it. Robot-frame points are `(forward, left)` in meters.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSpec {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            width: 80,
            height: 80,
            resolution: 0.10,
        }
    }
}

impl WindowSpec {
    pub fn new(width: usize, height: usize, resolution: f64) -> Self {
        Self {
            width,
            height,
            resolution,
        }
    }

    /// Robot-frame `(forward, left)` of the centre of cell `(x, y)`.
    #[inline]
    pub fn cell_center(&self, x: usize, y: usize) -> (f64, f64) {
        let forward = (y as f64 + 0.5 - self.height as f64 / 2.0) * self.resolution;
        let left = (self.width as f64 / 2.0 - x as f64 - 0.5) * self.resolution;
        (forward, left)
    }

    /// Continuous cell coordinates `(column, row)` of a robot-frame point.
    #[inline]
    pub fn to_cell_coords(&self, forward: f64, left: f64) -> (f64, f64) {
        (
            self.width as f64 / 2.0 - left / self.resolution,
            forward / self.resolution + self.height as f64 / 2.0,
        )
    }

    /// Cell containing a robot-frame point, if inside the window.
    #[inline]
    pub fn to_cell(&self, forward: f64, left: f64) -> Option<(usize, usize)> {
        let (cx, cy) = self.to_cell_coords(forward, left);
        if cx >= 0.0 && cy >= 0.0 && cx < self.width as f64 && cy < self.height as f64 {
            Some((cx as usize, cy as usize))
        } else {
            None
        }
    }
}
