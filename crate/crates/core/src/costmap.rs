//! Semantic, elevation and aggregated cost maps, plus the turn-maneuver penalty.
//!
//! All maps are robot-centric windows (see [`crate::frame`]): column `x` is
//! lateral with `x = 0` at the vehicle's left, so a penalty peaking at the
//! last column pushes the planner to the left.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::WindowSpec;
use crate::grid::Grid;
use crate::route::Maneuver;
use crate::world::{Observation, SemanticClass};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostMapError {
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("invalid cost parameters: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMap {
    cost: Grid<f64>,
    resolution: f64,
    c_max: f64,
}

impl CostMap {
    /// Builds a map, clamping every cell into `[0, c_max]`.
    pub fn new(cost: Grid<f64>, resolution: f64, c_max: f64) -> Self {
        assert!(resolution > 0.0 && c_max > 0.0);
        let cost = cost.map(|&c| c.clamp(0.0, c_max));
        Self { cost, resolution, c_max }
    }

    pub fn zeros(width: usize, height: usize, resolution: f64, c_max: f64) -> Self {
        Self::new(Grid::filled(width, height, 0.0), resolution, c_max)
    }

    pub fn width(&self) -> usize {
        self.cost.width()
    }

    pub fn height(&self) -> usize {
        self.cost.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.cost.dims()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn grid(&self) -> &Grid<f64> {
        &self.cost
    }

    pub fn window(&self) -> WindowSpec {
        WindowSpec::new(self.width(), self.height(), self.resolution)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.cost[(x, y)]
    }

    /// Cost at a robot-frame point; `c_max` outside the window.
    #[inline]
    pub fn cost_at(&self, forward: f64, left: f64) -> f64 {
        let w = self.cost.width() as f64;
        let h = self.cost.height() as f64;
        let cx = w / 2.0 - left / self.resolution;
        let cy = forward / self.resolution + h / 2.0;
        if cx >= 0.0 && cy >= 0.0 && cx < w && cy < h {
            self.cost.as_slice()[cy as usize * self.cost.width() + cx as usize]
        } else {
            self.c_max
        }
    }

    /// Left/right mirror image (column `x` ↔ `width - 1 - x`).
    pub fn mirrored(&self) -> Self {
        let w = self.width();
        Self {
            cost: Grid::from_fn(w, self.height(), |x, y| self.cost[(w - 1 - x, y)]),
            resolution: self.resolution,
            c_max: self.c_max,
        }
    }

    /// Plain-text grey map (PGM `P2`): resolution and c_max in comments,
    /// row-major values rounded to integers on a `0..=round(c_max)` scale,
    /// first row = frontmost row.
    pub fn to_pgm(&self) -> String {
        let maxval = self.c_max.round().max(1.0) as u64;
        let mut out = format!(
            "P2\n# resolution {}\n# c_max {}\n{} {}\n{}\n",
            self.resolution,
            self.c_max,
            self.width(),
            self.height(),
            maxval
        );
        for y in (0..self.height()).rev() {
            let row: Vec<String> = (0..self.width())
                .map(|x| (self.get(x, y).round() as u64).min(maxval).to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    fn check_same_shape(&self, other: &CostMap) -> Result<(), CostMapError> {
        if self.dims() != other.dims() || self.resolution != other.resolution {
            return Err(CostMapError::DimensionMismatch {
                expected: self.dims(),
                got: other.dims(),
            });
        }
        Ok(())
    }
}

/// Cost per terrain class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemanticCostTable {
    pub smooth: f64,
    pub rough: f64,
    pub bumpy: f64,
    pub forbidden: f64,
    pub obstacle: f64,
    pub background: f64,
}

impl Default for SemanticCostTable {
    fn default() -> Self {
        Self {
            smooth: 0.0,
            rough: 30.0,
            bumpy: 60.0,
            forbidden: 100.0,
            obstacle: 100.0,
            background: 45.0,
        }
    }
}

impl SemanticCostTable {
    #[inline]
    pub fn cost(&self, c: SemanticClass) -> f64 {
        match c {
            SemanticClass::Smooth => self.smooth,
            SemanticClass::Rough => self.rough,
            SemanticClass::Bumpy => self.bumpy,
            SemanticClass::Forbidden => self.forbidden,
            SemanticClass::Obstacle => self.obstacle,
            SemanticClass::Background => self.background,
        }
    }

    pub fn validate(&self, c_max: f64) -> Result<(), CostMapError> {
        let ordered = 0.0 <= self.smooth && self.smooth < self.rough && self.rough < self.bumpy && self.bumpy < self.forbidden;
        let capped = self.forbidden == c_max && self.obstacle == c_max;
        let bg = (0.0..=c_max).contains(&self.background);
        if ordered && capped && bg {
            Ok(())
        } else {
            Err(CostMapError::Invalid(
                "semantic costs must satisfy smooth < rough < bumpy < forbidden = obstacle = c_max".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElevationCostParams {
    /// Cost per unit slope (m/m).
    pub slope_gain: f64,
    /// Cost per meter of detrended local height deviation.
    pub roughness_gain: f64,
    pub saturation: f64,
}

impl Default for ElevationCostParams {
    fn default() -> Self {
        Self {
            slope_gain: 50.0,
            roughness_gain: 200.0,
            saturation: 100.0,
        }
    }
}

/// Everything the cost-map stage needs, as read from a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostMapParams {
    pub c_max: f64,
    pub semantic: SemanticCostTable,
    pub elevation: ElevationCostParams,
    pub semantic_weight: f64,
    pub elevation_weight: f64,
    /// Turn penalty spread, in cells.
    pub penalty_sigma: f64,
    /// Height-only baseline: step (m) between neighbours that marks a hazard.
    pub step_max: f64,
}

impl Default for CostMapParams {
    fn default() -> Self {
        Self {
            c_max: 100.0,
            semantic: SemanticCostTable::default(),
            elevation: ElevationCostParams::default(),
            semantic_weight: 1.0,
            elevation_weight: 1.0,
            penalty_sigma: 20.0,
            step_max: 0.15,
        }
    }
}

impl CostMapParams {
    pub fn validate(&self) -> Result<(), CostMapError> {
        self.semantic.validate(self.c_max)?;
        let e = &self.elevation;
        if e.slope_gain < 0.0 || e.roughness_gain < 0.0 || e.saturation < 0.0 || e.saturation > self.c_max {
            return Err(CostMapError::Invalid("elevation gains must be >= 0 and saturation <= c_max".into()));
        }
        if !(self.penalty_sigma > 0.0) || self.step_max <= 0.0 {
            return Err(CostMapError::Invalid("penalty_sigma and step_max must be positive".into()));
        }
        Ok(())
    }
}

fn check_window(obs: &Observation, expected: (usize, usize)) -> Result<(), CostMapError> {
    let got = obs.semantics.dims();
    if got != expected || obs.elevation.dims() != expected {
        return Err(CostMapError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `C_S(x, y) = table[class(x, y)]`.
pub fn build_semantic_cost(
    obs: &Observation,
    table: &SemanticCostTable,
    dims: (usize, usize),
    c_max: f64,
) -> Result<CostMap, CostMapError> {
    check_window(obs, dims)?;
    Ok(CostMap::new(obs.semantics.map(|&c| table.cost(c)), obs.window.resolution, c_max))
}

/// `C_E = min(saturation, slope_gain·|∇h| + roughness_gain·dev)`.
///
/// The gradient uses central differences (one-sided at the border). `dev` is
/// the standard deviation of the 3×3 neighbourhood after removing the local
/// plane given by that gradient, so a tilted plane has zero roughness.
pub fn build_elevation_cost(
    obs: &Observation,
    params: &ElevationCostParams,
    dims: (usize, usize),
    c_max: f64,
) -> Result<CostMap, CostMapError> {
    check_window(obs, dims)?;
    let h = &obs.elevation;
    let res = obs.window.resolution;
    let (w, ht) = h.dims();
    let (gx, gy) = gradients(h, res);
    let cost = Grid::from_fn(w, ht, |x, y| {
        let (gxc, gyc) = (gx[(x, y)], gy[(x, y)]);
        let slope = gxc.hypot(gyc);
        let center = h[(x, y)];
        let mut residuals = [0.0f64; 9];
        let mut n = 0;
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if let Some(&v) = h.get_signed(x as i64 + dx, y as i64 + dy) {
                    residuals[n] = v - center - (gxc * dx as f64 + gyc * dy as f64) * res;
                    n += 1;
                }
            }
        }
        let r = &residuals[..n];
        let mean = r.iter().sum::<f64>() / n as f64;
        let var = r.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        (params.slope_gain * slope + params.roughness_gain * var.sqrt()).min(params.saturation)
    });
    Ok(CostMap::new(cost, res, c_max))
}

fn gradients(h: &Grid<f64>, res: f64) -> (Grid<f64>, Grid<f64>) {
    let (w, ht) = h.dims();
    let diff = |a: f64, b: f64, span: usize| (a - b) / (span as f64 * res);
    let gx = Grid::from_fn(w, ht, |x, y| {
        if w < 2 {
            return 0.0;
        }
        let (lo, hi) = (x.saturating_sub(1), (x + 1).min(w - 1));
        diff(h[(hi, y)], h[(lo, y)], hi - lo)
    });
    let gy = Grid::from_fn(w, ht, |x, y| {
        if ht < 2 {
            return 0.0;
        }
        let (lo, hi) = (y.saturating_sub(1), (y + 1).min(ht - 1));
        diff(h[(x, hi)], h[(x, lo)], hi - lo)
    });
    (gx, gy)
}

/// `C_SE = min(c_max, C_S + C_E)`.
pub fn aggregate(c_s: &CostMap, c_e: &CostMap) -> Result<CostMap, CostMapError> {
    aggregate_weighted(c_s, c_e, 1.0, 1.0)
}

pub fn aggregate_weighted(
    c_s: &CostMap,
    c_e: &CostMap,
    semantic_weight: f64,
    elevation_weight: f64,
) -> Result<CostMap, CostMapError> {
    c_s.check_same_shape(c_e)?;
    let data = c_s
        .cost
        .iter()
        .zip(c_e.cost.iter())
        .map(|(s, e)| (semantic_weight * s + elevation_weight * e).min(c_s.c_max))
        .collect();
    let grid = Grid::from_vec(c_s.width(), c_s.height(), data).expect("same shape");
    Ok(CostMap::new(grid, c_s.resolution, c_s.c_max))
}

/// Gaussian side penalty that induces a turn.
///
/// `Straight` and `Stop` return the map unchanged. For `Left` the peak sits
/// on the last (rightmost) column, for `Right` on column 0; each cell gains
/// `c_max·exp(-(x-μ)²/2σ²)` and is then capped at `c_max`.
pub fn apply_maneuver_penalty(c_se: &CostMap, maneuver: Maneuver, sigma: f64) -> CostMap {
    let mu = match maneuver {
        Maneuver::Left => (c_se.width() - 1) as f64,
        Maneuver::Right => 0.0,
        Maneuver::Straight | Maneuver::Stop => return c_se.clone(),
    };
    let c_max = c_se.c_max;
    let column_penalty: Vec<f64> = (0..c_se.width())
        .map(|x| {
            let d = x as f64 - mu;
            c_max * (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let cost = Grid::from_fn(c_se.width(), c_se.height(), |x, y| (c_se.get(x, y) + column_penalty[x]).min(c_max));
    CostMap {
        cost,
        resolution: c_se.resolution,
        c_max,
    }
}

/// Geometry-only baseline: `c_max` wherever any 8-neighbour differs in height
/// by more than `step_max`, otherwise 0. Terrain classes are ignored.
pub fn build_height_cost(
    obs: &Observation,
    step_max: f64,
    dims: (usize, usize),
    c_max: f64,
) -> Result<CostMap, CostMapError> {
    check_window(obs, dims)?;
    let h = &obs.elevation;
    let cost = Grid::from_fn(h.width(), h.height(), |x, y| {
        let c = h[(x, y)];
        let step = (-1i64..=1)
            .flat_map(|dy| (-1i64..=1).map(move |dx| (dx, dy)))
            .filter_map(|(dx, dy)| h.get_signed(x as i64 + dx, y as i64 + dy))
            .map(|v| (v - c).abs())
            .fold(0.0, f64::max);
        if step > step_max {
            c_max
        } else {
            0.0
        }
    });
    Ok(CostMap::new(cost, obs.window.resolution, c_max))
}

/// Which map the planner consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CostMapKind {
    #[default]
    SemanticElevation,
    HeightOnly,
}

/// Builds the configured planning map from one observation.
pub fn build_cost_map(obs: &Observation, params: &CostMapParams, kind: CostMapKind) -> Result<CostMap, CostMapError> {
    let dims = obs.semantics.dims();
    match kind {
        CostMapKind::SemanticElevation => {
            let c_s = build_semantic_cost(obs, &params.semantic, dims, params.c_max)?;
            let c_e = build_elevation_cost(obs, &params.elevation, dims, params.c_max)?;
            aggregate_weighted(&c_s, &c_e, params.semantic_weight, params.elevation_weight)
        }
        CostMapKind::HeightOnly => build_height_cost(obs, params.step_max, dims, params.c_max),
    }
}
