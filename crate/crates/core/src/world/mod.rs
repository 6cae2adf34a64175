//! Deterministic 2.5-D world: terrain classes, elevation, landmarks, vehicle
//! kinematics and the noisy perception oracle.

mod kinematics;
mod observe;
mod spec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid;
use crate::route::Landmark;

pub use kinematics::{normalize_angle, step_vehicle, ControlInput, Stepped, VehicleParams, VehicleState};
pub use observe::{observe, DetectionEvent, FlipProbs, Observation, SensorNoiseModel};
pub use spec::{Layer, LandmarkSpec, Shape, WorldSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("position ({x:.3}, {y:.3}) is outside the world")]
    OutOfBounds { x: f64, y: f64 },
    #[error("invalid world: {0}")]
    Invalid(String),
}

/// Terrain navigability classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SemanticClass {
    #[default]
    Smooth,
    Rough,
    Bumpy,
    Forbidden,
    Obstacle,
    Background,
}

impl SemanticClass {
    pub const ALL: [SemanticClass; 6] = [
        SemanticClass::Smooth,
        SemanticClass::Rough,
        SemanticClass::Bumpy,
        SemanticClass::Forbidden,
        SemanticClass::Obstacle,
        SemanticClass::Background,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Ground-truth classes a vehicle must never enter.
    pub fn is_hazard(self) -> bool {
        matches!(self, SemanticClass::Forbidden | SemanticClass::Obstacle)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SemanticClass::Smooth => "smooth",
            SemanticClass::Rough => "rough",
            SemanticClass::Bumpy => "bumpy",
            SemanticClass::Forbidden => "forbidden",
            SemanticClass::Obstacle => "obstacle",
            SemanticClass::Background => "background",
        }
    }
}

/// A placed landmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldLandmark {
    pub name: Landmark,
    pub position: [f64; 2],
    pub radius: f64,
}

/// Immutable ground truth. Cell `(i, j)` covers
/// `[i·res, (i+1)·res) × [j·res, (j+1)·res)` in world meters.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    resolution: f64,
    semantics: Grid<SemanticClass>,
    elevation: Grid<f64>,
    landmarks: Vec<WorldLandmark>,
}

impl WorldMap {
    pub fn new(
        resolution: f64,
        semantics: Grid<SemanticClass>,
        elevation: Grid<f64>,
        landmarks: Vec<WorldLandmark>,
    ) -> Result<Self, WorldError> {
        if !(resolution > 0.0) {
            return Err(WorldError::Invalid("resolution must be positive".into()));
        }
        if semantics.dims() != elevation.dims() {
            return Err(WorldError::Invalid("semantic and elevation grids differ in size".into()));
        }
        if elevation.iter().any(|h| !h.is_finite()) {
            return Err(WorldError::Invalid("elevation must be finite".into()));
        }
        let map = Self {
            resolution,
            semantics,
            elevation,
            landmarks,
        };
        for lm in &map.landmarks {
            if !map.contains(lm.position[0], lm.position[1]) {
                return Err(WorldError::Invalid(format!("landmark {} lies outside the world", lm.name)));
            }
        }
        Ok(map)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn semantics(&self) -> &Grid<SemanticClass> {
        &self.semantics
    }

    pub fn elevation(&self) -> &Grid<f64> {
        &self.elevation
    }

    pub fn landmarks(&self) -> &[WorldLandmark] {
        &self.landmarks
    }

    pub fn width_m(&self) -> f64 {
        self.semantics.width() as f64 * self.resolution
    }

    pub fn height_m(&self) -> f64 {
        self.semantics.height() as f64 * self.resolution
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && x < self.width_m() && y < self.height_m()
    }

    #[inline]
    fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        self.contains(x, y)
            .then(|| ((x / self.resolution) as usize, (y / self.resolution) as usize))
    }

    pub fn class_at(&self, x: f64, y: f64) -> Option<SemanticClass> {
        self.cell_of(x, y).map(|c| self.semantics[c])
    }

    pub fn elevation_at(&self, x: f64, y: f64) -> Option<f64> {
        self.cell_of(x, y).map(|c| self.elevation[c])
    }

    /// First landmark with the given name.
    pub fn landmark(&self, name: &Landmark) -> Option<&WorldLandmark> {
        self.landmarks.iter().find(|l| &l.name == name)
    }
}

/// True iff the vehicle is strictly closer than `threshold` to `position`.
pub fn check_reached(state: &VehicleState, position: [f64; 2], threshold: f64) -> bool {
    debug_assert!(threshold > 0.0);
    (state.x - position[0]).hypot(state.y - position[1]) < threshold
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64, y: f64) -> VehicleState {
        VehicleState::new(x, y, 0.0, 0.0)
    }

    #[test]
    fn reach_is_strict() {
        assert!(check_reached(&at(1.0, 1.0), [1.0, 1.0], 0.5));
        assert!(!check_reached(&at(0.0, 0.0), [1.0, 0.0], 1.0));
        assert!(check_reached(&at(0.0, 0.0), [1.0 - 1e-9, 0.0], 1.0));
    }

    #[test]
    fn validation() {
        let s = Grid::filled(4, 4, SemanticClass::Smooth);
        let mut e = Grid::filled(4, 4, 0.0);
        assert!(WorldMap::new(0.1, s.clone(), Grid::filled(3, 4, 0.0), vec![]).is_err());
        e[(1, 1)] = f64::NAN;
        assert!(WorldMap::new(0.1, s.clone(), e, vec![]).is_err());
        let lm = WorldLandmark {
            name: Landmark::new("box").unwrap(),
            position: [0.5, 0.1],
            radius: 0.2,
        };
        assert!(WorldMap::new(0.1, s.clone(), Grid::filled(4, 4, 0.0), vec![lm.clone()]).is_err());
        let inside = WorldLandmark { position: [0.2, 0.1], ..lm };
        let w = WorldMap::new(0.1, s, Grid::filled(4, 4, 0.0), vec![inside]).unwrap();
        assert_eq!(w.class_at(0.35, 0.05), Some(SemanticClass::Smooth));
        assert_eq!(w.class_at(0.45, 0.05), None);
    }
}
