//! Declarative world authoring: layered shapes painted onto a base terrain.

use serde::{Deserialize, Serialize};

use super::{SemanticClass, WorldError, WorldLandmark, WorldMap};
use crate::grid::Grid;
use crate::route::Landmark;

fn default_resolution() -> f64 {
    0.10
}

fn default_landmark_radius() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub width_m: f64,
    pub height_m: f64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default)]
    pub base_class: SemanticClass,
    #[serde(default)]
    pub base_elevation: f64,
    /// Painted in order; later layers win for class and add to elevation.
    #[serde(default)]
    pub layers: Vec<Layer>,
    #[serde(default)]
    pub landmarks: Vec<LandmarkSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    Rect { min: [f64; 2], max: [f64; 2] },
    Circle { center: [f64; 2], radius: f64 },
    /// Polyline corridor of the given total width.
    Path { points: Vec<[f64; 2]>, width: f64 },
}

impl Shape {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Shape::Rect { min, max } => p[0] >= min[0] && p[0] <= max[0] && p[1] >= min[1] && p[1] <= max[1],
            Shape::Circle { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) <= *radius,
            Shape::Path { points, width } => {
                let half = width / 2.0;
                match points.as_slice() {
                    [] => false,
                    [only] => (p[0] - only[0]).hypot(p[1] - only[1]) <= half,
                    _ => points.windows(2).any(|w| segment_distance(p, w[0], w[1]) <= half),
                }
            }
        }
    }
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default)]
    pub class: Option<SemanticClass>,
    /// Constant height added inside the shape.
    #[serde(default)]
    pub raise: Option<f64>,
    /// Paraboloid bump peaking at the centre (circles only).
    #[serde(default)]
    pub dome: Option<f64>,
    /// Planar ramp `gradient · (p - origin)` added inside the shape.
    #[serde(default)]
    pub slope: Option<[f64; 2]>,
    #[serde(default)]
    pub origin: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSpec {
    pub name: Landmark,
    pub position: [f64; 2],
    #[serde(default = "default_landmark_radius")]
    pub radius: f64,
}

impl WorldSpec {
    pub fn build(&self) -> Result<WorldMap, WorldError> {
        if !(self.resolution > 0.0 && self.width_m > 0.0 && self.height_m > 0.0) {
            return Err(WorldError::Invalid("world extent and resolution must be positive".into()));
        }
        let w = (self.width_m / self.resolution).round() as usize;
        let h = (self.height_m / self.resolution).round() as usize;
        let mut semantics = Grid::filled(w, h, self.base_class);
        let mut elevation = Grid::filled(w, h, self.base_elevation);
        for layer in &self.layers {
            for j in 0..h {
                for i in 0..w {
                    let p = [(i as f64 + 0.5) * self.resolution, (j as f64 + 0.5) * self.resolution];
                    if !layer.shape.contains(p) {
                        continue;
                    }
                    if let Some(c) = layer.class {
                        semantics[(i, j)] = c;
                    }
                    let mut dh = layer.raise.unwrap_or(0.0);
                    if let (Some(peak), Shape::Circle { center, radius }) = (layer.dome, &layer.shape) {
                        let d = (p[0] - center[0]).hypot(p[1] - center[1]) / radius;
                        dh += peak * (1.0 - d * d);
                    }
                    if let Some(g) = layer.slope {
                        let o = layer.origin.unwrap_or([0.0, 0.0]);
                        dh += g[0] * (p[0] - o[0]) + g[1] * (p[1] - o[1]);
                    }
                    elevation[(i, j)] += dh;
                }
            }
        }
        let landmarks = self
            .landmarks
            .iter()
            .map(|l| WorldLandmark {
                name: l.name.clone(),
                position: l.position,
                radius: l.radius,
            })
            .collect();
        WorldMap::new(self.resolution, semantics, elevation, landmarks)
    }
}
