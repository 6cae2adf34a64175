use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{normalize_angle, SemanticClass, VehicleState, WorldError, WorldMap};
use crate::frame::WindowSpec;
use crate::grid::Grid;
use crate::rng::{self, streams};
use crate::route::Landmark;

/// Per-class probability that an observed cell is relabelled.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlipProbs(pub [f64; 6]);

impl FlipProbs {
    pub fn uniform(p: f64) -> Self {
        Self([p; 6])
    }

    pub fn get(&self, c: SemanticClass) -> f64 {
        self.0[c.index()]
    }
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum FlipRepr {
    Uniform(f64),
    PerClass(std::collections::BTreeMap<SemanticClass, f64>),
}

impl<'de> Deserialize<'de> for FlipProbs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match FlipRepr::deserialize(d)? {
            FlipRepr::Uniform(p) => FlipProbs::uniform(p),
            FlipRepr::PerClass(map) => {
                let mut probs = [0.0; 6];
                for (c, p) in map {
                    probs[c.index()] = p;
                }
                FlipProbs(probs)
            }
        })
    }
}

impl Serialize for FlipProbs {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.iter().all(|&p| p == self.0[0]) {
            FlipRepr::Uniform(self.0[0]).serialize(s)
        } else {
            FlipRepr::PerClass(SemanticClass::ALL.iter().map(|&c| (c, self.get(c))).collect()).serialize(s)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorNoiseModel {
    pub semantic_flip_prob: FlipProbs,
    pub elevation_sigma: f64,
    pub detect_fn_prob: f64,
    pub detect_fp_prob: f64,
    pub max_detect_range: f64,
    pub fov: f64,
    pub seed: u64,
}

impl Default for SensorNoiseModel {
    fn default() -> Self {
        Self {
            semantic_flip_prob: FlipProbs::default(),
            elevation_sigma: 0.0,
            detect_fn_prob: 0.0,
            detect_fp_prob: 0.0,
            max_detect_range: 8.0,
            fov: 87f64.to_radians(),
            seed: 0,
        }
    }
}

impl SensorNoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), String> {
        let probs = self
            .semantic_flip_prob
            .0
            .iter()
            .chain([&self.detect_fn_prob, &self.detect_fp_prob]);
        for p in probs {
            if !(0.0..=1.0).contains(p) {
                return Err(format!("probability {p} outside [0, 1]"));
            }
        }
        if !(self.elevation_sigma >= 0.0 && self.max_detect_range > 0.0 && self.fov > 0.0) {
            return Err("elevation_sigma must be >= 0, range and fov > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub landmark: Landmark,
    /// Relative to the vehicle heading, positive to the left.
    pub bearing: f64,
    pub range: f64,
    /// Ground truth, for post-hoc attribution only.
    pub is_true_positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub window: WindowSpec,
    pub semantics: Grid<SemanticClass>,
    pub elevation: Grid<f64>,
    pub detections: Vec<DetectionEvent>,
}

impl Observation {
    pub fn detection_of(&self, name: &Landmark) -> Option<&DetectionEvent> {
        self.detections.iter().find(|d| &d.landmark == name)
    }
}

/// Samples the robot-centric window and the landmark detector.
///
/// Every random draw is keyed by `(seed, tick, index, stream)`, so the result
/// depends only on the arguments. `target` is the landmark currently sought;
/// spurious detections carry its name.
pub fn observe(
    world: &WorldMap,
    state: &VehicleState,
    noise: &SensorNoiseModel,
    window: &WindowSpec,
    tick: u64,
    target: Option<&Landmark>,
) -> Result<Observation, WorldError> {
    if !world.contains(state.x, state.y) {
        return Err(WorldError::OutOfBounds { x: state.x, y: state.y });
    }
    let seed = noise.seed;
    let (sin, cos) = state.heading.sin_cos();
    let n_cells = window.width * window.height;
    let mut semantics = Vec::with_capacity(n_cells);
    let mut elevation = Vec::with_capacity(n_cells);
    for y in 0..window.height {
        for x in 0..window.width {
            let idx = (y * window.width + x) as u64;
            let (fwd, left) = window.cell_center(x, y);
            let wx = state.x + fwd * cos - left * sin;
            let wy = state.y + fwd * sin + left * cos;
            let (mut class, mut h) = match (world.class_at(wx, wy), world.elevation_at(wx, wy)) {
                (Some(c), Some(h)) => (c, h),
                _ => (SemanticClass::Background, 0.0),
            };
            let p_flip = noise.semantic_flip_prob.get(class);
            if p_flip > 0.0 && rng::uniform(&[seed, tick, idx, streams::SEMANTIC_FLIP]) < p_flip {
                let k = (rng::uniform(&[seed, tick, idx, streams::SEMANTIC_CLASS]) * 5.0) as usize;
                let others: Vec<_> = SemanticClass::ALL.into_iter().filter(|&c| c != class).collect();
                class = others[k.min(4)];
            }
            if noise.elevation_sigma > 0.0 {
                h += noise.elevation_sigma * rng::standard_normal(&[seed, tick, idx, streams::ELEVATION]);
            }
            semantics.push(class);
            elevation.push(h);
        }
    }

    let mut detections = Vec::new();
    for (li, lm) in world.landmarks().iter().enumerate() {
        let (dx, dy) = (lm.position[0] - state.x, lm.position[1] - state.y);
        let range = dx.hypot(dy);
        let bearing = normalize_angle(dy.atan2(dx) - state.heading);
        if range > noise.max_detect_range || bearing.abs() > noise.fov / 2.0 {
            continue;
        }
        if noise.detect_fn_prob > 0.0
            && rng::uniform(&[seed, tick, li as u64, streams::DETECT_MISS]) < noise.detect_fn_prob
        {
            continue;
        }
        detections.push(DetectionEvent {
            landmark: lm.name.clone(),
            bearing,
            range: range.max(1e-9),
            is_true_positive: true,
        });
    }
    if let Some(target) = target {
        if noise.detect_fp_prob > 0.0 && rng::uniform(&[seed, tick, 0, streams::FALSE_POSITIVE]) < noise.detect_fp_prob {
            let u_bearing = rng::uniform(&[seed, tick, 0, streams::FALSE_POSITIVE_BEARING]);
            let u_range = rng::uniform(&[seed, tick, 0, streams::FALSE_POSITIVE_RANGE]);
            detections.push(DetectionEvent {
                landmark: target.clone(),
                bearing: (u_bearing - 0.5) * noise.fov,
                range: (u_range * noise.max_detect_range).max(1e-6),
                is_true_positive: false,
            });
        }
    }

    Ok(Observation {
        window: *window,
        semantics: Grid::from_vec(window.width, window.height, semantics).expect("window sized"),
        elevation: Grid::from_vec(window.width, window.height, elevation).expect("window sized"),
        detections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{LandmarkSpec, Layer, Shape, WorldSpec};

    fn world() -> WorldMap {
        WorldSpec {
            width_m: 20.0,
            height_m: 20.0,
            resolution: 0.1,
            base_class: SemanticClass::Rough,
            base_elevation: 0.0,
            layers: vec![
                Layer {
                    shape: Shape::Rect { min: [0.0, 8.0], max: [20.0, 12.0] },
                    class: Some(SemanticClass::Smooth),
                    raise: None,
                    dome: None,
                    slope: Some([0.0, 0.05]),
                    origin: Some([0.0, 8.0]),
                },
                Layer {
                    shape: Shape::Circle { center: [12.0, 10.0], radius: 0.5 },
                    class: Some(SemanticClass::Obstacle),
                    raise: Some(0.4),
                    dome: None,
                    slope: None,
                    origin: None,
                },
            ],
            landmarks: vec![
                LandmarkSpec { name: Landmark::new("cone").unwrap(), position: [15.0, 10.0], radius: 0.3 },
                LandmarkSpec { name: Landmark::new("ball").unwrap(), position: [10.0, 15.0], radius: 0.3 },
                LandmarkSpec { name: Landmark::new("far").unwrap(), position: [19.5, 10.0], radius: 0.3 },
            ],
        }
        .build()
        .unwrap()
    }

    #[test]
    fn noiseless_matches_ground_truth() {
        let w = world();
        let state = VehicleState::new(10.0, 10.0, 0.3, 1.0);
        let win = WindowSpec::default();
        let obs = observe(&w, &state, &SensorNoiseModel::noiseless(), &win, 5, None).unwrap();
        let (sin, cos) = state.heading.sin_cos();
        for y in 0..win.height {
            for x in 0..win.width {
                let (f, l) = win.cell_center(x, y);
                let (wx, wy) = (state.x + f * cos - l * sin, state.y + f * sin + l * cos);
                assert_eq!(obs.semantics[(x, y)], w.class_at(wx, wy).unwrap());
                assert_eq!(obs.elevation[(x, y)], w.elevation_at(wx, wy).unwrap());
            }
        }
        // cone ahead within range; ball at bearing ~1.57-0.3 outside the 87° cone; far beyond 8 m.
        let names: Vec<_> = obs.detections.iter().map(|d| d.landmark.as_str()).collect();
        assert_eq!(names, ["cone"]);
        let d = &obs.detections[0];
        assert!((d.range - 5.0).abs() < 1e-12);
        assert!((d.bearing + 0.3).abs() < 1e-12);
    }

    #[test]
    fn window_outside_world_is_background() {
        let w = world();
        let obs = observe(&w, &VehicleState::new(0.5, 0.5, 0.0, 0.0), &SensorNoiseModel::noiseless(), &WindowSpec::default(), 0, None).unwrap();
        assert_eq!(obs.semantics[(79, 0)], SemanticClass::Background);
    }

    #[test]
    fn blind_detector() {
        let w = world();
        let noise = SensorNoiseModel { detect_fn_prob: 1.0, ..SensorNoiseModel::default() };
        for tick in 0..50 {
            let obs = observe(&w, &VehicleState::new(10.0, 10.0, 0.0, 1.0), &noise, &WindowSpec::default(), tick, None).unwrap();
            assert!(obs.detections.is_empty());
        }
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let w = world();
        let noise = SensorNoiseModel {
            semantic_flip_prob: FlipProbs::uniform(0.2),
            elevation_sigma: 0.05,
            detect_fn_prob: 0.5,
            detect_fp_prob: 0.5,
            seed: 99,
            ..SensorNoiseModel::default()
        };
        let s = VehicleState::new(9.0, 10.0, 0.1, 1.0);
        let target = Landmark::new("cone").unwrap();
        let a = observe(&w, &s, &noise, &WindowSpec::default(), 17, Some(&target)).unwrap();
        let b = observe(&w, &s, &noise, &WindowSpec::default(), 17, Some(&target)).unwrap();
        assert_eq!(a, b);
        let c = observe(&w, &s, &noise, &WindowSpec::default(), 18, Some(&target)).unwrap();
        assert_ne!(a.semantics, c.semantics);
        let truth = observe(&w, &s, &SensorNoiseModel::noiseless(), &WindowSpec::default(), 17, None).unwrap();
        let flipped = a.semantics.iter().zip(truth.semantics.iter()).filter(|(x, y)| x != y).count();
        let frac = flipped as f64 / 6400.0;
        assert!((frac - 0.2).abs() < 0.03, "flip fraction {frac}");
    }

    #[test]
    fn out_of_bounds() {
        let w = world();
        let r = observe(&w, &VehicleState::new(-1.0, 5.0, 0.0, 0.0), &SensorNoiseModel::default(), &WindowSpec::default(), 0, None);
        assert!(matches!(r, Err(WorldError::OutOfBounds { .. })));
    }
}
