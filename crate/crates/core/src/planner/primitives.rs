//! Motion-primitive baseline: pick the cheapest of a fixed set of arcs.

use serde::{Deserialize, Serialize};

use super::Pose2;
use crate::costmap::CostMap;
use crate::world::{ControlInput, VehicleParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrimitiveParams {
    pub count: usize,
    pub speed: f64,
}

impl Default for PrimitiveParams {
    fn default() -> Self {
        Self {
            count: 15,
            speed: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub control: ControlInput,
    pub curvature: f64,
    pub poses: Vec<Pose2>,
}

/// Constant-curvature arcs of `horizon` steps of `dt`, ordered from hardest
/// left (index 0) to hardest right.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveLibrary {
    arcs: Vec<Arc>,
}

impl PrimitiveLibrary {
    pub fn new(params: &PrimitiveParams, horizon: usize, dt: f64, vehicle: &VehicleParams) -> Self {
        assert!(params.count >= 1, "library needs at least one arc");
        let arcs = (0..params.count)
            .map(|i| {
                let steering = if params.count == 1 {
                    0.0
                } else {
                    vehicle.steer_max * (1.0 - 2.0 * i as f64 / (params.count - 1) as f64)
                };
                Self::arc(ControlInput::new(steering, params.speed), horizon, dt, vehicle)
            })
            .collect();
        Self { arcs }
    }

    fn arc(control: ControlInput, horizon: usize, dt: f64, vehicle: &VehicleParams) -> Arc {
        let curvature = control.steering.tan() / vehicle.wheelbase;
        let mut pose = Pose2::default();
        let poses = (0..horizon)
            .map(|_| {
                let (sin, cos) = pose.yaw.sin_cos();
                pose.forward += control.speed * cos * dt;
                pose.left += control.speed * sin * dt;
                pose.yaw += control.speed * curvature * dt;
                pose
            })
            .collect();
        Arc { control, curvature, poses }
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }
}

pub fn arc_cost(map: &CostMap, arc: &Arc) -> f64 {
    arc.poses.iter().map(|p| map.cost_at(p.forward, p.left)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveChoice {
    pub index: usize,
    pub control: ControlInput,
    pub cost: f64,
}

/// Least-cost arc; ties go to the smallest |curvature|, then the lower index.
pub fn plan_primitives(map: &CostMap, library: &PrimitiveLibrary) -> PrimitiveChoice {
    let mut best: Option<PrimitiveChoice> = None;
    for (index, arc) in library.arcs().iter().enumerate() {
        let cost = arc_cost(map, arc);
        let better = match &best {
            None => true,
            Some(b) => {
                let b_curv = library.arcs()[b.index].curvature.abs();
                cost < b.cost || (cost == b.cost && arc.curvature.abs() < b_curv)
            }
        };
        if better {
            best = Some(PrimitiveChoice { index, control: arc.control, cost });
        }
    }
    best.expect("library is non-empty")
}
