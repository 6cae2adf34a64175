//! Language-instructed navigation for ground vehicles.
//!
//! Route text is parsed into a landmark/maneuver plan, a semantic elevation
//! cost map is built from robot-centric observations, turn maneuvers bias
//! that map, and an MPPI local planner drives the vehicle between landmarks.
//! Perception is provided by a deterministic 2.5-D world simulator.

pub mod client;
pub mod costmap;
pub mod frame;
pub mod grid;
pub mod harness;
pub mod navigator;
pub mod planner;
pub mod rng;
pub mod route;
pub mod world;

pub use costmap::{CostMap, CostMapKind, CostMapParams};
pub use frame::WindowSpec;
pub use grid::Grid;
pub use planner::{MppiParams, MppiPlanner};
pub use route::{
    extract_lists, merge_maneuvers, parse_crd, score_route, CognitiveRouteDescription, Landmark,
    Maneuver, ManeuverSequence, Orientation, Progress, RouteError, RouteScore, RouteStep,
};
pub use world::{ControlInput, SemanticClass, VehicleParams, VehicleState, WorldMap, WorldSpec};
