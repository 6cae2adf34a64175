//! Closed-loop simulation of one navigation run.

use serde::{Deserialize, Serialize};

use super::{Command, NavParams, NavPhase, Navigator};
use crate::costmap::{apply_maneuver_penalty, build_cost_map, CostMap, CostMapKind, CostMapParams};
use crate::frame::WindowSpec;
use crate::planner::{plan_primitives, MppiParams, MppiPlanner, PrimitiveLibrary, PrimitiveParams};
use crate::rng;
use crate::route::{Maneuver, ManeuverSequence};
use crate::world::{observe, step_vehicle, ControlInput, SemanticClass, SensorNoiseModel, VehicleParams, VehicleState, WorldMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    #[default]
    Mppi,
    Primitives,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureReason {
    /// Drove onto forbidden terrain or into an obstacle.
    Hazard { class: SemanticClass },
    OutOfBounds,
    Timeout,
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureReason::Hazard { class } => write!(f, "hazard:{}", class.as_str()),
            FailureReason::OutOfBounds => f.write_str("out_of_bounds"),
            FailureReason::Timeout => f.write_str("timeout"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSettings {
    pub planner: PlannerKind,
    pub costmap_kind: CostMapKind,
    pub costmap: CostMapParams,
    pub mppi: MppiParams,
    pub primitives: PrimitiveParams,
    pub nav: NavParams,
    pub vehicle: VehicleParams,
    pub noise: SensorNoiseModel,
    pub window: WindowSpec,
    /// Simulation step (seconds).
    pub dt: f64,
    /// `None` derives the budget from the route length.
    pub tick_budget: Option<u64>,
    /// Seeds planner sampling; observation noise uses `noise.seed`.
    pub seed: u64,
    /// Keep the planning cost map at every landmark advance.
    pub keep_snapshots: bool,
}

impl Default for EpisodeSettings {
    fn default() -> Self {
        Self {
            planner: PlannerKind::Mppi,
            costmap_kind: CostMapKind::SemanticElevation,
            costmap: CostMapParams::default(),
            mppi: MppiParams::default(),
            primitives: PrimitiveParams::default(),
            nav: NavParams::default(),
            vehicle: VehicleParams::default(),
            noise: SensorNoiseModel::noiseless(),
            window: WindowSpec::default(),
            dt: 1.0 / 40.0,
            tick_budget: None,
            seed: 0,
            keep_snapshots: false,
        }
    }
}

/// One line of the per-run trace; state is taken after the tick's step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub tick: u64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub steering: f64,
    pub active_maneuver: Maneuver,
    pub phase: String,
    /// `"index:name"` of the landmark sought after this tick, empty once done.
    pub target_landmark: String,
    pub min_path_cost: Option<f64>,
    pub ess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvanceEvent {
    pub tick: u64,
    pub index: usize,
    pub landmark: String,
    pub true_positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub tick: u64,
    pub state: VehicleState,
    pub maneuver: Maneuver,
    pub cost: CostMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub success: bool,
    pub landmarks_reached: usize,
    pub total_landmarks: usize,
    pub ticks: u64,
    pub failure: Option<FailureReason>,
    pub false_positive_advances: usize,
    pub events: Vec<AdvanceEvent>,
    pub trace: Vec<TraceRow>,
    pub snapshots: Vec<Snapshot>,
}

impl EpisodeResult {
    pub fn progress(&self) -> f64 {
        self.landmarks_reached as f64 / self.total_landmarks as f64
    }
}

/// Four times the nominal driving time along start → landmarks (in plan order).
pub fn default_tick_budget(world: &WorldMap, plan: &ManeuverSequence, start: &VehicleState, cruise: f64, dt: f64) -> u64 {
    let mut dist = 0.0;
    let mut at = [start.x, start.y];
    for name in plan.landmarks() {
        if let Some(lm) = world.landmark(name) {
            dist += (lm.position[0] - at[0]).hypot(lm.position[1] - at[1]);
            at = lm.position;
        }
    }
    ((4.0 * dist / cruise / dt).ceil() as u64).max(1)
}

pub fn run_episode(world: &WorldMap, plan: &ManeuverSequence, start: VehicleState, settings: &EpisodeSettings) -> EpisodeResult {
    let mut nav = Navigator::new(plan.clone(), settings.nav, settings.vehicle.steer_max).expect("validated plan is non-empty");
    let mut mppi = MppiPlanner::new(
        MppiParams {
            target_speed: settings.nav.cruise_speed,
            ..settings.mppi
        },
        settings.vehicle,
    );
    let library = match settings.planner {
        PlannerKind::Primitives => Some(PrimitiveLibrary::new(
            &PrimitiveParams {
                speed: settings.nav.cruise_speed,
                ..settings.primitives
            },
            settings.mppi.horizon,
            settings.mppi.dt,
            &settings.vehicle,
        )),
        PlannerKind::Mppi => None,
    };
    let budget = settings
        .tick_budget
        .unwrap_or_else(|| default_tick_budget(world, plan, &start, settings.nav.cruise_speed, settings.dt));

    let mut state = start;
    let mut trace = Vec::new();
    let mut events = Vec::new();
    let mut snapshots = Vec::new();
    let mut tick = 0u64;

    while tick < budget && !nav.phase().is_terminal() {
        let obs = match observe(world, &state, &settings.noise, &settings.window, tick, nav.target()) {
            Ok(o) => o,
            Err(_) => {
                nav.fail(FailureReason::OutOfBounds);
                break;
            }
        };
        let c_se = build_cost_map(&obs, &settings.costmap, settings.costmap_kind).expect("observation matches window");
        let decision = nav.tick(&obs, &c_se, &state).expect("plan ends with stop");

        let mut min_path_cost = None;
        let mut ess = None;
        let mut planning_map = None;
        let control = match decision.command {
            Command::Halt => ControlInput::new(0.0, 0.0),
            Command::Servo { steering, .. } => ControlInput::new(steering, settings.nav.cruise_speed),
            Command::Plan => {
                let map = if decision.maneuver.is_turn() {
                    apply_maneuver_penalty(&c_se, decision.maneuver, settings.costmap.penalty_sigma)
                } else {
                    c_se.clone()
                };
                let control = match &library {
                    Some(lib) => {
                        let choice = plan_primitives(&map, lib);
                        min_path_cost = Some(choice.cost);
                        choice.control
                    }
                    None => {
                        let out = mppi.plan(&map, rng::hash_key(&[settings.seed, tick]));
                        min_path_cost = Some(out.summary.min_cost);
                        ess = Some(out.summary.ess);
                        out.control
                    }
                };
                planning_map = Some(map);
                control
            }
        };

        if let Some(adv) = &decision.advanced {
            events.push(AdvanceEvent {
                tick,
                index: adv.index,
                landmark: adv.landmark.as_str().to_string(),
                true_positive: adv.true_positive,
            });
            if settings.keep_snapshots {
                snapshots.push(Snapshot {
                    tick,
                    state,
                    maneuver: decision.maneuver,
                    cost: planning_map.clone().unwrap_or_else(|| c_se.clone()),
                });
            }
        }

        let stepped = step_vehicle(&state, control, settings.dt, &settings.vehicle);
        state = stepped.state;
        if !nav.phase().is_terminal() {
            match world.class_at(state.x, state.y) {
                None => nav.fail(FailureReason::OutOfBounds),
                Some(class) if class.is_hazard() => nav.fail(FailureReason::Hazard { class }),
                Some(_) => {}
            }
        }

        let target_landmark = match nav.target() {
            Some(l) => format!("{}:{}", nav.target_index(), l.as_str()),
            None => String::new(),
        };
        trace.push(TraceRow {
            tick,
            x: state.x,
            y: state.y,
            heading: state.heading,
            speed: state.speed,
            steering: settings.vehicle.clamp(control).steering,
            active_maneuver: decision.maneuver,
            phase: nav.phase().name().to_string(),
            target_landmark,
            min_path_cost,
            ess,
        });
        tick += 1;
    }
    if !nav.phase().is_terminal() {
        nav.fail(FailureReason::Timeout);
    }

    let failure = match nav.phase() {
        NavPhase::Failed { reason } => Some(*reason),
        _ => None,
    };
    EpisodeResult {
        success: *nav.phase() == NavPhase::Done,
        landmarks_reached: events.len(),
        total_landmarks: plan.len(),
        ticks: tick,
        failure,
        false_positive_advances: events.iter().filter(|e| !e.true_positive).count(),
        events,
        trace,
        snapshots,
    }
}
