//! Landmark-to-landmark navigation state machine.

mod episode;

pub use episode::{
    default_tick_budget, run_episode, AdvanceEvent, EpisodeResult, EpisodeSettings, FailureReason, PlannerKind,
    Snapshot, TraceRow,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::costmap::CostMap;
use crate::planner::check_collision_line;
use crate::route::{Landmark, Maneuver, ManeuverSequence};
use crate::world::{normalize_angle, Observation, VehicleState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NavError {
    #[error("route plan has no landmarks")]
    EmptyPlan,
    #[error("route plan is exhausted")]
    PlanExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavParams {
    /// A detection closer than this (meters) counts as reaching the landmark.
    pub reach_threshold: f64,
    /// Ticks the turn penalty stays active after the reached landmark is last seen.
    pub buffer_ticks: u32,
    pub servo_gain: f64,
    pub cruise_speed: f64,
    /// Line-of-sight cost threshold; `None` means the map's `c_max`.
    pub collision_threshold: Option<f64>,
}

impl Default for NavParams {
    fn default() -> Self {
        Self {
            reach_threshold: 1.0,
            buffer_ticks: 40,
            servo_gain: 1.0,
            cruise_speed: 1.0,
            collision_threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum NavPhase {
    /// Target not in sight (or not reachable in a straight line); the local
    /// planner drives.
    Seeking,
    /// Target visible with a clear line; steer straight at it.
    Servoing,
    /// Just reached landmark `reached`; the turn bias stays on while it is
    /// still detected and for `remaining` more ticks after that.
    TurnBuffer { maneuver: Maneuver, remaining: u32, reached: usize },
    Done,
    Failed { reason: FailureReason },
}

impl NavPhase {
    pub fn name(&self) -> &'static str {
        match self {
            NavPhase::Seeking => "seeking",
            NavPhase::Servoing => "servoing",
            NavPhase::TurnBuffer { .. } => "turn_buffer",
            NavPhase::Done => "done",
            NavPhase::Failed { .. } => "failed",
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, NavPhase::Done | NavPhase::Failed { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    /// Hand control to the local planner.
    Plan,
    Servo { steering: f64, desired_heading: f64, bearing: f64, range: f64 },
    Halt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavDecision {
    /// Maneuver whose penalty shapes the cost map this tick.
    pub maneuver: Maneuver,
    pub command: Command,
    pub advanced: Option<Advance>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Advance {
    pub index: usize,
    pub landmark: Landmark,
    pub true_positive: bool,
}

#[derive(Debug, Clone)]
pub struct Navigator {
    plan: ManeuverSequence,
    params: NavParams,
    steer_max: f64,
    target: usize,
    phase: NavPhase,
}

impl Navigator {
    pub fn new(plan: ManeuverSequence, params: NavParams, steer_max: f64) -> Result<Self, NavError> {
        if plan.is_empty() {
            return Err(NavError::EmptyPlan);
        }
        Ok(Self {
            plan,
            params,
            steer_max,
            target: 0,
            phase: NavPhase::Seeking,
        })
    }

    pub fn phase(&self) -> &NavPhase {
        &self.phase
    }

    pub fn plan(&self) -> &ManeuverSequence {
        &self.plan
    }

    pub fn params(&self) -> &NavParams {
        &self.params
    }

    /// Index of the landmark being sought (equals the number reached so far).
    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target(&self) -> Option<&Landmark> {
        if self.phase == NavPhase::Done {
            return None;
        }
        self.plan.landmarks().get(self.target)
    }

    pub fn fail(&mut self, reason: FailureReason) {
        if !self.phase.is_terminal() {
            self.phase = NavPhase::Failed { reason };
        }
    }

    /// Maneuver currently shaping the cost map.
    pub fn active_maneuver(&self) -> Maneuver {
        match &self.phase {
            NavPhase::TurnBuffer { maneuver, .. } => *maneuver,
            NavPhase::Done => Maneuver::Stop,
            _ => self.plan.maneuvers().get(2 * self.target).copied().unwrap_or(Maneuver::Straight),
        }
    }

    fn advance(&mut self, true_positive: bool) -> Result<Advance, NavError> {
        let index = self.target;
        let landmark = self.plan.landmarks().get(index).cloned().ok_or(NavError::PlanExhausted)?;
        let orientation = self.plan.orientation_after(index).ok_or(NavError::PlanExhausted)?;
        self.target += 1;
        self.phase = if orientation == Maneuver::Stop {
            NavPhase::Done
        } else {
            NavPhase::TurnBuffer {
                maneuver: orientation,
                remaining: self.params.buffer_ticks,
                reached: index,
            }
        };
        Ok(Advance {
            index,
            landmark,
            true_positive,
        })
    }

    /// Consumes one observation and the unpenalized cost map; decides what drives
    /// the vehicle this tick.
    pub fn tick(&mut self, obs: &Observation, cost: &CostMap, state: &VehicleState) -> Result<NavDecision, NavError> {
        if self.phase.is_terminal() {
            return Ok(NavDecision {
                maneuver: self.active_maneuver(),
                command: Command::Halt,
                advanced: None,
            });
        }

        if let NavPhase::TurnBuffer { maneuver, remaining, reached } = self.phase.clone() {
            let reached_name = &self.plan.landmarks()[reached];
            let still_seen = obs.detection_of(reached_name).is_some();
            let remaining = if still_seen { self.params.buffer_ticks } else { remaining.saturating_sub(1) };
            if remaining > 0 {
                self.phase = NavPhase::TurnBuffer { maneuver, remaining, reached };
                return Ok(NavDecision {
                    maneuver,
                    command: Command::Plan,
                    advanced: None,
                });
            }
            self.phase = NavPhase::Seeking;
            return Ok(NavDecision {
                maneuver,
                command: Command::Plan,
                advanced: None,
            });
        }

        let target = self.plan.landmarks().get(self.target).cloned().ok_or(NavError::PlanExhausted)?;
        let Some(det) = obs.detection_of(&target).cloned() else {
            self.phase = NavPhase::Seeking;
            return Ok(NavDecision {
                maneuver: self.active_maneuver(),
                command: Command::Plan,
                advanced: None,
            });
        };
        let progress = self.active_maneuver();
        if det.range < self.params.reach_threshold {
            let adv = self.advance(det.is_true_positive)?;
            let command = if self.phase == NavPhase::Done { Command::Halt } else { Command::Plan };
            return Ok(NavDecision {
                maneuver: self.active_maneuver(),
                command,
                advanced: Some(adv),
            });
        }

        let threshold = self.params.collision_threshold.unwrap_or(cost.c_max());
        let end = (det.range * det.bearing.cos(), det.range * det.bearing.sin());
        if check_collision_line(cost, (0.0, 0.0), end, threshold) {
            self.phase = NavPhase::Seeking;
            return Ok(NavDecision {
                maneuver: progress,
                command: Command::Plan,
                advanced: None,
            });
        }
        self.phase = NavPhase::Servoing;
        let turn = self.params.servo_gain * det.bearing;
        Ok(NavDecision {
            maneuver: progress,
            command: Command::Servo {
                steering: turn.clamp(-self.steer_max, self.steer_max),
                desired_heading: normalize_angle(state.heading + turn),
                bearing: det.bearing,
                range: det.range,
            },
            advanced: None,
        })
    }
}
