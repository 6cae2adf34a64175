//! Route descriptions: the landmark/maneuver plan a vehicle executes.
//!
//! A cognitive route description (CRD) is an ordered list of steps, each
//! one "go straight" progress, an announced landmark, and a reorientation
//! (left, right, or the terminal stop). This module models that structure,
//! parses it from keyword-driven text, flattens it into a maneuver sequence
//! and scores partially complete descriptions.

pub mod corpus;
mod parse;
mod score;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{extract_candidate, parse_crd, parse_crd_detailed, ParseOutcome};
pub(crate) use parse::{sentences, tokenize};
pub use score::{score_route, CandidateStep, RouteCandidate, RouteScore};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RouteError {
    #[error("malformed route (sentence {sentence}): {reason}")]
    MalformedRoute { sentence: usize, reason: String },
    #[error("progress list has {progress} entries but orientation list has {orientation}")]
    LengthMismatch { progress: usize, orientation: usize },
    #[error("landmark name is empty")]
    EmptyLandmark,
    #[error("invalid route description: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Left,
    Right,
    Stop,
}

impl Orientation {
    /// Phrase used by the canonical rendering ("turn left", "stop", ...).
    pub fn phrase(self) -> &'static str {
        match self {
            Orientation::Left => "turn left",
            Orientation::Right => "turn right",
            Orientation::Stop => "stop",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Progress {
    #[default]
    Straight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Maneuver {
    Straight,
    Left,
    Right,
    Stop,
}

impl Maneuver {
    pub fn as_str(self) -> &'static str {
        match self {
            Maneuver::Straight => "straight",
            Maneuver::Left => "left",
            Maneuver::Right => "right",
            Maneuver::Stop => "stop",
        }
    }

    pub fn is_turn(self) -> bool {
        matches!(self, Maneuver::Left | Maneuver::Right)
    }
}

impl fmt::Display for Maneuver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<Progress> for Maneuver {
    fn from(p: Progress) -> Self {
        match p {
            Progress::Straight => Maneuver::Straight,
        }
    }
}

impl From<Orientation> for Maneuver {
    fn from(o: Orientation) -> Self {
        match o {
            Orientation::Left => Maneuver::Left,
            Orientation::Right => Maneuver::Right,
            Orientation::Stop => Maneuver::Stop,
        }
    }
}

/// Landmark name in canonical form: lowercase, trimmed, single spaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Landmark(String);

impl Landmark {
    pub fn new(name: &str) -> Result<Self, RouteError> {
        let normalized = name
            .split_whitespace()
            .map(str::to_lowercase)
            .collect::<Vec<_>>()
            .join(" ");
        if normalized.is_empty() {
            return Err(RouteError::EmptyLandmark);
        }
        Ok(Self(normalized))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Landmark {
    type Error = RouteError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Landmark::new(&s)
    }
}

impl From<Landmark> for String {
    fn from(l: Landmark) -> Self {
        l.0
    }
}

impl fmt::Display for Landmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteStep {
    pub progress: Progress,
    pub landmark: Landmark,
    pub orientation: Orientation,
}

impl RouteStep {
    pub fn new(landmark: Landmark, orientation: Orientation) -> Self {
        Self {
            progress: Progress::Straight,
            landmark,
            orientation,
        }
    }
}

/// A validated route description: at least one step, only the last one stops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCrd")]
pub struct CognitiveRouteDescription {
    steps: Vec<RouteStep>,
}

#[derive(Deserialize)]
struct RawCrd {
    steps: Vec<RouteStep>,
}

impl TryFrom<RawCrd> for CognitiveRouteDescription {
    type Error = RouteError;

    fn try_from(raw: RawCrd) -> Result<Self, Self::Error> {
        Self::new(raw.steps)
    }
}

impl CognitiveRouteDescription {
    pub fn new(steps: Vec<RouteStep>) -> Result<Self, RouteError> {
        let Some(last) = steps.last() else {
            return Err(RouteError::Invalid("route has no steps".into()));
        };
        if last.orientation != Orientation::Stop {
            return Err(RouteError::Invalid("last step must stop".into()));
        }
        if let Some(i) = steps[..steps.len() - 1]
            .iter()
            .position(|s| s.orientation == Orientation::Stop)
        {
            return Err(RouteError::Invalid(format!("step {i} stops before the end")));
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[RouteStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Renders one sentence per step: `Go straight to a {landmark}, then {orientation}.`
    pub fn to_canonical_text(&self) -> String {
        self.steps
            .iter()
            .map(|s| format!("Go straight to a {}, then {}.", s.landmark, s.orientation.phrase()))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("route serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, RouteError> {
        serde_json::from_str(s).map_err(|e| RouteError::Invalid(e.to_string()))
    }
}

/// Splits a CRD into its progress, landmark and orientation lists.
pub fn extract_lists(
    crd: &CognitiveRouteDescription,
) -> (Vec<Progress>, Vec<Landmark>, Vec<Orientation>) {
    let progress = crd.steps.iter().map(|s| s.progress).collect();
    let landmarks = crd.steps.iter().map(|s| s.landmark.clone()).collect();
    let orientations = crd.steps.iter().map(|s| s.orientation).collect();
    (progress, landmarks, orientations)
}

/// Interleaves progress and orientation lists: `[p1, o1, p2, o2, ...]`.
pub fn merge_maneuvers(
    progress: &[Progress],
    orientations: &[Orientation],
) -> Result<Vec<Maneuver>, RouteError> {
    if progress.len() != orientations.len() {
        return Err(RouteError::LengthMismatch {
            progress: progress.len(),
            orientation: orientations.len(),
        });
    }
    Ok(progress
        .iter()
        .zip(orientations)
        .flat_map(|(&p, &o)| [Maneuver::from(p), Maneuver::from(o)])
        .collect())
}

/// The executable plan: alternating maneuvers plus the landmark for each step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManeuverSequence {
    maneuvers: Vec<Maneuver>,
    landmarks: Vec<Landmark>,
}

impl ManeuverSequence {
    pub fn from_crd(crd: &CognitiveRouteDescription) -> Self {
        let (progress, landmarks, orientations) = extract_lists(crd);
        let maneuvers =
            merge_maneuvers(&progress, &orientations).expect("extracted lists are aligned");
        Self {
            maneuvers,
            landmarks,
        }
    }

    pub fn maneuvers(&self) -> &[Maneuver] {
        &self.maneuvers
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    /// Number of route steps (landmarks).
    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }

    /// Orientation maneuver that follows reaching landmark `i`.
    pub fn orientation_after(&self, i: usize) -> Option<Maneuver> {
        self.maneuvers.get(2 * i + 1).copied()
    }
}
