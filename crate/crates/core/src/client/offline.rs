//! Rule-based URD → CRD repair used when no conversion service is available.

use crate::route::{
    self, parse_crd, CandidateStep, CognitiveRouteDescription, Orientation, RouteError, RouteStep,
};

/// Multi-word phrase rewrites, applied longest-first on token boundaries.
const PHRASES: &[(&str, &str)] = &[
    ("keep going until you see", "go straight to"),
    ("make your way to", "go straight to"),
    ("that's the destination", "stop"),
    ("you have arrived", "stop"),
    ("you are done", "stop"),
    ("you're done", "stop"),
    ("that's it", "stop"),
    ("make a left turn", "turn left"),
    ("make a right turn", "turn right"),
    ("turn to the left", "turn left"),
    ("turn to the right", "turn right"),
    ("hang a left", "turn left"),
    ("hang a right", "turn right"),
    ("take a left", "turn left"),
    ("take a right", "turn right"),
    ("make a left", "turn left"),
    ("make a right", "turn right"),
    ("you will see", "there is"),
    ("you'll see", "there is"),
    ("keep going", "go straight"),
    ("go ahead", "go straight"),
    ("go forward", "go straight"),
    ("bear left", "turn left"),
    ("bear right", "turn right"),
    ("veer left", "turn left"),
    ("veer right", "turn right"),
    ("go left", "turn left"),
    ("go right", "turn right"),
    ("look for", "find"),
    ("go to", "go straight to"),
];

/// Single-word movement verbs that imply forward progress.
const PROGRESS_VERBS: &[&str] = &["head", "walk", "drive", "proceed", "continue", "move"];

fn rewrite_phrases(tokens: Vec<String>) -> Vec<String> {
    let table: Vec<(Vec<&str>, Vec<&str>)> = {
        let mut t: Vec<_> = PHRASES
            .iter()
            .map(|(from, to)| (from.split(' ').collect::<Vec<_>>(), to.split(' ').collect::<Vec<_>>()))
            .collect();
        t.sort_by_key(|(from, _)| std::cmp::Reverse(from.len()));
        t
    };
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    'outer: while i < tokens.len() {
        for (from, to) in &table {
            if tokens.len() - i >= from.len() && from.iter().zip(&tokens[i..]).all(|(a, b)| a == b) {
                out.extend(to.iter().map(|s| s.to_string()));
                i += from.len();
                continue 'outer;
            }
        }
        let t = &tokens[i];
        if PROGRESS_VERBS.contains(&t.as_str()) && tokens.get(i + 1).map(String::as_str) != Some("straight") {
            out.push("go".into());
            out.push("straight".into());
        } else if t == "toward" || t == "towards" {
            out.push("to".into());
        } else {
            out.push(t.clone());
        }
        i += 1;
    }
    out
}

/// "turn left at the chair" → "to the chair , turn left".
fn reorder_turn_at(tokens: Vec<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len() + 2);
    let mut i = 0;
    while i < tokens.len() {
        let is_turn = tokens[i] == "turn"
            && matches!(tokens.get(i + 1).map(String::as_str), Some("left" | "right"))
            && tokens.get(i + 2).map(String::as_str) == Some("at")
            && matches!(tokens.get(i + 3).map(String::as_str), Some("a" | "an" | "the"));
        if is_turn {
            let mut end = i + 4;
            while end < tokens.len() && tokens[end] != "," && !matches!(tokens[end].as_str(), "then" | "and" | "after") {
                end += 1;
            }
            out.push("to".into());
            out.extend(tokens[i + 3..end].iter().cloned());
            out.push(",".into());
            out.push("turn".into());
            out.push(tokens[i + 1].clone());
            i = end;
        } else {
            out.push(tokens[i].clone());
            i += 1;
        }
    }
    out
}

pub(crate) fn normalize(text: &str) -> String {
    route::sentences(text)
        .iter()
        .map(|s| {
            let tokens = route::tokenize(s);
            reorder_turn_at(rewrite_phrases(tokens)).join(" ")
        })
        .collect::<Vec<_>>()
        .join(". ")
}

/// Fills gaps the rules can infer: progress is always "straight", stray
/// turns attach to the preceding landmark, a trailing landmark stops.
fn repair(steps: Vec<CandidateStep>) -> Result<CognitiveRouteDescription, RouteError> {
    let mut merged: Vec<CandidateStep> = Vec::with_capacity(steps.len());
    for step in steps {
        if step.landmark.is_some() {
            merged.push(step);
        } else if let (Some(o), Some(prev)) = (step.orientation, merged.last_mut()) {
            if prev.orientation.is_none() {
                prev.orientation = Some(o);
            }
        }
    }
    if merged.is_empty() {
        return Err(RouteError::MalformedRoute {
            sentence: 0,
            reason: "no landmark found".into(),
        });
    }
    let last = merged.len() - 1;
    let mut out = Vec::with_capacity(merged.len());
    for (i, step) in merged.into_iter().enumerate() {
        let orientation = match step.orientation {
            None if i == last => Orientation::Stop,
            None => {
                return Err(RouteError::MalformedRoute {
                    sentence: i,
                    reason: "cannot infer the turn after this landmark".into(),
                })
            }
            Some(o) => o,
        };
        out.push(RouteStep::new(step.landmark.expect("filtered above"), orientation));
    }
    CognitiveRouteDescription::new(out).map_err(|e| RouteError::MalformedRoute {
        sentence: last,
        reason: e.to_string(),
    })
}

/// Converts free-form text to canonical CRD text without any network access.
pub fn convert_text(urd: &str) -> Result<String, RouteError> {
    if urd.trim().is_empty() {
        return Err(RouteError::MalformedRoute {
            sentence: 0,
            reason: "empty instruction".into(),
        });
    }
    let candidate = route::extract_candidate(&normalize(urd));
    let crd = repair(candidate.steps)?;
    let text = crd.to_canonical_text();
    debug_assert_eq!(parse_crd(&text).as_ref(), Ok(&crd));
    Ok(text)
}
