//! Seeded generator of unstructured route descriptions (URDs).
//!
//! Each item pairs free-form text with the route it was written from. The
//! phrasing mixes keyword-structured clauses with colloquial synonyms,
//! dropped progress verbs, reordered turns and omitted stops, which is the
//! kind of variation the conversion step has to repair.

use super::{CognitiveRouteDescription, Landmark, Orientation, RouteStep};
use crate::rng;

const LANDMARKS: &[&str] = &[
    "trashcan", "chair", "box", "orange cone", "package", "white ball", "bench", "mailbox",
    "fountain", "lamp post", "red door", "bike rack", "statue", "vending machine",
];

const PROGRESS_TEMPLATES: &[&str] = &[
    "go straight to a {}",
    "go straight to the {}",
    "head to the {}",
    "head over to the {}",
    "walk over to the {}",
    "make your way to the {}",
    "keep going until you see the {}",
    "there is a {}",
    "you will see a {}",
    "drive past some trees toward the {}",
];

const LEFT_TEMPLATES: &[&str] = &[
    "then turn left",
    "hang a left",
    "take a left",
    "go left",
    "make a left turn",
    "bear left",
];

const RIGHT_TEMPLATES: &[&str] = &[
    "then turn right",
    "hang a right",
    "take a right",
    "go right",
    "make a right turn",
    "bear right",
];

const STOP_TEMPLATES: &[&str] = &[
    "and stop",
    "then stop",
    "you're done",
    "that's the destination",
    "",
];

const CONNECTORS: &[&str] = &[". ", ", then ", ". After that, ", " and ", ". Next, "];

#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub urd: String,
    pub reference: CognitiveRouteDescription,
}

fn pick<'a>(options: &[&'a str], key: &[u64]) -> &'a str {
    let i = (rng::uniform(key) * options.len() as f64) as usize;
    options[i.min(options.len() - 1)]
}

/// Generates `count` URDs deterministically from `seed`.
pub fn generate(seed: u64, count: usize) -> Vec<CorpusItem> {
    (0..count as u64)
        .map(|item| {
            let key = |field: u64, step: u64| [seed, rng::streams::CORPUS, item, field, step];
            let n = 1 + (rng::uniform(&key(0, 0)) * 4.0) as usize;
            let mut steps = Vec::with_capacity(n);
            let mut clauses = Vec::with_capacity(n);
            for i in 0..n as u64 {
                let name = pick(LANDMARKS, &key(1, i));
                let orientation = if i as usize + 1 == n {
                    Orientation::Stop
                } else if rng::uniform(&key(2, i)) < 0.5 {
                    Orientation::Left
                } else {
                    Orientation::Right
                };
                steps.push(RouteStep::new(Landmark::new(name).unwrap(), orientation));

                let approach = pick(PROGRESS_TEMPLATES, &key(3, i)).replace("{}", name);
                let turn = match orientation {
                    Orientation::Left => pick(LEFT_TEMPLATES, &key(4, i)),
                    Orientation::Right => pick(RIGHT_TEMPLATES, &key(4, i)),
                    Orientation::Stop => pick(STOP_TEMPLATES, &key(4, i)),
                };
                // Occasionally phrase the turn first: "take a left at the chair".
                let clause = if orientation != Orientation::Stop && rng::uniform(&key(5, i)) < 0.25 {
                    format!("{turn} at the {name}")
                } else if turn.is_empty() {
                    approach
                } else {
                    format!("{approach}, {turn}")
                };
                clauses.push(clause);
            }
            let mut urd = String::new();
            for (i, clause) in clauses.iter().enumerate() {
                if i > 0 {
                    urd.push_str(pick(CONNECTORS, &key(6, i as u64)));
                }
                urd.push_str(clause);
            }
            urd.push('.');
            let mut chars = urd.chars();
            let urd = match chars.next() {
                Some(c) => c.to_uppercase().chain(chars).collect(),
                None => urd,
            };
            CorpusItem {
                urd,
                reference: CognitiveRouteDescription::new(steps).expect("generated route is valid"),
            }
        })
        .collect()
}
