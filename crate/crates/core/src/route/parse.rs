use super::{
    CandidateStep, CognitiveRouteDescription, Landmark, Orientation, Progress, RouteCandidate,
    RouteError, RouteStep,
};

const ARTICLES: &[&str] = &["a", "an", "the"];

/// Words that terminate a landmark noun phrase.
const BOUNDARY_WORDS: &[&str] = &[
    "then", "and", "after", "upon", "where", "which", "you", "on", "in", "until", "before",
    "turn", "stop", "go", "again", "there", "that", "when", "with", "near", "at", "by", "to",
    "is", "it", "will", "please", "straight",
];

const MAX_LANDMARK_WORDS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Event {
    Progress,
    Landmark(String),
    Orientation(Orientation),
}

pub(crate) fn sentences(text: &str) -> Vec<String> {
    text.split(['.', '!', '?', ';', '\n'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub(crate) fn tokenize(sentence: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in sentence.chars() {
        if c.is_alphanumeric() || c == '\'' || c == '-' {
            word.push(c);
        } else {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if c == ',' || c == ':' {
                out.push(",".to_string());
            }
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

fn noun_phrase(tokens: &[String], start: usize) -> (Option<String>, usize) {
    let mut end = start;
    while end < tokens.len()
        && end - start < MAX_LANDMARK_WORDS
        && tokens[end] != ","
        && !BOUNDARY_WORDS.contains(&tokens[end].as_str())
    {
        end += 1;
    }
    if end == start {
        (None, end)
    } else {
        (Some(tokens[start..end].join(" ")), end)
    }
}

fn is_article(tokens: &[String], i: usize) -> bool {
    tokens.get(i).is_some_and(|t| ARTICLES.contains(&t.as_str()))
}

/// Keyword scan of one tokenized sentence.
pub(crate) fn scan_tokens(tokens: &[String]) -> Vec<Event> {
    let mut events = Vec::new();
    let at = |i: usize| tokens.get(i).map(String::as_str);
    let mut i = 0;
    while i < tokens.len() {
        match (at(i), at(i + 1)) {
            (Some("go"), Some("straight")) => {
                events.push(Event::Progress);
                i += if at(i + 2) == Some("ahead") { 3 } else { 2 };
            }
            (Some("straight"), Some("ahead")) => {
                events.push(Event::Progress);
                i += 2;
            }
            (Some("find"), _) => {
                events.push(Event::Progress);
                i += 1;
                if is_article(tokens, i) {
                    let (np, end) = noun_phrase(tokens, i + 1);
                    if let Some(np) = np {
                        events.push(Event::Landmark(np));
                    }
                    i = end;
                }
            }
            (Some("turn"), Some("left")) => {
                events.push(Event::Orientation(Orientation::Left));
                i += 2;
            }
            (Some("turn"), Some("right")) => {
                events.push(Event::Orientation(Orientation::Right));
                i += 2;
            }
            (Some("stop"), _) => {
                events.push(Event::Orientation(Orientation::Stop));
                i += 1;
            }
            (Some("to" | "is"), _) if is_article(tokens, i + 1) => {
                let (np, end) = noun_phrase(tokens, i + 2);
                if let Some(np) = np {
                    events.push(Event::Landmark(np));
                }
                i = end.max(i + 2);
            }
            _ => i += 1,
        }
    }
    events
}

/// Extracted steps with the sentence index where each step began.
fn build_steps(text: &str) -> Vec<(CandidateStep, usize)> {
    let mut steps: Vec<(CandidateStep, usize)> = Vec::new();
    let mut current = CandidateStep::default();
    let mut current_sentence = 0;

    fn flush(
        steps: &mut Vec<(CandidateStep, usize)>,
        current: &mut CandidateStep,
        sentence: usize,
    ) {
        if !current.is_empty() {
            steps.push((std::mem::take(current), sentence));
        }
    }

    for (si, sentence) in sentences(text).iter().enumerate() {
        for event in scan_tokens(&tokenize(sentence)) {
            if current.is_empty() {
                current_sentence = si;
            }
            match event {
                Event::Progress => {
                    if current.progress.is_some() || current.landmark.is_some() {
                        flush(&mut steps, &mut current, current_sentence);
                        current_sentence = si;
                    }
                    current.progress = Some(Progress::Straight);
                }
                Event::Landmark(name) => {
                    if current.landmark.is_some() {
                        flush(&mut steps, &mut current, current_sentence);
                        current_sentence = si;
                    }
                    current.landmark = Landmark::new(&name).ok();
                }
                Event::Orientation(o) => {
                    current.orientation = Some(o);
                    flush(&mut steps, &mut current, current_sentence);
                }
            }
        }
    }
    flush(&mut steps, &mut current, current_sentence);
    steps
}

/// Lenient keyword extraction: every recognised component is kept, nothing
/// is inferred. Used to score unstructured descriptions.
pub fn extract_candidate(text: &str) -> RouteCandidate {
    RouteCandidate {
        steps: build_steps(text).into_iter().map(|(s, _)| s).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutcome {
    pub crd: CognitiveRouteDescription,
    /// The text ended at a landmark and the terminal stop was appended.
    pub implicit_stop: bool,
}

/// Parses keyword-structured route text into a validated CRD.
///
/// Sentence indices in errors are zero-based.
pub fn parse_crd_detailed(text: &str) -> Result<ParseOutcome, RouteError> {
    let malformed = |sentence: usize, reason: &str| RouteError::MalformedRoute {
        sentence,
        reason: reason.to_string(),
    };
    if text.trim().is_empty() {
        return Err(malformed(0, "empty instruction"));
    }
    let raw = build_steps(text);
    if raw.iter().all(|(s, _)| s.landmark.is_none()) {
        return Err(malformed(0, "no landmark found"));
    }

    let last = raw.len() - 1;
    let mut implicit_stop = false;
    let mut steps = Vec::with_capacity(raw.len());
    for (i, (step, sentence)) in raw.into_iter().enumerate() {
        let Some(landmark) = step.landmark else {
            return Err(malformed(sentence, "orientation without a landmark"));
        };
        let orientation = match step.orientation {
            Some(Orientation::Stop) if i != last => {
                return Err(malformed(sentence, "stop before the final landmark"));
            }
            Some(o @ (Orientation::Left | Orientation::Right)) if i == last => {
                return Err(malformed(sentence, &format!("no terminal stop (route ends with {o:?})")));
            }
            Some(o) => o,
            None if i == last => {
                implicit_stop = true;
                Orientation::Stop
            }
            None => return Err(malformed(sentence, "landmark without an orientation")),
        };
        steps.push(RouteStep {
            progress: step.progress.unwrap_or_default(),
            landmark,
            orientation,
        });
    }
    let crd = CognitiveRouteDescription::new(steps).map_err(|e| malformed(last, &e.to_string()))?;
    Ok(ParseOutcome { crd, implicit_stop })
}

pub fn parse_crd(text: &str) -> Result<CognitiveRouteDescription, RouteError> {
    parse_crd_detailed(text).map(|o| o.crd)
}
