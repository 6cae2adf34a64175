//! Recomputes run metrics from a trace CSV alone.

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceMetrics {
    pub success: bool,
    pub landmarks_reached: usize,
    pub ticks: u64,
}

#[derive(Deserialize)]
struct Row {
    tick: u64,
    phase: String,
    target_landmark: String,
}

/// `total_landmarks` is the plan length; a trace ending in `done` reached all of them.
pub fn metrics_from_csv(text: &str, total_landmarks: usize) -> Result<TraceMetrics, String> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut last: Option<Row> = None;
    for row in rd.deserialize::<Row>() {
        last = Some(row.map_err(|e| e.to_string())?);
    }
    let Some(last) = last else {
        return Ok(TraceMetrics {
            success: false,
            landmarks_reached: 0,
            ticks: 0,
        });
    };
    let success = last.phase == "done";
    let landmarks_reached = if success {
        total_landmarks
    } else {
        let idx = last.target_landmark.split(':').next().unwrap_or("");
        idx.parse().map_err(|_| format!("bad target_landmark `{}`", last.target_landmark))?
    };
    Ok(TraceMetrics {
        success,
        landmarks_reached,
        ticks: last.tick + 1,
    })
}
