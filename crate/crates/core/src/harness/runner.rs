use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, LoadedScenario, LoadedSuite, Variant};
use super::svg::render_run_svg;
use crate::client::InstructionClient;
use crate::navigator::{run_episode, AdvanceEvent, EpisodeResult, TraceRow};
use crate::route::{CognitiveRouteDescription, ManeuverSequence};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub svg: bool,
    /// Worker threads; 0 or 1 runs sequentially on the calling thread.
    pub parallel: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub name: String,
    pub instruction: String,
    pub crd: Option<String>,
    pub landmarks: Vec<String>,
    pub conversion_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub variant: Variant,
    pub seed: u64,
    pub success: bool,
    pub landmarks_reached: usize,
    pub total_landmarks: usize,
    pub progress: f64,
    pub ticks: u64,
    pub failure: Option<String>,
    pub false_positive_advances: usize,
    pub events: Vec<AdvanceEvent>,
    pub trace_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scenario: Option<String>,
    pub variant: Variant,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub avg_progress: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub variants: Vec<Variant>,
    pub scenarios: Vec<ScenarioRecord>,
    pub runs: Vec<RunRecord>,
    /// Per scenario and variant.
    pub summary: Vec<Aggregate>,
    /// Per variant across all scenarios.
    pub overall: Vec<Aggregate>,
}

impl SuiteReport {
    pub fn all_succeeded(&self) -> bool {
        self.scenarios.iter().all(|s| s.conversion_error.is_none()) && self.runs.iter().all(|r| r.success)
    }

    pub fn overall_for(&self, variant: Variant) -> Option<&Aggregate> {
        self.overall.iter().find(|a| a.variant == variant)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Everything produced by one suite run, including full traces.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub report: SuiteReport,
    pub episodes: Vec<EpisodeResult>,
}

pub fn trace_file_name(scenario: &str, variant: Variant, seed: u64) -> String {
    format!("{scenario}__{}__seed{seed}.csv", variant.as_str())
}

pub fn write_trace_csv<W: std::io::Write>(rows: &[TraceRow], w: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn trace_to_csv(rows: &[TraceRow]) -> String {
    let mut buf = Vec::new();
    write_trace_csv(rows, &mut buf).expect("in-memory csv");
    String::from_utf8(buf).expect("csv is utf-8")
}

fn convert(scenario: &LoadedScenario) -> Result<CognitiveRouteDescription, String> {
    let mut client = InstructionClient::new(scenario.config.converter.clone()).map_err(|e| e.to_string())?;
    client
        .convert(&scenario.config.instruction)
        .map(|r| r.crd().clone())
        .map_err(|e| e.to_string())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn aggregate<'a>(scenario: Option<String>, variant: Variant, runs: impl Iterator<Item = &'a RunRecord>) -> Aggregate {
    let (mut n, mut ok, mut prog) = (0usize, 0usize, 0.0f64);
    for r in runs {
        n += 1;
        ok += r.success as usize;
        prog += r.progress;
    }
    let d = n.max(1) as f64;
    Aggregate {
        scenario,
        variant,
        runs: n,
        successes: ok,
        success_rate: ok as f64 / d,
        avg_progress: prog / d,
    }
}

struct Job<'a> {
    scenario: &'a LoadedScenario,
    plan: Option<&'a ManeuverSequence>,
    variant: Variant,
    seed: u64,
}

fn run_job(job: &Job<'_>, keep_snapshots: bool) -> EpisodeResult {
    match job.plan {
        Some(plan) => {
            let mut settings = job.scenario.settings(job.variant, job.seed);
            settings.keep_snapshots = keep_snapshots;
            run_episode(&job.scenario.world, plan, job.scenario.start_state(), &settings)
        }
        None => EpisodeResult {
            success: false,
            landmarks_reached: 0,
            total_landmarks: 1,
            ticks: 0,
            failure: None,
            false_positive_advances: 0,
            events: vec![],
            trace: vec![],
            snapshots: vec![],
        },
    }
}

/// Converts each instruction, runs every (scenario, variant, seed), and writes
/// `report.json`, per-run CSV traces and optional SVG plots under `out_dir`.
/// Results are identical for any thread count.
pub fn run_suite(suite: &LoadedSuite, opts: &RunOptions) -> Result<SuiteOutcome, HarnessError> {
    let conversions: Vec<Result<CognitiveRouteDescription, String>> = suite.scenarios.iter().map(convert).collect();
    let plans: Vec<Option<ManeuverSequence>> = conversions
        .iter()
        .map(|c| c.as_ref().ok().map(ManeuverSequence::from_crd))
        .collect();

    let mut jobs = Vec::new();
    for (si, sc) in suite.scenarios.iter().enumerate() {
        for &variant in &suite.variants {
            for &seed in &sc.config.seeds {
                jobs.push(Job {
                    scenario: sc,
                    plan: plans[si].as_ref(),
                    variant,
                    seed,
                });
            }
        }
    }

    let episodes: Vec<EpisodeResult> = if opts.parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.parallel)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        pool.install(|| jobs.par_iter().map(|j| run_job(j, opts.svg)).collect())
    } else {
        jobs.iter().map(|j| run_job(j, opts.svg)).collect()
    };

    let scenarios: Vec<ScenarioRecord> = suite
        .scenarios
        .iter()
        .zip(&conversions)
        .map(|(sc, conv)| ScenarioRecord {
            name: sc.config.name.clone(),
            instruction: sc.config.instruction.clone(),
            crd: conv.as_ref().ok().map(|c| c.to_canonical_text()),
            landmarks: conv
                .as_ref()
                .map(|c| c.steps().iter().map(|s| s.landmark.as_str().to_string()).collect())
                .unwrap_or_default(),
            conversion_error: conv.as_ref().err().cloned(),
        })
        .collect();

    let runs: Vec<RunRecord> = jobs
        .iter()
        .zip(&episodes)
        .map(|(job, ep)| {
            let converted = job.plan.is_some();
            RunRecord {
                scenario: job.scenario.config.name.clone(),
                variant: job.variant,
                seed: job.seed,
                success: ep.success,
                landmarks_reached: ep.landmarks_reached,
                total_landmarks: if converted { ep.total_landmarks } else { 0 },
                progress: if converted { ep.progress() } else { 0.0 },
                ticks: ep.ticks,
                failure: if converted {
                    ep.failure.map(|f| f.to_string())
                } else {
                    Some("conversion_failed".into())
                },
                false_positive_advances: ep.false_positive_advances,
                events: ep.events.clone(),
                trace_file: format!("runs/{}", trace_file_name(&job.scenario.config.name, job.variant, job.seed)),
            }
        })
        .collect();

    let mut summary = Vec::new();
    for sc in &suite.scenarios {
        for &variant in &suite.variants {
            let name = &sc.config.name;
            summary.push(aggregate(
                Some(name.clone()),
                variant,
                runs.iter().filter(|r| &r.scenario == name && r.variant == variant),
            ));
        }
    }
    let overall = suite
        .variants
        .iter()
        .map(|&v| aggregate(None, v, runs.iter().filter(|r| r.variant == v)))
        .collect();

    let report = SuiteReport {
        suite: suite.name.clone(),
        variants: suite.variants.clone(),
        scenarios,
        runs,
        summary,
        overall,
    };

    if let Some(out) = &opts.out_dir {
        let runs_dir = out.join("runs");
        fs::create_dir_all(&runs_dir).map_err(io_err(&runs_dir))?;
        for (rec, ep) in report.runs.iter().zip(&episodes) {
            let path = out.join(&rec.trace_file);
            let file = fs::File::create(&path).map_err(io_err(&path))?;
            write_trace_csv(&ep.trace, std::io::BufWriter::new(file))?;
        }
        if opts.svg {
            let svg_dir = out.join("svg");
            fs::create_dir_all(&svg_dir).map_err(io_err(&svg_dir))?;
            for (job, (rec, ep)) in jobs.iter().zip(report.runs.iter().zip(&episodes)) {
                let Some(plan) = job.plan else { continue };
                let title = format!("{} / {} / seed {}", rec.scenario, rec.variant.as_str(), rec.seed);
                let svg = render_run_svg(&job.scenario.world, plan.landmarks(), &job.scenario.start_state(), ep, &title);
                let path = svg_dir.join(trace_file_name(&rec.scenario, rec.variant, rec.seed).replace(".csv", ".svg"));
                fs::write(&path, svg).map_err(io_err(&path))?;
            }
        }
        let path = out.join("report.json");
        fs::write(&path, report.to_json()).map_err(io_err(&path))?;
    }

    Ok(SuiteOutcome { report, episodes })
}
