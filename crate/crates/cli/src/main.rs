use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use wtw_core::client::{ClientConfig, ConverterMode, InstructionClient};
use wtw_core::harness::{run_suite, HarnessError, RunOptions, SuiteConfig, SuiteReport};
use wtw_core::planner::{measure_throughput, MppiParams};
use wtw_core::route::{extract_candidate, score_route, CognitiveRouteDescription, RouteCandidate};

#[derive(Parser)]
#[command(name = "wtw", version, about = "Language-instructed ground vehicle navigation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario suite and write report.json, CSV traces and optional SVG plots.
    Run {
        suite: PathBuf,
        /// Output directory (default: out/<suite name>).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
        /// Worker threads for independent runs.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Convert a free-form route instruction into a cognitive route description.
    Convert {
        urd: PathBuf,
        #[arg(long, default_value = "offline")]
        mode: ConverterMode,
        /// Replay fixture (replay mode) or recording target (remote mode).
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long)]
        base_url: Option<String>,
        #[arg(long)]
        model: Option<String>,
        /// Print the structured JSON form instead of canonical text.
        #[arg(long)]
        json: bool,
    },
    /// Score a candidate route (JSON or free text) against a reference route JSON.
    Score { candidate: PathBuf, reference: PathBuf },
    /// Measure MPPI planning rate on a synthetic cost map.
    BenchMppi {
        /// Rollouts per call (K).
        #[arg(long, visible_alias = "K", default_value_t = 5000)]
        samples: usize,
        /// Steps per rollout (T).
        #[arg(long, visible_alias = "T", default_value_t = 20)]
        horizon: usize,
        #[arg(long, default_value_t = 80)]
        cells: usize,
        #[arg(long, default_value_t = 200)]
        calls: usize,
        #[arg(long)]
        sequential: bool,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn print_summary(report: &SuiteReport) {
    println!("{:<28} {:<8} {:>5} {:>9} {:>9}", "scenario", "variant", "runs", "success", "progress");
    for a in &report.summary {
        println!(
            "{:<28} {:<8} {:>5} {:>9.3} {:>9.3}",
            a.scenario.as_deref().unwrap_or("-"),
            a.variant.as_str(),
            a.runs,
            a.success_rate,
            a.avg_progress
        );
    }
    for a in &report.overall {
        println!(
            "{:<28} {:<8} {:>5} {:>9.3} {:>9.3}",
            "(all)",
            a.variant.as_str(),
            a.runs,
            a.success_rate,
            a.avg_progress
        );
    }
    for s in report.scenarios.iter().filter(|s| s.conversion_error.is_some()) {
        eprintln!("conversion failed for {}: {}", s.name, s.conversion_error.as_deref().unwrap_or(""));
    }
}

fn run(suite: &Path, out: Option<PathBuf>, svg: bool, parallel: usize) -> Result<ExitCode> {
    let loaded = match SuiteConfig::load(suite) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    let out_dir = out.unwrap_or_else(|| PathBuf::from("out").join(&loaded.name));
    let opts = RunOptions {
        out_dir: Some(out_dir.clone()),
        svg,
        parallel,
    };
    let outcome = match run_suite(&loaded, &opts) {
        Ok(o) => o,
        Err(HarnessError::Config(e)) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(2));
        }
        Err(e) => return Err(e.into()),
    };
    print_summary(&outcome.report);
    println!("wrote {}", out_dir.join("report.json").display());
    Ok(if outcome.report.all_succeeded() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn convert(
    urd: &Path,
    mode: ConverterMode,
    fixture: Option<PathBuf>,
    base_url: Option<String>,
    model: Option<String>,
    json: bool,
) -> Result<ExitCode> {
    let text = read(urd)?.trim().to_string();
    let defaults = ClientConfig::default();
    let config = ClientConfig {
        mode,
        fixture_path: fixture,
        base_url: base_url.unwrap_or(defaults.base_url.clone()),
        model: model.unwrap_or(defaults.model.clone()),
        ..defaults
    };
    let mut client = InstructionClient::new(config)?;
    match client.convert(&text) {
        Ok(r) => {
            if json {
                println!("{}", r.crd().to_json());
            } else {
                println!("{}", r.crd_text());
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(raw) = e.raw_payload() {
                eprintln!("raw response: {raw}");
            }
            Ok(ExitCode::from(1))
        }
    }
}

fn load_candidate(path: &Path) -> Result<RouteCandidate> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    } else {
        Ok(extract_candidate(&text))
    }
}

fn score(candidate: &Path, reference: &Path) -> Result<ExitCode> {
    let cand = load_candidate(candidate)?;
    let reference = CognitiveRouteDescription::from_json(&read(reference)?)
        .with_context(|| format!("parsing {}", reference.display()))?;
    let s = score_route(&cand, reference.len());
    println!("{}", serde_json::to_string_pretty(&s)?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run { suite, out, svg, parallel } => run(&suite, out, svg, parallel),
        Cmd::Convert {
            urd,
            mode,
            fixture,
            base_url,
            model,
            json,
        } => convert(&urd, mode, fixture, base_url, model, json),
        Cmd::Score { candidate, reference } => score(&candidate, &reference),
        Cmd::BenchMppi {
            samples,
            horizon,
            cells,
            calls,
            sequential,
        } => {
            let params = MppiParams {
                samples,
                horizon,
                parallel: !sequential,
                ..MppiParams::default()
            };
            let r = measure_throughput(params, cells, calls);
            println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
            Ok(ExitCode::SUCCESS)
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
