use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environment::{dynamic_regret, ground_truth_summary, GroundTruthSummary, RegretCurves};
use crate::error::{Error, Result};
use crate::scheduler::{run, write_events_jsonl, Event, RunOutput, ScheduleParams, Variant};

use super::config::Experiment;

/// Per-(algorithm, seed) results, written as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub seed: u64,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub final_realized_regret: f64,
    pub final_pseudo_regret: f64,
    pub restarts: Vec<u64>,
    pub epochs: u64,
    pub replay_phases: u64,
    pub tests_run: u64,
    #[serde(rename = "S")]
    pub switches: u64,
    #[serde(rename = "Delta")]
    pub variation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanStderr {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let stderr = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmAggregate {
    pub algorithm: String,
    pub seeds: usize,
    pub realized_regret: MeanStderr,
    pub pseudo_regret: MeanStderr,
    pub restarts: MeanStderr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub params: ScheduleParams,
    pub ground_truth: GroundTruthSummary,
    pub algorithms: Vec<AlgorithmAggregate>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub output_dir: PathBuf,
    pub runs: Vec<RunSummary>,
    pub aggregate: Aggregate,
}

impl ExperimentReport {
    pub fn runs_of(&self, v: Variant) -> impl Iterator<Item = &RunSummary> {
        self.runs.iter().filter(move |r| r.algorithm == v.name())
    }

    pub fn aggregate_of(&self, v: Variant) -> Option<&AlgorithmAggregate> {
        self.aggregate.algorithms.iter().find(|a| a.algorithm == v.name())
    }
}

pub fn run_dir(root: &Path, v: Variant, seed: u64) -> PathBuf {
    root.join(v.name()).join(format!("seed_{seed}"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_regret_csv<W: Write>(curves: &RegretCurves, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,realized,pseudo")?;
    for (i, (r, p)) in curves.realized.iter().zip(&curves.pseudo).enumerate() {
        writeln!(out, "{},{},{}", i + 1, r, p)?;
    }
    Ok(())
}

fn summarize(exp: &Experiment, out: &RunOutput, curves: &RegretCurves, seed: u64, gt: &GroundTruthSummary) -> RunSummary {
    let count = |f: &dyn Fn(&Event) -> bool| out.events.iter().filter(|e| f(e)).count() as u64;
    RunSummary {
        algorithm: out.variant.name().to_string(),
        seed,
        horizon: exp.env.horizon,
        final_realized_regret: curves.realized.last().copied().unwrap_or(0.0),
        final_pseudo_regret: curves.pseudo.last().copied().unwrap_or(0.0),
        restarts: out.restarts(),
        epochs: count(&|e| matches!(e, Event::EpochStart { .. })),
        replay_phases: count(&|e| matches!(e, Event::ReplayStart { .. })),
        tests_run: count(&|e| matches!(e, Event::Test { .. })),
        switches: gt.switches,
        variation: gt.variation,
    }
}

fn run_one(exp: &Experiment, v: Variant, seed: u64, gt: &GroundTruthSummary, write: bool) -> Result<RunSummary> {
    let start = Instant::now();
    let out = run(&exp.env, &exp.class, &exp.params, v, seed)?;
    let curves = dynamic_regret(&out.history, &out.full_rewards, &exp.env, &exp.class)?;
    let summary = summarize(exp, &out, &curves, seed, gt);
    if write {
        let dir = run_dir(&exp.config.output_dir, v, seed);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let p = dir.join("rounds.csv");
        let mut f = create(&p)?;
        out.history.write_csv(&mut f).and_then(|_| f.flush()).map_err(|e| Error::io(&p, e))?;
        let p = dir.join("regret.csv");
        let mut f = create(&p)?;
        write_regret_csv(&curves, &mut f).and_then(|_| f.flush()).map_err(|e| Error::io(&p, e))?;
        let p = dir.join("events.jsonl");
        let mut f = create(&p)?;
        write_events_jsonl(&out.events, &mut f).and_then(|_| f.flush()).map_err(|e| Error::io(&p, e))?;
        write_json(&dir.join("summary.json"), &summary)?;
        let wall = serde_json::json!({ "wall_time_seconds": start.elapsed().as_secs_f64() });
        write_json(&dir.join("timing.json"), &wall)?;
    }
    Ok(summary)
}

fn aggregate(exp: &Experiment, runs: &[RunSummary], gt: GroundTruthSummary) -> Aggregate {
    let algorithms = exp
        .variants
        .iter()
        .map(|v| {
            let mine: Vec<&RunSummary> = runs.iter().filter(|r| r.algorithm == v.name()).collect();
            let col = |f: fn(&RunSummary) -> f64| MeanStderr::of(&mine.iter().map(|r| f(r)).collect::<Vec<_>>());
            AlgorithmAggregate {
                algorithm: v.name().to_string(),
                seeds: mine.len(),
                realized_regret: col(|r| r.final_realized_regret),
                pseudo_regret: col(|r| r.final_pseudo_regret),
                restarts: col(|r| r.restarts.len() as f64),
            }
        })
        .collect();
    Aggregate {
        params: exp.params,
        ground_truth: gt,
        algorithms,
    }
}

fn execute(exp: &Experiment, write: bool) -> Result<ExperimentReport> {
    let gt = ground_truth_summary(&exp.env, &exp.class)?;
    let jobs: Vec<(Variant, u64)> = exp
        .variants
        .iter()
        .flat_map(|&v| exp.config.seeds.iter().map(move |&s| (v, s)))
        .collect();
    let work = || -> Result<Vec<RunSummary>> {
        jobs.par_iter()
            .map(|&(v, s)| run_one(exp, v, s, &gt, write))
            .collect()
    };
    let workers = exp.config.workers.unwrap_or(1);
    let runs = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Unsupported(format!("cannot start {workers} workers: {e}")))?
        .install(work)?;
    let aggregate = aggregate(exp, &runs, gt);
    let root = exp.config.output_dir.clone();
    if write {
        write_json(&root.join("aggregate.json"), &aggregate)?;
    }
    Ok(ExperimentReport {
        output_dir: root,
        runs,
        aggregate,
    })
}

/// Runs every (algorithm, seed) pair and writes
/// `<out>/<algorithm>/seed_<n>/{rounds.csv, regret.csv, events.jsonl, summary.json, timing.json}`
/// plus `<out>/aggregate.json`.
pub fn run_experiment(exp: &Experiment) -> Result<ExperimentReport> {
    let root = &exp.config.output_dir;
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    execute(exp, true)
}

/// Same runs and summaries without touching the file system.
pub fn run_experiment_in_memory(exp: &Experiment) -> Result<ExperimentReport> {
    execute(exp, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr() {
        let m = MeanStderr::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(MeanStderr::of(&[7.0]).stderr, 0.0);
    }
}
