//! A complete experiment: environment and config files on disk, several
//! algorithms and seeds, artifacts, aggregate and plot data.

use std::path::Path;

use replay_cb::harness::{emit_plot_data, run_experiment, Experiment, ExperimentConfig, ExperimentReport};
use replay_cb::{EnvironmentSpec, Result, RoundLaw, SegmentSpec};

pub fn run_in(dir: &Path) -> Result<ExperimentReport> {
    let a = RoundLaw {
        context_probs: vec![0.5, 0.5],
        reward_means: vec![vec![0.9, 0.1], vec![0.1, 0.9]],
    };
    let b = RoundLaw {
        context_probs: vec![0.5, 0.5],
        reward_means: vec![vec![0.1, 0.9], vec![0.9, 0.1]],
    };
    let env = EnvironmentSpec::piecewise(
        2,
        2,
        vec![SegmentSpec { length: 5000, law: a }, SegmentSpec { length: 5000, law: b }],
    )?;
    let write = |name: &str, body: String| std::fs::write(dir.join(name), body).expect("writable directory");
    write("env.json", env.to_json());
    write(
        "experiment.json",
        r#"{
  "env": "env.json",
  "policies": "all_tables",
  "algorithms": ["ada_replay", "no_replay_no_test", "oracle_restart", "uniform_random"],
  "delta": 0.05,
  "constant_scale": 1e-5,
  "op_constant_scale": 1e-7,
  "seeds": [1, 2, 3],
  "output_dir": "out",
  "workers": 2
}
"#
        .to_string(),
    );
    let exp = Experiment::load(ExperimentConfig::load(&dir.join("experiment.json"))?)?;
    let report = run_experiment(&exp)?;
    for a in &report.aggregate.algorithms {
        println!(
            "{:<18} pseudo regret {:>8.1} ± {:<6.1} restarts {:.1}",
            a.algorithm, a.pseudo_regret.mean, a.pseudo_regret.stderr, a.restarts.mean
        );
    }
    let rows = emit_plot_data(&report.output_dir, std::io::sink())?;
    println!("{rows} plot rows under {}", report.output_dir.display());
    Ok(report)
}

pub fn run_example() -> Result<ExperimentReport> {
    let dir = std::env::temp_dir().join("replay-cb-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    run_in(&dir)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
