use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use replay_cb::harness::{
    emit_plot_data, excess_regret_diagnostic, locate_block, partition_for_env, run_experiment, Experiment,
    ExperimentConfig, Overrides,
};
use replay_cb::{run, Error, Interval, Result, Variant};

#[derive(Parser)]
#[command(name = "replay-cb", version, about = "Non-stationary contextual bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured algorithm and seed, writing artifacts to the output directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        constant_scale: Option<f64>,
        #[arg(long)]
        seed_offset: Option<u64>,
    },
    /// Ground-truth diagnostics on one interval.
    Diagnose {
        kind: DiagnoseKind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        interval: Interval,
    },
    /// Tidy CSV of every regret curve in an experiment directory.
    PlotData {
        #[arg(long)]
        experiment: PathBuf,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagnoseKind {
    Partition,
    Excess,
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            workers,
            constant_scale,
            seed_offset,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply(Overrides {
                workers,
                constant_scale,
                seed_offset,
            });
            cfg.check().map_err(|e| Error::Config {
                path: config.clone(),
                message: e.to_string(),
            })?;
            let exp = Experiment::load(cfg)?;
            let report = run_experiment(&exp)?;
            for a in &report.aggregate.algorithms {
                println!(
                    "{:<18} seeds={:<3} pseudo={:.1}±{:.1} realized={:.1}±{:.1} restarts={:.2}",
                    a.algorithm,
                    a.seeds,
                    a.pseudo_regret.mean,
                    a.pseudo_regret.stderr,
                    a.realized_regret.mean,
                    a.realized_regret.stderr,
                    a.restarts.mean
                );
            }
            println!("artifacts in {}", report.output_dir.display());
        }
        Command::Diagnose {
            kind,
            config,
            interval,
        } => {
            let exp = Experiment::load(ExperimentConfig::load(&config)?)?;
            match kind {
                DiagnoseKind::Partition => print_json(&partition_for_env(&exp.env, interval, &exp.params)?)?,
                DiagnoseKind::Excess => {
                    let seed = exp.config.seeds[0];
                    let out = run(&exp.env, &exp.class, &exp.params, Variant::AdaReplay, seed)?;
                    let (i, j) = locate_block(&out.history, interval)?;
                    let d = excess_regret_diagnostic(&exp.env, &out.history, interval, i, j, &exp.class, &exp.params)?;
                    print_json(&d)?;
                }
            }
        }
        Command::PlotData { experiment, out } => match out {
            Some(path) => {
                let f = std::fs::File::create(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
                let mut w = std::io::BufWriter::new(f);
                emit_plot_data(&experiment, &mut w)?;
                w.flush().map_err(|e| Error::Io { path, source: e })?;
            }
            None => {
                emit_plot_data(&experiment, std::io::stdout().lock())?;
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
