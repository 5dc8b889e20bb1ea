//! Exact non-stationarity measures, per-round optima and the interval
//! partition used in the analysis.

use replay_cb::harness::{partition_interval, PartitionReport};
use replay_cb::{nonstationarity_measures, optimal_policy_at, EnvironmentSpec, GroundTruth, Interval, PolicyClass, Result, RoundLaw};

pub fn run_example() -> Result<PartitionReport> {
    let start = RoundLaw {
        context_probs: vec![0.5, 0.5],
        reward_means: vec![vec![0.9, 0.1], vec![0.2, 0.8]],
    };
    let end = RoundLaw {
        context_probs: vec![0.5, 0.5],
        reward_means: vec![vec![0.1, 0.9], vec![0.8, 0.2]],
    };
    let env = EnvironmentSpec::drifting(4000, start, end)?;
    let class = PolicyClass::all_tables(2, 2)?;
    let (s, delta) = nonstationarity_measures(&env)?;
    println!("S = {s}, Delta = {delta:.4}");
    for t in [1, 2000, 4000] {
        let (pi, value) = optimal_policy_at(&env, t, &class)?;
        println!("t={t}: optimal policy {pi} with expected reward {value:.3}");
    }
    let gt = GroundTruth::new(&env)?;
    let report = partition_interval(&gt, Interval::new(1, 4000), 2, 2.0)?;
    println!("partition into {} pieces", report.gamma);
    for p in report.intervals.iter().take(5) {
        println!("  [{}, {}] Delta={:.4} threshold={:.4}", p.start, p.end, p.variation, p.threshold);
    }
    Ok(report)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
