//! Importance-weighted reward estimates and interval statistics from a short
//! logged history.

use replay_cb::estimator::ips_estimate;
use replay_cb::{ActionDistribution, ActionId, ContextId, History, Interval, IntervalStats, PolicyClass, Result, RoundRecord};

pub fn run_example() -> Result<Vec<f64>> {
    let class = PolicyClass::all_tables(2, 2)?;
    let mut h = History::new();
    let logged = [(0, 0, 0.8, 1.0), (1, 1, 0.5, 1.0), (0, 1, 0.2, 0.0), (1, 0, 0.5, 1.0)];
    for (i, &(x, a, pa, r)) in logged.iter().enumerate() {
        let mut p = vec![1.0 - pa; 2];
        p[a] = pa;
        h.push(RoundRecord {
            t: i as u64 + 1,
            x: ContextId(x),
            a: ActionId(a),
            p: ActionDistribution::new(p)?,
            observed_reward: r,
            epoch: 1,
            block: 0,
            replay_indices: vec![],
        })?;
    }
    for rec in h.records() {
        println!("t={} hat r = {:?}", rec.t, ips_estimate(rec)?);
    }
    let stats = IntervalStats::from_history(&h, Interval::new(1, 4), &class)?;
    let rewards = stats.avg_rewards(&class)?;
    let (best, value) = stats.empirical_best(&class)?;
    for (idx, (pi, r)) in class.iter().zip(&rewards).enumerate() {
        println!("policy {idx} {:?}: avg reward {r:.3}, regret {:.3}", pi.actions(), value - r);
    }
    println!("empirical best: {best}");
    Ok(rewards)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
