//! Solve the low-regret, low-variance optimization problem on simulated data
//! and print its feasibility certificate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use replay_cb::op_solver::{solve_op_exhaustive, THEORY_C};
use replay_cb::{
    solve_op, ActionDistribution, ContextId, IntervalStats, OpInstance, OpSolution, PolicyClass, Result, RoundRecord,
};

pub fn run_example() -> Result<OpSolution> {
    let (k, contexts) = (3, 4);
    let class = PolicyClass::random(40, k, contexts, 11)?;
    let mut g = ChaCha8Rng::seed_from_u64(5);
    let mut stats = IntervalStats::empty(contexts, k);
    for t in 1..=300 {
        let x = g.gen_range(0..contexts);
        let p = ActionDistribution::uniform(k);
        let a = p.sample_with(g.gen());
        let mean = if a.index() == x % k { 0.8 } else { 0.3 };
        let r = if g.gen::<f64>() < mean { 1.0 } else { 0.0 };
        stats.push(&RoundRecord {
            t,
            x: ContextId(x),
            a,
            p,
            observed_reward: r,
            epoch: 1,
            block: 0,
            replay_indices: vec![],
        })?;
    }
    let nu = 0.05;
    // a small C trades exploration for regret much more aggressively
    let inst = OpInstance::new(stats, nu, &class, THEORY_C * 1e-7)?;
    let sol = solve_op(&inst)?;
    let check = solve_op_exhaustive(&inst)?;
    println!("oracle calls: {}, support: {:?}", sol.iterations, sol.q.entries());
    println!("exhaustive route support: {:?}", check.q.entries());
    let c = &sol.certificate;
    println!("regret constraint: {:.4} <= {:.4}", c.regret_lhs, c.regret_rhs);
    println!(
        "tightest variance constraint: policy {} slack {:.4}",
        c.worst_variance_policy, c.worst_variance_slack
    );
    Ok(sol)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
