//! Run the learner and the no-restart ablation through an environment whose
//! rewards flip halfway, and compare dynamic regret.

use replay_cb::{
    compute_schedule_params, dynamic_regret, run, EnvironmentSpec, PolicyClass, Result, RoundLaw, SegmentSpec,
    Variant,
};

pub fn flip_environment(horizon: u64) -> Result<EnvironmentSpec> {
    let before = RoundLaw {
        context_probs: vec![1.0 / 3.0; 3],
        reward_means: vec![vec![0.8, 0.2], vec![0.3, 0.7], vec![0.6, 0.4]],
    };
    let after = RoundLaw {
        context_probs: before.context_probs.clone(),
        reward_means: before.reward_means.iter().map(|r| r.iter().map(|m| 1.0 - m).collect()).collect(),
    };
    let half = horizon / 2;
    EnvironmentSpec::piecewise(
        2,
        3,
        vec![
            SegmentSpec { length: half, law: before },
            SegmentSpec { length: horizon - half, law: after },
        ],
    )
}

pub fn run_example() -> Result<Vec<(Variant, f64, Vec<u64>)>> {
    let env = flip_environment(20_000)?;
    let class = PolicyClass::all_tables(2, 3)?;
    let params = compute_schedule_params(env.horizon, env.k, class.len(), 0.05)?
        .with_constant_scale(1e-5)?
        .with_op_constant_scale(Some(1e-7))?;
    let mut out = Vec::new();
    for v in [Variant::AdaReplay, Variant::NoReplayNoTest, Variant::OracleRestart] {
        let res = run(&env, &class, &params, v, 3)?;
        let curves = dynamic_regret(&res.history, &res.full_rewards, &env, &class)?;
        let regret = *curves.pseudo.last().unwrap();
        println!("{:<18} pseudo regret {regret:>8.1}  restarts at {:?}", v.name(), res.restarts());
        out.push((v, regret, res.restarts()));
    }
    Ok(out)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
