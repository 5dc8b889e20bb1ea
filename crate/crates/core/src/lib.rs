//! Oracle-efficient contextual bandits for non-stationary environments.
//!
//! The learner plays a sparse distribution over a finite policy class, found
//! by an argmax-oracle coordinate descent, and restarts itself when replayed
//! or freshly collected data disagrees too much with what it saw before.
//! Alongside the learner the crate ships seeded piecewise-stationary and
//! drifting environments with exact ground truth, and a small experiment
//! harness around them.
//!
//! ```
//! use replay_cb::{compute_schedule_params, run, EnvironmentSpec, PolicyClass, RoundLaw, Variant};
//!
//! let law = RoundLaw {
//!     context_probs: vec![0.5, 0.5],
//!     reward_means: vec![vec![0.8, 0.2], vec![0.3, 0.7]],
//! };
//! let env = EnvironmentSpec::stationary(2_000, law).unwrap();
//! let class = PolicyClass::all_tables(2, 2).unwrap();
//! let params = compute_schedule_params(env.horizon, env.k, class.len(), 0.05).unwrap();
//! let out = run(&env, &class, &params, Variant::AdaReplay, 7).unwrap();
//! assert_eq!(out.history.len(), 2_000);
//! ```

pub mod detection;
pub mod environment;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod op_solver;
pub mod policy;
pub mod rng;
pub mod scheduler;

pub use detection::{
    block_test, max_weighted_gap, replay_test, BlockReference, TestConstants, TestOutcome, Verdict, Witness,
};
pub use environment::{
    dynamic_regret, nonstationarity_measures, optimal_policy_at, EnvironmentSpec, GroundTruth, RegretCurves,
    RoundLaw, SegmentSpec,
};
pub use error::{Error, Result};
pub use estimator::{History, Interval, IntervalStats, RoundRecord, SmoothedProjection};
pub use op_solver::{check_op_feasibility, solve_op, solve_op_exhaustive, OpInstance, OpSolution};
pub use policy::{
    erm_oracle, ActionDistribution, ActionId, ContextId, PolicyClass, PolicyTable, SparsePolicyDistribution,
    WeightTable, WeightedExample,
};
pub use scheduler::{compute_schedule_params, run, Event, RunOutput, ScheduleParams, Variant};
