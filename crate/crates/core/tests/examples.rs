//! Every example runs and produces what its comments claim.
#![allow(dead_code)]

#[path = "../examples/experiment.rs"]
mod experiment;
#[path = "../examples/ground_truth.rs"]
mod ground_truth;
#[path = "../examples/ips_estimates.rs"]
mod ips_estimates;
#[path = "../examples/policy_oracle.rs"]
mod policy_oracle;
#[path = "../examples/replay_schedule.rs"]
mod replay_schedule;
#[path = "../examples/restart_tests.rs"]
mod restart_tests;
#[path = "../examples/simulate_flip.rs"]
mod simulate_flip;
#[path = "../examples/solve_op.rs"]
mod solve_op;

use replay_cb::{PolicyClass, Variant, Verdict};

#[test]
fn policy_oracle_picks_best_table() {
    let (best, value) = policy_oracle::run_example().unwrap();
    // context 0: 1 vs 0, context 1: 0 vs 0.5, context 2: -0.5 vs 0.25
    assert!((value - 1.75).abs() < 1e-12);
    let class = PolicyClass::all_tables(2, 3).unwrap();
    let actions: Vec<usize> = (0..3).map(|x| class.policies()[best].action(x)).collect();
    assert_eq!(actions, vec![0, 1, 1]);
}

#[test]
fn ips_estimates_by_hand() {
    let mut r = ips_estimates::run_example().unwrap();
    r.sort_by(f64::total_cmp);
    // (1.25 [x0 -> 0] + 2 [x1 either way]) / 4
    let expect = [0.5, 0.5, 0.8125, 0.8125];
    for (a, b) in r.iter().zip(expect) {
        assert!((a - b).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn solve_op_certifies() {
    let sol = solve_op::run_example().unwrap();
    assert!(sol.certificate.feasible);
    assert!(sol.certificate.regret_slack >= -1e-9);
}

#[test]
fn restart_tests_split_on_flip() {
    let (calm, alarm) = restart_tests::run_example().unwrap();
    assert_eq!(calm.verdict, Verdict::Pass);
    assert_eq!(alarm.verdict, Verdict::Fail);
    assert!(alarm.witness.is_some());
}

#[test]
fn replay_schedule_worked_numbers() {
    let p = replay_schedule::run_example().unwrap();
    assert_eq!(p.l, 230);
    assert!((p.c0 - 28.642).abs() < 1e-3);
}

#[test]
fn simulate_flip_learner_beats_ablation() {
    let res = simulate_flip::run_example().unwrap();
    let get = |v: Variant| res.iter().find(|r| r.0 == v).unwrap();
    let (ada, abl, oracle) = (get(Variant::AdaReplay), get(Variant::NoReplayNoTest), get(Variant::OracleRestart));
    assert!(ada.1 < abl.1, "{} vs {}", ada.1, abl.1);
    assert!(ada.2.iter().any(|&t| t > 10_000));
    assert!(abl.2.is_empty());
    assert_eq!(oracle.2.len(), 1);
}

#[test]
fn ground_truth_partition_tiles() {
    let r = ground_truth::run_example().unwrap();
    assert_eq!(r.intervals.first().unwrap().start, 1);
    assert_eq!(r.intervals.last().unwrap().end, 4000);
    assert_eq!(r.gamma, r.intervals.len());
    assert!(r.intervals.windows(2).all(|w| w[1].start == w[0].end + 1));
}

#[test]
fn experiment_writes_everything() {
    let dir = tempfile::tempdir().unwrap();
    let report = experiment::run_in(dir.path()).unwrap();
    assert_eq!(report.runs.len(), 12);
    assert_eq!(report.aggregate.algorithms.len(), 4);
    assert!(dir.path().join("out/aggregate.json").is_file());
}
