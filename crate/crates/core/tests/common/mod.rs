#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use replay_cb::{ActionDistribution, ContextId, EnvironmentSpec, PolicyClass, RoundLaw, RoundRecord, SegmentSpec};

/// Scales frozen after the pilot runs: tests thresholds and solver constant.
pub const TEST_SCALE: f64 = 1e-5;
pub const OP_SCALE: f64 = 1e-7;

pub fn base_law() -> RoundLaw {
    RoundLaw {
        context_probs: vec![1.0 / 3.0; 3],
        reward_means: vec![vec![0.8, 0.2], vec![0.3, 0.7], vec![0.6, 0.4]],
    }
}

pub fn flipped(law: &RoundLaw) -> RoundLaw {
    RoundLaw {
        context_probs: law.context_probs.clone(),
        reward_means: law.reward_means.iter().map(|r| r.iter().map(|m| 1.0 - m).collect()).collect(),
    }
}

/// `segments` equal stretches alternating between the base law and its flip.
pub fn alternating_env(horizon: u64, segments: u64) -> EnvironmentSpec {
    let (a, b) = (base_law(), flipped(&base_law()));
    let len = horizon / segments;
    let segs = (0..segments)
        .map(|s| SegmentSpec {
            length: if s + 1 == segments { horizon - len * (segments - 1) } else { len },
            law: if s % 2 == 0 { a.clone() } else { b.clone() },
        })
        .collect();
    EnvironmentSpec::piecewise(2, 3, segs).unwrap()
}

pub fn all_tables() -> PolicyClass {
    PolicyClass::all_tables(2, 3).unwrap()
}

/// Logged rounds with random logging distributions; rewards are Bernoulli
/// with mean `0.5 + tilt` on actions matching `(x + shift) % k`.
pub fn random_records(seed: u64, start: u64, n: u64, nx: usize, k: usize, shift: usize, tilt: f64) -> Vec<RoundRecord> {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut p: Vec<f64> = (0..k).map(|_| 0.1 + g.gen::<f64>()).collect();
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= s);
            let d = ActionDistribution::new(p).unwrap();
            let a = d.sample_with(g.gen());
            let x = g.gen_range(0..nx);
            let mean = if a.index() == (x + shift) % k { 0.5 + tilt } else { 0.5 - tilt };
            let r = if g.gen::<f64>() < mean { 1.0 } else { 0.0 };
            RoundRecord {
                t: start + i,
                x: ContextId(x),
                a,
                p: d,
                observed_reward: r,
                epoch: 1,
                block: 0,
                replay_indices: vec![],
            }
        })
        .collect()
}
