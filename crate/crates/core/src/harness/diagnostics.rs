//! Offline diagnostics that need ground truth. None of this feeds the learner.

use serde::{Deserialize, Serialize};

use crate::environment::{EnvironmentSpec, GroundTruth};
use crate::error::{Error, Result};
use crate::estimator::{expected_regrets, History, Interval, IntervalStats};
use crate::policy::PolicyClass;
use crate::scheduler::ScheduleParams;

pub const THEORY_D3: f64 = 4.1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPiece {
    pub start: u64,
    pub end: u64,
    #[serde(rename = "Delta")]
    pub variation: f64,
    /// `sqrt(K C0 / |I|)`
    pub threshold: f64,
}

impl PartitionPiece {
    pub fn interval(&self) -> Interval {
        Interval::new(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub intervals: Vec<PartitionPiece>,
    #[serde(rename = "Gamma")]
    pub gamma: usize,
}

/// Greedy left-to-right split of `j`: close the current piece at `t` when
/// its variation is within `sqrt(K C0 / len)` but extending it by one round
/// would not be.
pub fn partition_interval(gt: &GroundTruth, j: Interval, k: usize, c0: f64) -> Result<PartitionReport> {
    if j.is_empty() || j.start == 0 || j.end > gt.horizon() {
        return Err(Error::input(format!("interval {j} outside [1, {}]", gt.horizon())));
    }
    let kc0 = k as f64 * c0;
    let bound = |len: u64| (kc0 / len as f64).sqrt();
    let mut cuts = Vec::new();
    let mut s = j.start;
    let mut delta = 0.0; // Delta over [s, t]
    let mut t = j.start;
    while t < j.end {
        let next = delta + gt.step_variation(t + 1);
        if delta <= bound(t - s + 1) && next > bound(t - s + 2) {
            cuts.push(Interval::new(s, t));
            s = t + 1;
            delta = 0.0;
        } else {
            delta = next;
        }
        t += 1;
    }
    // splitting at the last round would close the same final piece
    cuts.push(Interval::new(s, j.end));
    let intervals = cuts
        .into_iter()
        .map(|i| {
            Ok(PartitionPiece {
                start: i.start,
                end: i.end,
                variation: gt.variation(i)?,
                threshold: bound(i.len()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PartitionReport {
        gamma: intervals.len(),
        intervals,
    })
}

pub fn partition_for_env(env: &EnvironmentSpec, j: Interval, params: &ScheduleParams) -> Result<PartitionReport> {
    partition_interval(&GroundTruth::new(env)?, j, params.k, params.c0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessRegret {
    pub epoch: u64,
    pub block: u32,
    pub epsilon: f64,
    pub alpha: f64,
    /// `D3 * constant_scale * alpha`
    pub threshold: f64,
    pub flag: bool,
    /// Policy attaining `epsilon`.
    pub policy: usize,
}

/// Epoch start `tau_i` as recorded in the history.
fn epoch_start(h: &History, i: u64) -> Result<u64> {
    h.records()
        .iter()
        .find(|r| r.epoch == i)
        .map(|r| r.t)
        .ok_or_else(|| Error::input(format!("history has no epoch {i}")))
}

/// Epoch and block holding every round of `interval`, or an error if it straddles.
pub fn locate_block(h: &History, interval: Interval) -> Result<(u64, u32)> {
    let recs = h.slice(interval)?;
    let (i, j) = (recs[0].epoch, recs[0].block);
    if recs.iter().any(|r| r.epoch != i || r.block != j) {
        return Err(Error::input(format!("interval {interval} spans several blocks")));
    }
    Ok((i, j))
}

/// `eps_I = max_pi Reg_I(pi) - 8 hat Reg_{B_(j-1)}(pi)` against
/// `alpha_I = sqrt(2 K C0 / |I|) log2 T`. `interval` must lie in block
/// `j > 0` of epoch `i`.
pub fn excess_regret_diagnostic(
    env: &EnvironmentSpec,
    h: &History,
    interval: Interval,
    i: u64,
    j: u32,
    class: &PolicyClass,
    params: &ScheduleParams,
) -> Result<ExcessRegret> {
    if j == 0 {
        return Err(Error::input("excess regret is defined only for blocks j > 0"));
    }
    let tau = epoch_start(h, i)?;
    let block = params.block_interval(tau, j);
    if interval.is_empty() || interval.start < block.start || interval.end > block.end {
        return Err(Error::input(format!("{interval} is not inside block {j} {block} of epoch {i}")));
    }
    if h.slice(interval)?.iter().any(|r| r.epoch != i) {
        return Err(Error::input(format!("{interval} is not inside epoch {i}")));
    }
    let prior = params.cumulative_block(tau, j - 1);
    let empirical = IntervalStats::from_history(h, prior, class)?.regrets(class)?;
    let expected = expected_regrets(env, interval, class)?;
    let (policy, epsilon) = expected
        .iter()
        .zip(&empirical)
        .map(|(e, w)| e - 8.0 * w)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (idx, v)| if v > best.1 { (idx, v) } else { best });
    let alpha = (2.0 * params.k as f64 * params.c0 / interval.len() as f64).sqrt() * (params.horizon as f64).log2();
    let threshold = THEORY_D3 * params.constant_scale * alpha;
    Ok(ExcessRegret {
        epoch: i,
        block: j,
        epsilon,
        alpha,
        threshold,
        flag: epsilon > threshold,
        policy,
    })
}
