//! Round history and interval statistics.
//!
//! The learner only ever sees `observed_reward = r_t(a_t)`; everything here is
//! computed from [`RoundRecord`]s. Interval quantities are served from
//! [`IntervalStats`], a per-(context, action) aggregate of importance-weighted
//! reward mass plus context counts, so any policy's empirical reward or
//! variance on an interval costs `O(|X|)` once the aggregate exists.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::environment::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::policy::{
    argmax_lowest_index, check_nu, smooth_probs, ActionDistribution, ActionId, ContextId,
    PolicyClass, PolicyTable, SparsePolicyDistribution, WeightTable,
};

/// Closed interval of rounds `[start, end]`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: u64,
    pub end: u64,
}

impl Interval {
    pub fn new(start: u64, end: u64) -> Self {
        Self { start, end }
    }

    /// Number of rounds; zero when `end < start`.
    pub fn len(&self) -> u64 {
        if self.end < self.start {
            0
        } else {
            self.end - self.start + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, t: u64) -> bool {
        self.start <= t && t <= self.end
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

impl std::str::FromStr for Interval {
    type Err = Error;

    /// Parses `s:e`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::input(format!("interval `{s}` is not of the form s:e")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u64>()
                .map_err(|_| Error::input(format!("bad round `{v}` in interval `{s}`")))
        };
        let i = Interval::new(parse(a)?, parse(b)?);
        if i.is_empty() || i.start == 0 {
            return Err(Error::input(format!("interval `{s}` is empty")));
        }
        Ok(i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: u64,
    pub x: ContextId,
    pub a: ActionId,
    /// The action distribution `p_t` the action was drawn from.
    pub p: ActionDistribution,
    pub observed_reward: f64,
    pub epoch: u64,
    pub block: u32,
    /// Distinct replay indices active at `t` (`M_t`), ascending.
    pub replay_indices: Vec<u32>,
}

impl RoundRecord {
    pub fn validate(&self) -> Result<()> {
        let pa = self.p.probs().get(self.a.index()).copied().unwrap_or(0.0);
        if pa.is_nan() || pa <= 0.0 {
            return Err(Error::CorruptRecord {
                t: self.t,
                reason: format!("played action {} has probability {pa}", self.a),
            });
        }
        if !(0.0..=1.0).contains(&self.observed_reward) {
            return Err(Error::CorruptRecord {
                t: self.t,
                reason: format!("reward {} outside [0,1]", self.observed_reward),
            });
        }
        Ok(())
    }

    /// Probability of the played action.
    #[inline]
    pub fn p_played(&self) -> f64 {
        self.p.probs()[self.a.index()]
    }
}

/// `hat r_t(a) = r_t(a) / p_t(a) * 1{a_t = a}`.
pub fn ips_estimate(rec: &RoundRecord) -> Result<Vec<f64>> {
    let k = rec.p.k();
    let pa = rec.p.probs().get(rec.a.index()).copied().unwrap_or(0.0);
    if pa.is_nan() || pa <= 0.0 {
        return Err(Error::CorruptRecord {
            t: rec.t,
            reason: format!("cannot importance-weight action {} with probability {pa}", rec.a),
        });
    }
    let mut out = vec![0.0; k];
    out[rec.a.index()] = rec.observed_reward / pa;
    Ok(out)
}

/// Append-only, contiguous sequence of rounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    records: Vec<RoundRecord>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            records: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, rec: RoundRecord) -> Result<()> {
        rec.validate()?;
        if let Some(last) = self.records.last() {
            if rec.t != last.t + 1 {
                return Err(Error::CorruptRecord {
                    t: rec.t,
                    reason: format!("expected round {}", last.t + 1),
                });
            }
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first_round(&self) -> Option<u64> {
        self.records.first().map(|r| r.t)
    }

    pub fn last_round(&self) -> Option<u64> {
        self.records.last().map(|r| r.t)
    }

    pub fn get(&self, t: u64) -> Option<&RoundRecord> {
        let first = self.first_round()?;
        t.checked_sub(first)
            .and_then(|off| self.records.get(off as usize))
    }

    /// Records of a non-empty interval lying inside the stored range.
    pub fn slice(&self, i: Interval) -> Result<&[RoundRecord]> {
        if i.is_empty() {
            return Err(Error::input(format!("empty interval {i}")));
        }
        let (first, last) = match (self.first_round(), self.last_round()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::input("history is empty")),
        };
        if i.start < first || i.end > last {
            return Err(Error::input(format!(
                "interval {i} outside stored rounds [{first}, {last}]"
            )));
        }
        let lo = (i.start - first) as usize;
        let hi = (i.end - first) as usize;
        Ok(&self.records[lo..=hi])
    }

    /// CSV export with columns `t,epoch,block,replay_indices,x,a,p_a,reward`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,epoch,block,replay_indices,x,a,p_a,reward")?;
        for r in &self.records {
            let replays = r
                .replay_indices
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join("|");
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.t,
                r.epoch,
                r.block,
                replays,
                r.x,
                r.a,
                r.p_played(),
                r.observed_reward
            )?;
        }
        Ok(())
    }
}

/// Per-context smoothed action distribution `Q^nu(.|x)` for every context.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedProjection {
    k: usize,
    nu: f64,
    probs: Vec<f64>,
}

impl SmoothedProjection {
    pub fn new(q: &SparsePolicyDistribution, nu: f64, class: &PolicyClass) -> Result<Self> {
        check_nu(nu, class.k())?;
        let (nx, k) = (class.num_contexts(), class.k());
        let mut raw = vec![0.0; nx * k];
        for &(idx, w) in q.entries() {
            let pi = class
                .get(idx)
                .ok_or_else(|| Error::input(format!("policy {idx} not in class")))?;
            for x in 0..nx {
                raw[x * k + pi.action(x)] += w;
            }
        }
        let probs = raw.chunks(k).flat_map(|row| smooth_probs(row, nu)).collect();
        Ok(Self { k, nu, probs })
    }

    #[inline]
    pub fn get(&self, x: usize, a: usize) -> f64 {
        self.probs[x * self.k + a]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x * self.k..(x + 1) * self.k]
    }

    pub fn distribution(&self, x: ContextId) -> ActionDistribution {
        ActionDistribution::from_raw(self.row(x.index()).to_vec())
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_contexts(&self) -> usize {
        self.probs.len() / self.k
    }
}

/// Aggregated sufficient statistics of an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalStats {
    len: u64,
    /// `sum_{t : x_t = x} hat r_t(a)`
    ips_mass: WeightTable,
    context_counts: Vec<u64>,
}

impl IntervalStats {
    pub fn empty(num_contexts: usize, k: usize) -> Self {
        Self {
            len: 0,
            ips_mass: WeightTable::zeros(num_contexts, k),
            context_counts: vec![0; num_contexts],
        }
    }

    pub fn from_records(records: &[RoundRecord], num_contexts: usize, k: usize) -> Result<Self> {
        let mut s = Self::empty(num_contexts, k);
        for r in records {
            s.push(r)?;
        }
        Ok(s)
    }

    pub fn from_history(h: &History, i: Interval, class: &PolicyClass) -> Result<Self> {
        Self::from_records(h.slice(i)?, class.num_contexts(), class.k())
    }

    pub fn push(&mut self, r: &RoundRecord) -> Result<()> {
        let (x, a) = (r.x.index(), r.a.index());
        if x >= self.context_counts.len() || a >= self.ips_mass.k() {
            return Err(Error::CorruptRecord {
                t: r.t,
                reason: format!("(x={x}, a={a}) outside the statistics table"),
            });
        }
        let pa = r.p.probs()[a];
        if pa.is_nan() || pa <= 0.0 {
            return Err(Error::CorruptRecord {
                t: r.t,
                reason: "played action has zero probability".into(),
            });
        }
        self.ips_mass.add(x, a, r.observed_reward / pa);
        self.context_counts[x] += 1;
        self.len += 1;
        Ok(())
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn ips_mass(&self) -> &WeightTable {
        &self.ips_mass
    }

    pub fn context_counts(&self) -> &[u64] {
        &self.context_counts
    }

    pub fn num_contexts(&self) -> usize {
        self.context_counts.len()
    }

    pub fn k(&self) -> usize {
        self.ips_mass.k()
    }

    fn nonempty(&self) -> Result<f64> {
        if self.len == 0 {
            Err(Error::input("statistics over an empty interval"))
        } else {
            Ok(self.len as f64)
        }
    }

    /// `bar R_I(pi)`.
    pub fn avg_reward(&self, pi: &PolicyTable) -> Result<f64> {
        let n = self.nonempty()?;
        Ok((0..self.num_contexts())
            .map(|x| self.ips_mass.get(x, pi.action(x)))
            .sum::<f64>()
            / n)
    }

    /// `bar R_I(pi)` for every policy, in index order.
    pub fn avg_rewards(&self, class: &PolicyClass) -> Result<Vec<f64>> {
        let n = self.nonempty()?;
        Ok(class.values(&self.ips_mass).into_iter().map(|v| v / n).collect())
    }

    /// `(hat pi_I, bar R_I(hat pi_I))`, one oracle call on `{(x_t, hat r_t / |I|)}`.
    pub fn empirical_best(&self, class: &PolicyClass) -> Result<(usize, f64)> {
        let n = self.nonempty()?;
        let (idx, v) = class.argmax(&self.ips_mass);
        Ok((idx, v / n))
    }

    /// `hat Reg_I(pi) = bar R_I(hat pi_I) - bar R_I(pi)`.
    pub fn regret(&self, pi: &PolicyTable, class: &PolicyClass) -> Result<f64> {
        let (_, best) = self.empirical_best(class)?;
        Ok(best - self.avg_reward(pi)?)
    }

    /// `hat Reg_I` of every policy.
    pub fn regrets(&self, class: &PolicyClass) -> Result<Vec<f64>> {
        let values = self.avg_rewards(class)?;
        let (_, best) = argmax_lowest_index(&values);
        Ok(values.into_iter().map(|v| best - v).collect())
    }

    /// `hat V_I(Q, nu, pi) = (1/|I|) sum_t 1 / Q^nu(pi(x_t)|x_t)`.
    pub fn variance(&self, smoothed: &SmoothedProjection, pi: &PolicyTable) -> Result<f64> {
        let n = self.nonempty()?;
        Ok(self
            .context_counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(x, &c)| c as f64 / smoothed.get(x, pi.action(x)))
            .sum::<f64>()
            / n)
    }
}

pub fn empirical_avg_reward(h: &History, i: Interval, pi: &PolicyTable) -> Result<f64> {
    let recs = h.slice(i)?;
    let nx = pi.num_contexts();
    let k = recs[0].p.k();
    IntervalStats::from_records(recs, nx, k)?.avg_reward(pi)
}

pub fn empirical_regret(h: &History, i: Interval, pi: &PolicyTable, class: &PolicyClass) -> Result<f64> {
    IntervalStats::from_history(h, i, class)?.regret(pi, class)
}

pub fn empirical_variance(
    h: &History,
    i: Interval,
    q: &SparsePolicyDistribution,
    nu: f64,
    pi: &PolicyTable,
    class: &PolicyClass,
) -> Result<f64> {
    let smoothed = SmoothedProjection::new(q, nu, class)?;
    IntervalStats::from_history(h, i, class)?.variance(&smoothed, pi)
}

/// `R_I(pi) = (1/|I|) sum_{t in I} R_t(pi)` under the true environment.
pub fn expected_avg_reward(env: &EnvironmentSpec, i: Interval, pi: &PolicyTable) -> Result<f64> {
    Ok(expected_avg_rewards_of(env, i, std::slice::from_ref(pi))?[0])
}

fn expected_avg_rewards_of(env: &EnvironmentSpec, i: Interval, pis: &[PolicyTable]) -> Result<Vec<f64>> {
    if i.is_empty() {
        return Err(Error::input(format!("empty interval {i}")));
    }
    let mut acc = vec![0.0; pis.len()];
    for (law, count) in env.law_runs(i)? {
        for (slot, pi) in acc.iter_mut().zip(pis) {
            *slot += count as f64 * law.expected_reward(pi);
        }
    }
    let n = i.len() as f64;
    Ok(acc.into_iter().map(|v| v / n).collect())
}

/// `R_I` of every policy in the class.
pub fn expected_avg_rewards(env: &EnvironmentSpec, i: Interval, class: &PolicyClass) -> Result<Vec<f64>> {
    expected_avg_rewards_of(env, i, class.policies())
}

/// `Reg_I(pi) = R_I(pi*_I) - R_I(pi)`.
pub fn expected_regret(env: &EnvironmentSpec, i: Interval, pi: &PolicyTable, class: &PolicyClass) -> Result<f64> {
    let values = expected_avg_rewards(env, i, class)?;
    let (_, best) = argmax_lowest_index(&values);
    Ok(best - expected_avg_reward(env, i, pi)?)
}

/// `Reg_I` of every policy.
pub fn expected_regrets(env: &EnvironmentSpec, i: Interval, class: &PolicyClass) -> Result<Vec<f64>> {
    let values = expected_avg_rewards(env, i, class)?;
    let (_, best) = argmax_lowest_index(&values);
    Ok(values.into_iter().map(|v| best - v).collect())
}

/// `V_I(Q, nu, pi) = (1/|I|) sum_t E_{x ~ D_t^X}[1 / Q^nu(pi(x)|x)]`.
pub fn expected_variance(
    env: &EnvironmentSpec,
    i: Interval,
    q: &SparsePolicyDistribution,
    nu: f64,
    pi: &PolicyTable,
    class: &PolicyClass,
) -> Result<f64> {
    if i.is_empty() {
        return Err(Error::input(format!("empty interval {i}")));
    }
    let smoothed = SmoothedProjection::new(q, nu, class)?;
    let mut acc = 0.0;
    for (law, count) in env.law_runs(i)? {
        let per_round: f64 = law
            .context_probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(x, p)| p / smoothed.get(x, pi.action(x)))
            .sum();
        acc += count as f64 * per_round;
    }
    Ok(acc / i.len() as f64)
}
