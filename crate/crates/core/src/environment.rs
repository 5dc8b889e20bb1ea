//! Discrete non-stationary data processes with exact ground truth.
//!
//! A round's law `D_t` is a categorical context distribution times, per
//! context, a product of independent Bernoulli rewards (one per action).
//! Environments are either piecewise-stationary (a list of segments) or a
//! linear drift between two laws. Because the outcome space is finite,
//! switch counts, total variation, expected rewards and optimal policies are
//! computed exactly by enumeration.

use std::borrow::Cow;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{History, Interval};
use crate::policy::{argmax_lowest_index, ContextId, PolicyClass, PolicyTable};
use crate::rng;

/// Largest K for which total variation is enumerated over `{0,1}^K`.
pub const K_ENUM: usize = 12;

const PROB_TOLERANCE: f64 = 1e-9;

/// Context distribution and per-(context, action) Bernoulli means of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLaw {
    pub context_probs: Vec<f64>,
    pub reward_means: Vec<Vec<f64>>,
}

impl RoundLaw {
    fn validate(&self, k: usize, contexts: usize) -> Result<()> {
        if self.context_probs.len() != contexts {
            return Err(Error::input(format!(
                "context_probs has {} entries, expected {contexts}",
                self.context_probs.len()
            )));
        }
        if self.context_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::input("context probabilities must lie in [0,1]"));
        }
        let total: f64 = self.context_probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::input(format!("context_probs sum to {total}")));
        }
        if self.reward_means.len() != contexts {
            return Err(Error::input(format!(
                "reward_means has {} rows, expected {contexts}",
                self.reward_means.len()
            )));
        }
        for row in &self.reward_means {
            if row.len() != k {
                return Err(Error::input(format!("reward_means row has {} entries, K={k}", row.len())));
            }
            if row.iter().any(|m| !(0.0..=1.0).contains(m)) {
                return Err(Error::input("reward means must lie in [0,1]"));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn mean(&self, x: usize, a: usize) -> f64 {
        self.reward_means[x][a]
    }

    /// `R(pi) = sum_x P(x) * mean(x, pi(x))`.
    pub fn expected_reward(&self, pi: &PolicyTable) -> f64 {
        self.context_probs
            .iter()
            .enumerate()
            .map(|(x, p)| p * self.mean(x, pi.action(x)))
            .sum()
    }

    /// Same joint law: equal context distribution, and equal means on every
    /// context of positive probability.
    pub fn same_distribution(&self, other: &RoundLaw) -> bool {
        self.context_probs == other.context_probs
            && self
                .context_probs
                .iter()
                .enumerate()
                .all(|(x, &p)| p == 0.0 || self.reward_means[x] == other.reward_means[x])
    }

    /// Exact L1 distance between the two joint laws over `X x {0,1}^K`.
    pub fn l1_distance(&self, other: &RoundLaw) -> Result<f64> {
        let k = self.reward_means.first().map_or(0, Vec::len);
        if k > K_ENUM {
            return Err(Error::Unsupported(format!(
                "total variation enumeration needs K <= {K_ENUM}, got {k}"
            )));
        }
        let mut total = 0.0;
        for x in 0..self.context_probs.len() {
            let (p, q) = (self.context_probs[x], other.context_probs[x]);
            if p == 0.0 && q == 0.0 {
                continue;
            }
            let (mp, mq) = (&self.reward_means[x], &other.reward_means[x]);
            if p == q && mp == mq {
                continue;
            }
            for outcome in 0u32..(1u32 << k) {
                let mut lp = p;
                let mut lq = q;
                for a in 0..k {
                    if outcome >> a & 1 == 1 {
                        lp *= mp[a];
                        lq *= mq[a];
                    } else {
                        lp *= 1.0 - mp[a];
                        lq *= 1.0 - mq[a];
                    }
                }
                total += (lp - lq).abs();
            }
        }
        Ok(total)
    }

    fn lerp(start: &RoundLaw, end: &RoundLaw, w: f64) -> RoundLaw {
        let mix = |a: f64, b: f64| a + (b - a) * w;
        RoundLaw {
            context_probs: start
                .context_probs
                .iter()
                .zip(&end.context_probs)
                .map(|(&a, &b)| mix(a, b))
                .collect(),
            reward_means: start
                .reward_means
                .iter()
                .zip(&end.reward_means)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(&a, &b)| mix(a, b)).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub length: u64,
    #[serde(flatten)]
    pub law: RoundLaw,
}

/// Per-round linear interpolation from `start` (round 1) to `end` (round T).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub start: RoundLaw,
    pub end: RoundLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    #[serde(rename = "T")]
    pub horizon: u64,
    #[serde(rename = "K")]
    pub k: usize,
    pub contexts: usize,
    #[serde(default)]
    pub segments: Vec<SegmentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftSpec>,
}

impl EnvironmentSpec {
    pub fn piecewise(k: usize, contexts: usize, segments: Vec<SegmentSpec>) -> Result<Self> {
        let env = Self {
            horizon: segments.iter().map(|s| s.length).sum(),
            k,
            contexts,
            segments,
            drift: None,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn stationary(horizon: u64, law: RoundLaw) -> Result<Self> {
        let k = law.reward_means.first().map_or(0, Vec::len);
        let contexts = law.context_probs.len();
        Self::piecewise(k, contexts, vec![SegmentSpec { length: horizon, law }])
    }

    pub fn drifting(horizon: u64, start: RoundLaw, end: RoundLaw) -> Result<Self> {
        let env = Self {
            horizon,
            k: start.reward_means.first().map_or(0, Vec::len),
            contexts: start.context_probs.len(),
            segments: Vec::new(),
            drift: Some(DriftSpec { start, end }),
        };
        env.validate()?;
        Ok(env)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Self = serde_json::from_str(text)?;
        env.validate()?;
        Ok(env)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("environment serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.contexts == 0 || self.horizon == 0 {
            return Err(Error::input("T, K and contexts must all be positive"));
        }
        match &self.drift {
            Some(d) => {
                if !self.segments.is_empty() {
                    return Err(Error::input("give either segments or drift, not both"));
                }
                d.start.validate(self.k, self.contexts)?;
                d.end.validate(self.k, self.contexts)?;
            }
            None => {
                if self.segments.is_empty() {
                    return Err(Error::input("environment needs segments or a drift spec"));
                }
                for s in &self.segments {
                    if s.length == 0 {
                        return Err(Error::input("segment lengths must be positive"));
                    }
                    s.law.validate(self.k, self.contexts)?;
                }
                let total: u64 = self.segments.iter().map(|s| s.length).sum();
                if total != self.horizon {
                    return Err(Error::input(format!(
                        "segment lengths sum to {total}, but T={}",
                        self.horizon
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_round(&self, t: u64) -> Result<()> {
        if (1..=self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(Error::input(format!("round {t} outside [1, {}]", self.horizon)))
        }
    }

    fn check_interval(&self, i: Interval) -> Result<()> {
        self.check_round(i.start)?;
        self.check_round(i.end)
    }

    /// Index of the segment containing round `t` (piecewise environments only).
    pub fn segment_index(&self, t: u64) -> Option<usize> {
        if self.drift.is_some() {
            return None;
        }
        let mut end = 0;
        for (idx, s) in self.segments.iter().enumerate() {
            end += s.length;
            if t <= end {
                return Some(idx);
            }
        }
        None
    }

    /// The law `D_t`, 1-based.
    pub fn law_at(&self, t: u64) -> Result<Cow<'_, RoundLaw>> {
        self.check_round(t)?;
        Ok(match &self.drift {
            Some(d) => {
                let w = if self.horizon == 1 {
                    0.0
                } else {
                    (t - 1) as f64 / (self.horizon - 1) as f64
                };
                Cow::Owned(RoundLaw::lerp(&d.start, &d.end, w))
            }
            None => Cow::Borrowed(&self.segments[self.segment_index(t).expect("t validated")].law),
        })
    }

    /// Maximal runs of rounds inside `i` that share one law, as `(law, count)`.
    pub fn law_runs(&self, i: Interval) -> Result<Vec<(Cow<'_, RoundLaw>, u64)>> {
        self.check_interval(i)?;
        if self.drift.is_some() {
            return (i.start..=i.end).map(|t| Ok((self.law_at(t)?, 1))).collect();
        }
        let mut runs = Vec::new();
        let mut seg_start = 1;
        for s in &self.segments {
            let seg_end = seg_start + s.length - 1;
            let lo = seg_start.max(i.start);
            let hi = seg_end.min(i.end);
            if lo <= hi {
                runs.push((Cow::Borrowed(&s.law), hi - lo + 1));
            }
            seg_start = seg_end + 1;
        }
        Ok(runs)
    }

    /// First rounds of every segment after the first whose law differs from
    /// its predecessor (the true change points).
    pub fn change_points(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut start = 1;
        for pair in self.segments.windows(2) {
            start += pair[0].length;
            if !pair[0].law.same_distribution(&pair[1].law) {
                out.push(start);
            }
        }
        out
    }

    /// Draws `(x_t, r_t)` from `D_t`; identical for identical `(seed, t)`.
    pub fn sample_round(&self, t: u64, seed: u64) -> Result<(ContextId, Vec<f64>)> {
        let law = self.law_at(t)?;
        let mut g = rng::environment_round(seed, t);
        let u: f64 = g.gen();
        let mut acc = 0.0;
        let mut x = None;
        for (i, &p) in law.context_probs.iter().enumerate() {
            acc += p;
            if u < acc {
                x = Some(i);
                break;
            }
        }
        let x = x.unwrap_or_else(|| {
            law.context_probs
                .iter()
                .rposition(|&p| p > 0.0)
                .unwrap_or(0)
        });
        let rewards = law.reward_means[x]
            .iter()
            .map(|&m| if g.gen::<f64>() < m { 1.0 } else { 0.0 })
            .collect();
        Ok((ContextId(x), rewards))
    }

    /// `R_t(pi)` exactly.
    pub fn expected_reward(&self, t: u64, pi: &PolicyTable) -> Result<f64> {
        Ok(self.law_at(t)?.expected_reward(pi))
    }
}

/// `(policy index, R_t(pi*))` with the lowest-index argmax.
pub fn optimal_policy_at(env: &EnvironmentSpec, t: u64, class: &PolicyClass) -> Result<(usize, f64)> {
    let law = env.law_at(t)?;
    Ok(optimal_for_law(&law, class))
}

pub(crate) fn optimal_for_law(law: &RoundLaw, class: &PolicyClass) -> (usize, f64) {
    let values: Vec<f64> = class.iter().map(|p| law.expected_reward(p)).collect();
    argmax_lowest_index(&values)
}

/// Precomputed per-step switch indicators and L1 distances.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    horizon: u64,
    // index t holds the comparison of D_t with D_{t-1}; entries 0 and 1 are unused
    step_l1: Vec<f64>,
    switched: Vec<bool>,
}

impl GroundTruth {
    pub fn new(env: &EnvironmentSpec) -> Result<Self> {
        if env.k > K_ENUM {
            return Err(Error::Unsupported(format!(
                "exact total variation needs K <= {K_ENUM}, got K={}",
                env.k
            )));
        }
        let n = env.horizon as usize;
        let mut step_l1 = vec![0.0; n + 1];
        let mut switched = vec![false; n + 1];
        match &env.drift {
            Some(_) => {
                let mut prev = env.law_at(1)?.into_owned();
                for t in 2..=env.horizon {
                    let cur = env.law_at(t)?.into_owned();
                    if !cur.same_distribution(&prev) {
                        switched[t as usize] = true;
                        step_l1[t as usize] = cur.l1_distance(&prev)?;
                    }
                    prev = cur;
                }
            }
            None => {
                let mut start = 1u64;
                for pair in env.segments.windows(2) {
                    start += pair[0].length;
                    if !pair[1].law.same_distribution(&pair[0].law) {
                        switched[start as usize] = true;
                        step_l1[start as usize] = pair[1].law.l1_distance(&pair[0].law)?;
                    }
                }
            }
        }
        Ok(Self {
            horizon: env.horizon,
            step_l1,
            switched,
        })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// `||D_t - D_{t-1}||_1`; zero for `t <= 1`.
    pub fn step_variation(&self, t: u64) -> f64 {
        if t <= 1 {
            0.0
        } else {
            self.step_l1[t as usize]
        }
    }

    fn check(&self, i: Interval) -> Result<()> {
        if i.start >= 1 && i.end <= self.horizon && i.start <= i.end {
            Ok(())
        } else {
            Err(Error::input(format!("interval {i} outside [1, {}]", self.horizon)))
        }
    }

    /// `S_I = 1 + #{tau in (s, s'] : D_tau != D_{tau-1}}`.
    pub fn switches(&self, i: Interval) -> Result<u64> {
        self.check(i)?;
        Ok(1 + (i.start + 1..=i.end)
            .filter(|&t| self.switched[t as usize])
            .count() as u64)
    }

    /// `Delta_I = sum_{tau in (s, s']} ||D_tau - D_{tau-1}||`, summed left to right.
    pub fn variation(&self, i: Interval) -> Result<f64> {
        self.check(i)?;
        Ok((i.start + 1..=i.end).map(|t| self.step_l1[t as usize]).sum())
    }

    pub fn whole(&self) -> Interval {
        Interval::new(1, self.horizon)
    }
}

/// `(S, Delta)` over the whole horizon.
pub fn nonstationarity_measures(env: &EnvironmentSpec) -> Result<(u64, f64)> {
    let gt = GroundTruth::new(env)?;
    Ok((gt.switches(gt.whole())?, gt.variation(gt.whole())?))
}

/// Cumulative dynamic-regret curves, one entry per round.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurves {
    /// `sum_s r_s(pi*_s(x_s)) - r_s(a_s)`.
    pub realized: Vec<f64>,
    /// `sum_s mean(s, x_s, pi*_s(x_s)) - E_{a ~ p_s}[mean(s, x_s, a)]`.
    pub pseudo: Vec<f64>,
}

pub fn dynamic_regret(
    history: &History,
    full_rewards: &[Vec<f64>],
    env: &EnvironmentSpec,
    class: &PolicyClass,
) -> Result<RegretCurves> {
    let n = env.horizon as usize;
    if history.len() != n || full_rewards.len() != n || history.first_round() != Some(1) {
        return Err(Error::input(format!(
            "history covers {} rounds and {} reward vectors were kept, but T={}",
            history.len(),
            full_rewards.len(),
            n
        )));
    }
    let mut realized = Vec::with_capacity(n);
    let mut pseudo = Vec::with_capacity(n);
    let (mut acc_r, mut acc_p) = (0.0, 0.0);
    let mut cached: Option<(u64, u64, usize)> = None; // (run start, run end, pi*)
    let mut runs = Vec::new();
    for (law, count) in env.law_runs(Interval::new(1, env.horizon))? {
        runs.push((law, count));
    }
    let mut run_idx = 0;
    let mut run_end = runs[0].1;
    let mut run_start = 1;
    for (rec, r) in history.records().iter().zip(full_rewards) {
        let t = rec.t;
        while t > run_end {
            run_idx += 1;
            run_start = run_end + 1;
            run_end += runs[run_idx].1;
        }
        let law = &runs[run_idx].0;
        let star = match cached {
            Some((s, e, idx)) if s == run_start && e == run_end => idx,
            _ => {
                let (idx, _) = optimal_for_law(law, class);
                cached = Some((run_start, run_end, idx));
                idx
            }
        };
        let x = rec.x.index();
        let best_action = class.policies()[star].action(x);
        acc_r += r[best_action] - r[rec.a.index()];
        let played: f64 = rec
            .p
            .probs()
            .iter()
            .enumerate()
            .map(|(a, p)| p * law.mean(x, a))
            .sum();
        acc_p += law.mean(x, best_action) - played;
        realized.push(acc_r);
        pseudo.push(acc_p);
    }
    Ok(RegretCurves { realized, pseudo })
}

/// Optimal policy of one stationary stretch, for ground-truth exports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentOptimum {
    pub start: u64,
    pub end: u64,
    pub optimal_policy: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthSummary {
    #[serde(rename = "S")]
    pub switches: u64,
    #[serde(rename = "Delta")]
    pub variation: f64,
    pub change_points: Vec<u64>,
    /// Per-segment optima; empty for drifting environments.
    pub segments: Vec<SegmentOptimum>,
}

pub fn ground_truth_summary(env: &EnvironmentSpec, class: &PolicyClass) -> Result<GroundTruthSummary> {
    let (switches, variation) = nonstationarity_measures(env)?;
    let mut segments = Vec::new();
    let mut start = 1;
    for s in &env.segments {
        let (optimal_policy, value) = optimal_for_law(&s.law, class);
        segments.push(SegmentOptimum {
            start,
            end: start + s.length - 1,
            optimal_policy,
            value,
        });
        start += s.length;
    }
    Ok(GroundTruthSummary {
        switches,
        variation,
        change_points: env.change_points(),
        segments,
    })
}
