//! The epoch/block/replay main loop.
//!
//! An epoch starting at `tau` is cut into blocks: block 0 is `[tau, tau+L-1]`
//! and block `j >= 1` is `[tau + 2^(j-1) L, tau + 2^j L - 1]`. Each block plays
//! a distribution `Q_j` solved on everything the epoch has seen so far, with
//! exploration floor `nu_j`. While in block `j`, short replay phases of an
//! earlier `Q_m` start at random; a finished replay phase and a finished
//! block are both tested against earlier data, and any failed test starts a
//! new epoch on the next round.

use std::collections::BTreeSet;
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detection::{block_test, replay_test, BlockReference, TestConstants, TestOutcome, Verdict, Witness};
use crate::environment::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::estimator::{History, Interval, IntervalStats, RoundRecord, SmoothedProjection};
use crate::op_solver::{solve_op, OpInstance, THEORY_C};
use crate::policy::{ActionDistribution, ContextId, PolicyClass, SparsePolicyDistribution};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    #[serde(rename = "T")]
    pub horizon: u64,
    #[serde(rename = "K")]
    pub k: usize,
    pub policy_count: usize,
    pub delta: f64,
    pub c0: f64,
    #[serde(rename = "L")]
    pub l: u64,
    /// Multiplies the test constants (and the solver constant unless overridden).
    pub constant_scale: f64,
    /// Multiplies the solver constant `C`; `None` means `constant_scale`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub op_constant_scale: Option<f64>,
}

/// `C0 = ln(8 T^3 |Pi|^2 / delta)` and `L = ceil(4 K C0)`.
pub fn compute_schedule_params(horizon: u64, k: usize, policy_count: usize, delta: f64) -> Result<ScheduleParams> {
    if horizon == 0 || k < 2 || policy_count == 0 || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::input(format!(
            "invalid schedule inputs T={horizon}, K={k}, |Pi|={policy_count}, delta={delta}"
        )));
    }
    let t = horizon as f64;
    let p = policy_count as f64;
    let c0 = (8.0f64).ln() + 3.0 * t.ln() + 2.0 * p.ln() - delta.ln();
    let l = (4.0 * k as f64 * c0).ceil() as u64;
    Ok(ScheduleParams {
        horizon,
        k,
        policy_count,
        delta,
        c0,
        l,
        constant_scale: 1.0,
        op_constant_scale: None,
    })
}

impl ScheduleParams {
    pub fn with_constant_scale(mut self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::input(format!("constant_scale={s} must be positive")));
        }
        self.constant_scale = s;
        Ok(self)
    }

    pub fn with_op_constant_scale(mut self, s: Option<f64>) -> Result<Self> {
        if let Some(v) = s {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::input(format!("op_constant_scale={v} must be positive")));
            }
        }
        self.op_constant_scale = s;
        Ok(self)
    }

    /// `nu_j = sqrt(C0 / (K 2^j L))`.
    pub fn nu(&self, j: u32) -> f64 {
        (self.c0 / (self.k as f64 * 2f64.powi(j as i32) * self.l as f64)).sqrt()
    }

    /// Rounds of block `j` of an epoch starting at `tau`.
    pub fn block_interval(&self, tau: u64, j: u32) -> Interval {
        let end = tau + (self.l << j) - 1;
        if j == 0 {
            Interval::new(tau, end)
        } else {
            Interval::new(tau + (self.l << (j - 1)), end)
        }
    }

    /// `B_j = [tau, tau + 2^j L - 1]`.
    pub fn cumulative_block(&self, tau: u64, j: u32) -> Interval {
        Interval::new(tau, tau + (self.l << j) - 1)
    }

    /// Per-round probability of starting a replay phase in block `j`.
    pub fn replay_probability(&self, j: u32) -> f64 {
        let sum = (0..j).map(|m| 2f64.powf(-(m as f64) / 2.0)).fold(0.0, |a, b| a + b);
        (sum * 2f64.powf(-(j as f64) / 2.0) / self.l as f64).min(1.0)
    }

    pub fn replay_length(&self, m: u32) -> u64 {
        self.l << m
    }

    pub fn op_c(&self) -> f64 {
        THEORY_C * self.op_constant_scale.unwrap_or(self.constant_scale)
    }

    pub fn test_constants(&self) -> Result<TestConstants> {
        TestConstants::new(self.k, self.horizon, self.constant_scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayPhase {
    pub m: u32,
    pub interval: Interval,
}

/// Step 1 of a round: flip the replay coin and, on heads, draw the index.
/// Returns `(m, 2^m L)`. The coin is drawn every round so the coin stream
/// advances identically whatever the outcome.
pub fn sample_replay_start<R: Rng>(
    j: u32,
    params: &ScheduleParams,
    coin: &mut R,
    index: &mut R,
) -> Option<(u32, u64)> {
    let u: f64 = coin.gen();
    if j == 0 || u >= params.replay_probability(j) {
        return None;
    }
    let weights: Vec<f64> = (0..j).map(|m| 2f64.powf(-(m as f64) / 2.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut v = index.gen::<f64>() * total;
    let mut m = j - 1;
    for (b, w) in weights.iter().enumerate() {
        if v < *w {
            m = b as u32;
            break;
        }
        v -= w;
    }
    Some((m, params.replay_length(m)))
}

/// `M_t`: distinct indices of the phases covering `t`, ascending.
pub fn active_replay_indices(s: &[ReplayPhase], t: u64) -> Vec<u32> {
    s.iter()
        .filter(|p| p.interval.contains(t))
        .map(|p| p.m)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// `p_t(.|x)`: `Q_j` smoothed with `nu_j` when `M_t` is empty, otherwise the
/// average of `Q_m` smoothed with `nu_m` over `m` in `M_t`. `qs[m]` must hold
/// `Q_m` already smoothed with `nu_m`.
pub fn action_distribution(qs: &[SmoothedProjection], j: u32, m_t: &[u32], x: ContextId) -> Result<ActionDistribution> {
    let get = |m: u32| {
        qs.get(m as usize)
            .ok_or_else(|| Error::State(format!("no distribution for block {m} (have {})", qs.len())))
    };
    if m_t.is_empty() {
        return Ok(get(j)?.distribution(x));
    }
    let k = get(m_t[0])?.k();
    let mut probs = vec![0.0; k];
    for &m in m_t {
        for (p, v) in probs.iter_mut().zip(get(m)?.row(x.index())) {
            *p += v;
        }
    }
    let n = m_t.len() as f64;
    probs.iter_mut().for_each(|p| *p /= n);
    Ok(ActionDistribution::from_raw(probs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// The full algorithm.
    AdaReplay,
    /// Same loop with no replay phases and no tests.
    NoReplayNoTest,
    /// No replays or tests, but a restart right before every true change point.
    OracleRestart,
    /// Uniform action every round.
    UniformRandom,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::AdaReplay,
        Variant::NoReplayNoTest,
        Variant::OracleRestart,
        Variant::UniformRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::AdaReplay => "ada_replay",
            Variant::NoReplayNoTest => "no_replay_no_test",
            Variant::OracleRestart => "oracle_restart",
            Variant::UniformRandom => "uniform_random",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == name)
            .ok_or_else(|| Error::input(format!("unknown algorithm `{name}`")))
    }

    fn replays(self) -> bool {
        self == Variant::AdaReplay
    }

    fn tests(self) -> bool {
        self == Variant::AdaReplay
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Replay,
    Block,
    /// Restart forced at a known change point.
    ChangePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    EpochStart {
        t: u64,
        i: u64,
    },
    BlockStart {
        t: u64,
        i: u64,
        j: u32,
        nu: f64,
        support: usize,
        solver_iterations: usize,
    },
    ReplayStart {
        t: u64,
        i: u64,
        j: u32,
        m: u32,
        end: u64,
    },
    ReplayEnd {
        t: u64,
        i: u64,
        j: u32,
        m: u32,
        start: u64,
    },
    Test {
        t: u64,
        kind: TestKind,
        i: u64,
        j: u32,
        m_or_k: Option<u32>,
        verdict: Verdict,
        #[serde(skip_serializing_if = "Option::is_none")]
        witness: Option<Witness>,
    },
    Restart {
        t: u64,
        i: u64,
        cause: TestKind,
    },
}

pub fn write_events_jsonl<W: Write>(events: &[Event], mut out: W) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub variant: Variant,
    pub history: History,
    pub events: Vec<Event>,
    /// Full reward vectors `r_t`, hidden from the learner, kept for regret accounting.
    pub full_rewards: Vec<Vec<f64>>,
}

impl RunOutput {
    pub fn restarts(&self) -> Vec<u64> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Restart { t, .. } => Some(*t),
                _ => None,
            })
            .collect()
    }
}

#[derive(Serialize)]
struct StateDump<'a> {
    t: u64,
    epoch: u64,
    tau: u64,
    block: u32,
    replay_set: &'a [ReplayPhase],
    p: &'a [f64],
    nu: f64,
}

struct Epoch {
    i: u64,
    tau: u64,
    j: u32,
    /// `Q_m` for `m = 0..=j`, unsmoothed and smoothed with `nu_m`.
    qs: Vec<SparsePolicyDistribution>,
    smoothed: Vec<SmoothedProjection>,
    /// Statistics of `B_0 ..= B_(j-1)`.
    snapshots: Vec<IntervalStats>,
    acc: IntervalStats,
    replays: Vec<ReplayPhase>,
}

struct Runner<'a> {
    env: &'a EnvironmentSpec,
    class: &'a PolicyClass,
    params: ScheduleParams,
    consts: TestConstants,
    variant: Variant,
    events: Vec<Event>,
    history: History,
}

impl<'a> Runner<'a> {
    fn open_epoch(&mut self, i: u64, tau: u64) -> Result<Epoch> {
        self.events.push(Event::EpochStart { t: tau, i });
        let q0 = SparsePolicyDistribution::point_mass(0);
        let nu0 = self.params.nu(0);
        let s0 = SmoothedProjection::new(&q0, nu0, self.class)?;
        self.events.push(Event::BlockStart {
            t: tau,
            i,
            j: 0,
            nu: nu0,
            support: 1,
            solver_iterations: 0,
        });
        Ok(Epoch {
            i,
            tau,
            j: 0,
            qs: vec![q0],
            smoothed: vec![s0],
            snapshots: Vec::new(),
            acc: IntervalStats::empty(self.class.num_contexts(), self.class.k()),
            replays: Vec::new(),
        })
    }

    /// Closes block `j` and opens `j+1` starting at round `t`.
    fn advance_block(&mut self, ep: &mut Epoch, t: u64) -> Result<()> {
        ep.snapshots.push(ep.acc.clone());
        ep.j += 1;
        let nu = self.params.nu(ep.j);
        let inst = OpInstance::new(ep.acc.clone(), nu, self.class, self.params.op_c())?;
        let sol = solve_op(&inst)?;
        self.events.push(Event::BlockStart {
            t,
            i: ep.i,
            j: ep.j,
            nu,
            support: sol.q.support_size(),
            solver_iterations: sol.iterations,
        });
        ep.smoothed.push(SmoothedProjection::new(&sol.q, nu, self.class)?);
        ep.qs.push(sol.q);
        ep.replays.clear();
        Ok(())
    }

    fn breach(&self, ep: &Epoch, t: u64, p: &[f64], message: String) -> Error {
        let dump = StateDump {
            t,
            epoch: ep.i,
            tau: ep.tau,
            block: ep.j,
            replay_set: &ep.replays,
            p,
            nu: self.params.nu(ep.j),
        };
        Error::InvariantBreach {
            t,
            message,
            dump: serde_json::to_string(&dump).unwrap_or_default(),
        }
    }

    fn check_round(&self, ep: &Epoch, t: u64, p: &ActionDistribution) -> Result<()> {
        let probs = p.probs();
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > ActionDistribution::SUM_TOLERANCE {
            return Err(self.breach(ep, t, probs, format!("p_t sums to {sum}")));
        }
        let floor = if self.variant == Variant::UniformRandom {
            1.0 / self.params.k as f64
        } else {
            self.params.nu(ep.j)
        };
        if p.min() < floor - 1e-12 {
            return Err(self.breach(ep, t, probs, format!("p_t has mass {} below floor {floor}", p.min())));
        }
        if self.variant != Variant::UniformRandom && !self.params.block_interval(ep.tau, ep.j).contains(t) {
            return Err(self.breach(ep, t, probs, format!("round {t} outside block {}", ep.j)));
        }
        Ok(())
    }

    /// Step 3 for finished replay phases. Returns the first failing outcome.
    fn replay_tests(&mut self, ep: &Epoch, t: u64) -> Result<bool> {
        let finished: Vec<ReplayPhase> = ep.replays.iter().filter(|p| p.interval.end == t).copied().collect();
        for phase in finished {
            self.events.push(Event::ReplayEnd {
                t,
                i: ep.i,
                j: ep.j,
                m: phase.m,
                start: phase.interval.start,
            });
            let outcome = if self.variant.tests() {
                let a = IntervalStats::from_records(
                    self.history.slice(phase.interval)?,
                    self.class.num_contexts(),
                    self.class.k(),
                )?;
                let b = ep
                    .snapshots
                    .get(ep.j as usize - 1)
                    .ok_or_else(|| Error::State(format!("no statistics for block {}", ep.j - 1)))?;
                let q = ep
                    .smoothed
                    .get(phase.m as usize)
                    .ok_or_else(|| Error::State(format!("no distribution for replay index {}", phase.m)))?;
                replay_test(&a, b, q, self.class, &self.consts)?
            } else {
                TestOutcome::pass()
            };
            self.events.push(Event::Test {
                t,
                kind: TestKind::Replay,
                i: ep.i,
                j: ep.j,
                m_or_k: Some(phase.m),
                verdict: outcome.verdict,
                witness: outcome.witness,
            });
            if outcome.failed() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn block_test(&mut self, ep: &Epoch, t: u64) -> Result<bool> {
        let outcome = if self.variant.tests() {
            let refs: Vec<BlockReference<'_>> = (0..ep.j)
                .map(|k| BlockReference {
                    k,
                    stats: &ep.snapshots[k as usize],
                    nu: self.params.nu(k),
                    next: &ep.smoothed[k as usize + 1],
                })
                .collect();
            block_test(&ep.acc, &refs, self.class, &self.consts)?
        } else {
            TestOutcome::pass()
        };
        self.events.push(Event::Test {
            t,
            kind: TestKind::Block,
            i: ep.i,
            j: ep.j,
            m_or_k: outcome.witness.and_then(|w| w.k),
            verdict: outcome.verdict,
            witness: outcome.witness,
        });
        Ok(outcome.failed())
    }
}

/// Runs one algorithm over the whole horizon.
pub fn run(
    env: &EnvironmentSpec,
    class: &PolicyClass,
    params: &ScheduleParams,
    variant: Variant,
    seed: u64,
) -> Result<RunOutput> {
    if env.horizon != params.horizon || env.k != params.k || class.k() != env.k {
        return Err(Error::input(format!(
            "environment (T={}, K={}) does not match parameters (T={}, K={}) and class (K={})",
            env.horizon,
            env.k,
            params.horizon,
            params.k,
            class.k()
        )));
    }
    if class.num_contexts() != env.contexts {
        return Err(Error::input("policy class and environment disagree on the number of contexts"));
    }
    let mut coin: ChaCha8Rng = rng::stream(seed, Stream::ReplayCoin);
    let mut index: ChaCha8Rng = rng::stream(seed, Stream::ReplayIndex);
    let mut action_rng: ChaCha8Rng = rng::stream(seed, Stream::Action);
    let change_points: BTreeSet<u64> = if variant == Variant::OracleRestart {
        env.change_points().into_iter().collect()
    } else {
        BTreeSet::new()
    };

    let mut runner = Runner {
        env,
        class,
        params: *params,
        consts: params.test_constants()?,
        variant,
        events: Vec::new(),
        history: History::with_capacity(params.horizon as usize),
    };
    let mut full_rewards = Vec::with_capacity(params.horizon as usize);
    let mut ep = runner.open_epoch(1, 1)?;
    let uniform = ActionDistribution::uniform(params.k);

    let mut t = 1;
    while t <= params.horizon {
        // step 1
        if let Some((m, len)) = sample_replay_start(ep.j, params, &mut coin, &mut index) {
            if variant.replays() {
                let phase = ReplayPhase {
                    m,
                    interval: Interval::new(t, t + len - 1),
                };
                runner.events.push(Event::ReplayStart {
                    t,
                    i: ep.i,
                    j: ep.j,
                    m,
                    end: phase.interval.end,
                });
                ep.replays.push(phase);
            }
        }

        // step 2
        let (x, r) = runner.env.sample_round(t, seed)?;
        let m_t = active_replay_indices(&ep.replays, t);
        let p = if variant == Variant::UniformRandom {
            uniform.clone()
        } else {
            action_distribution(&ep.smoothed, ep.j, &m_t, x)?
        };
        runner.check_round(&ep, t, &p)?;
        let a = p.sample_with(action_rng.gen());
        let rec = RoundRecord {
            t,
            x,
            a,
            observed_reward: r[a.index()],
            p,
            epoch: ep.i,
            block: ep.j,
            replay_indices: m_t,
        };
        ep.acc.push(&rec)?;
        runner.history.push(rec)?;
        full_rewards.push(r);

        if variant == Variant::UniformRandom {
            t += 1;
            continue;
        }

        // step 3
        let mut restart = None;
        if runner.replay_tests(&ep, t)? {
            restart = Some(TestKind::Replay);
        }
        let block_end = runner.params.block_interval(ep.tau, ep.j).end;
        if restart.is_none() && t == block_end && runner.block_test(&ep, t)? {
            restart = Some(TestKind::Block);
        }
        if restart.is_none() && change_points.contains(&(t + 1)) {
            restart = Some(TestKind::ChangePoint);
        }

        if let Some(cause) = restart {
            runner.events.push(Event::Restart { t, i: ep.i + 1, cause });
            if t < params.horizon {
                ep = runner.open_epoch(ep.i + 1, t + 1)?;
            }
        } else if t == block_end && t < params.horizon {
            runner.advance_block(&mut ep, t + 1)?;
        }
        t += 1;
    }

    Ok(RunOutput {
        variant,
        history: runner.history,
        events: runner.events,
        full_rewards,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{RoundLaw, SegmentSpec};
    use rand::SeedableRng;

    fn worked() -> ScheduleParams {
        compute_schedule_params(1024, 2, 4, 0.05).unwrap()
    }

    #[test]
    fn worked_parameters() {
        let p = worked();
        assert!((p.c0 - 28.642).abs() < 1e-3, "{}", p.c0);
        assert_eq!(p.l, 230);
        assert!((p.nu(0) - 0.24953).abs() < 1e-5);
        assert!((p.nu(1) - 0.17645).abs() < 1e-5);
        assert!(compute_schedule_params(0, 2, 4, 0.05).is_err());
        assert!(compute_schedule_params(10, 1, 4, 0.05).is_err());
        assert!(compute_schedule_params(10, 2, 0, 0.05).is_err());
        assert!(compute_schedule_params(10, 2, 4, 1.0).is_err());
    }

    #[test]
    fn nu_identities_hold() {
        for (t, k, n, d) in [(1u64, 2usize, 1usize, 0.5), (1024, 2, 4, 0.05), (1 << 20, 7, 1000, 1e-6), (50, 3, 9, 0.9)] {
            let p = compute_schedule_params(t, k, n, d).unwrap();
            let kf = k as f64;
            assert!(p.nu(0) >= 1.0 / (4.0 * kf) && p.nu(0) <= 1.0 / (2.0 * kf));
            for j in 0..20 {
                let ratio = p.c0 / (p.nu(j).powi(2) * 2f64.powi(j as i32) * p.l as f64);
                assert!((ratio - kf).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn block_layout() {
        let p = worked();
        assert_eq!(p.block_interval(1, 0), Interval::new(1, 230));
        assert_eq!(p.block_interval(1, 1), Interval::new(231, 460));
        assert_eq!(p.block_interval(1, 2), Interval::new(461, 920));
        assert_eq!(p.block_interval(11, 3), Interval::new(11 + 920, 10 + 1840));
        assert_eq!(p.cumulative_block(5, 2), Interval::new(5, 924));
    }

    #[test]
    fn replay_probabilities() {
        let p = worked();
        assert_eq!(p.replay_probability(0), 0.0);
        assert!((p.replay_probability(1) - 0.0030744).abs() < 1e-7);
        let mut coin = ChaCha8Rng::seed_from_u64(1);
        let mut idx = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            assert!(sample_replay_start(0, &p, &mut coin, &mut idx).is_none());
        }
        let mut seen = 0;
        for _ in 0..20000 {
            if let Some((m, len)) = sample_replay_start(1, &p, &mut coin, &mut idx) {
                assert_eq!((m, len), (0, 230));
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn replay_start_frequencies_match_closed_form() {
        let p = worked();
        let mut coin = rng::stream(11, Stream::ReplayCoin);
        let mut idx = rng::stream(11, Stream::ReplayIndex);
        let n = 1_000_000u64;
        let mut counts = [0u64; 2];
        for _ in 0..n {
            if let Some((m, _)) = sample_replay_start(2, &p, &mut coin, &mut idx) {
                counts[m as usize] += 1;
            }
        }
        for (m, expected) in [(0usize, 1.0 / 230.0 / 2.0), (1, 1.0 / 230.0 / 2.0 / 2f64.sqrt())] {
            let freq = counts[m] as f64 / n as f64;
            let se = (expected * (1.0 - expected) / n as f64).sqrt();
            assert!((freq - expected).abs() < 5.0 * se, "m={m}: {freq} vs {expected}");
        }
        assert!((1.0f64 / 230.0 / 2.0 - 0.0021739).abs() < 1e-7);
        assert!((1.0f64 / 230.0 / 2.0 / 2f64.sqrt() - 0.0015372).abs() < 1e-7);
    }

    #[test]
    fn replay_index_sets() {
        let ph = |m, s, e| ReplayPhase {
            m,
            interval: Interval::new(s, e),
        };
        assert!(active_replay_indices(&[], 5).is_empty());
        assert_eq!(active_replay_indices(&[ph(0, 10, 12)], 11), vec![0]);
        let s = [ph(0, 10, 12), ph(2, 8, 20), ph(0, 11, 13)];
        assert_eq!(active_replay_indices(&s, 11), vec![0, 2]);
        assert_eq!(active_replay_indices(&s, 21), Vec::<u32>::new());
    }

    #[test]
    fn mixtures() {
        let class = PolicyClass::all_tables(3, 2).unwrap();
        let q0 = SparsePolicyDistribution::point_mass(0);
        let q1 = SparsePolicyDistribution::new(vec![(5, 0.5), (8, 0.5)], class.len()).unwrap();
        let qs = vec![
            SmoothedProjection::new(&q0, 0.3, &class).unwrap(),
            SmoothedProjection::new(&q1, 0.2, &class).unwrap(),
        ];
        let x = ContextId(1);
        let direct = action_distribution(&qs, 1, &[], x).unwrap();
        assert_eq!(direct.probs(), qs[1].row(1));
        let single = action_distribution(&qs, 1, &[0], x).unwrap();
        assert_eq!(single.probs(), qs[0].row(1));
        let mix = action_distribution(&qs, 1, &[0, 1], x).unwrap();
        for a in 0..3 {
            assert!((mix.probs()[a] - (qs[0].get(1, a) + qs[1].get(1, a)) / 2.0).abs() < 1e-15);
        }
        assert!(action_distribution(&qs, 2, &[], x).is_err());
    }

    fn flip_env(t: u64, flip_at: u64) -> EnvironmentSpec {
        let a = RoundLaw {
            context_probs: vec![0.5, 0.5],
            reward_means: vec![vec![0.9, 0.1], vec![0.2, 0.8]],
        };
        let b = RoundLaw {
            context_probs: vec![0.5, 0.5],
            reward_means: vec![vec![0.1, 0.9], vec![0.8, 0.2]],
        };
        EnvironmentSpec::piecewise(
            2,
            2,
            vec![
                SegmentSpec {
                    length: flip_at - 1,
                    law: a,
                },
                SegmentSpec {
                    length: t - flip_at + 1,
                    law: b,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn short_horizon_is_one_block() {
        let class = PolicyClass::all_tables(2, 2).unwrap();
        let p = compute_schedule_params(150, 2, class.len(), 0.05).unwrap();
        assert!(p.l >= 150);
        let env = flip_env(150, 75);
        let out = run(&env, &class, &p, Variant::AdaReplay, 3).unwrap();
        assert!(out.history.records().iter().all(|r| r.epoch == 1 && r.block == 0 && r.replay_indices.is_empty()));
        assert!(out.restarts().is_empty());
        assert!(!out.events.iter().any(|e| matches!(e, Event::ReplayStart { .. })));
    }

    #[test]
    fn stationary_single_epoch_block_boundaries() {
        let class = PolicyClass::all_tables(2, 2).unwrap();
        let law = RoundLaw {
            context_probs: vec![0.5, 0.5],
            reward_means: vec![vec![0.7, 0.3], vec![0.4, 0.6]],
        };
        let base = compute_schedule_params(1, 2, class.len(), 0.05).unwrap();
        // find T with T = 8L self-consistently
        let mut horizon = 8 * base.l;
        let p = loop {
            let p = compute_schedule_params(horizon, 2, class.len(), 0.05).unwrap();
            if 8 * p.l == horizon {
                break p;
            }
            horizon = 8 * p.l;
        };
        let env = EnvironmentSpec::stationary(horizon, law).unwrap();
        let out = run(&env, &class, &p, Variant::AdaReplay, 5).unwrap();
        assert!(out.restarts().is_empty());
        let ends: Vec<u64> = out
            .events
            .iter()
            .filter_map(|e| match e {
                Event::Test {
                    t,
                    kind: TestKind::Block,
                    verdict,
                    ..
                } => {
                    assert_eq!(*verdict, Verdict::Pass);
                    Some(*t)
                }
                _ => None,
            })
            .collect();
        assert_eq!(ends, vec![p.l, 2 * p.l, 4 * p.l, 8 * p.l]);
        for r in out.history.records() {
            assert!(p.block_interval(1, r.block).contains(r.t));
        }
    }

    #[test]
    fn runs_are_deterministic_and_floors_hold() {
        let class = PolicyClass::all_tables(2, 2).unwrap();
        let p = compute_schedule_params(3000, 2, class.len(), 0.1)
            .unwrap()
            .with_constant_scale(1e-4)
            .unwrap();
        let env = flip_env(3000, 1500);
        let a = run(&env, &class, &p, Variant::AdaReplay, 9).unwrap();
        let b = run(&env, &class, &p, Variant::AdaReplay, 9).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.events, b.events);
        for r in a.history.records() {
            assert!(r.p.min() >= p.nu(r.block) - 1e-12);
        }
        // after a restart the next round opens a fresh epoch
        for &t in &a.restarts() {
            if let (Some(prev), Some(next)) = (a.history.get(t), a.history.get(t + 1)) {
                assert_eq!(next.epoch, prev.epoch + 1);
                assert_eq!(next.block, 0);
            }
        }
    }

    #[test]
    fn oracle_restart_restarts_at_change_points() {
        let class = PolicyClass::all_tables(2, 2).unwrap();
        let p = compute_schedule_params(2000, 2, class.len(), 0.1).unwrap();
        let env = flip_env(2000, 700);
        let out = run(&env, &class, &p, Variant::OracleRestart, 1).unwrap();
        assert_eq!(out.restarts(), vec![699]);
        assert_eq!(out.history.get(700).unwrap().epoch, 2);
        let u = run(&env, &class, &p, Variant::UniformRandom, 1).unwrap();
        assert!(u.history.records().iter().all(|r| r.p.probs() == [0.5, 0.5]));
    }

    #[test]
    fn events_serialize_as_json_lines() {
        let e = Event::Test {
            t: 10,
            kind: TestKind::Replay,
            i: 1,
            j: 2,
            m_or_k: Some(0),
            verdict: Verdict::Pass,
            witness: None,
        };
        let mut buf = Vec::new();
        write_events_jsonl(std::slice::from_ref(&e), &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert_eq!(
            line,
            "{\"event\":\"test\",\"t\":10,\"kind\":\"replay\",\"i\":1,\"j\":2,\"m_or_k\":0,\"verdict\":\"Pass\"}\n"
        );
        assert_eq!(serde_json::from_str::<Event>(line.trim()).unwrap(), e);
    }
}
