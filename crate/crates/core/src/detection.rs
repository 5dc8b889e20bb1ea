//! Replay and block restart tests.
//!
//! Both tests compare two intervals `A` and `B` through three inequalities:
//! a regret gap each way and a variance ratio. A maximum over the class of
//! each left-hand side costs one oracle call on a merged weighted dataset, so
//! no test ever enumerates the policy class. [`brute_force`] does enumerate,
//! from raw per-round sums, and serves as the reference implementation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{History, Interval, IntervalStats, RoundRecord, SmoothedProjection};
use crate::policy::{argmax_lowest_index, PolicyClass, SparsePolicyDistribution, WeightTable};

pub const THEORY_D1: f64 = 6400.0;
pub const THEORY_D2: f64 = 800.0;
pub const THEORY_D4: f64 = 6400.0;
pub const THEORY_D5: f64 = 800.0;

/// Coefficient on the reference interval in the variance condition.
const VARIANCE_RATIO: f64 = 41.0;
/// Coefficient on the other interval in the regret conditions.
const REGRET_RATIO: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConstants {
    pub d1: f64,
    pub d2: f64,
    pub d4: f64,
    pub d5: f64,
    pub constant_scale: f64,
    /// `K' = log2(T) K`
    pub k_prime: f64,
    pub k: usize,
}

impl TestConstants {
    pub fn new(k: usize, horizon: u64, constant_scale: f64) -> Result<Self> {
        if !(constant_scale.is_finite() && constant_scale > 0.0) {
            return Err(Error::input(format!("constant_scale={constant_scale} must be positive")));
        }
        if k < 2 || horizon == 0 {
            return Err(Error::input("test constants need K >= 2 and T >= 1"));
        }
        Ok(Self {
            d1: THEORY_D1 * constant_scale,
            d2: THEORY_D2 * constant_scale,
            d4: THEORY_D4 * constant_scale,
            d5: THEORY_D5 * constant_scale,
            constant_scale,
            k_prime: (horizon as f64).log2() * k as f64,
            k,
        })
    }

    pub fn theory(k: usize, horizon: u64) -> Result<Self> {
        Self::new(k, horizon, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// 1..=3 for the replay test, 4..=6 for the block test.
    pub condition: u8,
    pub policy: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// Reference block `k` for block-test witnesses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl TestOutcome {
    pub fn pass() -> Self {
        Self {
            verdict: Verdict::Pass,
            witness: None,
        }
    }

    fn fail(w: Witness) -> Self {
        Self {
            verdict: Verdict::Fail,
            witness: Some(w),
        }
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

fn nonempty(s: &IntervalStats, what: &str) -> Result<f64> {
    if s.is_empty() {
        Err(Error::input(format!("test interval {what} is empty")))
    } else {
        Ok(s.len() as f64)
    }
}

/// `max_pi [coef_a bar R_A(pi) + coef_b bar R_B(pi)]` and its lowest-index maximizer,
/// from a single oracle call.
pub fn max_weighted_gap(
    a: &IntervalStats,
    coef_a: f64,
    b: &IntervalStats,
    coef_b: f64,
    class: &PolicyClass,
) -> Result<(usize, f64)> {
    let (na, nb) = (nonempty(a, "A")?, nonempty(b, "B")?);
    let (nx, k) = (class.num_contexts(), class.k());
    let mut table = WeightTable::zeros(nx, k);
    for x in 0..nx {
        for act in 0..k {
            table.add(
                x,
                act,
                coef_a * a.ips_mass().get(x, act) / na + coef_b * b.ips_mass().get(x, act) / nb,
            );
        }
    }
    Ok(class.argmax(&table))
}

/// History-level form of [`max_weighted_gap`].
pub fn max_weighted_gap_on_history(
    h: &History,
    a: Interval,
    coef_a: f64,
    b: Interval,
    coef_b: f64,
    class: &PolicyClass,
) -> Result<(usize, f64)> {
    let sa = IntervalStats::from_history(h, a, class)?;
    let sb = IntervalStats::from_history(h, b, class)?;
    max_weighted_gap(&sa, coef_a, &sb, coef_b, class)
}

/// `max_pi [V_A(Q, nu, pi) - 41 V_B(Q, nu, pi)]`, one oracle call.
fn max_variance_gap(
    a: &IntervalStats,
    b: &IntervalStats,
    q: &SmoothedProjection,
    class: &PolicyClass,
) -> Result<(usize, f64)> {
    let (na, nb) = (nonempty(a, "A")?, nonempty(b, "B")?);
    let (nx, k) = (class.num_contexts(), class.k());
    let mut table = WeightTable::zeros(nx, k);
    for x in 0..nx {
        let (ca, cb) = (a.context_counts()[x], b.context_counts()[x]);
        if ca == 0 && cb == 0 {
            continue;
        }
        let coef = ca as f64 / na - VARIANCE_RATIO * cb as f64 / nb;
        for act in 0..k {
            table.add(x, act, coef / q.get(x, act));
        }
    }
    Ok(class.argmax(&table))
}

/// The three inequalities shared by both tests, in order. Conditions are
/// numbered `base + 1 ..= base + 3`.
#[allow(clippy::too_many_arguments)]
fn three_conditions(
    a: &IntervalStats,
    b: &IntervalStats,
    nu_regret: f64,
    q: &SmoothedProjection,
    d_regret: f64,
    d_variance: f64,
    class: &PolicyClass,
    consts: &TestConstants,
    base: u8,
    k: Option<u32>,
) -> Result<TestOutcome> {
    let (_, best_a) = a.empirical_best(class)?;
    let (_, best_b) = b.empirical_best(class)?;
    let regret_rhs = d_regret * consts.k_prime * nu_regret;

    // Reg_A - 4 Reg_B = best_A - 4 best_B + (-R_A + 4 R_B)
    let (p1, g1) = max_weighted_gap(a, -1.0, b, REGRET_RATIO, class)?;
    let lhs1 = best_a - REGRET_RATIO * best_b + g1;
    if lhs1 >= regret_rhs {
        return Ok(TestOutcome::fail(Witness {
            condition: base + 1,
            policy: p1,
            lhs: lhs1,
            rhs: regret_rhs,
            k,
        }));
    }
    let (p2, g2) = max_weighted_gap(a, REGRET_RATIO, b, -1.0, class)?;
    let lhs2 = best_b - REGRET_RATIO * best_a + g2;
    if lhs2 >= regret_rhs {
        return Ok(TestOutcome::fail(Witness {
            condition: base + 2,
            policy: p2,
            lhs: lhs2,
            rhs: regret_rhs,
            k,
        }));
    }
    let variance_rhs = d_variance * consts.k as f64;
    let (p3, lhs3) = max_variance_gap(a, b, q, class)?;
    if lhs3 >= variance_rhs {
        return Ok(TestOutcome::fail(Witness {
            condition: base + 3,
            policy: p3,
            lhs: lhs3,
            rhs: variance_rhs,
            k,
        }));
    }
    Ok(TestOutcome::pass())
}

/// Replay test for a finished replay interval `A` of index `m`, against the
/// previous block `B`. `q_m` is `Q_m` smoothed with `nu_m`.
pub fn replay_test(
    a: &IntervalStats,
    b: &IntervalStats,
    q_m: &SmoothedProjection,
    class: &PolicyClass,
    consts: &TestConstants,
) -> Result<TestOutcome> {
    three_conditions(a, b, q_m.nu(), q_m, consts.d1, consts.d2, class, consts, 0, None)
}

/// One reference block `k` of a block test.
#[derive(Debug, Clone, Copy)]
pub struct BlockReference<'a> {
    pub k: u32,
    /// Statistics of `B_k`.
    pub stats: &'a IntervalStats,
    /// `nu_k`
    pub nu: f64,
    /// `Q_{k+1}` smoothed with `nu_{k+1}`.
    pub next: &'a SmoothedProjection,
}

/// Block test of the just-finished `B_j` against every earlier `B_k`, in
/// increasing `k`. An empty reference list (block 0) passes.
pub fn block_test(
    current: &IntervalStats,
    refs: &[BlockReference<'_>],
    class: &PolicyClass,
    consts: &TestConstants,
) -> Result<TestOutcome> {
    for r in refs {
        let out = three_conditions(current, r.stats, r.nu, r.next, consts.d4, consts.d5, class, consts, 3, Some(r.k))?;
        if out.failed() {
            return Ok(out);
        }
    }
    Ok(TestOutcome::pass())
}

/// Replay test straight from a history: `a` is the replay interval, `b` the
/// previous block, and `q_m`, `nu_m` the replayed block's distribution.
pub fn replay_test_on_history(
    h: &History,
    a: Interval,
    b: Interval,
    q_m: &SparsePolicyDistribution,
    nu_m: f64,
    class: &PolicyClass,
    consts: &TestConstants,
) -> Result<TestOutcome> {
    let sa = IntervalStats::from_history(h, a, class)?;
    let sb = IntervalStats::from_history(h, b, class)?;
    let q = SmoothedProjection::new(q_m, nu_m, class)?;
    replay_test(&sa, &sb, &q, class, consts)
}

/// Block test straight from a history. `blocks[k]` is `B_k` for `k = 0..j`
/// (the last entry being the tested block), `qs[k]` is `Q_k` and `nus[k]` is `nu_k`.
pub fn block_test_on_history(
    h: &History,
    blocks: &[Interval],
    qs: &[SparsePolicyDistribution],
    nus: &[f64],
    class: &PolicyClass,
    consts: &TestConstants,
) -> Result<TestOutcome> {
    let Some((&current, earlier)) = blocks.split_last() else {
        return Err(Error::input("block test needs at least one block"));
    };
    if earlier.is_empty() {
        return Ok(TestOutcome::pass());
    }
    if qs.len() < blocks.len() || nus.len() < blocks.len() {
        return Err(Error::State(format!(
            "block test over {} blocks has {} distributions and {} nus",
            blocks.len(),
            qs.len(),
            nus.len()
        )));
    }
    let current = IntervalStats::from_history(h, current, class)?;
    let stats: Vec<IntervalStats> = earlier
        .iter()
        .map(|&b| IntervalStats::from_history(h, b, class))
        .collect::<Result<_>>()?;
    let projections: Vec<SmoothedProjection> = (0..earlier.len())
        .map(|k| SmoothedProjection::new(&qs[k + 1], nus[k + 1], class))
        .collect::<Result<_>>()?;
    let refs: Vec<BlockReference<'_>> = (0..earlier.len())
        .map(|k| BlockReference {
            k: k as u32,
            stats: &stats[k],
            nu: nus[k],
            next: &projections[k],
        })
        .collect();
    block_test(&current, &refs, class, consts)
}

/// Reference evaluation by enumerating the class, with every interval
/// quantity summed round by round.
pub mod brute_force {
    use super::*;

    fn avg_rewards(recs: &[RoundRecord], class: &PolicyClass) -> Vec<f64> {
        let n = recs.len() as f64;
        class
            .iter()
            .map(|pi| {
                recs.iter()
                    .filter(|r| pi.action(r.x.index()) == r.a.index())
                    .map(|r| r.observed_reward / r.p_played())
                    .sum::<f64>()
                    / n
            })
            .collect()
    }

    fn regrets(recs: &[RoundRecord], class: &PolicyClass) -> Vec<f64> {
        let v = avg_rewards(recs, class);
        let best = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        v.into_iter().map(|x| best - x).collect()
    }

    fn variances(recs: &[RoundRecord], q: &SmoothedProjection, class: &PolicyClass) -> Vec<f64> {
        let n = recs.len() as f64;
        class
            .iter()
            .map(|pi| recs.iter().map(|r| 1.0 / q.get(r.x.index(), pi.action(r.x.index()))).sum::<f64>() / n)
            .collect()
    }

    fn check(lhs: Vec<f64>, rhs: f64, condition: u8, k: Option<u32>) -> Option<TestOutcome> {
        let (policy, value) = argmax_lowest_index(&lhs);
        (value >= rhs).then(|| {
            TestOutcome::fail(Witness {
                condition,
                policy,
                lhs: value,
                rhs,
                k,
            })
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn three(
        a: &[RoundRecord],
        b: &[RoundRecord],
        nu_regret: f64,
        q: &SmoothedProjection,
        d_regret: f64,
        d_variance: f64,
        class: &PolicyClass,
        consts: &TestConstants,
        base: u8,
        k: Option<u32>,
    ) -> Result<TestOutcome> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::input("test interval is empty"));
        }
        let (ra, rb) = (regrets(a, class), regrets(b, class));
        let rhs = d_regret * consts.k_prime * nu_regret;
        let c1 = ra.iter().zip(&rb).map(|(x, y)| x - REGRET_RATIO * y).collect();
        if let Some(out) = check(c1, rhs, base + 1, k) {
            return Ok(out);
        }
        let c2 = ra.iter().zip(&rb).map(|(x, y)| y - REGRET_RATIO * x).collect();
        if let Some(out) = check(c2, rhs, base + 2, k) {
            return Ok(out);
        }
        let (va, vb) = (variances(a, q, class), variances(b, q, class));
        let c3 = va.iter().zip(&vb).map(|(x, y)| x - VARIANCE_RATIO * y).collect();
        if let Some(out) = check(c3, d_variance * consts.k as f64, base + 3, k) {
            return Ok(out);
        }
        Ok(TestOutcome::pass())
    }

    pub fn replay_test(
        a: &[RoundRecord],
        b: &[RoundRecord],
        q_m: &SmoothedProjection,
        class: &PolicyClass,
        consts: &TestConstants,
    ) -> Result<TestOutcome> {
        three(a, b, q_m.nu(), q_m, consts.d1, consts.d2, class, consts, 0, None)
    }

    /// `earlier[k] = (records of B_k, nu_k, Q_{k+1} smoothed with nu_{k+1})`.
    pub fn block_test(
        current: &[RoundRecord],
        earlier: &[(&[RoundRecord], f64, &SmoothedProjection)],
        class: &PolicyClass,
        consts: &TestConstants,
    ) -> Result<TestOutcome> {
        for (k, &(b, nu, q)) in earlier.iter().enumerate() {
            let out = three(current, b, nu, q, consts.d4, consts.d5, class, consts, 3, Some(k as u32))?;
            if out.failed() {
                return Ok(out);
            }
        }
        Ok(TestOutcome::pass())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{ActionDistribution, ActionId, ContextId};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn record(t: u64, x: usize, a: usize, p: Vec<f64>, r: f64) -> RoundRecord {
        RoundRecord {
            t,
            x: ContextId(x),
            a: ActionId(a),
            p: ActionDistribution::new(p).unwrap(),
            observed_reward: r,
            epoch: 1,
            block: 0,
            replay_indices: vec![],
        }
    }

    fn random_records(seed: u64, start: u64, n: u64, nx: usize, k: usize, bias: f64) -> Vec<RoundRecord> {
        let mut g = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let mut p: Vec<f64> = (0..k).map(|_| 0.2 + g.gen::<f64>()).collect();
                let s: f64 = p.iter().sum();
                p.iter_mut().for_each(|v| *v /= s);
                let d = ActionDistribution::new(p.clone()).unwrap();
                let a = d.sample_with(g.gen()).index();
                let x = g.gen_range(0..nx);
                let mean = if (a + x).is_multiple_of(2) { bias } else { 1.0 - bias };
                let r = if g.gen::<f64>() < mean { 1.0 } else { 0.0 };
                record(start + i, x, a, p, r)
            })
            .collect()
    }

    fn stats(recs: &[RoundRecord], class: &PolicyClass) -> IntervalStats {
        IntervalStats::from_records(recs, class.num_contexts(), class.k()).unwrap()
    }

    fn some_q(class: &PolicyClass, nu: f64) -> SmoothedProjection {
        let q = if class.len() == 1 {
            SparsePolicyDistribution::point_mass(0)
        } else {
            SparsePolicyDistribution::new(vec![(0, 0.5), (class.len() - 1, 0.5)], class.len()).unwrap()
        };
        SmoothedProjection::new(&q, nu, class).unwrap()
    }

    #[test]
    fn constants_scale_together() {
        let c = TestConstants::new(2, 1024, 1e-4).unwrap();
        assert!((c.d1 - 0.64).abs() < 1e-12 && (c.d2 - 0.08).abs() < 1e-12);
        assert_eq!(c.k_prime, 20.0);
        let p = TestConstants::theory(3, 8).unwrap();
        assert_eq!((p.d1, p.d2, p.d4, p.d5, p.k_prime), (6400.0, 800.0, 6400.0, 800.0, 9.0));
        assert!(TestConstants::new(2, 10, 0.0).is_err());
    }

    #[test]
    fn weighted_gap_degenerate_cases() {
        let class = PolicyClass::random(40, 3, 4, 2).unwrap();
        let recs = random_records(1, 1, 60, 4, 3, 0.8);
        let s = stats(&recs, &class);
        let (_, v) = max_weighted_gap(&s, 1.0, &s, -1.0, &class).unwrap();
        assert!(v.abs() < 1e-12);
        let (i, v) = max_weighted_gap(&s, 1.0, &s, 0.0, &class).unwrap();
        let (bi, bv) = s.empirical_best(&class).unwrap();
        assert_eq!(i, bi);
        assert!((v - bv).abs() < 1e-12);
        assert!(max_weighted_gap(&IntervalStats::empty(4, 3), 1.0, &s, 1.0, &class).is_err());
    }

    #[test]
    fn weighted_gap_matches_enumeration() {
        for seed in 0..30 {
            let class = PolicyClass::random(25, 3, 5, seed).unwrap();
            let a = stats(&random_records(seed, 1, 40, 5, 3, 0.7), &class);
            let b = stats(&random_records(seed + 50, 41, 70, 5, 3, 0.3), &class);
            let (ca, cb) = (1.5, -2.5);
            let ra = a.avg_rewards(&class).unwrap();
            let rb = b.avg_rewards(&class).unwrap();
            let brute: Vec<f64> = ra.iter().zip(&rb).map(|(x, y)| ca * x + cb * y).collect();
            let (bi, bv) = argmax_lowest_index(&brute);
            let (oi, ov) = max_weighted_gap(&a, ca, &b, cb, &class).unwrap();
            assert_eq!(bi, oi);
            assert!((bv - ov).abs() < 1e-10);
        }
    }

    #[test]
    fn identical_statistics_pass() {
        let class = PolicyClass::random(30, 2, 3, 4).unwrap();
        let recs = random_records(3, 1, 200, 3, 2, 0.9);
        let s = stats(&recs, &class);
        let consts = TestConstants::new(2, 1 << 12, 1e-6).unwrap();
        let out = replay_test(&s, &s, &some_q(&class, 0.2), &class, &consts).unwrap();
        assert_eq!(out, TestOutcome::pass());
        let q = some_q(&class, 0.2);
        let refs = [BlockReference {
            k: 0,
            stats: &s,
            nu: 0.2,
            next: &q,
        }];
        assert_eq!(block_test(&s, &refs, &class, &consts).unwrap(), TestOutcome::pass());
        assert_eq!(block_test(&s, &[], &class, &consts).unwrap(), TestOutcome::pass());
    }

    #[test]
    fn hand_built_regret_jump_fails_condition_one() {
        // single context, two constant policies; A rewards action 0 fully,
        // B sees no reward anywhere
        let class = PolicyClass::all_tables(2, 1).unwrap();
        let a = vec![record(2, 0, 1, vec![0.0, 1.0], 1.0)];
        let b = vec![record(1, 0, 0, vec![1.0, 0.0], 0.0)];
        let (sa, sb) = (stats(&a, &class), stats(&b, &class));
        let consts = TestConstants::new(2, 2, 1e-4).unwrap();
        let q = some_q(&class, 0.25);
        let out = replay_test(&sa, &sb, &q, &class, &consts).unwrap();
        let w = out.witness.unwrap();
        assert!(out.failed());
        assert_eq!((w.condition, w.policy), (1, 0));
        assert_eq!(w.lhs, 1.0);
        assert!((w.rhs - 0.64 * 2.0 * 0.25).abs() < 1e-12);
        // theory constants make the same jump unremarkable
        let out = replay_test(&sa, &sb, &q, &class, &TestConstants::theory(2, 2).unwrap()).unwrap();
        assert!(!out.failed());
        assert_eq!(out, brute_force::replay_test(&a, &b, &q, &class, &TestConstants::theory(2, 2).unwrap()).unwrap());
    }

    #[test]
    fn history_wrappers_agree() {
        let class = PolicyClass::random(16, 2, 3, 7).unwrap();
        let mut h = History::new();
        for r in random_records(9, 1, 120, 3, 2, 0.9) {
            h.push(r).unwrap();
        }
        for r in random_records(10, 121, 120, 3, 2, 0.1) {
            h.push(r).unwrap();
        }
        let consts = TestConstants::new(2, 4096, 1e-6).unwrap();
        let q = SparsePolicyDistribution::point_mass(3);
        let out = replay_test_on_history(&h, Interval::new(121, 240), Interval::new(1, 120), &q, 0.3, &class, &consts).unwrap();
        assert!(out.failed());
        let blocks = [Interval::new(1, 60), Interval::new(61, 120), Interval::new(121, 240)];
        let qs = vec![SparsePolicyDistribution::point_mass(0), q.clone(), q];
        let out = block_test_on_history(&h, &blocks, &qs, &[0.3, 0.25, 0.2], &class, &consts).unwrap();
        assert_eq!(out.witness.unwrap().k, Some(0));
        assert!(out.witness.unwrap().condition >= 4);
        let out = block_test_on_history(&h, &blocks[..1], &qs, &[0.3], &class, &consts).unwrap();
        assert_eq!(out, TestOutcome::pass());
    }

    #[test]
    fn swapping_intervals_swaps_regret_conditions() {
        let class = PolicyClass::random(30, 3, 4, 1).unwrap();
        let a = stats(&random_records(4, 1, 80, 4, 3, 0.9), &class);
        let b = stats(&random_records(5, 81, 50, 4, 3, 0.2), &class);
        let (_, ba) = a.empirical_best(&class).unwrap();
        let (_, bb) = b.empirical_best(&class).unwrap();
        let (_, g1) = max_weighted_gap(&a, -1.0, &b, 4.0, &class).unwrap();
        let (_, g2s) = max_weighted_gap(&b, 4.0, &a, -1.0, &class).unwrap();
        assert!(((ba - 4.0 * bb + g1) - (ba - 4.0 * bb + g2s)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn oracle_route_matches_brute_force(
            seed in any::<u64>(),
            k in 2usize..=4,
            nx in 1usize..=5,
            np in 1usize..=64,
            na in 1u64..=80,
            nb in 1u64..=80,
            scale_exp in -7.0f64..=-2.0,
        ) {
            let class = PolicyClass::random(np, k, nx, seed).unwrap();
            let ra = random_records(seed ^ 1, 1, na, nx, k, 0.8);
            let rb = random_records(seed ^ 2, 1, nb, nx, k, 0.3);
            let consts = TestConstants::new(k, 1 << 14, 10f64.powf(scale_exp)).unwrap();
            let q = some_q(&class, 0.5 / k as f64);
            let fast = replay_test(&stats(&ra, &class), &stats(&rb, &class), &q, &class, &consts).unwrap();
            let slow = brute_force::replay_test(&ra, &rb, &q, &class, &consts).unwrap();
            prop_assert_eq!(fast.verdict, slow.verdict);
            prop_assert_eq!(fast.witness.map(|w| w.condition), slow.witness.map(|w| w.condition));
            if let (Some(f), Some(s)) = (fast.witness, slow.witness) {
                prop_assert!((f.lhs - s.lhs).abs() < 1e-9);
                prop_assert!(f.lhs >= f.rhs);
            }
        }

        #[test]
        fn passing_is_monotone_in_scale(seed in any::<u64>(), s in 1e-7f64..1e-3, factor in 1.0f64..100.0) {
            let class = PolicyClass::random(20, 2, 3, seed).unwrap();
            let a = stats(&random_records(seed, 1, 50, 3, 2, 0.9), &class);
            let b = stats(&random_records(seed ^ 9, 1, 50, 3, 2, 0.4), &class);
            let q = some_q(&class, 0.2);
            let lo = replay_test(&a, &b, &q, &class, &TestConstants::new(2, 1000, s).unwrap()).unwrap();
            let hi = replay_test(&a, &b, &q, &class, &TestConstants::new(2, 1000, s * factor).unwrap()).unwrap();
            if !lo.failed() {
                prop_assert!(!hi.failed());
            }
        }
    }
}
