//! Finite policy classes over a finite context set, action distributions
//! induced by mixtures of policies, and the exact ERM (argmax) oracle.
//!
//! Policies are lookup tables `context -> action`. Every argmax in the crate
//! breaks ties towards the lowest policy index; values that agree to within
//! [`TIE_TOLERANCE`] (relative to the maximum) count as ties so that two
//! summation orders of the same objective select the same policy.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when deciding argmax ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Tolerance on the total mass of a [`SparsePolicyDistribution`].
pub const DISTRIBUTION_MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContextId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub usize);

impl ContextId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl ActionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ContextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A deterministic policy `X -> [K]` stored as one action per context.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolicyTable {
    actions: Vec<ActionId>,
}

impl PolicyTable {
    pub fn new(actions: Vec<ActionId>, k: usize) -> Result<Self> {
        if let Some((x, a)) = actions.iter().enumerate().find(|(_, a)| a.0 >= k) {
            return Err(Error::input(format!(
                "policy maps context {x} to action {a}, but K={k}"
            )));
        }
        Ok(Self { actions })
    }

    pub fn from_indices(actions: &[usize], k: usize) -> Result<Self> {
        Self::new(actions.iter().copied().map(ActionId).collect(), k)
    }

    /// Constant policy playing `action` on every context.
    pub fn constant(action: usize, num_contexts: usize, k: usize) -> Result<Self> {
        Self::new(vec![ActionId(action); num_contexts], k)
    }

    pub fn evaluate(&self, x: ContextId) -> Result<ActionId> {
        self.actions.get(x.0).copied().ok_or_else(|| {
            Error::input(format!(
                "context {x} out of range for a policy over {} contexts",
                self.actions.len()
            ))
        })
    }

    /// Unchecked lookup for hot loops where `x` has already been validated.
    #[inline]
    pub fn action(&self, x: usize) -> usize {
        self.actions[x].0
    }

    pub fn actions(&self) -> &[ActionId] {
        &self.actions
    }

    pub fn num_contexts(&self) -> usize {
        self.actions.len()
    }
}

pub fn evaluate_policy(pi: &PolicyTable, x: ContextId) -> Result<ActionId> {
    pi.evaluate(x)
}

/// An ordered, non-empty list of policies over a shared context set and action count.
/// The index order is the tie-break order of every argmax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyClass {
    k: usize,
    num_contexts: usize,
    policies: Vec<PolicyTable>,
}

#[derive(Serialize, Deserialize)]
struct PolicyClassDoc {
    #[serde(rename = "K")]
    k: usize,
    num_contexts: usize,
    policies: Vec<Vec<usize>>,
}

impl PolicyClass {
    pub fn new(k: usize, num_contexts: usize, policies: Vec<PolicyTable>) -> Result<Self> {
        if k < 2 {
            return Err(Error::input(format!("K must be at least 2, got {k}")));
        }
        if num_contexts == 0 {
            return Err(Error::input("context set must be non-empty"));
        }
        if policies.is_empty() {
            return Err(Error::input("policy class must be non-empty"));
        }
        for (i, p) in policies.iter().enumerate() {
            if p.num_contexts() != num_contexts {
                return Err(Error::input(format!(
                    "policy {i} covers {} contexts, expected {num_contexts}",
                    p.num_contexts()
                )));
            }
            if let Some(a) = p.actions.iter().find(|a| a.0 >= k) {
                return Err(Error::input(format!("policy {i} uses action {a} >= K={k}")));
            }
        }
        Ok(Self {
            k,
            num_contexts,
            policies,
        })
    }

    /// `count` random tables drawn uniformly from a seeded generator.
    pub fn random(count: usize, k: usize, num_contexts: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policies = (0..count)
            .map(|_| {
                let actions = (0..num_contexts).map(|_| ActionId(rng.gen_range(0..k))).collect();
                PolicyTable { actions }
            })
            .collect();
        Self::new(k, num_contexts, policies)
    }

    /// Every one of the `K^|X|` tables, in lexicographic order (context 0 most significant).
    pub fn all_tables(k: usize, num_contexts: usize) -> Result<Self> {
        let count = (k as u128).checked_pow(num_contexts as u32).unwrap_or(u128::MAX);
        if count > 1 << 20 {
            return Err(Error::Unsupported(format!(
                "K^|X| = {k}^{num_contexts} tables is too many to enumerate"
            )));
        }
        let policies = (0..count as usize)
            .map(|mut code| {
                let mut actions = vec![ActionId(0); num_contexts];
                for slot in actions.iter_mut().rev() {
                    *slot = ActionId(code % k);
                    code /= k;
                }
                PolicyTable { actions }
            })
            .collect();
        Self::new(k, num_contexts, policies)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PolicyClassDoc = serde_json::from_str(text)?;
        let policies = doc
            .policies
            .iter()
            .map(|row| PolicyTable::from_indices(row, doc.k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.k, doc.num_contexts, policies)
    }

    pub fn to_json(&self) -> String {
        let doc = PolicyClassDoc {
            k: self.k,
            num_contexts: self.num_contexts,
            policies: self
                .policies
                .iter()
                .map(|p| p.actions.iter().map(|a| a.0).collect())
                .collect(),
        };
        serde_json::to_string(&doc).expect("policy class serializes")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_contexts(&self) -> usize {
        self.num_contexts
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&PolicyTable> {
        self.policies.get(index)
    }

    pub fn policies(&self) -> &[PolicyTable] {
        &self.policies
    }

    pub fn iter(&self) -> impl Iterator<Item = &PolicyTable> {
        self.policies.iter()
    }

    pub fn check_context(&self, x: ContextId) -> Result<()> {
        if x.0 < self.num_contexts {
            Ok(())
        } else {
            Err(Error::input(format!(
                "context {x} out of range (|X|={})",
                self.num_contexts
            )))
        }
    }

    /// Value of every policy on an aggregated weight table, in index order.
    pub fn values(&self, weights: &WeightTable) -> Vec<f64> {
        debug_assert_eq!(weights.k, self.k);
        debug_assert_eq!(weights.num_contexts, self.num_contexts);
        self.policies
            .iter()
            .map(|p| {
                p.actions
                    .iter()
                    .enumerate()
                    .map(|(x, a)| weights.get(x, a.0))
                    .sum()
            })
            .collect()
    }

    /// Exact argmax over the class of `sum_x W[x][pi(x)]`.
    pub fn argmax(&self, weights: &WeightTable) -> (usize, f64) {
        argmax_lowest_index(&self.values(weights))
    }
}

/// Lowest index whose value is within [`TIE_TOLERANCE`] of the maximum.
/// Returns `(0, 0.0)`-style results only when the input is non-empty.
pub fn argmax_lowest_index(values: &[f64]) -> (usize, f64) {
    assert!(!values.is_empty(), "argmax over an empty set");
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOLERANCE * max.abs().max(1.0);
    let idx = values
        .iter()
        .position(|&v| v >= max - tol)
        .expect("maximum is attained");
    (idx, values[idx])
}

/// `Q in Delta^Pi` stored sparsely as `(policy index, weight)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsePolicyDistribution {
    entries: Vec<(usize, f64)>,
}

impl SparsePolicyDistribution {
    /// Validates and renormalizes. Zero weights are dropped; negative weights,
    /// duplicates, out-of-range indices and total mass off by more than
    /// [`DISTRIBUTION_MASS_TOLERANCE`] are rejected.
    pub fn new(entries: Vec<(usize, f64)>, policy_count: usize) -> Result<Self> {
        let mut seen = vec![false; policy_count];
        let mut kept = Vec::with_capacity(entries.len());
        for (idx, w) in entries {
            if idx >= policy_count {
                return Err(Error::input(format!(
                    "policy index {idx} out of range (|Pi|={policy_count})"
                )));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::input(format!("weight {w} on policy {idx} is not >= 0")));
            }
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::input(format!("policy {idx} appears twice")));
            }
            if w > 0.0 {
                kept.push((idx, w));
            }
        }
        let total: f64 = kept.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > DISTRIBUTION_MASS_TOLERANCE {
            return Err(Error::input(format!("weights sum to {total}, expected 1")));
        }
        for e in &mut kept {
            e.1 /= total;
        }
        Ok(Self { entries: kept })
    }

    pub fn point_mass(index: usize) -> Self {
        Self {
            entries: vec![(index, 1.0)],
        }
    }

    pub fn uniform(policy_count: usize) -> Self {
        let w = 1.0 / policy_count as f64;
        Self {
            entries: (0..policy_count).map(|i| (i, w)).collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.entries
            .iter()
            .find(|e| e.0 == index)
            .map_or(0.0, |e| e.1)
    }
}

/// A probability vector over the K actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionDistribution {
    probs: Vec<f64>,
}

impl ActionDistribution {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::input(format!("negative or non-finite probability in {probs:?}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::input(format!("probabilities sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn min(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Inverse-CDF draw from a uniform `u in [0, 1)`.
    pub fn sample_with(&self, u: f64) -> ActionId {
        let mut acc = 0.0;
        for (a, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return ActionId(a);
            }
        }
        // u landed in the rounding gap above the last partial sum
        let last = self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        ActionId(last)
    }
}

/// `Q(a|x) = sum of Q(pi) over policies with pi(x) = a`.
pub fn project_distribution(
    q: &SparsePolicyDistribution,
    x: ContextId,
    class: &PolicyClass,
) -> Result<ActionDistribution> {
    class.check_context(x)?;
    let mut probs = vec![0.0; class.k()];
    for &(idx, w) in q.entries() {
        let pi = class
            .get(idx)
            .ok_or_else(|| Error::input(format!("policy {idx} not in class")))?;
        probs[pi.action(x.0)] += w;
    }
    Ok(ActionDistribution { probs })
}

/// `Q^nu(.|x) = nu * 1 + (1 - K nu) Q(.|x)`, requires `0 < nu <= 1/K`.
pub fn smooth_distribution(d: &ActionDistribution, nu: f64, k: usize) -> Result<ActionDistribution> {
    check_nu(nu, k)?;
    if d.k() != k {
        return Err(Error::input(format!("distribution has {} actions, K={k}", d.k())));
    }
    Ok(ActionDistribution {
        probs: smooth_probs(d.probs(), nu),
    })
}

pub(crate) fn smooth_probs(probs: &[f64], nu: f64) -> Vec<f64> {
    let scale = 1.0 - probs.len() as f64 * nu;
    probs.iter().map(|p| nu + scale * p).collect()
}

pub(crate) fn check_nu(nu: f64, k: usize) -> Result<()> {
    if nu > 0.0 && nu <= 1.0 / k as f64 {
        Ok(())
    } else {
        Err(Error::input(format!(
            "minimum probability nu={nu} outside (0, 1/K] for K={k}"
        )))
    }
}

/// A context paired with a signed reward vector; negative weights are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedExample {
    pub context: ContextId,
    pub reward_weights: Vec<f64>,
}

impl WeightedExample {
    pub fn new(context: ContextId, reward_weights: Vec<f64>) -> Self {
        Self {
            context,
            reward_weights,
        }
    }
}

/// Dense `|X| x K` table of summed reward weights, the sufficient statistic
/// of an oracle dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    num_contexts: usize,
    k: usize,
    w: Vec<f64>,
}

impl WeightTable {
    pub fn zeros(num_contexts: usize, k: usize) -> Self {
        Self {
            num_contexts,
            k,
            w: vec![0.0; num_contexts * k],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, a: usize) -> f64 {
        self.w[x * self.k + a]
    }

    #[inline]
    pub fn add(&mut self, x: usize, a: usize, v: f64) {
        self.w[x * self.k + a] += v;
    }

    pub fn add_example(&mut self, ex: &WeightedExample) -> Result<()> {
        if ex.context.0 >= self.num_contexts || ex.reward_weights.len() != self.k {
            return Err(Error::input(format!(
                "example (x={}, |r|={}) does not fit |X|={}, K={}",
                ex.context,
                ex.reward_weights.len(),
                self.num_contexts,
                self.k
            )));
        }
        if ex.reward_weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite reward weight"));
        }
        let row = &mut self.w[ex.context.0 * self.k..(ex.context.0 + 1) * self.k];
        for (slot, v) in row.iter_mut().zip(&ex.reward_weights) {
            *slot += v;
        }
        Ok(())
    }

    pub fn num_contexts(&self) -> usize {
        self.num_contexts
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Argmax oracle: the lowest-index policy maximizing `sum_{(x,r) in T} r(pi(x))`,
/// together with that maximum. An empty dataset yields `(0, 0.0)`.
pub fn erm_oracle(dataset: &[WeightedExample], class: &PolicyClass) -> Result<(usize, f64)> {
    let mut table = WeightTable::zeros(class.num_contexts(), class.k());
    for ex in dataset {
        table.add_example(ex)?;
    }
    Ok(class.argmax(&table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_constant() -> PolicyClass {
        PolicyClass::new(
            2,
            1,
            vec![
                PolicyTable::from_indices(&[0], 2).unwrap(),
                PolicyTable::from_indices(&[1], 2).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let p = PolicyTable::from_indices(&[0, 1], 2).unwrap();
        assert_eq!(evaluate_policy(&p, ContextId(1)).unwrap(), ActionId(1));
        let p = PolicyTable::from_indices(&[2, 2, 2], 3).unwrap();
        assert_eq!(evaluate_policy(&p, ContextId(0)).unwrap(), ActionId(2));
        let p = PolicyTable::from_indices(&[1, 0], 2).unwrap();
        assert_eq!(evaluate_policy(&p, ContextId(0)).unwrap(), ActionId(1));
        assert!(matches!(evaluate_policy(&p, ContextId(2)), Err(Error::Input(_))));
    }

    #[test]
    fn projection_examples() {
        let class = PolicyClass::new(
            3,
            1,
            vec![
                PolicyTable::from_indices(&[2], 3).unwrap(),
                PolicyTable::from_indices(&[0], 3).unwrap(),
            ],
        )
        .unwrap();
        let q = SparsePolicyDistribution::point_mass(0);
        let d = project_distribution(&q, ContextId(0), &class).unwrap();
        assert_eq!(d.probs(), &[0.0, 0.0, 1.0]);

        let class = PolicyClass::new(
            2,
            1,
            vec![
                PolicyTable::from_indices(&[0], 2).unwrap(),
                PolicyTable::from_indices(&[0], 2).unwrap(),
            ],
        )
        .unwrap();
        let q = SparsePolicyDistribution::new(vec![(0, 0.5), (1, 0.5)], 2).unwrap();
        assert_eq!(project_distribution(&q, ContextId(0), &class).unwrap().probs(), &[1.0, 0.0]);

        let q = SparsePolicyDistribution::new(vec![(0, 0.25), (1, 0.75)], 2).unwrap();
        let d = project_distribution(&q, ContextId(0), &two_constant()).unwrap();
        assert_eq!(d.probs(), &[0.25, 0.75]);
    }

    #[test]
    fn smoothing_examples() {
        let d = ActionDistribution::new(vec![0.0, 1.0, 0.0]).unwrap();
        let s = smooth_distribution(&d, 0.1, 3).unwrap();
        for (got, want) in s.probs().iter().zip([0.1, 0.8, 0.1]) {
            assert!((got - want).abs() < 1e-15);
        }
        let s = smooth_distribution(&d, 1.0 / 3.0, 3).unwrap();
        for p in s.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        let d = ActionDistribution::new(vec![0.25, 0.75]).unwrap();
        let s = smooth_distribution(&d, 0.05, 2).unwrap();
        assert!((s.probs()[0] - 0.275).abs() < 1e-15);
        assert!((s.probs()[1] - 0.725).abs() < 1e-15);
        assert!((s.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);

        assert!(smooth_distribution(&d, 0.0, 2).is_err());
        assert!(smooth_distribution(&d, 0.51, 2).is_err());
    }

    #[test]
    fn oracle_examples() {
        let class = two_constant();
        let x = ContextId(0);
        let t = vec![
            WeightedExample::new(x, vec![1.0, 0.0]),
            WeightedExample::new(x, vec![0.0, 1.0]),
            WeightedExample::new(x, vec![1.0, 0.0]),
        ];
        assert_eq!(erm_oracle(&t, &class).unwrap(), (0, 2.0));
        assert_eq!(erm_oracle(&[], &class).unwrap(), (0, 0.0));
        let t = vec![WeightedExample::new(x, vec![-1.0, 3.0])];
        assert_eq!(erm_oracle(&t, &class).unwrap(), (1, 3.0));
    }

    #[test]
    fn sparse_distribution_validation() {
        assert!(SparsePolicyDistribution::new(vec![(0, 0.5), (0, 0.5)], 2).is_err());
        assert!(SparsePolicyDistribution::new(vec![(2, 1.0)], 2).is_err());
        assert!(SparsePolicyDistribution::new(vec![(0, 0.5)], 2).is_err());
        assert!(SparsePolicyDistribution::new(vec![(0, -0.5), (1, 1.5)], 2).is_err());
        let q = SparsePolicyDistribution::new(vec![(0, 0.0), (1, 1.0)], 2).unwrap();
        assert_eq!(q.support_size(), 1);
    }

    #[test]
    fn policy_class_json_roundtrip() {
        let class = PolicyClass::random(5, 3, 4, 11).unwrap();
        let back = PolicyClass::from_json(&class.to_json()).unwrap();
        assert_eq!(class, back);
        assert!(PolicyClass::from_json(r#"{"K":2,"num_contexts":1,"policies":[[2]]}"#).is_err());
        assert!(PolicyClass::from_json(r#"{"K":2,"num_contexts":2,"policies":[[1]]}"#).is_err());
    }

    #[test]
    fn all_tables_enumerates_every_map() {
        let class = PolicyClass::all_tables(2, 3).unwrap();
        assert_eq!(class.len(), 8);
        let mut seen = std::collections::HashSet::new();
        for p in class.iter() {
            assert!(seen.insert(p.actions().to_vec()));
        }
        assert_eq!(class.get(1).unwrap().actions(), &[ActionId(0), ActionId(0), ActionId(1)]);
    }

    fn instance() -> impl Strategy<Value = (PolicyClass, Vec<WeightedExample>)> {
        (2usize..=8, 1usize..=16, 1usize..=64, any::<u64>()).prop_flat_map(|(k, nx, np, seed)| {
            let class = PolicyClass::random(np, k, nx, seed).unwrap();
            let ex = (0..nx, proptest::collection::vec(-5.0f64..5.0, k))
                .prop_map(|(x, r)| WeightedExample::new(ContextId(x), r));
            (Just(class), proptest::collection::vec(ex, 0..40))
        })
    }

    // independent route: loop over policies, then over examples
    fn brute_force(class: &PolicyClass, data: &[WeightedExample]) -> (usize, f64) {
        let values: Vec<f64> = class
            .iter()
            .map(|p| {
                data.iter()
                    .map(|e| e.reward_weights[p.action(e.context.0)])
                    .sum::<f64>()
            })
            .collect();
        argmax_lowest_index(&values)
    }

    proptest! {
        #[test]
        fn oracle_matches_brute_force((class, data) in instance()) {
            let (i, v) = erm_oracle(&data, &class).unwrap();
            let (bi, bv) = brute_force(&class, &data);
            prop_assert_eq!(i, bi);
            prop_assert!((v - bv).abs() <= 1e-9);
        }

        #[test]
        fn oracle_permutation_invariant((class, data) in instance(), rot in 0usize..40) {
            let (i, v) = erm_oracle(&data, &class).unwrap();
            let mut perm = data.clone();
            perm.reverse();
            if !perm.is_empty() {
                let r = rot % perm.len();
                perm.rotate_left(r);
            }
            let (pi, pv) = erm_oracle(&perm, &class).unwrap();
            prop_assert_eq!(i, pi);
            prop_assert!((v - pv).abs() <= 1e-9);
        }

        #[test]
        fn projection_is_a_distribution(
            seed in any::<u64>(),
            weights in proptest::collection::vec(0.01f64..1.0, 1..20),
            x in 0usize..6,
        ) {
            let class = PolicyClass::random(weights.len(), 4, 6, seed).unwrap();
            let total: f64 = weights.iter().sum();
            let q = SparsePolicyDistribution::new(
                weights.iter().enumerate().map(|(i, w)| (i, w / total)).collect(),
                class.len(),
            ).unwrap();
            let d = project_distribution(&q, ContextId(x), &class).unwrap();
            prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(d.probs().iter().all(|p| (0.0..=1.0).contains(p)));
        }

        #[test]
        fn smoothing_respects_floor(
            raw in proptest::collection::vec(0.0f64..1.0, 2..8),
            frac in 0.001f64..=1.0,
        ) {
            let k = raw.len();
            let total: f64 = raw.iter().sum::<f64>() + 1e-3;
            let mut probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
            probs[0] += 1.0 - probs.iter().sum::<f64>();
            let d = ActionDistribution::from_raw(probs);
            let nu = frac / k as f64;
            let s = smooth_distribution(&d, nu, k).unwrap();
            prop_assert!(s.min() >= nu - 1e-15);
            prop_assert!((s.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}
