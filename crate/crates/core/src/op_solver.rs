//! Sparse low-regret, low-variance policy distributions.
//!
//! Given interval statistics, a minimum exploration probability `nu` and a
//! constant `C`, find `Q` in the simplex over the policy class with
//!
//! ```text
//! sum_pi Q(pi) Reg(pi)         <= 2 C K nu                    (regret)
//! V(Q, nu, pi)                 <= 2K + Reg(pi) / (C nu)   for all pi   (variance)
//! ```
//!
//! where `Reg` and `V` are the empirical regret and variance on the interval.
//! The solver is a coordinate descent over a sub-distribution whose missing
//! mass sits on the empirically best policy. Each iteration rescales the
//! sub-distribution if the regret budget is exceeded, then asks the argmax
//! oracle for the policy with the largest variance-constraint violation and
//! takes a closed-form step on it. Every step decreases a convex potential,
//! so the loop ends after finitely many oracle calls.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{History, Interval, IntervalStats, SmoothedProjection};
use crate::policy::{argmax_lowest_index, check_nu, PolicyClass, SparsePolicyDistribution, WeightTable};

/// Regret/variance trade-off constant at full scale.
pub const THEORY_C: f64 = 1.2e7;

/// Absolute slack allowed on either constraint.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Largest class the exhaustive cross-check solver accepts.
pub const EXHAUSTIVE_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Oracle-call cap (and hence support bound) is `ceil(sparsity_constant / nu)`.
    pub sparsity_constant: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sparsity_constant: 64.0,
        }
    }
}

impl SolverConfig {
    pub fn iteration_cap(&self, nu: f64) -> usize {
        (self.sparsity_constant / nu).ceil() as usize
    }
}

#[derive(Debug, Clone)]
pub struct OpInstance<'a> {
    stats: IntervalStats,
    nu: f64,
    class: &'a PolicyClass,
    c: f64,
}

impl<'a> OpInstance<'a> {
    pub fn new(stats: IntervalStats, nu: f64, class: &'a PolicyClass, c: f64) -> Result<Self> {
        check_nu(nu, class.k())?;
        if stats.is_empty() {
            return Err(Error::input("optimization problem over an empty interval"));
        }
        if stats.k() != class.k() || stats.num_contexts() != class.num_contexts() {
            return Err(Error::input("interval statistics do not match the policy class"));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::input(format!("constant C={c} must be positive")));
        }
        Ok(Self { stats, nu, class, c })
    }

    pub fn from_history(h: &History, i: Interval, nu: f64, class: &'a PolicyClass, c: f64) -> Result<Self> {
        Self::new(IntervalStats::from_history(h, i, class)?, nu, class, c)
    }

    pub fn stats(&self) -> &IntervalStats {
        &self.stats
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn k(&self) -> usize {
        self.class.k()
    }

    pub fn class(&self) -> &PolicyClass {
        self.class
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCheck {
    pub policy: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// Left/right-hand sides and slacks (`rhs - lhs`) of both constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityCertificate {
    pub regret_lhs: f64,
    pub regret_rhs: f64,
    pub regret_slack: f64,
    pub variance: Vec<VarianceCheck>,
    pub worst_variance_policy: usize,
    pub worst_variance_slack: f64,
    pub feasible: bool,
}

impl FeasibilityCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }
}

/// Evaluates both constraints for every policy by enumeration.
pub fn check_op_feasibility(q: &SparsePolicyDistribution, inst: &OpInstance<'_>) -> Result<FeasibilityCertificate> {
    let class = inst.class;
    let k = class.k() as f64;
    let regrets = inst.stats.regrets(class)?;
    if let Some(&(bad, _)) = q.entries().iter().find(|e| e.0 >= class.len()) {
        return Err(Error::input(format!("policy {bad} not in class")));
    }
    let regret_lhs: f64 = q.entries().iter().map(|&(i, w)| w * regrets[i]).sum();
    let regret_rhs = 2.0 * inst.c * k * inst.nu;
    let smoothed = SmoothedProjection::new(q, inst.nu, class)?;
    let mut variance = Vec::with_capacity(class.len());
    for (idx, pi) in class.iter().enumerate() {
        let lhs = inst.stats.variance(&smoothed, pi)?;
        let rhs = 2.0 * k + regrets[idx] / (inst.c * inst.nu);
        variance.push(VarianceCheck {
            policy: idx,
            lhs,
            rhs,
            slack: rhs - lhs,
        });
    }
    let worst = variance
        .iter()
        .min_by(|a, b| a.slack.total_cmp(&b.slack).then(a.policy.cmp(&b.policy)))
        .expect("class is non-empty");
    let regret_slack = regret_rhs - regret_lhs;
    Ok(FeasibilityCertificate {
        regret_lhs,
        regret_rhs,
        regret_slack,
        worst_variance_policy: worst.policy,
        worst_variance_slack: worst.slack,
        feasible: regret_slack >= -FEASIBILITY_TOLERANCE && worst.slack >= -FEASIBILITY_TOLERANCE,
        variance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpSolution {
    pub q: SparsePolicyDistribution,
    /// Oracle calls (or exhaustive scans) performed.
    pub iterations: usize,
    pub certificate: FeasibilityCertificate,
    /// Potential after every accepted update, for monotonicity checks.
    pub potential_trace: Vec<f64>,
}

/// How the most violated variance constraint is located.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Search {
    Oracle,
    Exhaustive,
}

struct Descent<'i, 'a> {
    inst: &'i OpInstance<'a>,
    n: f64,
    best_value: f64,
    best_policy: usize,
    /// sub-distribution: policy -> (weight, b_pi)
    weights: BTreeMap<usize, (f64, f64)>,
    /// unsmoothed projection of the sub-distribution, |X| x K
    raw: Vec<f64>,
}

impl<'i, 'a> Descent<'i, 'a> {
    fn new(inst: &'i OpInstance<'a>) -> Result<Self> {
        let (best_policy, best_value) = inst.stats.empirical_best(inst.class)?;
        Ok(Self {
            inst,
            n: inst.stats.len() as f64,
            best_value,
            best_policy,
            weights: BTreeMap::new(),
            raw: vec![0.0; inst.class.num_contexts() * inst.class.k()],
        })
    }

    fn k(&self) -> usize {
        self.inst.class.k()
    }

    #[inline]
    fn smoothed(&self, x: usize, a: usize) -> f64 {
        let k = self.k();
        self.inst.nu + (1.0 - k as f64 * self.inst.nu) * self.raw[x * k + a]
    }

    /// `b_pi = Reg(pi) / (C nu)`.
    fn b(&self, policy: usize) -> Result<f64> {
        let reward = self.inst.stats.avg_reward(&self.inst.class.policies()[policy])?;
        Ok((self.best_value - reward) / (self.inst.c * self.inst.nu))
    }

    /// `(V_pi, S_pi)`: mean of `1/Q^nu` and of `1/(Q^nu)^2` along `pi`.
    fn moments(&self, policy: usize) -> (f64, f64) {
        let pi = &self.inst.class.policies()[policy];
        let (mut v, mut s) = (0.0, 0.0);
        for (x, &c) in self.inst.stats.context_counts().iter().enumerate() {
            if c == 0 {
                continue;
            }
            let q = self.smoothed(x, pi.action(x));
            v += c as f64 / q;
            s += c as f64 / (q * q);
        }
        (v / self.n, s / self.n)
    }

    fn potential(&self) -> f64 {
        let k = self.k();
        let kf = k as f64;
        let u = 1.0 / kf;
        let mut re = 0.0;
        for (x, &c) in self.inst.stats.context_counts().iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut row = 0.0;
            for a in 0..k {
                let q = self.smoothed(x, a);
                row += u * (u / q).ln() + q - u;
            }
            re += c as f64 * row;
        }
        re /= self.n;
        let budget: f64 = self.weights.values().map(|(w, b)| w * b).sum();
        re / (1.0 - kf * self.inst.nu) + budget / (2.0 * kf)
    }

    /// Rescales so that `sum Q(pi)(2K + b_pi) <= 2K`.
    fn rescale(&mut self) {
        let two_k = 2.0 * self.k() as f64;
        let total: f64 = self.weights.values().map(|(w, b)| w * (two_k + b)).sum();
        if total > two_k {
            let factor = two_k / total;
            for (w, _) in self.weights.values_mut() {
                *w *= factor;
            }
            for v in &mut self.raw {
                *v *= factor;
            }
        }
    }

    /// Policy with the largest `D_pi = V_pi - 2K - b_pi`, and that value.
    fn most_violated(&self, search: Search) -> Result<(usize, f64)> {
        let inst = self.inst;
        let (nx, k) = (inst.class.num_contexts(), self.k());
        let two_k = 2.0 * k as f64;
        let cnu = inst.c * inst.nu;
        match search {
            Search::Oracle => {
                // r(x, a) = count(x) / (n Q^nu(a|x)) + ips(x, a) / (n C nu), so that
                // sum_x r(x, pi(x)) = V_pi + bar R(pi) / (C nu)
                let mut table = WeightTable::zeros(nx, k);
                let counts = inst.stats.context_counts();
                let mass = inst.stats.ips_mass();
                for (x, &c) in counts.iter().enumerate().take(nx) {
                    let c = c as f64;
                    for a in 0..k {
                        let mut v = mass.get(x, a) / (self.n * cnu);
                        if c > 0.0 {
                            v += c / (self.n * self.smoothed(x, a));
                        }
                        table.add(x, a, v);
                    }
                }
                let (idx, value) = inst.class.argmax(&table);
                Ok((idx, value - self.best_value / cnu - two_k))
            }
            Search::Exhaustive => {
                let mut d = Vec::with_capacity(inst.class.len());
                for idx in 0..inst.class.len() {
                    let (v, _) = self.moments(idx);
                    d.push(v - two_k - self.b(idx)?);
                }
                Ok(argmax_lowest_index(&d))
            }
        }
    }

    fn step(&mut self, policy: usize, violation: f64) -> Result<()> {
        let (v, s) = self.moments(policy);
        let k = self.k();
        let alpha = (v + violation) / (2.0 * (1.0 - k as f64 * self.inst.nu) * s);
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::SolverFailure {
                iterations: 0,
                policy,
                violation,
            });
        }
        let b = self.b(policy)?;
        let entry = self.weights.entry(policy).or_insert((0.0, b));
        entry.0 += alpha;
        let pi = &self.inst.class.policies()[policy];
        for x in 0..self.inst.class.num_contexts() {
            self.raw[x * k + pi.action(x)] += alpha;
        }
        Ok(())
    }

    fn finish(self) -> Result<SparsePolicyDistribution> {
        let mass: f64 = self.weights.values().map(|(w, _)| w).sum();
        let mut entries: BTreeMap<usize, f64> = self.weights.iter().map(|(&i, &(w, _))| (i, w)).collect();
        let rest = (1.0 - mass).max(0.0);
        *entries.entry(self.best_policy).or_insert(0.0) += rest;
        let total: f64 = entries.values().sum();
        SparsePolicyDistribution::new(
            entries.into_iter().map(|(i, w)| (i, w / total)).collect(),
            self.inst.class.len(),
        )
    }
}

fn solve(inst: &OpInstance<'_>, config: &SolverConfig, search: Search) -> Result<OpSolution> {
    let cap = config.iteration_cap(inst.nu).max(1);
    let mut descent = Descent::new(inst)?;
    let mut trace = vec![descent.potential()];
    let mut calls = 0;
    loop {
        descent.rescale();
        let (policy, violation) = descent.most_violated(search)?;
        calls += 1;
        if violation <= 0.0 {
            break;
        }
        if calls >= cap {
            return Err(Error::SolverFailure {
                iterations: calls,
                policy,
                violation,
            });
        }
        descent.step(policy, violation).map_err(|e| match e {
            Error::SolverFailure { policy, violation, .. } => Error::SolverFailure {
                iterations: calls,
                policy,
                violation,
            },
            other => other,
        })?;
        trace.push(descent.potential());
    }
    let q = descent.finish()?;
    let certificate = check_op_feasibility(&q, inst)?;
    if !certificate.feasible {
        return Err(Error::SolverFailure {
            iterations: calls,
            policy: certificate.worst_variance_policy,
            violation: -certificate.worst_variance_slack.min(certificate.regret_slack),
        });
    }
    Ok(OpSolution {
        q,
        iterations: calls,
        certificate,
        potential_trace: trace,
    })
}

/// Oracle-based coordinate descent.
pub fn solve_op(inst: &OpInstance<'_>) -> Result<OpSolution> {
    solve(inst, &SolverConfig::default(), Search::Oracle)
}

pub fn solve_op_with(inst: &OpInstance<'_>, config: &SolverConfig) -> Result<OpSolution> {
    solve(inst, config, Search::Oracle)
}

/// Same update rule, but every policy's violation is computed directly.
/// Meant as a cross-check on small classes.
pub fn solve_op_exhaustive(inst: &OpInstance<'_>) -> Result<OpSolution> {
    if inst.class.len() > EXHAUSTIVE_LIMIT {
        return Err(Error::Unsupported(format!(
            "exhaustive solver handles at most {EXHAUSTIVE_LIMIT} policies, got {}",
            inst.class.len()
        )));
    }
    solve(inst, &SolverConfig::default(), Search::Exhaustive)
}
