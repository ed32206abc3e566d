//! Solver for the L-infinity ball over all subsets of the ground set.
//!
//! Mass `min(p_A, r)` of each scenario is free: the adversary can move it
//! anywhere. The proxy objective is `c.x + E_p[g(x, A)]` plus the best way
//! to place `P_free` of extra mass with at most `r` per scenario, which a
//! greedy fill over the costliest scenarios solves exactly.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::ellipsoid::{minimize_convex, ConvexConfig, ConvexOutcome};
use crate::error::{DroError, Result};
use crate::model::{mix_seed, norm, Center, Distribution, Evaluator, Scenario, TwoStageProblem};

/// Multiplier on the Hoeffding sample sizes.
pub const CHERNOFF_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeMassEstimate {
    pub p_free_hat: f64,
    /// Scenarios seen with frequency at least `r/2` in the first round and
    /// their refined frequencies.
    pub frequent: Vec<(Scenario, f64)>,
    pub delta: f64,
    pub first_round: u64,
    pub second_round: u64,
}

/// `sum_A min(p_A, r)`.
pub fn free_mass(center: &Distribution, radius: f64) -> f64 {
    center.atoms().iter().map(|&(_, p)| p.min(radius)).sum::<f64>().min(1.0)
}

/// Samples needed for every one of `count` frequencies to be within `t`
/// with probability `1 - delta`.
fn hoeffding(t: f64, count: f64, delta: f64) -> u64 {
    (CHERNOFF_CONSTANT * (2.0 * count / delta).ln() / (2.0 * t * t)).ceil().max(1.0) as u64
}

/// Two sampling rounds: the first finds the scenarios whose frequency can
/// exceed `r`, the second estimates those frequencies closely enough that
/// `P_free <= p_free_hat <= min((1 + eps') P_free, 1)` with probability at
/// least `1 - 2 delta`.
pub fn estimate_free_mass(center: &Center, radius: f64, eps_prime: f64, delta: f64, seed: u64) -> Result<FreeMassEstimate> {
    if !(radius > 0.0) {
        return Err(DroError::InvalidInstance("L-infinity radius must be positive".into()));
    }
    if radius >= 1.0 {
        return Ok(FreeMassEstimate { p_free_hat: 1.0, frequent: Vec::new(), delta, first_round: 0, second_round: 0 });
    }
    let n1 = hoeffding(radius / 4.0, 4.0 / radius, delta);
    let first = center.sample(mix_seed(seed, 0), n1);
    let freq: Vec<Scenario> = first
        .counts()
        .iter()
        .filter(|&(_, &c)| c as f64 / n1 as f64 >= radius / 2.0)
        .map(|(&s, _)| s)
        .collect();
    if freq.is_empty() {
        // Every scenario is lighter than r, so all mass is free.
        return Ok(FreeMassEstimate { p_free_hat: 1.0, frequent: Vec::new(), delta, first_round: n1, second_round: 0 });
    }
    let t = eps_prime * radius / (4.0 * freq.len() as f64);
    let n2 = hoeffding(t, freq.len() as f64, delta);
    let second = center.sample(mix_seed(seed, 1), n2);
    let frequent: Vec<(Scenario, f64)> =
        freq.iter().map(|&s| (s, second.counts().get(&s).copied().unwrap_or(0) as f64 / n2 as f64)).collect();
    let heavy: f64 = frequent.iter().map(|f| f.1).sum();
    let q = (1.0 - heavy).max(0.0) + frequent.iter().map(|f| f.1.min(radius)).sum::<f64>();
    Ok(FreeMassEstimate {
        p_free_hat: (q + eps_prime * radius / 2.0).min(1.0),
        frequent,
        delta,
        first_round: n1,
        second_round: n2,
    })
}

/// Costliest scenarios first: the ground set, then repeatedly the costliest
/// maximal proper subset of a listed scenario. Under monotone `g` the list
/// is sorted and dominates every unlisted scenario. Ties go to the smaller
/// bitset.
pub fn good_k_sequence(eval: &Evaluator, ground: usize, k: usize) -> Result<Vec<(Scenario, f64)>> {
    let mut seq: Vec<(Scenario, f64)> = Vec::new();
    let mut frontier: BTreeMap<Scenario, f64> = BTreeMap::new();
    let full = Scenario::full(ground);
    frontier.insert(full, eval.value(full)?);
    while seq.len() < k {
        let Some((&s, &v)) = frontier.iter().fold(None, |best: Option<(&Scenario, &f64)>, cur| match best {
            Some(b) if *b.1 >= *cur.1 - 1e-12 => Some(b),
            _ => Some(cur),
        }) else {
            break;
        };
        frontier.remove(&s);
        seq.push((s, v));
        let children: Vec<Scenario> = s
            .elements()
            .map(|j| s.without(j))
            .filter(|c| !frontier.contains_key(c) && !seq.iter().any(|(t, _)| t == c))
            .collect();
        let values: Vec<f64> = children.par_iter().map(|&c| eval.value(c)).collect::<Result<_>>()?;
        frontier.extend(children.into_iter().zip(values));
    }
    Ok(seq)
}

/// Greedy fill of `max { sum q_i g_i : 0 <= q_i <= r, sum q_i <= p_free }`
/// for values sorted in nonincreasing order.
pub fn optimal_q(p_free_hat: f64, radius: f64, len: usize) -> Vec<f64> {
    if len == 0 || p_free_hat <= 0.0 {
        return vec![0.0; len];
    }
    let k = ((p_free_hat / radius).ceil() as usize).clamp(1, len);
    let mut q = vec![0.0; len];
    for v in q.iter_mut().take(k - 1) {
        *v = radius;
    }
    q[k - 1] = radius.min(p_free_hat - (k - 1) as f64 * radius).max(0.0);
    q
}

/// How the proxy handles `E_p`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expectation {
    Exact(Distribution),
    /// Average over `samples` draws of the center with this seed.
    Sampled { center: Center, seed: u64, samples: u64 },
}

impl Expectation {
    pub fn for_center(center: &Center, seed: u64, samples: u64) -> Self {
        match center {
            Center::Explicit(d) => Expectation::Exact(d.clone()),
            c => Expectation::Sampled { center: c.clone(), seed, samples },
        }
    }

    fn weights(&self, samples: u64, seed_index: u64) -> Result<Distribution> {
        match self {
            Expectation::Exact(d) => Ok(d.clone()),
            Expectation::Sampled { center, seed, .. } => center.sample(mix_seed(*seed, seed_index), samples).distribution(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Proxy {
    pub expectation: Expectation,
    pub radius: f64,
    pub p_free_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProxyPoint {
    pub value: f64,
    pub expectation: f64,
    pub k_max: f64,
    pub sequence: Vec<(Scenario, f64)>,
    pub weights: Vec<f64>,
}

impl Proxy {
    fn k_len(&self, ground: usize) -> usize {
        let k = (self.p_free_hat / self.radius).ceil().max(1.0);
        if ground < 63 {
            (k as usize).min(1usize << ground)
        } else {
            k as usize
        }
    }

    /// `c.x + E_p[g(x, A)] + max_{q in K} sum q_A g(x, A)`.
    pub fn value(&self, eval: &Evaluator) -> Result<ProxyPoint> {
        let p = eval.problem();
        let dist = match &self.expectation {
            Expectation::Exact(d) => d.clone(),
            Expectation::Sampled { samples, .. } => self.expectation.weights(*samples, 0)?,
        };
        let expectation = dist.expectation(|a| eval.value(a))?;
        let sequence = good_k_sequence(eval, p.ground_size(), self.k_len(p.ground_size()))?;
        let weights = optimal_q(self.p_free_hat, self.radius, sequence.len());
        let k_max = sequence.iter().zip(&weights).map(|((_, g), q)| g * q).sum::<f64>();
        Ok(ProxyPoint { value: p.first_stage_cost(eval.x()) + expectation + k_max, expectation, k_max, sequence, weights })
    }

    /// `c + d_hat + sum q_A d(x, A)` where `d_hat` is the mean subgradient
    /// shifted by `-omega c / 2`. Sampled centers use
    /// `ceil((2 lambda^2 / omega^2) ln(2m / delta))` draws, at most `cap`.
    pub fn subgradient(&self, eval: &Evaluator, point: &ProxyPoint, omega: f64, delta: f64, cap: u64) -> Result<Vec<f64>> {
        let p = eval.problem();
        let c = p.first_stage_costs();
        let m = c.len();
        let dist = match &self.expectation {
            Expectation::Exact(d) => d.clone(),
            Expectation::Sampled { .. } => {
                let lambda = p.inflation();
                let n = (2.0 * lambda * lambda / (omega * omega) * (2.0 * m as f64 / delta).ln()).ceil().max(1.0);
                self.expectation.weights((n as u64).min(cap), 1)?
            }
        };
        let mut d: Vec<f64> = c.iter().map(|ci| ci * (1.0 - omega / 2.0)).collect();
        for &(a, w) in dist.atoms() {
            let r = eval.recourse(a)?;
            for (dj, sj) in d.iter_mut().zip(&r.subgradient) {
                *dj += w * sj;
            }
        }
        for ((a, _), &q) in point.sequence.iter().zip(&point.weights) {
            if q > 0.0 {
                let r = eval.recourse(*a)?;
                for (dj, sj) in d.iter_mut().zip(&r.subgradient) {
                    *dj += q * sj;
                }
            }
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinftyConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Draws for the proxy expectation with a sampled center.
    pub expectation_samples: u64,
    /// Upper limit on draws for one subgradient estimate.
    pub sample_cap: u64,
    pub iteration_cap: Option<usize>,
}

impl Default for LinftyConfig {
    fn default() -> Self {
        Self { epsilon: 0.1, delta: 0.05, seed: 0, expectation_samples: 2000, sample_cap: 20_000, iteration_cap: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinftyReport {
    pub x: Vec<f64>,
    pub proxy_value: f64,
    pub p_free_hat: f64,
    /// `None` when nothing ever needs recourse and `x = 0` is returned.
    pub search: Option<ConvexOutcome>,
}

/// Minimises the proxy over the box with approximate subgradients. The free
/// mass is exact for explicit centers and estimated otherwise.
pub fn solve_linfty(problem: &dyn TwoStageProblem, center: &Center, radius: f64, config: &LinftyConfig) -> Result<LinftyReport> {
    let m = problem.num_decisions();
    let zero = Evaluator::new(problem, vec![0.0; m])?;
    let worst = zero.value(Scenario::full(problem.ground_size()))?;
    if worst <= 0.0 {
        return Ok(LinftyReport { x: vec![0.0; m], proxy_value: 0.0, p_free_hat: 0.0, search: None });
    }
    let p_free_hat = match center {
        Center::Explicit(d) => free_mass(d, radius),
        c => estimate_free_mass(c, radius, config.epsilon, config.delta, mix_seed(config.seed, 2))?.p_free_hat,
    };
    let proxy = Proxy { expectation: Expectation::for_center(center, mix_seed(config.seed, 3), config.expectation_samples), radius, p_free_hat };
    let c = problem.first_stage_costs();
    let lb = radius.min(1.0) * worst;
    let cfg = ConvexConfig {
        epsilon: config.epsilon,
        kappa: config.epsilon * lb,
        lipschitz: (2.0 * problem.inflation() + 1.0) * norm(c),
        iteration_cap: config.iteration_cap,
    };
    let out = minimize_convex(m, &cfg, |x, omega| {
        let eval = Evaluator::new(problem, x.to_vec())?;
        let point = proxy.value(&eval)?;
        let sub = proxy.subgradient(&eval, &point, omega, config.delta, config.sample_cap)?;
        Ok((point.value, sub))
    })?;
    Ok(LinftyReport { x: out.x.clone(), proxy_value: out.value, p_free_hat, search: Some(out) })
}
