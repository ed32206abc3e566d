//! Scenarios, scenario metrics, distributions, ambiguity balls and the
//! two-stage problem interface shared by every solver.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DroError, Result};
use crate::lp::{LinearProgram, Relation, Sense};

/// Largest ground set representable by a [`Scenario`].
pub const MAX_GROUND: usize = 64;

/// A scenario is a subset of the ground set, stored as a bitset. The derived
/// ordering (numeric order of the mask) is the tie-break order used
/// throughout the crate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Scenario(pub u64);

impl Scenario {
    pub const EMPTY: Scenario = Scenario(0);

    pub fn full(ground: usize) -> Self {
        if ground >= 64 {
            Scenario(u64::MAX)
        } else {
            Scenario((1u64 << ground) - 1)
        }
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(elements: I) -> Self {
        Scenario(elements.into_iter().fold(0u64, |m, j| m | (1u64 << j)))
    }

    pub fn contains(self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    pub fn with(self, j: usize) -> Self {
        Scenario(self.0 | (1u64 << j))
    }

    pub fn without(self, j: usize) -> Self {
        Scenario(self.0 & !(1u64 << j))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: Scenario) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn minus(self, other: Scenario) -> Self {
        Scenario(self.0 & !other.0)
    }

    pub fn union(self, other: Scenario) -> Self {
        Scenario(self.0 | other.0)
    }

    pub fn elements(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let j = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(j)
            }
        })
    }
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elements()).finish()
    }
}

/// The scenario collection: all subsets of the ground set, optionally
/// restricted to at most `max_size` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpace {
    pub ground: usize,
    pub max_size: Option<usize>,
}

impl ScenarioSpace {
    pub fn all_subsets(ground: usize) -> Self {
        Self { ground, max_size: None }
    }

    pub fn bounded(ground: usize, k: usize) -> Self {
        Self { ground, max_size: Some(k) }
    }

    pub fn is_all_subsets(&self) -> bool {
        self.max_size.is_none_or(|k| k >= self.ground)
    }

    pub fn bound(&self) -> usize {
        self.max_size.unwrap_or(self.ground).min(self.ground)
    }

    pub fn contains(&self, a: Scenario) -> bool {
        a.is_subset(Scenario::full(self.ground)) && a.len() <= self.bound()
    }

    pub fn count(&self) -> usize {
        let k = self.bound();
        let mut total = 0usize;
        let mut binom = 1usize;
        for i in 0..=k {
            total = total.saturating_add(binom);
            binom = binom.saturating_mul(self.ground - i) / (i + 1);
        }
        total
    }

    /// Every scenario in increasing mask order, refusing spaces above `guard`.
    pub fn enumerate(&self, guard: usize) -> Result<Vec<Scenario>> {
        let size = self.count();
        if self.ground > 30 || size > guard {
            return Err(DroError::EnumerationTooLarge { what: "scenarios", size, guard });
        }
        let k = self.bound();
        Ok((0u64..(1u64 << self.ground))
            .map(Scenario)
            .filter(|s| s.len() <= k)
            .collect())
    }
}

/// Ground distances plus an optional virtual anchor that is implicitly
/// present in every scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundMetric {
    pub dist: Vec<Vec<f64>>,
    pub anchor: Option<Vec<f64>>,
}

impl GroundMetric {
    pub fn new(dist: Vec<Vec<f64>>, anchor: Option<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(DroError::DimensionMismatch { expected: n, got: row.len() });
            }
            if row.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) || row[i] != 0.0 {
                return Err(DroError::InvalidInstance("ground distances must be finite, nonnegative, zero on the diagonal".into()));
            }
        }
        if let Some(a) = &anchor {
            if a.len() != n || a.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
                return Err(DroError::InvalidInstance("anchor distances malformed".into()));
            }
        }
        Ok(Self { dist, anchor })
    }

    /// Euclidean distances between points, with an optional anchor point.
    pub fn euclidean(points: &[Vec<f64>], anchor: Option<&[f64]>) -> Result<Self> {
        let dist = points
            .iter()
            .map(|p| points.iter().map(|q| euclid(p, q)).collect())
            .collect();
        let anchor = anchor.map(|a| points.iter().map(|p| euclid(p, a)).collect());
        Self::new(dist, anchor)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    /// Distance from `j` to the nearest member of `a` or the anchor.
    fn reach(&self, a: Scenario, j: usize) -> f64 {
        let from_set = a.elements().map(|k| self.dist[k][j]).fold(f64::INFINITY, f64::min);
        match &self.anchor {
            Some(anchor) => from_set.min(anchor[j]),
            None => from_set,
        }
    }
}

pub(crate) fn euclid(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScenarioMetric {
    /// Distance 1 between distinct scenarios.
    Discrete,
    /// `max_{j' in B} min_{j in A} d(j, j')`, the cost of reaching every new
    /// element of `B` from the nearest element of `A`.
    AsymInf(GroundMetric),
}

impl ScenarioMetric {
    pub fn distance(&self, a: Scenario, b: Scenario) -> Result<f64> {
        match self {
            ScenarioMetric::Discrete => Ok(if a == b { 0.0 } else { 1.0 }),
            ScenarioMetric::AsymInf(g) => {
                let mut worst = 0.0f64;
                for j in b.elements() {
                    let r = g.reach(a, j);
                    if r.is_infinite() {
                        return Err(DroError::AnchorMissing);
                    }
                    worst = worst.max(r);
                }
                Ok(worst)
            }
        }
    }

    /// An upper bound on every finite scenario distance.
    pub fn max_distance(&self) -> f64 {
        match self {
            ScenarioMetric::Discrete => 1.0,
            ScenarioMetric::AsymInf(g) => {
                let pair = g.dist.iter().flatten().copied().fold(0.0, f64::max);
                let anchor = g.anchor.iter().flatten().copied().fold(0.0, f64::max);
                pair.max(anchor)
            }
        }
    }

    /// Smallest positive scenario distance that can occur.
    pub fn min_positive_distance(&self) -> f64 {
        match self {
            ScenarioMetric::Discrete => 1.0,
            ScenarioMetric::AsymInf(g) => g
                .dist
                .iter()
                .flatten()
                .chain(g.anchor.iter().flatten())
                .copied()
                .filter(|&d| d > 0.0)
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Largest scenario of the full power set within distance `mu` of `a`.
    pub fn within(&self, a: Scenario, mu: f64, ground: usize) -> Result<Scenario> {
        match self {
            ScenarioMetric::Discrete => Ok(if mu >= 1.0 { Scenario::full(ground) } else { a }),
            ScenarioMetric::AsymInf(g) => {
                if a.is_empty() && g.anchor.is_none() {
                    return Err(DroError::AnchorMissing);
                }
                Ok(Scenario::from_elements((0..ground).filter(|&j| g.reach(a, j) <= mu)))
            }
        }
    }

    /// The distinct values `distance(a, b)` takes as `b` ranges over all
    /// scenarios, ascending and including zero.
    pub fn distance_levels(&self, a: Scenario, ground: usize) -> Result<Vec<f64>> {
        match self {
            ScenarioMetric::Discrete => Ok(vec![0.0, 1.0]),
            ScenarioMetric::AsymInf(g) => {
                if a.is_empty() && g.anchor.is_none() {
                    return Ok(vec![0.0]);
                }
                let mut levels: Vec<f64> = (0..ground).map(|j| g.reach(a, j)).collect();
                levels.push(0.0);
                levels.sort_by(f64::total_cmp);
                levels.dedup();
                Ok(levels)
            }
        }
    }

    /// Collapse set: a small family of scenarios that contains a maximiser of
    /// `g(x, B) - y * distance(a, B)` for every `x`, `y` whenever `g` is
    /// monotone in the scenario.
    pub fn collapse(&self, a: Scenario, ground: usize) -> Result<Vec<Scenario>> {
        let mut out = Vec::new();
        match self {
            ScenarioMetric::Discrete => {
                out.push(a);
                out.push(Scenario::full(ground));
            }
            ScenarioMetric::AsymInf(g) => {
                if a.is_empty() && g.anchor.is_none() {
                    return Err(DroError::AnchorMissing);
                }
                for mu in self.distance_levels(a, ground)? {
                    out.push(self.within(a, mu, ground)?);
                }
            }
        }
        out.dedup();
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BallKind {
    Wasserstein,
    Linf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityBall {
    pub kind: BallKind,
    pub radius: f64,
}

impl AmbiguityBall {
    pub fn wasserstein(radius: f64) -> Self {
        Self { kind: BallKind::Wasserstein, radius }
    }

    pub fn linf(radius: f64) -> Self {
        Self { kind: BallKind::Linf, radius }
    }
}

/// Finitely supported distribution, atoms sorted by scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    atoms: Vec<(Scenario, f64)>,
}

impl Distribution {
    /// Merges repeated scenarios and drops zero atoms; the total must be 1.
    pub fn new<I: IntoIterator<Item = (Scenario, f64)>>(atoms: I) -> Result<Self> {
        let mut merged: BTreeMap<Scenario, f64> = BTreeMap::new();
        for (s, p) in atoms {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(DroError::InvalidDistribution(format!("probability {p} for {s:?}")));
            }
            *merged.entry(s).or_default() += p;
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(DroError::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { atoms: merged.into_iter().filter(|&(_, p)| p > 0.0).collect() })
    }

    pub fn point(s: Scenario) -> Self {
        Self { atoms: vec![(s, 1.0)] }
    }

    pub fn atoms(&self) -> &[(Scenario, f64)] {
        &self.atoms
    }

    pub fn support(&self) -> impl Iterator<Item = Scenario> + '_ {
        self.atoms.iter().map(|&(s, _)| s)
    }

    pub fn prob(&self, s: Scenario) -> f64 {
        self.atoms
            .binary_search_by(|(t, _)| t.cmp(&s))
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    pub fn expectation<F: FnMut(Scenario) -> Result<f64>>(&self, mut f: F) -> Result<f64> {
        let mut acc = 0.0;
        for &(s, p) in &self.atoms {
            acc += p * f(s)?;
        }
        Ok(acc)
    }

    /// Half the L1 distance, which is the Wasserstein distance under the
    /// discrete scenario metric.
    pub fn half_l1(&self, other: &Distribution) -> f64 {
        let mut keys: Vec<Scenario> = self.support().chain(other.support()).collect();
        keys.sort();
        keys.dedup();
        keys.iter().map(|&s| (self.prob(s) - other.prob(s)).abs()).sum::<f64>() / 2.0
    }

    pub fn linf_distance(&self, other: &Distribution) -> f64 {
        self.support()
            .chain(other.support())
            .map(|s| (self.prob(s) - other.prob(s)).abs())
            .fold(0.0, f64::max)
    }

    /// `theta * self + (1 - theta) * other`.
    pub fn mix(&self, other: &Distribution, theta: f64) -> Result<Distribution> {
        let a = self.atoms.iter().map(|&(s, p)| (s, theta * p));
        let b = other.atoms.iter().map(|&(s, p)| (s, (1.0 - theta) * p));
        Distribution::new(a.chain(b))
    }

    /// Optimal transport cost from `self` to `other` under `metric`.
    pub fn wasserstein(&self, other: &Distribution, metric: &ScenarioMetric) -> Result<f64> {
        let (n, k) = (self.atoms.len(), other.atoms.len());
        let mut costs = Vec::with_capacity(n * k);
        for &(a, _) in &self.atoms {
            for &(b, _) in &other.atoms {
                costs.push(metric.distance(a, b)?);
            }
        }
        let mut lp = LinearProgram::new(Sense::Minimize, costs);
        for (i, &(_, p)) in self.atoms.iter().enumerate() {
            lp.add_constraint((0..k).map(|j| (i * k + j, 1.0)).collect(), Relation::Eq, p);
        }
        for (j, &(_, q)) in other.atoms.iter().enumerate() {
            lp.add_constraint((0..n).map(|i| (i * k + j, 1.0)).collect(), Relation::Eq, q);
        }
        Ok(lp.solve()?.value)
    }
}

/// Empirical distribution with exact integer counts.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Empirical {
    counts: BTreeMap<Scenario, u64>,
    total: u64,
}

impl Empirical {
    pub fn from_samples<I: IntoIterator<Item = Scenario>>(samples: I) -> Self {
        let mut e = Empirical::default();
        for s in samples {
            *e.counts.entry(s).or_default() += 1;
            e.total += 1;
        }
        e
    }

    pub fn counts(&self) -> &BTreeMap<Scenario, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distribution(&self) -> Result<Distribution> {
        if self.total == 0 {
            return Err(DroError::InvalidDistribution("no samples".into()));
        }
        let n = self.total as f64;
        Distribution::new(self.counts.iter().map(|(&s, &c)| (s, c as f64 / n)))
    }
}

/// The central distribution: either an explicit list of atoms or a
/// black-box sampler that activates each ground element independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Center {
    Explicit(Distribution),
    Independent(Vec<f64>),
}

/// Mixes a seed and an index into a well-spread 64-bit key.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Center {
    /// Draw number `index` of the stream identified by `seed`.
    pub fn draw(&self, seed: u64, index: u64) -> Scenario {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, index));
        match self {
            Center::Explicit(d) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(s, p) in d.atoms() {
                    acc += p;
                    if u < acc {
                        return s;
                    }
                }
                d.atoms().last().map(|&(s, _)| s).unwrap_or(Scenario::EMPTY)
            }
            Center::Independent(probs) => Scenario::from_elements(
                probs.iter().enumerate().filter(|&(_, &p)| rng.random::<f64>() < p).map(|(j, _)| j),
            ),
        }
    }

    /// Draws `0..n` of the stream; counts do not depend on the order in
    /// which the parallel workers finish.
    pub fn sample(&self, seed: u64, n: u64) -> Empirical {
        let counts = (0..n)
            .into_par_iter()
            .fold(BTreeMap::new, |mut acc: BTreeMap<Scenario, u64>, i| {
                *acc.entry(self.draw(seed, i)).or_insert(0) += 1;
                acc
            })
            .reduce(BTreeMap::new, |mut a, b| {
                for (s, c) in b {
                    *a.entry(s).or_insert(0) += c;
                }
                a
            });
        Empirical { counts, total: n }
    }

    /// The explicit form, expanding an independent sampler over at most
    /// `guard` scenarios.
    pub fn explicit(&self, guard: usize) -> Result<Distribution> {
        match self {
            Center::Explicit(d) => Ok(d.clone()),
            Center::Independent(probs) => {
                let space = ScenarioSpace::all_subsets(probs.len());
                let atoms = space.enumerate(guard)?.into_iter().map(|s| {
                    let p = probs
                        .iter()
                        .enumerate()
                        .map(|(j, &q)| if s.contains(j) { q } else { 1.0 - q })
                        .product::<f64>();
                    (s, p)
                });
                let atoms: Vec<_> = atoms.collect();
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                Distribution::new(atoms.into_iter().map(|(s, p)| (s, p / total)))
            }
        }
    }

    pub fn as_explicit(&self) -> Option<&Distribution> {
        match self {
            Center::Explicit(d) => Some(d),
            Center::Independent(_) => None,
        }
    }
}

/// One row of a second-stage program:
/// `coeffs . z + first_stage . x  (relation)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRow {
    pub coeffs: Vec<(usize, f64)>,
    pub first_stage: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// The fractional second-stage program of one scenario: minimise
/// `costs . z` over `z >= 0` subject to `rows`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SecondStage {
    pub costs: Vec<f64>,
    pub rows: Vec<StageRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recourse {
    pub value: f64,
    /// Subgradient of `x -> g(x, A)` recovered from the row duals.
    pub subgradient: Vec<f64>,
    pub z: Vec<f64>,
}

impl SecondStage {
    pub fn program(&self, x: &[f64]) -> LinearProgram {
        let mut lp = LinearProgram::new(Sense::Minimize, self.costs.clone());
        for row in &self.rows {
            let shift: f64 = row.first_stage.iter().map(|&(j, a)| a * x[j]).sum();
            lp.add_constraint(row.coeffs.clone(), row.relation, row.rhs - shift);
        }
        lp
    }

    pub fn solve(&self, x: &[f64], dim: usize) -> Result<Recourse> {
        if self.rows.is_empty() {
            return Ok(Recourse { value: 0.0, subgradient: vec![0.0; dim], z: vec![0.0; self.costs.len()] });
        }
        let sol = self.program(x).solve()?;
        let mut subgradient = vec![0.0; dim];
        for (row, y) in self.rows.iter().zip(&sol.duals) {
            for &(j, a) in &row.first_stage {
                subgradient[j] -= y * a;
            }
        }
        Ok(Recourse { value: sol.value, subgradient, z: sol.primal })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SetCover,
    VertexCover,
    EdgeCover,
    FacilityLocation,
    Steiner,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SetCover => "set_cover",
            Family::VertexCover => "vertex_cover",
            Family::EdgeCover => "edge_cover",
            Family::FacilityLocation => "facility_location",
            Family::Steiner => "steiner",
        }
    }
}

/// Integral second-stage decision and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralRecourse {
    pub cost: f64,
    pub z: Vec<f64>,
}

/// A two-stage covering-type problem with first-stage decisions in `[0,1]^m`
/// and a fractional second stage whose value `g(x, A)` is nonincreasing in `x`.
pub trait TwoStageProblem: Send + Sync {
    fn family(&self) -> Family;

    fn ground_size(&self) -> usize;

    fn num_decisions(&self) -> usize;

    fn first_stage_costs(&self) -> &[f64];

    /// Largest ratio of a second-stage cost to the matching first-stage cost.
    fn inflation(&self) -> f64;

    fn second_stage(&self, a: Scenario) -> SecondStage;

    /// Lipschitz constant of `g(x, .)` with respect to `metric`.
    fn lipschitz(&self, metric: &ScenarioMetric) -> f64;

    /// Integral second stage for integral `x`, built from an optimal
    /// fractional solution `z` of `second_stage(a)` at `x`.
    fn round_recourse(&self, x: &[f64], a: Scenario, z: &[f64]) -> Result<IntegralRecourse>;

    /// Upper bound on the norm of any subgradient of `g(., A)`.
    fn subgradient_bound(&self) -> f64 {
        self.inflation() * norm(self.first_stage_costs())
    }

    fn first_stage_cost(&self, x: &[f64]) -> f64 {
        dot(self.first_stage_costs(), x)
    }

    fn recourse(&self, x: &[f64], a: Scenario) -> Result<Recourse> {
        if x.len() != self.num_decisions() {
            return Err(DroError::DimensionMismatch { expected: self.num_decisions(), got: x.len() });
        }
        self.second_stage(a).solve(x, self.num_decisions())
    }

    fn integral_recourse(&self, x: &[f64], a: Scenario) -> Result<IntegralRecourse> {
        let r = self.recourse(x, a)?;
        self.round_recourse(x, a, &r.z)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Memoised access to `g(x, .)` and its subgradients at a fixed `x`.
pub struct Evaluator<'p> {
    problem: &'p dyn TwoStageProblem,
    x: Vec<f64>,
    cache: Mutex<HashMap<Scenario, Arc<Recourse>>>,
    solves: AtomicU64,
}

impl<'p> Evaluator<'p> {
    pub fn new(problem: &'p dyn TwoStageProblem, x: Vec<f64>) -> Result<Self> {
        if x.len() != problem.num_decisions() {
            return Err(DroError::DimensionMismatch { expected: problem.num_decisions(), got: x.len() });
        }
        Ok(Self { problem, x, cache: Mutex::new(HashMap::new()), solves: AtomicU64::new(0) })
    }

    pub fn problem(&self) -> &'p dyn TwoStageProblem {
        self.problem
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn recourse(&self, a: Scenario) -> Result<Arc<Recourse>> {
        if let Some(r) = self.cache.lock().expect("cache poisoned").get(&a) {
            return Ok(Arc::clone(r));
        }
        let r = Arc::new(self.problem.recourse(&self.x, a)?);
        self.solves.fetch_add(1, Ordering::Relaxed);
        self.cache.lock().expect("cache poisoned").insert(a, Arc::clone(&r));
        Ok(r)
    }

    pub fn value(&self, a: Scenario) -> Result<f64> {
        Ok(self.recourse(a)?.value)
    }

    pub fn solves(&self) -> u64 {
        self.solves.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> ScenarioMetric {
        ScenarioMetric::AsymInf(GroundMetric::euclidean(&[vec![0.0], vec![5.0], vec![10.0]], None).unwrap())
    }

    #[test]
    fn scenario_bits() {
        let s = Scenario::from_elements([0, 2, 5]);
        assert_eq!(s.len(), 3);
        assert_eq!(s.elements().collect::<Vec<_>>(), vec![0, 2, 5]);
        assert!(s.contains(2) && !s.contains(1));
        assert_eq!(s.without(2).with(1), Scenario::from_elements([0, 1, 5]));
        assert_eq!(format!("{s:?}"), "{0, 2, 5}");
    }

    #[test]
    fn space_counts() {
        assert_eq!(ScenarioSpace::all_subsets(5).count(), 32);
        assert_eq!(ScenarioSpace::bounded(5, 2).count(), 16);
        assert_eq!(ScenarioSpace::bounded(5, 2).enumerate(100).unwrap().len(), 16);
        assert!(ScenarioSpace::all_subsets(13).enumerate(4096).is_err());
    }

    #[test]
    fn discrete_distance() {
        let m = ScenarioMetric::Discrete;
        let a = Scenario::from_elements([0]);
        assert_eq!(m.distance(a, a).unwrap(), 0.0);
        assert_eq!(m.distance(a, Scenario::EMPTY).unwrap(), 1.0);
    }

    #[test]
    fn asym_inf_line() {
        let m = line();
        let a = Scenario::from_elements([0]);
        let b = Scenario::from_elements([0, 2]);
        assert_eq!(m.distance(a, b).unwrap(), 10.0);
        assert_eq!(m.distance(b, a).unwrap(), 0.0);
        assert_eq!(m.distance(a, Scenario::EMPTY).unwrap(), 0.0);
        assert_eq!(m.distance(Scenario::EMPTY, a), Err(DroError::AnchorMissing));
        assert_eq!(
            m.collapse(a, 3).unwrap(),
            vec![a, Scenario::from_elements([0, 1]), Scenario::from_elements([0, 1, 2])]
        );
    }

    #[test]
    fn anchor_makes_empty_scenario_usable() {
        let g = GroundMetric::euclidean(&[vec![0.0], vec![5.0], vec![10.0]], Some(&[0.0])).unwrap();
        let m = ScenarioMetric::AsymInf(g);
        assert_eq!(m.distance(Scenario::EMPTY, Scenario::from_elements([1])).unwrap(), 5.0);
        assert_eq!(m.collapse(Scenario::EMPTY, 3).unwrap(), vec![Scenario(1), Scenario(3), Scenario(7)]);
    }

    #[test]
    fn discrete_collapse() {
        let a = Scenario::from_elements([1]);
        assert_eq!(ScenarioMetric::Discrete.collapse(a, 3).unwrap(), vec![a, Scenario::full(3)]);
        assert_eq!(ScenarioMetric::Discrete.collapse(Scenario::full(3), 3).unwrap().len(), 1);
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new([(Scenario(1), 0.5), (Scenario(2), 0.4)]).is_err());
        assert!(Distribution::new([(Scenario(1), -0.1), (Scenario(2), 1.1)]).is_err());
        let d = Distribution::new([(Scenario(2), 0.25), (Scenario(1), 0.5), (Scenario(2), 0.25)]).unwrap();
        assert_eq!(d.atoms(), &[(Scenario(1), 0.5), (Scenario(2), 0.5)]);
    }

    #[test]
    fn half_l1_matches_discrete_wasserstein() {
        let p = Distribution::new([(Scenario(1), 0.5), (Scenario(3), 0.5)]).unwrap();
        let q = Distribution::new([(Scenario(1), 0.2), (Scenario(3), 0.3), (Scenario(7), 0.5)]).unwrap();
        let w = p.wasserstein(&q, &ScenarioMetric::Discrete).unwrap();
        assert!((w - p.half_l1(&q)).abs() < 1e-12);
        assert!((w - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empirical_counts_are_exact() {
        let c = Center::Explicit(Distribution::new([(Scenario(1), 0.3), (Scenario(2), 0.7)]).unwrap());
        let e = c.sample(11, 1000);
        assert_eq!(e.counts().values().sum::<u64>(), 1000);
        assert_eq!(c.sample(11, 1000), e);
        let d = e.distribution().unwrap();
        assert!((d.prob(Scenario(1)) - 0.3).abs() < 0.06);
    }

    #[test]
    fn independent_center_expands() {
        let c = Center::Independent(vec![0.5, 0.25]);
        let d = c.explicit(64).unwrap();
        assert!((d.prob(Scenario(3)) - 0.125).abs() < 1e-12);
        assert!((d.prob(Scenario(0)) - 0.375).abs() < 1e-12);
    }
}
