use crate::error::{DroError, Result};
use crate::lp::Relation;
use crate::model::{Family, IntegralRecourse, Scenario, ScenarioMetric, SecondStage, StageRow, TwoStageProblem, MAX_GROUND};

use super::rounding::{certify, LocalRounding, Rounding};
use super::{is_bought, INTEGRAL_TOL};

/// Two-stage set cover. Vertex cover and edge cover are the special cases
/// whose sets are vertex stars and edges respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverProblem {
    family: Family,
    ground: usize,
    sets: Vec<Scenario>,
    first_cost: Vec<f64>,
    second_cost: Vec<f64>,
    /// Sets containing each element.
    covering: Vec<Vec<usize>>,
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl CoverProblem {
    pub fn set_cover(ground: usize, sets: Vec<Vec<usize>>, first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        let masks = sets.iter().map(|s| Scenario::from_elements(s.iter().copied())).collect();
        for s in &sets {
            if let Some(&e) = s.iter().find(|&&e| e >= ground) {
                return Err(DroError::InvalidInstance(format!("set element {e} outside ground set of size {ground}")));
            }
        }
        Self::build(Family::SetCover, ground, masks, first, second, 0, Vec::new())
    }

    /// Ground set = edges, one decision per vertex.
    pub fn vertex_cover(vertices: usize, edges: Vec<(usize, usize)>, first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        check_edges(vertices, &edges)?;
        let masks = (0..vertices)
            .map(|v| Scenario::from_elements(edges.iter().enumerate().filter(|(_, &(a, b))| a == v || b == v).map(|(i, _)| i)))
            .collect();
        Self::build(Family::VertexCover, edges.len(), masks, first, second, vertices, edges)
    }

    /// Ground set = vertices, one decision per edge.
    pub fn edge_cover(vertices: usize, edges: Vec<(usize, usize)>, first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        check_edges(vertices, &edges)?;
        let masks = edges.iter().map(|&(a, b)| Scenario::from_elements([a, b])).collect();
        Self::build(Family::EdgeCover, vertices, masks, first, second, vertices, edges)
    }

    fn build(
        family: Family,
        ground: usize,
        sets: Vec<Scenario>,
        first_cost: Vec<f64>,
        second_cost: Vec<f64>,
        vertices: usize,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if ground > MAX_GROUND {
            return Err(DroError::InvalidInstance(format!("ground set {ground} exceeds {MAX_GROUND}")));
        }
        for costs in [&first_cost, &second_cost] {
            if costs.len() != sets.len() {
                return Err(DroError::DimensionMismatch { expected: sets.len(), got: costs.len() });
            }
        }
        if first_cost.iter().chain(&second_cost).any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(DroError::InvalidInstance("costs must be positive and finite".into()));
        }
        let covering: Vec<Vec<usize>> = (0..ground)
            .map(|e| (0..sets.len()).filter(|&s| sets[s].contains(e)).collect())
            .collect();
        if let Some(e) = covering.iter().position(|c| c.is_empty()) {
            return Err(DroError::InvalidInstance(format!("element {e} is in no set")));
        }
        Ok(Self { family, ground, sets, first_cost, second_cost, covering, vertices, edges })
    }

    pub fn sets(&self) -> &[Scenario] {
        &self.sets
    }

    pub fn second_stage_costs(&self) -> &[f64] {
        &self.second_cost
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `sum_{S containing e} x_S`.
    pub fn coverage(&self, x: &[f64], e: usize) -> f64 {
        self.covering[e].iter().map(|&s| x[s]).sum()
    }

    /// Approximation factor of the integral second-stage rounding.
    pub fn alpha(&self) -> f64 {
        match self.family {
            Family::VertexCover => 2.0,
            Family::EdgeCover => 1.5,
            _ => {
                let d = self.sets.iter().map(|s| s.len()).max().unwrap_or(1);
                (1..=d).map(|i| 1.0 / i as f64).sum()
            }
        }
    }

    fn covered_by(&self, chosen: impl Iterator<Item = usize>) -> Scenario {
        chosen.fold(Scenario::EMPTY, |acc, s| acc.union(self.sets[s]))
    }

    /// Integral cover of `target` using sets outside `excluded`, priced by `costs`.
    fn cover(&self, target: Scenario, costs: &[f64], excluded: &[bool]) -> Vec<usize> {
        let allowed: Vec<usize> = (0..self.sets.len()).filter(|&s| !excluded[s]).collect();
        match self.family {
            Family::EdgeCover => exact_cover(&self.sets, costs, &allowed, target)
                .unwrap_or_else(|| greedy_cover(&self.sets, costs, &allowed, target)),
            _ => greedy_cover(&self.sets, costs, &allowed, target),
        }
    }
}

fn check_edges(vertices: usize, edges: &[(usize, usize)]) -> Result<()> {
    for &(a, b) in edges {
        if a >= vertices || b >= vertices || a == b {
            return Err(DroError::InvalidInstance(format!("bad edge ({a}, {b})")));
        }
    }
    Ok(())
}

/// Weighted greedy: repeatedly take the set with least cost per newly
/// covered element; ties go to the smaller index.
pub(crate) fn greedy_cover(sets: &[Scenario], costs: &[f64], allowed: &[usize], target: Scenario) -> Vec<usize> {
    let mut uncovered = target;
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for &s in allowed {
            let gain = (sets[s].0 & uncovered.0).count_ones();
            if gain == 0 {
                continue;
            }
            let r = costs[s] / gain as f64;
            if best.is_none_or(|(_, b)| r < b - 1e-15) {
                best = Some((s, r));
            }
        }
        let Some((s, _)) = best else { break };
        chosen.push(s);
        uncovered = uncovered.minus(sets[s]);
    }
    chosen
}

/// Minimum-cost cover of `target` by dynamic programming over its subsets.
/// Returns `None` above 20 target elements or when no cover exists.
pub(crate) fn exact_cover(sets: &[Scenario], costs: &[f64], allowed: &[usize], target: Scenario) -> Option<Vec<usize>> {
    let elems: Vec<usize> = target.elements().collect();
    let t = elems.len();
    if t > 20 {
        return None;
    }
    let local = |s: Scenario| -> usize {
        elems.iter().enumerate().filter(|&(_, &e)| s.contains(e)).fold(0usize, |m, (i, _)| m | (1 << i))
    };
    let masks: Vec<(usize, usize)> = allowed.iter().map(|&s| (s, local(sets[s]))).filter(|&(_, m)| m != 0).collect();
    let full = (1usize << t) - 1;
    let mut best = vec![f64::INFINITY; 1 << t];
    let mut via: Vec<Option<(usize, usize)>> = vec![None; 1 << t];
    best[0] = 0.0;
    for covered in 0..=full {
        if best[covered].is_infinite() || covered == full {
            continue;
        }
        let first = (!covered & full).trailing_zeros();
        for &(s, m) in &masks {
            if m >> first & 1 == 1 {
                let next = covered | m;
                let c = best[covered] + costs[s];
                if c < best[next] - 1e-15 {
                    best[next] = c;
                    via[next] = Some((covered, s));
                }
            }
        }
    }
    if best[full].is_infinite() {
        return None;
    }
    let mut out = Vec::new();
    let mut cur = full;
    while let Some((prev, s)) = via[cur] {
        out.push(s);
        cur = prev;
    }
    out.sort_unstable();
    Some(out)
}

impl TwoStageProblem for CoverProblem {
    fn family(&self) -> Family {
        self.family
    }

    fn ground_size(&self) -> usize {
        self.ground
    }

    fn num_decisions(&self) -> usize {
        self.sets.len()
    }

    fn first_stage_costs(&self) -> &[f64] {
        &self.first_cost
    }

    fn inflation(&self) -> f64 {
        self.first_cost.iter().zip(&self.second_cost).map(|(a, b)| b / a).fold(1.0, f64::max)
    }

    fn second_stage(&self, a: Scenario) -> SecondStage {
        let rows = a
            .elements()
            .map(|e| {
                let coeffs: Vec<(usize, f64)> = self.covering[e].iter().map(|&s| (s, 1.0)).collect();
                StageRow { first_stage: coeffs.clone(), coeffs, relation: Relation::Ge, rhs: 1.0 }
            })
            .collect();
        SecondStage { costs: self.second_cost.clone(), rows }
    }

    fn lipschitz(&self, _metric: &ScenarioMetric) -> f64 {
        self.second_cost.iter().sum()
    }

    fn round_recourse(&self, x: &[f64], a: Scenario, z: &[f64]) -> Result<IntegralRecourse> {
        let bought: Vec<bool> = x.iter().map(|&v| is_bought(v)).collect();
        let residual = a.minus(self.covered_by((0..x.len()).filter(|&s| bought[s])));
        let mut chosen: Vec<usize> = match self.family {
            Family::VertexCover => (0..self.sets.len())
                .filter(|&s| !bought[s] && (self.sets[s].0 & residual.0) != 0 && z[s] >= 0.5 - INTEGRAL_TOL)
                .collect(),
            _ => Vec::new(),
        };
        let left = residual.minus(self.covered_by(chosen.iter().copied()));
        chosen.extend(self.cover(left, &self.second_cost, &bought));
        if !left.minus(self.covered_by(chosen.iter().copied())).is_empty() {
            return Err(DroError::Infeasible);
        }
        let mut zi = vec![0.0; self.sets.len()];
        for &s in &chosen {
            zi[s] = 1.0;
        }
        Ok(IntegralRecourse { cost: chosen.iter().map(|&s| self.second_cost[s]).sum(), z: zi })
    }
}

impl LocalRounding for CoverProblem {
    fn rho(&self) -> f64 {
        2.0 * self.alpha()
    }

    /// Elements fractionally covered to at least one half are first-stage
    /// elements; the doubled first stage covers them and is rounded with the
    /// family's integral cover rule. Everything else is left to the recourse,
    /// whose fractional solution covers it to at least one half.
    fn local_round(&self, x: &[f64], scenarios: &[Scenario]) -> Result<Rounding> {
        if x.len() != self.sets.len() {
            return Err(DroError::DimensionMismatch { expected: self.sets.len(), got: x.len() });
        }
        let mut rounded = vec![0.0; x.len()];
        match self.family {
            Family::VertexCover => {
                for (r, &v) in rounded.iter_mut().zip(x) {
                    if v >= 0.25 - INTEGRAL_TOL {
                        *r = 1.0;
                    }
                }
            }
            _ => {
                let first_stage = Scenario::from_elements((0..self.ground).filter(|&e| {
                    self.covering[e].iter().map(|&s| x[s]).sum::<f64>() >= 0.5 - INTEGRAL_TOL
                }));
                for s in self.cover(first_stage, &self.first_cost, &vec![false; x.len()]) {
                    rounded[s] = 1.0;
                }
            }
        }
        certify(self, x, rounded, scenarios, self.rho())
    }
}
