use serde::Serialize;

use crate::error::{DroError, Result};
use crate::lp::Relation;
use crate::model::{
    euclid, Family, GroundMetric, IntegralRecourse, Scenario, ScenarioMetric, SecondStage, StageRow, TwoStageProblem,
};

use super::is_bought;
use super::rounding::{best_candidate, LocalRounding, Rounding};

/// Edge budget for the exhaustive non-monotone recourse used by the
/// reduction check.
const EXHAUSTIVE_EDGE_GUARD: usize = 16;

/// Two-stage rooted Steiner tree on the metric closure of a point set.
/// Node 0 is the root; ground element `j` is node `j + 1`; decisions are
/// the edges `(u, v)`, `u < v`, in lexicographic order. Second-stage edges
/// cost `inflation` times their first-stage cost, and the recourse is
/// monotone: each terminal reaches the root along second-stage edges
/// followed by first-stage edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinerTree {
    points: Vec<Vec<f64>>,
    edges: Vec<(usize, usize)>,
    cost: Vec<f64>,
    inflation: f64,
}

/// A first-stage tree through the root derived from a forest, and how its
/// monotone recourse compares with the unrestricted recourse of the forest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneReduction {
    pub tree: Vec<f64>,
    pub tree_cost: f64,
    pub forest_cost: f64,
    /// (scenario, monotone recourse of the tree, unrestricted recourse of the forest).
    pub checks: Vec<(Scenario, f64, f64)>,
    pub holds: bool,
}

impl SteinerTree {
    pub fn new(points: Vec<Vec<f64>>, inflation: f64) -> Result<Self> {
        let n = points.len();
        if n < 2 || n > 65 {
            return Err(DroError::InvalidInstance(format!("steiner instances need 2..=65 nodes, got {n}")));
        }
        if !(inflation >= 1.0) || !inflation.is_finite() {
            return Err(DroError::InvalidInstance("inflation must be at least 1".into()));
        }
        let mut edges = Vec::new();
        let mut cost = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let c = euclid(&points[u], &points[v]);
                if !(c > 0.0) {
                    return Err(DroError::InvalidInstance(format!("nodes {u} and {v} coincide")));
                }
                edges.push((u, v));
                cost.push(c);
            }
        }
        Ok(Self { points, edges, cost, inflation })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn nodes(&self) -> usize {
        self.points.len()
    }

    pub fn edge_index(&self, u: usize, v: usize) -> usize {
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        let n = self.points.len();
        u * (2 * n - u - 1) / 2 + (v - u - 1)
    }

    fn node_distance(&self, u: usize, v: usize) -> f64 {
        if u == v {
            0.0
        } else {
            self.cost[self.edge_index(u, v)]
        }
    }

    /// Terminal distances with the root as anchor.
    pub fn asym_metric(&self) -> ScenarioMetric {
        let n = self.points.len();
        let dist = (1..n).map(|u| (1..n).map(|v| self.node_distance(u, v)).collect()).collect();
        let anchor = (1..n).map(|v| self.node_distance(0, v)).collect();
        ScenarioMetric::AsymInf(GroundMetric::new(dist, Some(anchor)).expect("edge costs are a metric"))
    }

    /// Node sets of the components formed by the bought edges of `x`.
    fn components(&self, x: &[f64]) -> Vec<usize> {
        let n = self.points.len();
        let mut label: Vec<usize> = (0..n).collect();
        fn find(label: &mut [usize], a: usize) -> usize {
            let mut r = a;
            while label[r] != r {
                r = label[r];
            }
            let mut c = a;
            while label[c] != r {
                let next = label[c];
                label[c] = r;
                c = next;
            }
            r
        }
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if is_bought(x[e]) {
                let (a, b) = (find(&mut label, u), find(&mut label, v));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
        (0..n).map(|u| find(&mut label, u)).collect()
    }

    /// Keeps only the bought edges inside the root's component.
    pub fn root_tree(&self, x: &[f64]) -> Vec<f64> {
        let comp = self.components(x);
        self.edges
            .iter()
            .enumerate()
            .map(|(e, &(u, _))| if is_bought(x[e]) && comp[u] == comp[0] { 1.0 } else { 0.0 })
            .collect()
    }

    /// Grows a root tree from a forest: the root component is kept and every
    /// other component is attached through its cheapest edge to the tree when
    /// that edge costs no more than the component itself, so the tree costs at
    /// most twice the forest.
    pub fn attach_components(&self, x: &[f64]) -> Vec<f64> {
        let n = self.points.len();
        let comp = self.components(x);
        let mut tree = self.root_tree(x);
        let mut in_tree: Vec<bool> = (0..n).map(|u| comp[u] == comp[0]).collect();
        let mut labels: Vec<usize> = comp.clone();
        labels.sort_unstable();
        labels.dedup();
        for label in labels.into_iter().filter(|&l| l != comp[0]) {
            let members: Vec<usize> = (0..n).filter(|&u| comp[u] == label).collect();
            let own: f64 = self
                .edges
                .iter()
                .enumerate()
                .filter(|(e, &(u, _))| is_bought(x[*e]) && comp[u] == label)
                .map(|(e, _)| self.cost[e])
                .sum();
            if own <= 0.0 {
                continue;
            }
            let link = members
                .iter()
                .flat_map(|&u| (0..n).filter(|&v| in_tree[v]).map(move |v| (u, v)))
                .min_by(|a, b| self.node_distance(a.0, a.1).total_cmp(&self.node_distance(b.0, b.1)));
            if let Some((u, v)) = link {
                if self.node_distance(u, v) <= own {
                    tree[self.edge_index(u, v)] = 1.0;
                    for (e, &(a, _)) in self.edges.iter().enumerate() {
                        if is_bought(x[e]) && comp[a] == label {
                            tree[e] = 1.0;
                        }
                    }
                    for &m in &members {
                        in_tree[m] = true;
                    }
                }
            }
        }
        tree
    }

    /// Cheapest completion of integral `x` that connects `a` to the root
    /// using any mix of bought and new edges, by exhaustive search.
    pub fn unrestricted_recourse(&self, x: &[f64], a: Scenario) -> Result<f64> {
        let free: Vec<usize> = (0..self.edges.len()).filter(|&e| !is_bought(x[e])).collect();
        if free.len() > EXHAUSTIVE_EDGE_GUARD {
            return Err(DroError::EnumerationTooLarge { what: "steiner edges", size: free.len(), guard: EXHAUSTIVE_EDGE_GUARD });
        }
        let mut best = f64::INFINITY;
        for mask in 0u32..(1u32 << free.len()) {
            let mut y = x.to_vec();
            let mut c = 0.0;
            for (b, &e) in free.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    y[e] = 1.0;
                    c += self.inflation * self.cost[e];
                }
            }
            if c >= best {
                continue;
            }
            let comp = self.components(&y);
            if a.elements().all(|j| comp[j + 1] == comp[0]) {
                best = c;
            }
        }
        Ok(best)
    }

    /// Turns an integral first stage into a root tree and checks, on each
    /// given scenario, that the monotone recourse of the tree is within twice
    /// the unrestricted recourse of the original forest.
    pub fn monotone_reduction(&self, x: &[f64], scenarios: &[Scenario]) -> Result<MonotoneReduction> {
        let tree = self.attach_components(x);
        let forest_cost = self.first_stage_cost(x);
        let tree_cost = self.first_stage_cost(&tree);
        let mut holds = tree_cost <= 2.0 * forest_cost + 1e-9;
        let mut checks = Vec::new();
        for &a in scenarios {
            let mono = self.recourse(&tree, a)?.value;
            let free = self.unrestricted_recourse(x, a)?;
            holds &= mono <= 2.0 * free + 1e-7;
            checks.push((a, mono, free));
        }
        Ok(MonotoneReduction { tree, tree_cost, forest_cost, checks, holds })
    }
}

impl TwoStageProblem for SteinerTree {
    fn family(&self) -> Family {
        Family::Steiner
    }

    fn ground_size(&self) -> usize {
        self.points.len() - 1
    }

    fn num_decisions(&self) -> usize {
        self.edges.len()
    }

    fn first_stage_costs(&self) -> &[f64] {
        &self.cost
    }

    fn inflation(&self) -> f64 {
        self.inflation
    }

    /// Per terminal, a unit flow to the root split into first-stage flow
    /// (capacity `x`) and second-stage flow (capacity `z`); first-stage flow
    /// may not enter a node faster than it leaves, so once a path switches to
    /// first-stage edges it stays on them.
    fn second_stage(&self, a: Scenario) -> SecondStage {
        let n = self.points.len();
        let ne = self.edges.len();
        let arcs = 2 * ne;
        let mut costs: Vec<f64> = self.cost.iter().map(|c| self.inflation * c).collect();
        let mut rows = Vec::new();
        // Arc 2e goes u -> v, arc 2e+1 goes v -> u for edge e = (u, v).
        let tail = |arc: usize| if arc % 2 == 0 { self.edges[arc / 2].0 } else { self.edges[arc / 2].1 };
        let head = |arc: usize| if arc % 2 == 0 { self.edges[arc / 2].1 } else { self.edges[arc / 2].0 };
        for (k, j) in a.elements().enumerate() {
            let t = j + 1;
            let f1 = ne + k * 2 * arcs;
            let f2 = f1 + arcs;
            costs.extend(std::iter::repeat_n(0.0, 2 * arcs));
            for u in 1..n {
                let mut coeffs = Vec::new();
                for arc in 0..arcs {
                    let sgn = if tail(arc) == u {
                        1.0
                    } else if head(arc) == u {
                        -1.0
                    } else {
                        continue;
                    };
                    coeffs.push((f1 + arc, sgn));
                    coeffs.push((f2 + arc, sgn));
                }
                let (relation, rhs) = if u == t { (Relation::Ge, 1.0) } else { (Relation::Eq, 0.0) };
                rows.push(StageRow { coeffs, first_stage: Vec::new(), relation, rhs });
            }
            for arc in 0..arcs {
                let e = arc / 2;
                rows.push(StageRow {
                    coeffs: vec![(f1 + arc, 1.0)],
                    first_stage: vec![(e, -1.0)],
                    relation: Relation::Le,
                    rhs: 0.0,
                });
                rows.push(StageRow {
                    coeffs: vec![(f2 + arc, 1.0), (e, -1.0)],
                    first_stage: Vec::new(),
                    relation: Relation::Le,
                    rhs: 0.0,
                });
            }
            for u in (1..n).filter(|&u| u != t) {
                let coeffs = (0..arcs)
                    .filter_map(|arc| {
                        if head(arc) == u {
                            Some((f1 + arc, 1.0))
                        } else if tail(arc) == u {
                            Some((f1 + arc, -1.0))
                        } else {
                            None
                        }
                    })
                    .collect();
                rows.push(StageRow { coeffs, first_stage: Vec::new(), relation: Relation::Le, rhs: 0.0 });
            }
        }
        SecondStage { costs, rows }
    }

    fn lipschitz(&self, _metric: &ScenarioMetric) -> f64 {
        let total: f64 = self.cost.iter().map(|c| self.inflation * c).sum();
        let min_c = self.cost.iter().copied().fold(f64::INFINITY, f64::min);
        total / min_c
    }

    /// Contract the root tree of `x`, then connect the uncovered terminals
    /// with a minimum spanning tree of the metric closure.
    fn round_recourse(&self, x: &[f64], a: Scenario, _z: &[f64]) -> Result<IntegralRecourse> {
        let n = self.points.len();
        let comp = self.components(x);
        let tree: Vec<usize> = (0..n).filter(|&u| comp[u] == comp[0]).collect();
        let pending: Vec<usize> = a.elements().map(|j| j + 1).filter(|&t| comp[t] != comp[0]).collect();
        let mut z = vec![0.0; self.edges.len()];
        // Prim from the contracted root tree.
        let mut attach: Vec<(f64, usize)> = pending
            .iter()
            .map(|&t| {
                tree.iter()
                    .map(|&u| (self.node_distance(u, t), u))
                    .min_by(|p, q| p.0.total_cmp(&q.0))
                    .expect("root is in the tree")
            })
            .collect();
        let mut done = vec![false; pending.len()];
        let mut total = 0.0;
        for _ in 0..pending.len() {
            let k = (0..pending.len())
                .filter(|&k| !done[k])
                .min_by(|&p, &q| attach[p].0.total_cmp(&attach[q].0))
                .expect("pending terminal left");
            done[k] = true;
            total += attach[k].0;
            z[self.edge_index(pending[k], attach[k].1)] = 1.0;
            for m in 0..pending.len() {
                let d = self.node_distance(pending[m], pending[k]);
                if !done[m] && d < attach[m].0 {
                    attach[m] = (d, pending[k]);
                }
            }
        }
        Ok(IntegralRecourse { cost: self.inflation * total, z })
    }
}

impl LocalRounding for SteinerTree {
    /// Target factor; the achieved factor is reported by the certificates.
    fn rho(&self) -> f64 {
        10.0
    }

    fn local_round(&self, x: &[f64], scenarios: &[Scenario]) -> Result<Rounding> {
        if x.len() != self.edges.len() {
            return Err(DroError::DimensionMismatch { expected: self.edges.len(), got: x.len() });
        }
        let threshold = |t: f64| x.iter().map(|&v| if v >= t - 1e-9 { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        let mut candidates = Vec::new();
        for t in [0.5, 0.25] {
            let forest = threshold(t);
            candidates.push(self.root_tree(&forest));
            candidates.push(self.attach_components(&forest));
        }
        candidates.push(vec![0.0; x.len()]);
        best_candidate(self, x, candidates, scenarios, self.rho())
    }
}
