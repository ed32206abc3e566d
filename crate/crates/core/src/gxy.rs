//! Oracles for the Lagrangified recourse
//!
//! ```text
//! g(x, y, A) = max_B  g(x, B) - y * dist(A, B)
//! ```
//!
//! and the column-generation solver for the worst-case transport problem
//! that they price. An oracle with guarantee `(b1, b2)` returns `B*` with
//! `g(x, B*) - y dist(A, B*) >= g(x, B) / b1 - b2 y dist(A, B)` for all `B`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{DroError, Result};
use crate::exactref;
use crate::lp::{LinearProgram, Relation, Sense};
use crate::model::{Distribution, Evaluator, Family, Scenario, ScenarioMetric, ScenarioSpace, TwoStageProblem};
use crate::problems::{CoverProblem, FacilityLocation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GxyResult {
    pub scenario: Scenario,
    /// `g(x, B*) - y * dist(A, B*)`.
    pub value: f64,
    /// `g(x, B*)`.
    pub recourse: f64,
}

pub trait GxyOracle: Sync {
    fn guarantee(&self) -> (f64, f64);
    fn solve(&self, eval: &Evaluator, y: f64, a: Scenario) -> Result<GxyResult>;
}

/// `max { g(x, B) : B subset of candidates, |B| <= k }` within factor `beta`.
pub trait MaxMinOracle: Sync {
    fn beta(&self) -> f64;
    fn solve(&self, eval: &Evaluator, candidates: Scenario, k: usize) -> Result<Scenario>;
}

fn result(eval: &Evaluator, metric: &ScenarioMetric, y: f64, a: Scenario, b: Scenario) -> Result<GxyResult> {
    let recourse = eval.value(b)?;
    Ok(GxyResult { scenario: b, value: recourse - y * metric.distance(a, b)?, recourse })
}

/// Keeps the better of two results; ties keep `best`.
fn better(best: GxyResult, other: GxyResult) -> GxyResult {
    if other.value > best.value + 1e-12 {
        other
    } else {
        best
    }
}

/// Exhaustive search over the scenario space.
pub struct ExactGxy {
    pub metric: ScenarioMetric,
    pub space: ScenarioSpace,
    universe: Vec<Scenario>,
}

impl ExactGxy {
    pub fn new(metric: ScenarioMetric, space: ScenarioSpace) -> Result<Self> {
        let universe = space.enumerate(exactref::SCENARIO_GUARD)?;
        Ok(Self { metric, space, universe })
    }
}

impl GxyOracle for ExactGxy {
    fn guarantee(&self) -> (f64, f64) {
        (1.0, 1.0)
    }

    fn solve(&self, eval: &Evaluator, y: f64, a: Scenario) -> Result<GxyResult> {
        let (b, _) = exactref::best_response(eval, &self.metric, y, a, &self.universe)?;
        result(eval, &self.metric, y, a, b)
    }
}

/// Exact search over the collapse set of `A`. Valid when `g` is monotone in
/// the scenario and every subset of the ground set is a scenario.
pub struct CollapsedGxy {
    pub metric: ScenarioMetric,
    pub ground: usize,
}

impl GxyOracle for CollapsedGxy {
    fn guarantee(&self) -> (f64, f64) {
        (1.0, 1.0)
    }

    fn solve(&self, eval: &Evaluator, y: f64, a: Scenario) -> Result<GxyResult> {
        let mut best = result(eval, &self.metric, y, a, a)?;
        for b in self.metric.collapse(a, self.ground)? {
            best = better(best, result(eval, &self.metric, y, a, b)?);
        }
        Ok(best)
    }
}

/// Discrete metric: the answer is either `A` itself or a k-max-min scenario.
pub struct DiscreteGxy<M> {
    pub maxmin: M,
    pub space: ScenarioSpace,
}

impl<M: MaxMinOracle> GxyOracle for DiscreteGxy<M> {
    fn guarantee(&self) -> (f64, f64) {
        (self.maxmin.beta(), 1.0)
    }

    fn solve(&self, eval: &Evaluator, y: f64, a: Scenario) -> Result<GxyResult> {
        let metric = ScenarioMetric::Discrete;
        let stay = result(eval, &metric, y, a, a)?;
        let far = self.maxmin.solve(eval, Scenario::full(self.space.ground), self.space.bound())?;
        Ok(better(stay, result(eval, &metric, y, a, far)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Grid {
    /// One call per distinct distance value: guarantee `(beta, 1)`.
    Distinct,
    /// Geometric thresholds with ratio `1 + eps`: guarantee `(beta, 1 + eps)`.
    Geometric(f64),
}

/// Enumerates distance thresholds `mu` and solves the constrained problem
/// `max { g(x, B) : dist(A, B) <= mu }` for each with a k-max-min oracle on
/// the elements within reach.
pub struct EnumeratedGxy<M> {
    pub maxmin: M,
    pub metric: ScenarioMetric,
    pub space: ScenarioSpace,
    pub grid: Grid,
}

impl<M: MaxMinOracle> EnumeratedGxy<M> {
    fn thresholds(&self, a: Scenario) -> Result<Vec<f64>> {
        match self.grid {
            Grid::Distinct => self.metric.distance_levels(a, self.space.ground),
            Grid::Geometric(eps) => {
                let hi = self.metric.max_distance();
                let lo = self.metric.min_positive_distance();
                if !(hi > 0.0) || !lo.is_finite() {
                    return Err(DroError::EmptyGrid);
                }
                let steps = ((hi / lo).ln() / (1.0 + eps).ln()).ceil().max(0.0) as i32;
                let mut out = vec![0.0];
                out.extend((0..=steps).map(|i| lo * (1.0 + eps).powi(i)));
                Ok(out)
            }
        }
    }

    fn constrained(&self, eval: &Evaluator, a: Scenario, mu: f64) -> Result<Scenario> {
        match self.metric {
            ScenarioMetric::Discrete if mu < 1.0 => Ok(a),
            _ => {
                let reach = self.metric.within(a, mu, self.space.ground)?;
                self.maxmin.solve(eval, reach, self.space.bound())
            }
        }
    }
}

impl<M: MaxMinOracle> GxyOracle for EnumeratedGxy<M> {
    fn guarantee(&self) -> (f64, f64) {
        match self.grid {
            Grid::Distinct => (self.maxmin.beta(), 1.0),
            Grid::Geometric(eps) => (self.maxmin.beta(), 1.0 + eps),
        }
    }

    fn solve(&self, eval: &Evaluator, y: f64, a: Scenario) -> Result<GxyResult> {
        let mut best = result(eval, &self.metric, y, a, a)?;
        if a.is_empty() {
            if let ScenarioMetric::AsymInf(g) = &self.metric {
                if g.anchor.is_none() {
                    return Ok(best);
                }
            }
        }
        // With every distance zero the single threshold 0 reaches everything.
        let grid = match self.thresholds(a) {
            Err(DroError::EmptyGrid) => vec![0.0],
            other => other?,
        };
        for mu in grid {
            let b = self.constrained(eval, a, mu)?;
            best = better(best, result(eval, &self.metric, y, a, b)?);
        }
        Ok(best)
    }
}

/// Exhaustive k-max-min.
pub struct BruteForceMaxMin;

impl MaxMinOracle for BruteForceMaxMin {
    fn beta(&self) -> f64 {
        1.0
    }

    fn solve(&self, eval: &Evaluator, candidates: Scenario, k: usize) -> Result<Scenario> {
        Ok(exactref::kmaxmin(eval, candidates, k)?.0)
    }
}

/// Takes every candidate; exact for monotone recourse when `k` admits it.
pub struct FullSetMaxMin;

impl MaxMinOracle for FullSetMaxMin {
    fn beta(&self) -> f64 {
        1.0
    }

    fn solve(&self, _eval: &Evaluator, candidates: Scenario, k: usize) -> Result<Scenario> {
        if candidates.len() > k {
            return Err(DroError::OracleContractViolation(format!(
                "full-set oracle needs k >= {} but k = {k}",
                candidates.len()
            )));
        }
        Ok(candidates)
    }
}

/// Greedy marginal-value k-max-min for covering problems. The declared
/// factor is `2e/(e-1)` for vertex cover, 2 for edge cover and `1 + ln n`
/// for set cover; it is checked empirically, not proved for this rule.
pub struct CoverGreedyMaxMin {
    beta: f64,
}

impl CoverGreedyMaxMin {
    pub fn for_problem(p: &CoverProblem) -> Self {
        let e = std::f64::consts::E;
        let beta = match p.family() {
            Family::VertexCover => 2.0 * e / (e - 1.0),
            Family::EdgeCover => 2.0,
            _ => 1.0 + (p.ground_size().max(1) as f64).ln(),
        };
        Self { beta }
    }
}

impl MaxMinOracle for CoverGreedyMaxMin {
    fn beta(&self) -> f64 {
        self.beta
    }

    fn solve(&self, eval: &Evaluator, candidates: Scenario, k: usize) -> Result<Scenario> {
        let mut chosen = Scenario::EMPTY;
        for _ in 0..k {
            let mut best: Option<(Scenario, f64)> = None;
            for j in candidates.minus(chosen).elements() {
                let b = chosen.with(j);
                let v = eval.value(b)?;
                if best.is_none_or(|(_, bv)| v > bv + 1e-12) {
                    best = Some((b, v));
                }
            }
            match best {
                Some((b, _)) => chosen = b,
                None => break,
            }
        }
        Ok(chosen)
    }
}

/// Cost shares of the ghost process on an integral first stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostShares {
    /// Time at which each facility becomes paid for.
    pub times: Vec<f64>,
    /// `(client, share)` for each client of the set.
    pub shares: Vec<(usize, f64)>,
}

impl CostShares {
    pub fn total(&self) -> f64 {
        self.shares.iter().map(|s| s.1).sum()
    }

    pub fn share(&self, client: usize) -> Option<f64> {
        self.shares.iter().find(|s| s.0 == client).map(|s| s.1)
    }
}

/// Every client of `clients` grows a ball at unit speed and never stops;
/// facility `i` is paid for at the first time `t` with
/// `sum_j (t - d_ij)^+ >= f_i`. A client's share is the time its ball
/// first touches a paid facility, `min_i max(t_i, d_ij)`.
pub fn cost_shares(fl: &FacilityLocation, opening: &[f64], clients: Scenario) -> CostShares {
    let nf = opening.len();
    let times: Vec<f64> = (0..nf)
        .map(|i| {
            if opening[i] <= 0.0 {
                return 0.0;
            }
            let mut d: Vec<f64> = clients.elements().map(|j| fl.distance(i, j)).collect();
            d.sort_by(f64::total_cmp);
            let mut sum = 0.0;
            for k in 0..d.len() {
                sum += d[k];
                let t = (opening[i] + sum) / (k + 1) as f64;
                if k + 1 == d.len() || t <= d[k + 1] {
                    return t;
                }
            }
            f64::INFINITY
        })
        .collect();
    let shares = clients
        .elements()
        .map(|j| {
            let s = (0..nf).map(|i| times[i].max(fl.distance(i, j))).fold(f64::INFINITY, f64::min);
            (j, s)
        })
        .collect();
    CostShares { times, shares }
}

/// Checks competitiveness, cost recovery within 3, and cross-monotonicity
/// against every one-element extension inside `universe`.
pub fn verify_cost_shares(fl: &FacilityLocation, x: &[f64], clients: Scenario, universe: Scenario) -> Result<()> {
    let opening = fl.residual_opening_costs(x);
    let cs = cost_shares(fl, &opening, clients);
    let g = fl.recourse(x, clients)?.value;
    let total = cs.total();
    let tol = 1e-7 * (1.0 + g);
    if total > g + tol {
        return Err(DroError::OracleContractViolation(format!("shares {total} exceed recourse {g}")));
    }
    if 3.0 * total < g - tol {
        return Err(DroError::OracleContractViolation(format!("shares {total} recover less than a third of {g}")));
    }
    for extra in universe.minus(clients).elements() {
        let bigger = cost_shares(fl, &opening, clients.with(extra));
        for &(j, s) in &cs.shares {
            let t = bigger.share(j).expect("client kept");
            if t > s + 1e-9 {
                return Err(DroError::OracleContractViolation(format!("share of {j} grew from {s} to {t}")));
            }
        }
    }
    Ok(())
}

/// Greedy on cost shares: repeatedly add the client whose share would be
/// largest after joining. A 6-approximation for k-max-min facility location
/// at integral `x`.
pub struct FacilityGreedyMaxMin<'a> {
    pub fl: &'a FacilityLocation,
}

impl FacilityGreedyMaxMin<'_> {
    pub fn select(&self, x: &[f64], candidates: Scenario, k: usize) -> Scenario {
        let opening = self.fl.residual_opening_costs(x);
        let mut chosen = Scenario::EMPTY;
        for _ in 0..k {
            let mut best: Option<(usize, f64)> = None;
            for j in candidates.minus(chosen).elements() {
                let s = cost_shares(self.fl, &opening, chosen.with(j)).share(j).expect("joined client");
                if best.is_none_or(|(_, bs)| s > bs + 1e-12) {
                    best = Some((j, s));
                }
            }
            match best {
                Some((j, _)) => chosen = chosen.with(j),
                None => break,
            }
        }
        chosen
    }
}

impl MaxMinOracle for FacilityGreedyMaxMin<'_> {
    fn beta(&self) -> f64 {
        6.0
    }

    fn solve(&self, eval: &Evaluator, candidates: Scenario, k: usize) -> Result<Scenario> {
        Ok(self.select(eval.x(), candidates, k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportColumn {
    pub source: Scenario,
    pub target: Scenario,
    pub mass: f64,
    pub distance: f64,
}

/// Approximately optimal worst-case transport at a fixed first stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    /// `sum mass * g(x, target)`.
    pub value: f64,
    pub columns: Vec<TransportColumn>,
    /// Scaled duals of the final restricted problem; feasible for the full
    /// dual, so `upper_bound >= OPT`.
    pub upper_bound: f64,
    pub rounds: usize,
    pub oracle_calls: usize,
}

const MAX_ROUNDS: usize = 10_000;

/// Column generation: start from the stay-put plan, price columns with the
/// oracle at the current duals, stop when no support scenario has a column
/// beating its dual by more than the tolerance. The returned plan is within
/// `b1 * b2` of optimal.
pub fn approx_transport(
    eval: &Evaluator,
    center: &Distribution,
    radius: f64,
    metric: &ScenarioMetric,
    oracle: &dyn GxyOracle,
) -> Result<TransportPlan> {
    let atoms = center.atoms();
    let mut cols: Vec<(usize, Scenario, f64, f64)> = Vec::new();
    for (i, &(a, _)) in atoms.iter().enumerate() {
        cols.push((i, a, 0.0, eval.value(a)?));
    }
    let scale = eval.problem().first_stage_costs().iter().sum::<f64>() + cols.iter().map(|c| c.3).fold(0.0, f64::max);
    let tol = (scale + 1.0) * 2f64.powi(-40);
    let (b1, b2) = oracle.guarantee();
    let mut calls = 0usize;
    for round in 1..=MAX_ROUNDS {
        let mut lp = LinearProgram::new(Sense::Maximize, cols.iter().map(|c| c.3).collect());
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); atoms.len()];
        for (k, c) in cols.iter().enumerate() {
            rows[c.0].push((k, 1.0));
        }
        for (i, row) in rows.into_iter().enumerate() {
            lp.add_constraint(row, Relation::Le, atoms[i].1);
        }
        lp.add_constraint(cols.iter().enumerate().map(|(k, c)| (k, c.2)).collect(), Relation::Le, radius);
        let sol = lp.solve()?;
        let theta: Vec<f64> = sol.duals[..atoms.len()].iter().map(|t| t.max(0.0)).collect();
        let y = sol.duals[atoms.len()].max(0.0);

        let priced: Vec<GxyResult> = atoms.par_iter().map(|&(a, _)| oracle.solve(eval, y, a)).collect::<Result<_>>()?;
        calls += priced.len();
        let mut added = false;
        for (i, r) in priced.iter().enumerate() {
            if r.value > theta[i] + tol && !cols.iter().any(|c| c.0 == i && c.1 == r.scenario) {
                let d = metric.distance(atoms[i].0, r.scenario)?;
                cols.push((i, r.scenario, d, r.recourse));
                added = true;
            }
        }
        if !added {
            let dual: f64 = atoms.iter().zip(&theta).map(|(&(_, p), t)| p * t).sum();
            let columns = cols
                .iter()
                .zip(&sol.primal)
                .filter(|(_, &m)| m > 1e-12)
                .map(|(c, &m)| TransportColumn { source: atoms[c.0].0, target: c.1, mass: m, distance: c.2 })
                .collect();
            return Ok(TransportPlan {
                value: sol.value,
                columns,
                upper_bound: b1 * (dual + tol) + b1 * b2 * radius * y,
                rounds: round,
                oracle_calls: calls,
            });
        }
    }
    Err(DroError::NumericalFailure(format!("column generation did not settle in {MAX_ROUNDS} rounds")))
}

/// `c + sum_columns mass * subgradient of g(., target)` evaluated at the
/// point of `eval`.
pub fn subgradient_from_transport(eval: &Evaluator, plan: &TransportPlan) -> Result<Vec<f64>> {
    let mut d = eval.problem().first_stage_costs().to_vec();
    for col in &plan.columns {
        let r = eval.recourse(col.target)?;
        for (dj, sj) in d.iter_mut().zip(&r.subgradient) {
            *dj += col.mass * sj;
        }
    }
    Ok(d)
}

/// Checks the `(b1, b2)` contract of one oracle answer against competitors.
pub fn check_contract(
    eval: &Evaluator,
    metric: &ScenarioMetric,
    guarantee: (f64, f64),
    y: f64,
    a: Scenario,
    answer: &GxyResult,
    competitors: &[Scenario],
) -> Result<()> {
    let (b1, b2) = guarantee;
    let got = eval.value(answer.scenario)? - y * metric.distance(a, answer.scenario)?;
    if (got - answer.value).abs() > 1e-7 * (1.0 + got.abs()) {
        return Err(DroError::OracleContractViolation(format!("reported {} but recomputed {got}", answer.value)));
    }
    for &b in competitors {
        let d = match metric.distance(a, b) {
            Ok(d) => d,
            Err(DroError::AnchorMissing) => continue,
            Err(e) => return Err(e),
        };
        let need = eval.value(b)? / b1 - b2 * y * d;
        if got < need - 1e-7 * (1.0 + need.abs()) {
            return Err(DroError::OracleContractViolation(format!(
                "A={a:?} y={y}: answer {:?} scores {got} < {need} from {b:?}",
                answer.scenario
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::generate;

    fn vc3() -> CoverProblem {
        CoverProblem::vertex_cover(3, vec![(0, 1), (0, 2), (1, 2)], vec![1.0; 3], vec![2.0; 3]).unwrap()
    }

    fn fl2() -> FacilityLocation {
        FacilityLocation::new(
            vec![vec![0.0], vec![10.0]],
            vec![vec![0.0], vec![5.0], vec![10.0]],
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            None,
        )
        .unwrap()
    }

    #[test]
    fn discrete_oracle_on_triangle() {
        // y = 1: staying on the single edge scores 2, jumping to the
        // triangle scores 3 - 1 = 2; either is a valid answer.
        let p = vc3();
        let ev = Evaluator::new(&p, vec![0.0; 3]).unwrap();
        let o = DiscreteGxy { maxmin: BruteForceMaxMin, space: ScenarioSpace::all_subsets(3) };
        let r = o.solve(&ev, 1.0, Scenario::from_elements([0])).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
        let r = o.solve(&ev, 0.5, Scenario::from_elements([0])).unwrap();
        assert_eq!(r.scenario, Scenario::full(3));
    }

    #[test]
    fn discrete_oracle_bounded_space() {
        let p = vc3();
        let ev = Evaluator::new(&p, vec![0.0; 3]).unwrap();
        let o = DiscreteGxy { maxmin: BruteForceMaxMin, space: ScenarioSpace::bounded(3, 1) };
        let r = o.solve(&ev, 0.0, Scenario::from_elements([0])).unwrap();
        assert!((r.recourse - 2.0).abs() < 1e-9);
    }

    #[test]
    fn shares_on_line() {
        // Nothing bought, opening cost 2 everywhere. Alone, client 0 pays the
        // facility at distance 0 by time 2.
        let fl = fl2();
        let cs = cost_shares(&fl, &[2.0, 2.0], Scenario::from_elements([0]));
        assert_eq!(cs.times, vec![2.0, 12.0]);
        assert_eq!(cs.shares, vec![(0, 2.0)]);
        // The middle client is 5 away from both and never speeds them up.
        let cs = cost_shares(&fl, &[2.0, 2.0], Scenario::full(3));
        assert_eq!(cs.times, vec![2.0, 2.0]);
        assert_eq!(cs.shares, vec![(0, 2.0), (1, 5.0), (2, 2.0)]);
        let cs = cost_shares(&fl, &[12.0, 12.0], Scenario::from_elements([0, 1]));
        // t + (t - 5) = 12 at t = 8.5.
        assert_eq!(cs.times[0], 8.5);
        verify_cost_shares(&fl, &[0.0, 0.0], Scenario::full(3), Scenario::full(3)).unwrap();
        verify_cost_shares(&fl, &[0.0, 0.0], Scenario::from_elements([1]), Scenario::full(3)).unwrap();
    }

    #[test]
    fn shares_with_bought_facility() {
        let fl = fl2();
        let cs = cost_shares(&fl, &fl.residual_opening_costs(&[1.0, 0.0]), Scenario::full(3));
        assert_eq!(cs.times[0], 0.0);
        assert_eq!(cs.share(0), Some(0.0));
        assert_eq!(cs.share(1), Some(5.0));
    }

    #[test]
    fn greedy_picks_expensive_clients() {
        let fl = fl2();
        let o = FacilityGreedyMaxMin { fl: &fl };
        let ev = Evaluator::new(&fl, vec![0.0, 0.0]).unwrap();
        let j = o.solve(&ev, Scenario::full(3), 2).unwrap();
        let best = exactref::kmaxmin(&ev, Scenario::full(3), 2).unwrap().1;
        assert!(ev.value(j).unwrap() * 6.0 >= best - 1e-9);
    }

    #[test]
    fn enumerated_oracle_on_line() {
        let fl = fl2();
        let metric = ScenarioMetric::AsymInf(crate::model::GroundMetric::euclidean(fl.clients(), Some(&[0.0])).unwrap());
        let space = ScenarioSpace::all_subsets(3);
        let universe = space.enumerate(8).unwrap();
        let ev = Evaluator::new(&fl, vec![0.0, 0.0]).unwrap();
        for grid in [Grid::Distinct, Grid::Geometric(0.25)] {
            let o = EnumeratedGxy { maxmin: BruteForceMaxMin, metric: metric.clone(), space, grid };
            for &a in &universe {
                for y in [0.0, 0.1, 0.5, 3.0] {
                    let r = o.solve(&ev, y, a).unwrap();
                    check_contract(&ev, &metric, o.guarantee(), y, a, &r, &universe).unwrap();
                }
            }
        }
    }

    #[test]
    fn column_generation_matches_full_lp() {
        let p = vc3();
        let d = Distribution::new([(Scenario::from_elements([0]), 0.5), (Scenario::full(3), 0.5)]).unwrap();
        let ev = Evaluator::new(&p, vec![0.0; 3]).unwrap();
        let metric = ScenarioMetric::Discrete;
        let o = CollapsedGxy { metric: metric.clone(), ground: 3 };
        let plan = approx_transport(&ev, &d, 0.25, &metric, &o).unwrap();
        assert!((plan.value - 2.75).abs() < 1e-9);
        assert!(plan.upper_bound >= plan.value - 1e-9 && plan.upper_bound <= plan.value + 1e-6);
        let moved: f64 = plan.columns.iter().map(|c| c.mass * c.distance).sum();
        assert!(moved <= 0.25 + 1e-12);
    }

    #[test]
    fn transport_with_greedy_oracle_is_within_factor() {
        for seed in 0..10 {
            let p = generate::vertex_cover(5, 0.5, seed).unwrap();
            let space = ScenarioSpace::bounded(p.ground_size(), 2);
            let d = generate::explicit_center(space, 3, seed).unwrap();
            let ev = Evaluator::new(&p, vec![0.0; 5]).unwrap();
            let o = DiscreteGxy { maxmin: CoverGreedyMaxMin::for_problem(&p), space };
            let plan = approx_transport(&ev, &d, 0.3, &ScenarioMetric::Discrete, &o).unwrap();
            let universe = space.enumerate(4096).unwrap();
            let g = exactref::recourse_table(&p, &[0.0; 5], &universe).unwrap();
            let exact = exactref::inner_max(&d, &crate::model::AmbiguityBall::wasserstein(0.3), &ScenarioMetric::Discrete, &universe, &g)
                .unwrap()
                .value;
            let (b1, b2) = o.guarantee();
            assert!(plan.value <= exact + 1e-9);
            assert!(plan.value * b1 * b2 >= exact - 1e-9);
            assert!(plan.upper_bound >= exact - 1e-7);
        }
    }
}
