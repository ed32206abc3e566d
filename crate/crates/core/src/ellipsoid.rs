//! Central-cut ellipsoid searches over the unit box `[0,1]^m`.
//!
//! Three drivers share one loop: the SAA solver for explicit centers with an
//! approximate separation oracle, its set-cover variant that works with
//! half-covered elements instead of a rounder, and a plain minimiser driven
//! by approximate subgradients. The collapsed LP for collapsible scenario
//! sets lives here as well since it answers the same question exactly.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{DroError, Result};
use crate::gxy::{approx_transport, GxyOracle, TransportPlan};
use crate::lp::{LinearProgram, Relation, Sense};
use crate::model::{dot, norm, Distribution, Evaluator, Scenario, ScenarioMetric, TwoStageProblem};
use crate::problems::{CoverProblem, LocalRounding, Residual, Rounding};

/// Largest eigenvalue ratio of the shape matrix before a search gives up.
pub const CONDITION_GUARD: f64 = 1e14;

#[derive(Debug, Clone)]
pub struct Ellipsoid {
    center: DVector<f64>,
    shape: DMatrix<f64>,
    iteration: usize,
}

impl Ellipsoid {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        let m = center.len();
        Self { center: DVector::from_vec(center), shape: DMatrix::identity(m, m) * (radius * radius), iteration: 0 }
    }

    pub fn center(&self) -> &[f64] {
        self.center.as_slice()
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let d = DVector::from_column_slice(p) - &self.center;
        match self.shape.clone().cholesky() {
            Some(ch) => d.dot(&ch.solve(&d)) <= 1.0 + 1e-9,
            None => false,
        }
    }

    pub fn condition(&self) -> f64 {
        let eig = self.shape.clone().symmetric_eigenvalues();
        let lo = eig.min();
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            eig.max() / lo
        }
    }

    fn log_det(&self) -> Option<f64> {
        let ch = self.shape.clone().cholesky()?;
        Some(2.0 * ch.l().diagonal().iter().map(|v| v.ln()).sum::<f64>())
    }

    /// Replaces the ellipsoid by the smallest one containing its half
    /// `{x : a.(x - center) <= 0}` and returns the volume ratio.
    pub fn cut(&mut self, a: &[f64]) -> Result<f64> {
        let m = self.center.len();
        let a = DVector::from_column_slice(a);
        let pa = &self.shape * &a;
        let apa = a.dot(&pa);
        if !(apa > 0.0) || !apa.is_finite() {
            return Err(DroError::NumericalFailure(format!("degenerate cut, a'Pa = {apa}")));
        }
        let before = self.log_det().ok_or_else(|| DroError::NumericalFailure("shape matrix lost definiteness".into()))?;
        let b = pa / apa.sqrt();
        if m == 1 {
            self.center -= &b / 2.0;
            self.shape /= 4.0;
        } else {
            let mf = m as f64;
            self.center -= &b / (mf + 1.0);
            self.shape = (&self.shape - (&b * b.transpose()) * (2.0 / (mf + 1.0))) * (mf * mf / (mf * mf - 1.0));
        }
        self.shape = (&self.shape + self.shape.transpose()) * 0.5;
        self.iteration += 1;
        let after = self.log_det().ok_or_else(|| DroError::NumericalFailure("shape matrix lost definiteness".into()))?;
        let ratio = (0.5 * (after - before)).exp();
        if ratio > (-1.0 / (2.0 * m as f64)).exp() + 1e-9 {
            return Err(DroError::NumericalFailure(format!("volume ratio {ratio} after update {}", self.iteration)));
        }
        Ok(ratio)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    Feasibility,
    Objective,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutRecord {
    pub iteration: usize,
    pub kind: CutKind,
    pub normal: Vec<f64>,
    pub anchor: Vec<f64>,
    pub rounded: Option<Vec<f64>>,
    pub estimate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The iteration count from the analysis was reached.
    Budget,
    /// An objective cut had a zero normal, so its candidate is already good.
    ZeroNormal,
    /// The shape matrix became too ill-conditioned to continue.
    Degenerate,
    /// The caller's iteration cap was reached first.
    Capped,
}

struct Probe {
    candidate: Vec<f64>,
    estimate: f64,
    normal: Vec<f64>,
}

struct Search {
    anchor: Vec<f64>,
    candidate: Vec<f64>,
    estimate: f64,
    iterations: usize,
    stop: StopReason,
    trace: Vec<CutRecord>,
}

/// Most violated box constraint at `x`, as the normal of the cut keeping
/// the box.
fn box_cut(x: &[f64]) -> Option<Vec<f64>> {
    let (j, v) = x
        .iter()
        .enumerate()
        .map(|(j, &v)| (j, if v < 0.0 { -v } else { v - 1.0 }))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if v <= 0.0 {
        return None;
    }
    let mut a = vec![0.0; x.len()];
    a[j] = if x[j] < 0.0 { -1.0 } else { 1.0 };
    Some(a)
}

fn search(m: usize, budget: usize, cap: Option<usize>, mut probe: impl FnMut(&[f64]) -> Result<Probe>) -> Result<Search> {
    let mut ell = Ellipsoid::ball(vec![0.0; m], (m as f64).sqrt());
    let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    let mut trace = Vec::new();
    let limit = cap.map_or(budget, |c| c.min(budget));
    let mut stop = if limit < budget { StopReason::Capped } else { StopReason::Budget };
    let mut iterations = 0;
    while iterations < limit {
        iterations += 1;
        let x = ell.center().to_vec();
        let (normal, record) = match box_cut(&x) {
            Some(a) => (a.clone(), CutRecord { iteration: iterations, kind: CutKind::Feasibility, normal: a, anchor: x, rounded: None, estimate: None }),
            None => {
                let p = probe(&x)?;
                if best.as_ref().is_none_or(|b| p.estimate < b.2) {
                    best = Some((x.clone(), p.candidate.clone(), p.estimate));
                }
                let rec = CutRecord {
                    iteration: iterations,
                    kind: CutKind::Objective,
                    normal: p.normal.clone(),
                    anchor: x,
                    rounded: Some(p.candidate),
                    estimate: Some(p.estimate),
                };
                if norm(&p.normal) <= 1e-12 {
                    trace.push(rec);
                    stop = StopReason::ZeroNormal;
                    break;
                }
                (p.normal, rec)
            }
        };
        trace.push(record);
        if ell.cut(&normal).is_err() || ell.condition() > CONDITION_GUARD {
            stop = StopReason::Degenerate;
            break;
        }
    }
    // The first center is the origin, which lies in the box, so at least one
    // objective probe always runs.
    let (anchor, candidate, estimate) = best.ok_or_else(|| DroError::NumericalFailure("no feasible center probed".into()))?;
    Ok(Search { anchor, candidate, estimate, iterations, stop, trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBound {
    ZeroOptimal,
    Bound(f64),
}

/// Lower bound on the optimum of the SAA problem, or a proof that buying
/// nothing is optimal. Assumes every scenario that needs any recourse costs
/// at least 1 under every first stage (all costs at least 1 suffices).
pub fn lower_bound(
    problem: &dyn TwoStageProblem,
    center: &Distribution,
    radius: f64,
    metric: &ScenarioMetric,
    oracle: &dyn GxyOracle,
) -> Result<LowerBound> {
    let eval = Evaluator::new(problem, vec![0.0; problem.num_decisions()])?;
    let (b1, _) = oracle.guarantee();
    let probe = oracle.solve(&eval, 0.0, center.atoms()[0].0)?;
    if probe.value < 1.0 / b1 {
        return Ok(LowerBound::ZeroOptimal);
    }
    // Mass the adversary can move onto a costly scenario, and mass already
    // sitting on costly scenarios.
    let sigma = metric.max_distance();
    let moved = if sigma > 0.0 { (radius / sigma).min(1.0) / b1 } else { 0.0 };
    let mut resident = 0.0;
    for &(a, p) in center.atoms() {
        if eval.value(a)? >= 1.0 - 1e-9 {
            resident += p;
        }
    }
    let lb = moved.max(resident);
    Ok(if lb > 0.0 { LowerBound::Bound(lb) } else { LowerBound::ZeroOptimal })
}

fn iteration_budget(m: usize, radius: f64, mu: f64, volume: f64) -> usize {
    let mf = m as f64;
    ((2.0 * mf * mf * (2.0 * radius / (mu * volume)).ln()).ceil().max(1.0)) as usize
}

/// Volume lower bound used for the unit box in the iteration counts.
const BOX_VOLUME: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolyConfig {
    pub epsilon: f64,
    pub iteration_cap: Option<usize>,
}

impl Default for PolyConfig {
    fn default() -> Self {
        Self { epsilon: 0.1, iteration_cap: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyReport {
    /// Integral first stage.
    pub x: Vec<f64>,
    /// Estimate with `estimate <= h(x) <= b1 b2 estimate`.
    pub estimate: f64,
    /// Ellipsoid center whose rounding produced `x`.
    pub anchor: Vec<f64>,
    pub lower_bound: LowerBound,
    pub guarantee: (f64, f64),
    pub rho: f64,
    /// Largest certified rounding ratio seen over all probes.
    pub worst_rounding_ratio: f64,
    pub iterations: usize,
    pub budget: usize,
    pub stop: StopReason,
    pub trace: Vec<CutRecord>,
}

fn plan_key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// The ellipsoid search for an explicit center. Each feasible center is
/// rounded locally; the transport problem is solved at the rounded point,
/// and its plan, priced with subgradients taken at the center, gives the
/// cut. `rounding_scenarios` are the scenarios the rounder certifies; they
/// should include every scenario a transport plan can move mass to.
#[allow(clippy::too_many_arguments)]
pub fn solve_saa_poly(
    problem: &dyn TwoStageProblem,
    center: &Distribution,
    radius: f64,
    metric: &ScenarioMetric,
    oracle: &dyn GxyOracle,
    rounder: &dyn LocalRounding,
    rounding_scenarios: &[Scenario],
    config: &PolyConfig,
) -> Result<PolyReport> {
    let m = problem.num_decisions();
    let c = problem.first_stage_costs();
    let guarantee = oracle.guarantee();
    let rho = rounder.rho();
    let lb = lower_bound(problem, center, radius, metric, oracle)?;
    let kappa = match lb {
        LowerBound::ZeroOptimal => {
            let eval = Evaluator::new(problem, vec![0.0; m])?;
            let plan = approx_transport(&eval, center, radius, metric, oracle)?;
            return Ok(PolyReport {
                x: vec![0.0; m],
                estimate: plan.value,
                anchor: vec![0.0; m],
                lower_bound: lb,
                guarantee,
                rho,
                worst_rounding_ratio: 1.0,
                iterations: 0,
                budget: 0,
                stop: StopReason::ZeroNormal,
                trace: Vec::new(),
            });
        }
        LowerBound::Bound(v) => config.epsilon * v,
    };
    let r = (m as f64).sqrt();
    let k_total = norm(c) + problem.subgradient_bound();
    let mu = (kappa / (2.0 * k_total * r)).min(1.0);
    let budget = iteration_budget(m, r, mu, BOX_VOLUME);

    let mut plans: HashMap<Vec<u64>, (f64, TransportPlan)> = HashMap::new();
    let mut worst = 0.0f64;
    let s = search(m, budget, config.iteration_cap, |x| {
        let rounding = rounder.local_round(x, rounding_scenarios)?;
        worst = worst.max(rounding.worst_ratio());
        let xt = rounding.x;
        let key = plan_key(&xt);
        if !plans.contains_key(&key) {
            let eval = Evaluator::new(problem, xt.clone())?;
            let plan = approx_transport(&eval, center, radius, metric, oracle)?;
            plans.insert(key.clone(), (dot(c, &xt) + plan.value, plan));
        }
        let (estimate, plan) = &plans[&key];
        let at_center = Evaluator::new(problem, x.to_vec())?;
        let normal = crate::gxy::subgradient_from_transport(&at_center, plan)?;
        Ok(Probe { candidate: xt, estimate: *estimate, normal })
    })?;
    Ok(PolyReport {
        x: s.candidate,
        estimate: s.estimate,
        anchor: s.anchor,
        lower_bound: lb,
        guarantee,
        rho,
        worst_rounding_ratio: worst,
        iterations: s.iterations,
        budget,
        stop: s.stop,
        trace: s.trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetCoverReport {
    /// Fractional point found by the search.
    pub fractional: Vec<f64>,
    /// `min(2 x, 1)`; `h` at this point is at most `b1 b2 estimate`.
    pub doubled: Vec<f64>,
    pub estimate: f64,
    pub lower_bound: LowerBound,
    pub guarantee: (f64, f64),
    pub iterations: usize,
    pub budget: usize,
    pub stop: StopReason,
    pub trace: Vec<CutRecord>,
}

/// Elements covered to at least one half by `x`.
pub fn half_covered(problem: &CoverProblem, x: &[f64]) -> Scenario {
    Scenario::from_elements((0..problem.ground_size()).filter(|&e| problem.coverage(x, e) >= 0.5 - 1e-9))
}

/// The search for set-cover type problems without a rounder: at a center
/// `x`, elements covered to one half are treated as free, the transport
/// problem is solved at the zero first stage on the remaining elements, and
/// the estimate is `2 c.x` plus its value.
pub fn solve_setcover_specialized(
    problem: &CoverProblem,
    center: &Distribution,
    radius: f64,
    metric: &ScenarioMetric,
    oracle: &dyn GxyOracle,
    config: &PolyConfig,
) -> Result<SetCoverReport> {
    let m = problem.num_decisions();
    let c = problem.first_stage_costs();
    let guarantee = oracle.guarantee();
    let doubled = |x: &[f64]| x.iter().map(|v| (2.0 * v).min(1.0)).collect::<Vec<f64>>();
    let zero = vec![0.0; m];
    let lb = lower_bound(problem, center, radius, metric, oracle)?;
    let kappa = match lb {
        LowerBound::ZeroOptimal => {
            let eval = Evaluator::new(problem, zero.clone())?;
            let plan = approx_transport(&eval, center, radius, metric, oracle)?;
            return Ok(SetCoverReport {
                fractional: zero.clone(),
                doubled: zero,
                estimate: plan.value,
                lower_bound: lb,
                guarantee,
                iterations: 0,
                budget: 0,
                stop: StopReason::ZeroNormal,
                trace: Vec::new(),
            });
        }
        LowerBound::Bound(v) => config.epsilon * v,
    };
    let r = (m as f64).sqrt();
    let k_total = norm(c) + problem.subgradient_bound();
    let mu = (kappa / (2.0 * k_total * r)).min(1.0);
    let budget = iteration_budget(m, r, mu, BOX_VOLUME);

    let mut plans: HashMap<Scenario, TransportPlan> = HashMap::new();
    let s = search(m, budget, config.iteration_cap, |x| {
        let free = half_covered(problem, x);
        if !plans.contains_key(&free) {
            let residual = Residual { inner: problem, covered: free };
            let eval = Evaluator::new(&residual, zero.clone())?;
            plans.insert(free, approx_transport(&eval, center, radius, metric, oracle)?);
        }
        let plan = &plans[&free];
        let at_center = Evaluator::new(problem, x.to_vec())?;
        let mut normal = c.to_vec();
        for col in &plan.columns {
            let sub = at_center.recourse(col.target.minus(free))?;
            for (n, s) in normal.iter_mut().zip(&sub.subgradient) {
                *n += col.mass * s;
            }
        }
        Ok(Probe { candidate: doubled(x), estimate: 2.0 * dot(c, x) + plan.value, normal })
    })?;
    Ok(SetCoverReport {
        fractional: s.anchor,
        doubled: s.candidate,
        estimate: s.estimate,
        lower_bound: lb,
        guarantee,
        iterations: s.iterations,
        budget,
        stop: s.stop,
        trace: s.trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexConfig {
    pub epsilon: f64,
    pub kappa: f64,
    /// Bound on the norm of the subgradients returned by the oracle.
    pub lipschitz: f64,
    pub iteration_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// Subgradient accuracy requested from the oracle.
    pub omega: f64,
    pub iterations: usize,
    pub budget: usize,
    pub stop: StopReason,
}

/// Minimises a nonnegative convex function over `[0,1]^m` given an oracle
/// that returns its value and an `omega`-subgradient at a point; `omega` is
/// chosen here and passed to every call. Returns the best probed center.
pub fn minimize_convex(
    m: usize,
    config: &ConvexConfig,
    mut oracle: impl FnMut(&[f64], f64) -> Result<(f64, Vec<f64>)>,
) -> Result<ConvexOutcome> {
    if !(config.kappa > 0.0) || !(config.lipschitz > 0.0) {
        return Err(DroError::InvalidInstance("kappa and the Lipschitz bound must be positive".into()));
    }
    let r = (m as f64).sqrt();
    let mf = m as f64;
    let budget = ((2.0 * mf * mf * (16.0 * config.lipschitz * r * r / (BOX_VOLUME * config.kappa)).ln()).ceil().max(1.0)) as usize;
    let n = budget as f64 * (8.0 * budget as f64 * config.lipschitz * r / config.kappa).ln().max(1.0);
    let omega = config.epsilon / (2.0 * n);
    let s = search(m, budget, config.iteration_cap, |x| {
        let (value, normal) = oracle(x, omega)?;
        Ok(Probe { candidate: x.to_vec(), estimate: value, normal })
    })?;
    Ok(ConvexOutcome { x: s.candidate, value: s.estimate, omega, iterations: s.iterations, budget, stop: s.stop })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapsibleReport {
    pub fractional: Vec<f64>,
    pub value: f64,
    /// Optimal multiplier of the transport budget.
    pub budget_price: f64,
    pub rounded: Vec<f64>,
    pub rounded_value: f64,
    pub rounding: Rounding,
    /// Union of the collapse sets of the support.
    pub scenarios: Vec<Scenario>,
}

/// The compact LP: `theta_A >= g(x, B) - y dist(A, B)` only for `B` in the
/// collapse set of `A`. Exact when `g` is monotone and every subset of the
/// ground set is a scenario.
fn collapsed_program(
    problem: &dyn TwoStageProblem,
    center: &Distribution,
    radius: f64,
    metric: &ScenarioMetric,
    fixed: Option<&[f64]>,
) -> Result<(LinearProgram, usize, Vec<Scenario>)> {
    let m = problem.num_decisions();
    let ground = problem.ground_size();
    let mut reach: Vec<Vec<Scenario>> = Vec::new();
    for &(a, _) in center.atoms() {
        let mut set = metric.collapse(a, ground)?;
        set.push(a);
        set.sort();
        set.dedup();
        reach.push(set);
    }
    let mut scenarios: Vec<Scenario> = reach.iter().flatten().copied().collect();
    scenarios.sort();
    scenarios.dedup();

    let mut lp = LinearProgram::new(Sense::Minimize, problem.first_stage_costs().to_vec());
    for j in 0..m {
        match fixed {
            Some(x) => lp.set_bounds(j, x[j], Some(x[j])),
            None => lp.set_bounds(j, 0.0, Some(1.0)),
        }
    }
    let mut cost_expr: HashMap<Scenario, Vec<(usize, f64)>> = HashMap::new();
    for &b in &scenarios {
        let stage = problem.second_stage(b);
        let base = lp.num_vars();
        for _ in &stage.costs {
            lp.add_var(0.0);
        }
        for row in &stage.rows {
            let mut coeffs: Vec<(usize, f64)> = row.coeffs.iter().map(|&(k, a)| (base + k, a)).collect();
            coeffs.extend(row.first_stage.iter().copied());
            lp.add_constraint(coeffs, row.relation, row.rhs);
        }
        cost_expr.insert(b, stage.costs.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(k, &c)| (base + k, c)).collect());
    }
    let y = lp.add_var(radius);
    for (i, &(a, p)) in center.atoms().iter().enumerate() {
        let theta = lp.add_var(p);
        for &b in &reach[i] {
            let mut coeffs = vec![(theta, 1.0), (y, metric.distance(a, b)?)];
            coeffs.extend(cost_expr[&b].iter().map(|&(v, c)| (v, -c)));
            lp.add_constraint(coeffs, Relation::Ge, 0.0);
        }
    }
    Ok((lp, y, scenarios))
}

/// `h(x)` for a Wasserstein ball through the collapsed LP at fixed `x`.
pub fn collapsed_value(
    problem: &dyn TwoStageProblem,
    x: &[f64],
    center: &Distribution,
    radius: f64,
    metric: &ScenarioMetric,
) -> Result<f64> {
    if x.len() != problem.num_decisions() {
        return Err(DroError::DimensionMismatch { expected: problem.num_decisions(), got: x.len() });
    }
    Ok(collapsed_program(problem, center, radius, metric, Some(x))?.0.solve()?.value)
}

/// Exact fractional optimum over the box for a Wasserstein ball and a
/// monotone recourse, followed by a local rounding certified on the
/// collapse scenarios.
pub fn solve_saa_collapsible(
    problem: &dyn TwoStageProblem,
    center: &Distribution,
    radius: f64,
    metric: &ScenarioMetric,
    rounder: &dyn LocalRounding,
) -> Result<CollapsibleReport> {
    let m = problem.num_decisions();
    let (lp, y, scenarios) = collapsed_program(problem, center, radius, metric, None)?;
    let sol = lp.solve()?;
    let fractional: Vec<f64> = sol.primal[..m].iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let rounding = rounder.local_round(&fractional, &scenarios)?;
    let rounded_value = collapsed_value(problem, &rounding.x, center, radius, metric)?;
    Ok(CollapsibleReport {
        fractional,
        value: sol.value,
        budget_price: sol.primal[y],
        rounded: rounding.x.clone(),
        rounded_value,
        rounding,
        scenarios,
    })
}
