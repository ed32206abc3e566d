//! Brute-force reference solutions at enumeration scale. Nothing here is
//! clever: every scenario is listed, every transport column is priced, and
//! every integral first stage is tried. The solvers elsewhere in the crate
//! are tested against these values.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{DroError, Result};
use crate::lp::{LinearProgram, Relation, Sense};
use crate::model::{AmbiguityBall, BallKind, Distribution, Evaluator, Scenario, ScenarioMetric, TwoStageProblem};

pub const SCENARIO_GUARD: usize = 4096;
pub const DECISION_GUARD: usize = 16;
pub const KMAXMIN_GROUND_GUARD: usize = 20;

/// `g(x, A)` for each listed scenario.
pub fn recourse_table(problem: &dyn TwoStageProblem, x: &[f64], scenarios: &[Scenario]) -> Result<Vec<f64>> {
    scenarios.par_iter().map(|&a| problem.recourse(x, a).map(|r| r.value)).collect()
}

/// Integral recourse cost of each listed scenario at integral `x`.
pub fn integral_table(problem: &dyn TwoStageProblem, x: &[f64], scenarios: &[Scenario]) -> Result<Vec<f64>> {
    scenarios.par_iter().map(|&a| problem.integral_recourse(x, a).map(|r| r.cost)).collect()
}

/// Worst-case expectation over the ball and a maximising distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerMax {
    pub value: f64,
    pub worst: Vec<(Scenario, f64)>,
}

/// `max_{q in ball(center)} E_q[values]`, where `values[i]` belongs to
/// `universe[i]` and the universe contains the support of the center.
pub fn inner_max(
    center: &Distribution,
    ball: &AmbiguityBall,
    metric: &ScenarioMetric,
    universe: &[Scenario],
    values: &[f64],
) -> Result<InnerMax> {
    if universe.len() > SCENARIO_GUARD {
        return Err(DroError::EnumerationTooLarge { what: "scenarios", size: universe.len(), guard: SCENARIO_GUARD });
    }
    if values.len() != universe.len() {
        return Err(DroError::DimensionMismatch { expected: universe.len(), got: values.len() });
    }
    if let Some(s) = center.support().find(|s| !universe.contains(s)) {
        return Err(DroError::InvalidDistribution(format!("support scenario {s:?} outside the universe")));
    }
    let u = universe.len();
    match ball.kind {
        BallKind::Wasserstein => {
            let atoms = center.atoms();
            let mut lp = LinearProgram::new(Sense::Maximize, Vec::new());
            let mut budget = Vec::new();
            let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); atoms.len()];
            let mut target = Vec::new();
            for (i, &(a, _)) in atoms.iter().enumerate() {
                for (k, &b) in universe.iter().enumerate() {
                    let col = lp.add_var(values[k]);
                    rows[i].push((col, 1.0));
                    budget.push((col, metric.distance(a, b)?));
                    target.push(k);
                }
            }
            for (i, row) in rows.into_iter().enumerate() {
                lp.add_constraint(row, Relation::Le, atoms[i].1);
            }
            lp.add_constraint(budget, Relation::Le, ball.radius);
            let sol = lp.solve()?;
            let mut q = vec![0.0; u];
            for (col, &k) in target.iter().enumerate() {
                q[k] += sol.primal[col];
            }
            Ok(InnerMax { value: sol.value, worst: collect_mass(universe, &q) })
        }
        BallKind::Linf => {
            let mut lp = LinearProgram::new(Sense::Maximize, values.to_vec());
            for (k, &a) in universe.iter().enumerate() {
                let p = center.prob(a);
                lp.set_bounds(k, (p - ball.radius).max(0.0), Some(p + ball.radius));
            }
            lp.add_constraint((0..u).map(|k| (k, 1.0)).collect(), Relation::Eq, 1.0);
            let sol = lp.solve()?;
            Ok(InnerMax { value: sol.value, worst: collect_mass(universe, &sol.primal) })
        }
    }
}

fn collect_mass(universe: &[Scenario], q: &[f64]) -> Vec<(Scenario, f64)> {
    universe.iter().zip(q).filter(|(_, &m)| m > 1e-12).map(|(&s, &m)| (s, m)).collect()
}

/// `h(x) = c.x + max_{q in ball} E_q[g(x, A)]`.
pub fn objective(
    problem: &dyn TwoStageProblem,
    x: &[f64],
    center: &Distribution,
    ball: &AmbiguityBall,
    metric: &ScenarioMetric,
    universe: &[Scenario],
) -> Result<f64> {
    let values = recourse_table(problem, x, universe)?;
    Ok(problem.first_stage_cost(x) + inner_max(center, ball, metric, universe, &values)?.value)
}

/// Cost of a fully integral solution: integral first stage, integral
/// recourse in every scenario, worst case over the ball.
pub fn integral_objective(
    problem: &dyn TwoStageProblem,
    x: &[f64],
    center: &Distribution,
    ball: &AmbiguityBall,
    metric: &ScenarioMetric,
    universe: &[Scenario],
) -> Result<f64> {
    let values = integral_table(problem, x, universe)?;
    Ok(problem.first_stage_cost(x) + inner_max(center, ball, metric, universe, &values)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Minimum of `h` over `{0,1}^m`; ties keep the first vector in binary
/// counting order with decision 0 as the lowest bit.
pub fn discrete_optimum(
    problem: &dyn TwoStageProblem,
    center: &Distribution,
    ball: &AmbiguityBall,
    metric: &ScenarioMetric,
    universe: &[Scenario],
) -> Result<Optimum> {
    let m = problem.num_decisions();
    if m > DECISION_GUARD {
        return Err(DroError::EnumerationTooLarge { what: "first-stage decisions", size: m, guard: DECISION_GUARD });
    }
    let values: Vec<(u32, f64)> = (0u32..(1u32 << m))
        .into_par_iter()
        .map(|mask| {
            let x = bits(mask, m);
            objective(problem, &x, center, ball, metric, universe).map(|v| (mask, v))
        })
        .collect::<Result<_>>()?;
    let (mask, value) = values
        .into_iter()
        .fold(None, |best: Option<(u32, f64)>, (k, v)| match best {
            Some((_, bv)) if bv <= v + 1e-12 => best,
            _ => Some((k, v)),
        })
        .expect("at least one first stage");
    Ok(Optimum { x: bits(mask, m), value })
}

pub fn bits(mask: u32, m: usize) -> Vec<f64> {
    (0..m).map(|i| f64::from(mask >> i & 1)).collect()
}

/// Minimum of `h` over `[0,1]^m` as one linear program that writes the
/// inner maximisation in dual form with a full second-stage block for
/// every scenario of the universe.
pub fn fractional_optimum(
    problem: &dyn TwoStageProblem,
    center: &Distribution,
    ball: &AmbiguityBall,
    metric: &ScenarioMetric,
    universe: &[Scenario],
) -> Result<Optimum> {
    if universe.len() > SCENARIO_GUARD {
        return Err(DroError::EnumerationTooLarge { what: "scenarios", size: universe.len(), guard: SCENARIO_GUARD });
    }
    let m = problem.num_decisions();
    let mut lp = LinearProgram::new(Sense::Minimize, problem.first_stage_costs().to_vec());
    for j in 0..m {
        lp.set_bounds(j, 0.0, Some(1.0));
    }
    // Recourse cost expression for each scenario: c2 . z_B.
    let mut cost_expr: Vec<Vec<(usize, f64)>> = Vec::with_capacity(universe.len());
    for &b in universe {
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
        cost_expr.push(stage.costs.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(k, &c)| (base + k, c)).collect());
    }
    match ball.kind {
        BallKind::Wasserstein => {
            let y = lp.add_var(ball.radius);
            for &(a, p) in center.atoms() {
                let theta = lp.add_var(p);
                for (k, &b) in universe.iter().enumerate() {
                    let mut coeffs = vec![(theta, 1.0), (y, metric.distance(a, b)?)];
                    coeffs.extend(cost_expr[k].iter().map(|&(v, c)| (v, -c)));
                    lp.add_constraint(coeffs, Relation::Ge, 0.0);
                }
            }
        }
        BallKind::Linf => {
            let t_pos = lp.add_var(1.0);
            let t_neg = lp.add_var(-1.0);
            for (k, &b) in universe.iter().enumerate() {
                let p = center.prob(b);
                let up = lp.add_var(p + ball.radius);
                let mut coeffs = vec![(t_pos, 1.0), (t_neg, -1.0), (up, 1.0)];
                let lo = (p - ball.radius).max(0.0);
                if lo > 0.0 {
                    let down = lp.add_var(-lo);
                    coeffs.push((down, -1.0));
                }
                coeffs.extend(cost_expr[k].iter().map(|&(v, c)| (v, -c)));
                lp.add_constraint(coeffs, Relation::Ge, 0.0);
            }
        }
    }
    let sol = lp.solve()?;
    Ok(Optimum { x: sol.primal[..m].to_vec(), value: sol.value })
}

/// Exact maximiser of `g(x, B) - y * distance(a, B)` over the universe.
pub fn best_response(
    eval: &Evaluator,
    metric: &ScenarioMetric,
    y: f64,
    a: Scenario,
    universe: &[Scenario],
) -> Result<(Scenario, f64)> {
    let mut best: Option<(Scenario, f64)> = None;
    for &b in universe {
        let v = eval.value(b)? - y * metric.distance(a, b)?;
        if best.is_none_or(|(_, bv)| v > bv + 1e-12) {
            best = Some((b, v));
        }
    }
    best.ok_or_else(|| DroError::InvalidInstance("empty universe".into()))
}

/// Exact `max { g(x, B) : B subset of candidates, |B| <= k }`.
pub fn kmaxmin(eval: &Evaluator, candidates: Scenario, k: usize) -> Result<(Scenario, f64)> {
    let c = candidates.len();
    if c > KMAXMIN_GROUND_GUARD {
        return Err(DroError::EnumerationTooLarge { what: "k-max-min ground set", size: c, guard: KMAXMIN_GROUND_GUARD });
    }
    let elems: Vec<usize> = candidates.elements().collect();
    let mut best = (Scenario::EMPTY, 0.0);
    let mut subsets: Vec<Scenario> = (0u32..(1u32 << c))
        .filter(|m| m.count_ones() as usize <= k)
        .map(|m| Scenario::from_elements((0..c).filter(|&i| m >> i & 1 == 1).map(|i| elems[i])))
        .collect();
    subsets.sort();
    for b in subsets {
        let v = eval.value(b)?;
        if v > best.1 + 1e-12 {
            best = (b, v);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScenarioSpace;
    use crate::problems::CoverProblem;

    fn vc3() -> (CoverProblem, Distribution) {
        let p = CoverProblem::vertex_cover(3, vec![(0, 1), (0, 2), (1, 2)], vec![1.0; 3], vec![2.0; 3]).unwrap();
        let d = Distribution::new([(Scenario::from_elements([0]), 0.5), (Scenario::full(3), 0.5)]).unwrap();
        (p, d)
    }

    #[test]
    fn vc3_inner_max_by_hand() {
        // E_p[g] = 0.5 * 2 + 0.5 * 3; moving 0.25 mass to the triangle adds 0.25.
        let (p, d) = vc3();
        let u = ScenarioSpace::all_subsets(3).enumerate(8).unwrap();
        let g = recourse_table(&p, &[0.0; 3], &u).unwrap();
        let w = inner_max(&d, &AmbiguityBall::wasserstein(0.25), &ScenarioMetric::Discrete, &u, &g).unwrap();
        assert!((w.value - 2.75).abs() < 1e-9);
        let e = inner_max(&d, &AmbiguityBall::wasserstein(0.0), &ScenarioMetric::Discrete, &u, &g).unwrap();
        assert!((e.value - 2.5).abs() < 1e-9);
    }

    #[test]
    fn vc3_optima_by_hand() {
        // Any two vertices cover the triangle for 2; the uniform half cover costs 1.5.
        let (p, d) = vc3();
        let u = ScenarioSpace::all_subsets(3).enumerate(8).unwrap();
        let ball = AmbiguityBall::wasserstein(0.25);
        let opt = discrete_optimum(&p, &d, &ball, &ScenarioMetric::Discrete, &u).unwrap();
        assert!((opt.value - 2.0).abs() < 1e-9);
        assert_eq!(opt.x, vec![1.0, 1.0, 0.0]);
        let frac = fractional_optimum(&p, &d, &ball, &ScenarioMetric::Discrete, &u).unwrap();
        assert!((frac.value - 1.5).abs() < 1e-9, "{frac:?}");
        let h = objective(&p, &frac.x, &d, &ball, &ScenarioMetric::Discrete, &u).unwrap();
        assert!((h - frac.value).abs() < 1e-9);
    }

    #[test]
    fn linf_inner_max_by_hand() {
        // Center 0.5/0.5 on g = 2 and 3, radius 0.2: shift 0.2 of mass up.
        let (p, d) = vc3();
        let u = ScenarioSpace::all_subsets(3).enumerate(8).unwrap();
        let g = recourse_table(&p, &[0.0; 3], &u).unwrap();
        let w = inner_max(&d, &AmbiguityBall::linf(0.2), &ScenarioMetric::Discrete, &u, &g).unwrap();
        // q(triangle) = 0.7, the remaining 0.3 goes to the single edge (g = 2).
        assert!((w.value - (0.7 * 3.0 + 0.3 * 2.0)).abs() < 1e-9);
        let frac = fractional_optimum(&p, &d, &AmbiguityBall::linf(0.2), &ScenarioMetric::Discrete, &u).unwrap();
        let h = objective(&p, &frac.x, &d, &AmbiguityBall::linf(0.2), &ScenarioMetric::Discrete, &u).unwrap();
        assert!((h - frac.value).abs() < 1e-8);
    }

    #[test]
    fn kmaxmin_on_triangle() {
        let (p, _) = vc3();
        let ev = Evaluator::new(&p, vec![0.0; 3]).unwrap();
        let (b, v) = kmaxmin(&ev, Scenario::full(3), 1).unwrap();
        assert_eq!(b.len(), 1);
        assert!((v - 2.0).abs() < 1e-9);
        assert!((kmaxmin(&ev, Scenario::full(3), 2).unwrap().1 - 2.0).abs() < 1e-9);
        assert!((kmaxmin(&ev, Scenario::full(3), 3).unwrap().1 - 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_dual_lp_terminates() {
        // Stalled the simplex before the Harris ratio test.
        let seed = crate::mix_seed(1, 31);
        let problem = crate::problems::generate::instance(crate::Family::VertexCover, 4, seed).unwrap();
        let p = problem.as_dyn();
        let space = ScenarioSpace::all_subsets(p.ground_size());
        let d = crate::problems::generate::explicit_center(space, 3, seed).unwrap();
        let u = space.enumerate(SCENARIO_GUARD).unwrap();
        let metric = ScenarioMetric::Discrete;
        let exact = fractional_optimum(p, &d, &AmbiguityBall::wasserstein(0.1), &metric, &u).unwrap();
        let lp = crate::ellipsoid::solve_saa_collapsible(p, &d, 0.1, &metric, problem.rounder()).unwrap();
        assert!((exact.value - lp.value).abs() < 1e-6);
    }
}
