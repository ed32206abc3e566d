//! `dro solve`: one instance, one method.

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use dro_core::ellipsoid::{solve_saa_collapsible, solve_saa_poly, solve_setcover_specialized, PolyConfig, StopReason};
use dro_core::exactref::{self, SCENARIO_GUARD};
use dro_core::gxy::{
    BruteForceMaxMin, CollapsedGxy, CoverGreedyMaxMin, DiscreteGxy, EnumeratedGxy, ExactGxy, FacilityGreedyMaxMin, Grid,
    GxyOracle, MaxMinOracle,
};
use dro_core::linfty::{solve_linfty, LinftyConfig};
use dro_core::problems::AnyProblem;
use dro_core::saa::{default_replicates, run_saa, sample_count, SaaConfig};
use dro_core::{mix_seed, BallKind, DroError, Center, Distribution, Scenario, ScenarioMetric};
use serde::Serialize;

use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SaaEllipsoid,
    CollapsibleLp,
    Linfty,
    SetcoverSpecial,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::SaaEllipsoid => "saa-ellipsoid",
            Method::CollapsibleLp => "collapsible-lp",
            Method::Linfty => "linfty",
            Method::SetcoverSpecial => "setcover-special",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub method: Method,
    pub exact: bool,
    pub epsilon: f64,
    pub delta: f64,
    pub kappa: Option<f64>,
    pub replicates: Option<usize>,
    pub samples: Option<u64>,
    pub sample_constant: f64,
    pub seed: u64,
    pub iteration_cap: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: Method::SaaEllipsoid,
            exact: false,
            epsilon: 0.1,
            delta: 0.1,
            kappa: None,
            replicates: None,
            samples: None,
            sample_constant: dro_core::saa::DEFAULT_SAMPLE_CONSTANT,
            seed: 0,
            iteration_cap: None,
        }
    }
}

/// Comparison of the returned solution with the enumerated optimum over the
/// same domain (integral or fractional).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactCheck {
    pub value: f64,
    pub optimum: f64,
    pub ratio: f64,
    pub optimum_x: Vec<f64>,
    /// `h` at the rounded solution, and its ratio to the integral optimum.
    pub rounded_value: Option<f64>,
    pub rounded_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateSummary {
    pub index: usize,
    pub seed: u64,
    pub support: usize,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub method: Method,
    pub family: &'static str,
    pub seed: u64,
    pub solution: Vec<f64>,
    pub integral: bool,
    pub estimate: f64,
    pub rounded: Option<Vec<f64>>,
    pub guarantee: Option<(f64, f64)>,
    pub rho: Option<f64>,
    pub worst_rounding_ratio: Option<f64>,
    pub iterations: usize,
    pub stop: Option<StopReason>,
    pub replicates: Vec<ReplicateSummary>,
    pub exact: Option<ExactCheck>,
    /// Simplex pivots spent.
    pub runtime: u64,
}

/// What a method returns for one explicit center.
#[derive(Debug, Clone)]
struct Outcome {
    solution: Vec<f64>,
    integral: bool,
    estimate: f64,
    rounded: Option<Vec<f64>>,
    guarantee: Option<(f64, f64)>,
    rho: Option<f64>,
    worst_rounding_ratio: Option<f64>,
    iterations: usize,
    stop: Option<StopReason>,
}

fn enumerated<'a, M: MaxMinOracle + 'a>(maxmin: M, inst: &Instance) -> Box<dyn GxyOracle + 'a> {
    match &inst.metric {
        ScenarioMetric::Discrete => Box::new(DiscreteGxy { maxmin, space: inst.space }),
        metric => Box::new(EnumeratedGxy { maxmin, metric: metric.clone(), space: inst.space, grid: Grid::Distinct }),
    }
}

/// Exhaustive with `exact`; the collapse-set oracle over all subsets;
/// otherwise threshold enumeration around the family's k-max-min oracle.
pub fn oracle_for(inst: &Instance, exact: bool) -> Result<Box<dyn GxyOracle + '_>> {
    if exact {
        return Ok(Box::new(ExactGxy::new(inst.metric.clone(), inst.space)?));
    }
    if inst.space.is_all_subsets() {
        return Ok(Box::new(CollapsedGxy { metric: inst.metric.clone(), ground: inst.space.ground }));
    }
    Ok(match &inst.problem {
        AnyProblem::Cover(p) => enumerated(CoverGreedyMaxMin::for_problem(p), inst),
        AnyProblem::Facility(fl) => enumerated(FacilityGreedyMaxMin { fl }, inst),
        AnyProblem::Steiner(_) => enumerated(BruteForceMaxMin, inst),
    })
}

/// Scenarios the rounder certifies: the whole space when it is small,
/// otherwise the support of the center.
fn rounding_scenarios(inst: &Instance, center: &Distribution) -> Vec<Scenario> {
    inst.space.enumerate(SCENARIO_GUARD).unwrap_or_else(|_| center.support().collect())
}

/// Default SAA sample size with `tau / kappa` taken as `lambda * sum(c) / kappa`.
pub fn default_samples(inst: &Instance, opts: &SolveOptions) -> u64 {
    let p = inst.problem();
    let lambda = p.inflation();
    let kappa = opts.kappa.unwrap_or(opts.epsilon);
    let tau: f64 = lambda * p.first_stage_costs().iter().sum::<f64>();
    let log_x = p.num_decisions() as f64 * std::f64::consts::LN_2;
    sample_count(opts.epsilon, opts.delta, lambda, log_x, (tau / kappa).ln().max(1.0), opts.sample_constant)
}

fn solve_explicit(inst: &Instance, opts: &SolveOptions, center: &Distribution) -> Result<Outcome> {
    let p = inst.problem();
    let r = inst.ball.radius;
    let poly = PolyConfig { epsilon: opts.epsilon, iteration_cap: opts.iteration_cap };
    Ok(match opts.method {
        Method::SaaEllipsoid => {
            let oracle = oracle_for(inst, opts.exact)?;
            let scenarios = rounding_scenarios(inst, center);
            let rep =
                solve_saa_poly(p, center, r, &inst.metric, oracle.as_ref(), inst.problem.rounder(), &scenarios, &poly)?;
            Outcome {
                solution: rep.x,
                integral: true,
                estimate: rep.estimate,
                rounded: None,
                guarantee: Some(rep.guarantee),
                rho: Some(rep.rho),
                worst_rounding_ratio: Some(rep.worst_rounding_ratio),
                iterations: rep.iterations,
                stop: Some(rep.stop),
            }
        }
        Method::CollapsibleLp => {
            if !inst.space.is_all_subsets() {
                bail!("collapsible-lp needs every subset as a scenario");
            }
            let rep = solve_saa_collapsible(p, center, r, &inst.metric, inst.problem.rounder())?;
            Outcome {
                solution: rep.fractional,
                integral: false,
                estimate: rep.value,
                rounded: Some(rep.rounded),
                guarantee: Some((1.0, 1.0)),
                rho: Some(rep.rounding.rho),
                worst_rounding_ratio: Some(rep.rounding.worst_ratio()),
                iterations: 0,
                stop: None,
            }
        }
        Method::SetcoverSpecial => {
            let AnyProblem::Cover(cover) = &inst.problem else {
                bail!("setcover-special needs a covering family");
            };
            let oracle = oracle_for(inst, opts.exact)?;
            let rep = solve_setcover_specialized(cover, center, r, &inst.metric, oracle.as_ref(), &poly)?;
            Outcome {
                solution: rep.doubled,
                integral: false,
                estimate: rep.estimate,
                rounded: None,
                guarantee: Some(rep.guarantee),
                rho: None,
                worst_rounding_ratio: None,
                iterations: rep.iterations,
                stop: Some(rep.stop),
            }
        }
        Method::Linfty => unreachable!("dispatched separately"),
    })
}

fn solve_linf(inst: &Instance, opts: &SolveOptions) -> Result<Outcome> {
    let p = inst.problem();
    let cfg = LinftyConfig {
        epsilon: opts.epsilon,
        delta: opts.delta,
        seed: opts.seed,
        iteration_cap: opts.iteration_cap,
        ..LinftyConfig::default()
    };
    let rep = solve_linfty(p, &inst.center, inst.ball.radius, &cfg)?;
    let scenarios = match &inst.center {
        Center::Explicit(d) => rounding_scenarios(inst, d),
        Center::Independent(_) => inst.space.enumerate(SCENARIO_GUARD).unwrap_or_else(|_| vec![Scenario::full(inst.space.ground)]),
    };
    let rounding = inst.problem.rounder().local_round(&rep.x, &scenarios)?;
    Ok(Outcome {
        solution: rep.x,
        integral: false,
        estimate: rep.proxy_value,
        rounded: Some(rounding.x.clone()),
        guarantee: None,
        rho: Some(rounding.rho),
        worst_rounding_ratio: Some(rounding.worst_ratio()),
        iterations: rep.search.as_ref().map_or(0, |s| s.iterations),
        stop: rep.search.map(|s| s.stop),
    })
}

/// Compares a solution with the enumerated optimum; `integral` picks the
/// domain, and a rounded point is compared with the integral optimum.
pub fn exact_check(inst: &Instance, solution: &[f64], integral: bool, rounded: Option<&[f64]>) -> Result<ExactCheck> {
    let p = inst.problem();
    let universe = inst.space.enumerate(SCENARIO_GUARD).context("exact reference")?;
    let center = inst.center.explicit(SCENARIO_GUARD).context("exact reference")?;
    let h = |x: &[f64]| exactref::objective(p, x, &center, &inst.ball, &inst.metric, &universe);
    let value = h(solution)?;
    let optimum = if integral {
        exactref::discrete_optimum(p, &center, &inst.ball, &inst.metric, &universe)?
    } else {
        exactref::fractional_optimum(p, &center, &inst.ball, &inst.metric, &universe)?
    };
    let (rounded_value, rounded_ratio) = match rounded {
        Some(x) => {
            let v = h(x)?;
            let best = exactref::discrete_optimum(p, &center, &inst.ball, &inst.metric, &universe)?.value;
            (Some(v), Some(ratio(v, best)))
        }
        None => (None, None),
    };
    Ok(ExactCheck { value, optimum: optimum.value, ratio: ratio(value, optimum.value), optimum_x: optimum.x, rounded_value, rounded_ratio })
}

/// `value / optimum`, with `0/0 = 1`.
pub fn ratio(value: f64, optimum: f64) -> f64 {
    if optimum.abs() <= 1e-12 {
        if value.abs() <= 1e-9 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        value / optimum
    }
}

/// Solves and reports; `runtime` counts simplex pivots, so it is the same
/// on every run.
pub fn solve(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport> {
    let (report, pivots) = crate::metered(|| solve_unmetered(inst, opts))?;
    let mut report = report?;
    report.runtime = pivots;
    Ok(report)
}

fn solve_unmetered(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport> {
    match (inst.ball.kind, opts.method) {
        (BallKind::Linf, m) if m != Method::Linfty => bail!("method {} needs a wasserstein ball", m.name()),
        (BallKind::Wasserstein, Method::Linfty) => bail!("method linfty needs a linf ball"),
        _ => {}
    }
    let mut replicates = Vec::new();
    let outcome = match (&inst.center, opts.method, opts.samples) {
        (_, Method::Linfty, _) => solve_linf(inst, opts)?,
        (Center::Explicit(d), _, None) => solve_explicit(inst, opts, d)?,
        (center, _, samples) => {
            let mut cfg = SaaConfig::new(opts.epsilon, opts.delta, 1, opts.seed);
            cfg.samples = samples.unwrap_or_else(|| default_samples(inst, opts));
            cfg.replicates = opts.replicates.unwrap_or_else(|| default_replicates(opts.epsilon, opts.delta));
            cfg.kappa = opts.kappa.unwrap_or(0.0);
            cfg.parallel = false;
            let stream = inst.sampler_seed.map_or(opts.seed, |s| mix_seed(s, opts.seed));
            cfg.seed = stream;
            let saa = run_saa(center, &cfg, |d| {
                solve_explicit(inst, opts, d)
                    .map(|o| (o.solution, o.estimate))
                    .map_err(|e| e.downcast::<DroError>().unwrap_or_else(|e| DroError::InvalidInstance(format!("{e:#}"))))
            })?;
            replicates = saa
                .replicates
                .iter()
                .map(|r| ReplicateSummary { index: r.index, seed: r.seed, support: r.support, estimate: r.estimate })
                .collect();
            // Re-solve the winner for its full report; the solve is deterministic.
            let chosen = center.sample(saa.replicates[saa.selected].seed, cfg.samples).distribution()?;
            solve_explicit(inst, opts, &chosen)?
        }
    };
    let exact = if opts.exact {
        Some(exact_check(inst, &outcome.solution, outcome.integral, outcome.rounded.as_deref())?)
    } else {
        None
    };
    Ok(SolveReport {
        method: opts.method,
        family: inst.family().name(),
        seed: opts.seed,
        solution: outcome.solution,
        integral: outcome.integral,
        estimate: outcome.estimate,
        rounded: outcome.rounded,
        guarantee: outcome.guarantee,
        rho: outcome.rho,
        worst_rounding_ratio: outcome.worst_rounding_ratio,
        iterations: outcome.iterations,
        stop: outcome.stop,
        replicates,
        exact,
        runtime: 0,
    })
}

