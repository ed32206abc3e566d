use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dro_core::ellipsoid::{solve_saa_collapsible, solve_saa_poly, PolyConfig};
use dro_core::exactref::{self, SCENARIO_GUARD};
use dro_core::gxy::{approx_transport, cost_shares, CollapsedGxy, FacilityGreedyMaxMin};
use dro_core::problems::generate;
use dro_core::{AmbiguityBall, Distribution, Evaluator, Family, Scenario, ScenarioMetric, ScenarioSpace};

fn vc_setup() -> (dro_core::problems::AnyProblem, Distribution, Vec<Scenario>) {
    let problem = generate::instance(Family::VertexCover, 4, 7).unwrap();
    let space = ScenarioSpace::all_subsets(problem.as_dyn().ground_size());
    let center = generate::explicit_center(space, 3, 7).unwrap();
    let universe = space.enumerate(SCENARIO_GUARD).unwrap();
    (problem, center, universe)
}

fn lp(c: &mut Criterion) {
    let (problem, center, universe) = vc_setup();
    let p = problem.as_dyn();
    let ball = AmbiguityBall::wasserstein(0.25);
    c.bench_function("fractional_optimum_vc4", |b| {
        b.iter(|| exactref::fractional_optimum(p, &center, &ball, &ScenarioMetric::Discrete, black_box(&universe)).unwrap())
    });
    c.bench_function("collapsible_lp_vc4", |b| {
        b.iter(|| solve_saa_collapsible(p, &center, black_box(0.25), &ScenarioMetric::Discrete, problem.rounder()).unwrap())
    });
}

fn transport(c: &mut Criterion) {
    let (problem, center, _) = vc_setup();
    let p = problem.as_dyn();
    let metric = ScenarioMetric::Discrete;
    let oracle = CollapsedGxy { metric: metric.clone(), ground: p.ground_size() };
    let x = vec![0.0, 1.0, 0.0, 1.0];
    c.bench_function("approx_transport_vc4", |b| {
        b.iter(|| {
            let eval = Evaluator::new(p, x.clone()).unwrap();
            approx_transport(&eval, &center, black_box(0.25), &metric, &oracle).unwrap()
        })
    });
}

fn ellipsoid(c: &mut Criterion) {
    let (problem, center, universe) = vc_setup();
    let p = problem.as_dyn();
    let metric = ScenarioMetric::Discrete;
    let oracle = CollapsedGxy { metric: metric.clone(), ground: p.ground_size() };
    let cfg = PolyConfig { epsilon: 0.1, iteration_cap: None };
    let mut group = c.benchmark_group("ellipsoid");
    group.sample_size(10);
    group.bench_function("solve_saa_poly_vc4", |b| {
        b.iter(|| solve_saa_poly(p, &center, black_box(0.25), &metric, &oracle, problem.rounder(), &universe, &cfg).unwrap())
    });
    group.finish();
}

fn facility(c: &mut Criterion) {
    let fl = generate::facility_location(3, 7, 11).unwrap();
    let x = vec![1.0, 0.0, 0.0];
    let full = Scenario::full(7);
    let opening = fl.residual_opening_costs(&x);
    c.bench_function("cost_shares_fl3x7", |b| b.iter(|| cost_shares(&fl, &opening, black_box(full))));
    c.bench_function("greedy_kmaxmin_fl3x7", |b| {
        b.iter(|| FacilityGreedyMaxMin { fl: &fl }.select(&x, black_box(full), 4))
    });
    c.bench_function("brute_kmaxmin_fl3x7", |b| {
        b.iter(|| {
            let eval = Evaluator::new(&fl, x.clone()).unwrap();
            exactref::kmaxmin(&eval, black_box(full), 4).unwrap()
        })
    });
}

criterion_group!(benches, lp, transport, ellipsoid, facility);
criterion_main!(benches);
