//! Acceptance suite. Each test checks one criterion and writes a single
//! PASS/FAIL line to stdout, past the test harness capture.

use std::io::Write;
use std::process::Command;

use dro_cli::experiment::saa_trial;
use dro_core::ellipsoid::{solve_saa_collapsible, solve_saa_poly, PolyConfig};
use dro_core::exactref::{self, SCENARIO_GUARD};
use dro_core::gxy::{
    approx_transport, check_contract, cost_shares, subgradient_from_transport, verify_cost_shares, BruteForceMaxMin,
    CollapsedGxy, CoverGreedyMaxMin, DiscreteGxy, EnumeratedGxy, ExactGxy, FacilityGreedyMaxMin, FullSetMaxMin, Grid,
    GxyOracle,
};
use dro_core::linfty::{estimate_free_mass, free_mass, good_k_sequence, optimal_q, solve_linfty, Expectation, LinftyConfig, Proxy};
use dro_core::lp::{LinearProgram, Relation, Sense};
use dro_core::problems::{generate, AnyProblem};
use dro_core::saa::decompose_short_long;
use dro_core::{
    dot, mix_seed, AmbiguityBall, Center, Distribution, Evaluator, Family, Scenario, ScenarioMetric, ScenarioSpace,
    TwoStageProblem,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FAMILIES: [Family; 5] =
    [Family::VertexCover, Family::EdgeCover, Family::SetCover, Family::FacilityLocation, Family::Steiner];

fn verdict(id: u32, name: &str, passed: bool, detail: &str) {
    let line = format!("{} criterion {id:>2} ({name}): {detail}\n", if passed { "PASS" } else { "FAIL" });
    std::io::stdout().write_all(line.as_bytes()).unwrap();
    assert!(passed, "criterion {id} ({name}) failed: {detail}");
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Desk-scale instance: ground sets of at most 6 elements.
fn small(family: Family, seed: u64) -> AnyProblem {
    let size = if family == Family::Steiner { 3 } else { 4 };
    generate::instance(family, size, seed).unwrap()
}

fn universe(p: &dyn TwoStageProblem) -> Vec<Scenario> {
    ScenarioSpace::all_subsets(p.ground_size()).enumerate(SCENARIO_GUARD).unwrap()
}

fn center(p: &dyn TwoStageProblem, seed: u64) -> Distribution {
    let space = ScenarioSpace::all_subsets(p.ground_size());
    generate::explicit_center(space, 3.min(space.count()), seed).unwrap()
}

/// Discrete metric, or the element metric on odd seeds where the family has one.
fn metric_for(problem: &AnyProblem, seed: u64) -> ScenarioMetric {
    match problem.asym_metric() {
        Some(m) if seed % 2 == 1 => m,
        _ => ScenarioMetric::Discrete,
    }
}

fn radius_for(metric: &ScenarioMetric, i: usize) -> f64 {
    let scale = match metric {
        ScenarioMetric::Discrete => 1.0,
        m => m.max_distance(),
    };
    [0.0, 0.1, 0.25, 0.5, 1.0][i % 5] * scale
}

fn random_x(r: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| r.random_range(0..=4) as f64 / 4.0).collect()
}

fn random_integral(r: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| if r.random_bool(0.3) { 1.0 } else { 0.0 }).collect()
}

#[test]
fn criterion_01_collapsible_matches_exact() {
    let mut worst = 0.0f64;
    let mut count = 0;
    for family in FAMILIES {
        for i in 0..100u64 {
            let seed = mix_seed(1, i);
            let problem = small(family, seed);
            let p = problem.as_dyn();
            let metric = metric_for(&problem, i);
            let r = radius_for(&metric, i as usize);
            let d = center(p, seed);
            let rep = solve_saa_collapsible(p, &d, r, &metric, problem.rounder()).unwrap();
            let exact =
                exactref::fractional_optimum(p, &d, &AmbiguityBall::wasserstein(r), &metric, &universe(p)).unwrap();
            worst = worst.max((rep.value - exact.value).abs());
            count += 1;
        }
    }
    verdict(1, "collapsible LP equals exact fractional optimum", worst <= 1e-6, &format!("{count} instances, max |diff| = {worst:.2e} (tol 1e-6)"));
}

#[test]
fn criterion_02_polynomial_contract() {
    let eps = 0.1;
    let mut failures = Vec::new();
    let mut worst_ratio = 0.0f64;
    for i in 0..100u64 {
        let seed = mix_seed(2, i);
        let family = FAMILIES[i as usize % FAMILIES.len()];
        let problem = small(family, seed);
        let p = problem.as_dyn();
        let metric = metric_for(&problem, i / 5);
        let r = radius_for(&metric, i as usize / 5);
        let d = center(p, seed);
        let u = universe(p);
        let space = ScenarioSpace::all_subsets(p.ground_size());
        let oracle = ExactGxy::new(metric.clone(), space).unwrap();
        let cfg = PolyConfig { epsilon: eps, iteration_cap: None };
        let rep = solve_saa_poly(p, &d, r, &metric, &oracle, problem.rounder(), &u, &cfg).unwrap();
        let ball = AmbiguityBall::wasserstein(r);
        let h = exactref::objective(p, &rep.x, &d, &ball, &metric, &u).unwrap();
        let opt = exactref::discrete_optimum(p, &d, &ball, &metric, &u).unwrap().value;
        let sandwich = rep.estimate <= h + 1e-6 && h <= rep.estimate + 1e-6;
        let ceiling = rep.estimate <= rep.rho * (1.0 + eps) * opt + 1e-6;
        worst_ratio = worst_ratio.max(rep.estimate / (rep.rho * opt).max(1e-12));
        if !(sandwich && ceiling) {
            failures.push(format!("{}#{i}: f={} h={} opt={} rho={}", family.name(), rep.estimate, h, opt, rep.rho));
        }
    }
    verdict(
        2,
        "f <= h(x) <= f and f <= rho(1+eps) OPT",
        failures.is_empty(),
        &format!("100 instances, max f/(rho OPT) = {worst_ratio:.3}, failures: {failures:?}"),
    );
}

#[test]
fn criterion_03_short_long_sandwich_and_concavity() {
    let mut bad = Vec::new();
    let mut worst_concave = f64::INFINITY;
    for i in 0..100u64 {
        let seed = mix_seed(3, i);
        let family = FAMILIES[i as usize % FAMILIES.len()];
        let problem = small(family, seed);
        let p = problem.as_dyn();
        let metric = metric_for(&problem, i / 5);
        let r = radius_for(&metric, 1 + i as usize / 5);
        let mut g = rng(seed);
        let x = random_x(&mut g, p.num_decisions());
        let u = universe(p);
        let d = center(p, seed);
        let lambda = p.inflation();
        let split = decompose_short_long(p, &x, &d, r, &metric, lambda, &u).unwrap();
        let h = exactref::objective(p, &x, &d, &AmbiguityBall::wasserstein(r), &metric, &u).unwrap();
        let mid = p.first_stage_cost(&x) + split.short + split.long_at_zero;
        if !(h <= mid + 1e-6 && mid <= 2.0 * h + 1e-6) {
            bad.push(format!("{}#{i}: h={h} proxy={mid}", family.name()));
        }
        // Concavity of the long part in the center.
        let other = center(p, seed ^ 0xABCD);
        let theta = [0.25, 0.5, 0.75][i as usize % 3];
        let z = |c: &Distribution| decompose_short_long(p, &x, c, r, &metric, lambda, &u).unwrap().long_at_zero;
        let gap = z(&d.mix(&other, theta).unwrap()) - (theta * z(&d) + (1.0 - theta) * z(&other));
        worst_concave = worst_concave.min(gap);
        if gap < -1e-7 {
            bad.push(format!("{}#{i}: concavity gap {gap}", family.name()));
        }
    }
    verdict(
        3,
        "h <= c.x + z_short + z_long(0) <= 2h, z_long concave",
        bad.is_empty(),
        &format!("100 triples, smallest concavity gap {worst_concave:.2e}, failures: {bad:?}"),
    );
}

/// Every oracle shipped for a family, with the metric it supports.
fn oracles<'a>(problem: &'a AnyProblem, metric: &ScenarioMetric, space: ScenarioSpace) -> Vec<(String, Box<dyn GxyOracle + 'a>)> {
    let mut out: Vec<(String, Box<dyn GxyOracle + 'a>)> = vec![
        ("exact".into(), Box::new(ExactGxy::new(metric.clone(), space).unwrap())),
        (
            "enumerated-brute-distinct".into(),
            Box::new(EnumeratedGxy { maxmin: BruteForceMaxMin, metric: metric.clone(), space, grid: Grid::Distinct }),
        ),
        (
            "enumerated-brute-geometric".into(),
            Box::new(EnumeratedGxy { maxmin: BruteForceMaxMin, metric: metric.clone(), space, grid: Grid::Geometric(0.5) }),
        ),
    ];
    if space.is_all_subsets() {
        out.push(("collapsed".into(), Box::new(CollapsedGxy { metric: metric.clone(), ground: space.ground })));
        if *metric == ScenarioMetric::Discrete {
            out.push(("discrete-fullset".into(), Box::new(DiscreteGxy { maxmin: FullSetMaxMin, space })));
        }
    }
    if *metric == ScenarioMetric::Discrete {
        out.push(("discrete-brute".into(), Box::new(DiscreteGxy { maxmin: BruteForceMaxMin, space })));
    }
    match problem {
        AnyProblem::Cover(c) => {
            out.push(("discrete-cover-greedy".into(), Box::new(DiscreteGxy { maxmin: CoverGreedyMaxMin::for_problem(c), space })));
            out.push((
                "enumerated-cover-greedy".into(),
                Box::new(EnumeratedGxy { maxmin: CoverGreedyMaxMin::for_problem(c), metric: metric.clone(), space, grid: Grid::Distinct }),
            ));
        }
        AnyProblem::Facility(fl) => {
            if *metric == ScenarioMetric::Discrete {
                out.push(("discrete-facility-greedy".into(), Box::new(DiscreteGxy { maxmin: FacilityGreedyMaxMin { fl }, space })));
            }
            out.push((
                "enumerated-facility-greedy".into(),
                Box::new(EnumeratedGxy { maxmin: FacilityGreedyMaxMin { fl }, metric: metric.clone(), space, grid: Grid::Distinct }),
            ));
        }
        AnyProblem::Steiner(_) => {}
    }
    out
}

/// Ground sets of eight or more elements so that 200 competitors exist.
fn contract_instance(family: Family, seed: u64) -> AnyProblem {
    match family {
        Family::VertexCover => AnyProblem::Cover(generate::vertex_cover(5, 0.8, seed).unwrap()),
        Family::EdgeCover => AnyProblem::Cover(generate::edge_cover(8, 0.3, seed).unwrap()),
        Family::SetCover => AnyProblem::Cover(generate::set_cover(8, 6, seed).unwrap()),
        Family::FacilityLocation => AnyProblem::Facility(generate::facility_location(3, 8, seed).unwrap()),
        Family::Steiner => AnyProblem::Steiner(generate::steiner(9, seed).unwrap()),
    }
}

#[test]
fn criterion_04_oracle_contracts() {
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for family in FAMILIES {
        for call in 0..50u64 {
            let seed = mix_seed(4, call);
            let problem = contract_instance(family, seed / 4);
            let p = problem.as_dyn();
            let n = p.ground_size();
            let metric = metric_for(&problem, call);
            let space = if call % 3 == 2 { ScenarioSpace::bounded(n, n.min(5)) } else { ScenarioSpace::all_subsets(n) };
            let mut g = rng(seed);
            let mut competitors = space.enumerate(1 << 12).unwrap();
            competitors.shuffle(&mut g);
            competitors.truncate(200);
            let x = random_integral(&mut g, p.num_decisions());
            let eval = Evaluator::new(p, x).unwrap();
            let a = competitors[g.random_range(0..competitors.len())];
            let top = eval.value(Scenario::full(n).minus(Scenario::EMPTY)).unwrap_or(1.0).max(1.0);
            let scale = metric.max_distance().max(1e-9);
            let y = g.random_range(0.0..2.0) * top / scale;
            for (name, o) in oracles(&problem, &metric, space) {
                let answer = o.solve(&eval, y, a).unwrap();
                if let Err(e) = check_contract(&eval, &metric, o.guarantee(), y, a, &answer, &competitors) {
                    failures.push(format!("{} {name}: {e}", family.name()));
                }
                checked += 1;
            }
        }
    }
    verdict(4, "(b1, b2) oracle contract", failures.is_empty(), &format!("{checked} oracle calls against 200 competitors, failures: {failures:?}"));
}

#[test]
fn criterion_05_facility_greedy_and_cost_shares() {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let seed = mix_seed(5, i);
        let fl = generate::facility_location(3, 7, seed).unwrap();
        let mut g = rng(seed);
        let x = random_integral(&mut g, 3);
        let eval = Evaluator::new(&fl, x.clone()).unwrap();
        let full = Scenario::full(7);
        for k in 1..=4 {
            let greedy = eval.value(FacilityGreedyMaxMin { fl: &fl }.select(&x, full, k)).unwrap();
            let brute = exactref::kmaxmin(&eval, full, k).unwrap().1;
            let ratio = if greedy <= 1e-12 { if brute <= 1e-9 { 1.0 } else { f64::INFINITY } } else { brute / greedy };
            worst = worst.max(ratio);
        }
    }
    let mut probe_failures = Vec::new();
    for i in 0..500u64 {
        let seed = mix_seed(55, i);
        let fl = generate::facility_location(3, 7, seed / 5).unwrap();
        let mut g = rng(seed);
        let x = random_integral(&mut g, 3);
        let all = Scenario::full(7);
        let j = Scenario::from_elements((0..7).filter(|_| g.random_bool(0.5)));
        if let Err(e) = verify_cost_shares(&fl, &x, j, all) {
            probe_failures.push(format!("#{i}: {e}"));
        }
        let outside: Vec<usize> = all.minus(j).elements().collect();
        if outside.len() >= 2 {
            let opening = fl.residual_opening_costs(&x);
            let (j1, j2) = (outside[0], outside[outside.len() - 1]);
            let alone = cost_shares(&fl, &opening, j.with(j1)).share(j1).unwrap();
            let both = cost_shares(&fl, &opening, j.with(j1).with(j2));
            if both.share(j1).unwrap() < alone.min(both.share(j2).unwrap()) - 1e-9 {
                probe_failures.push(format!("#{i}: insertion"));
            }
        }
    }
    let passed = worst <= 6.0 + 1e-9 && probe_failures.is_empty();
    verdict(
        5,
        "facility greedy within 6, cost-share invariants",
        passed,
        &format!("100 instances x k=1..4, max brute/greedy = {worst:.3}; 500 probes, failures: {probe_failures:?}"),
    );
}

#[test]
fn criterion_06_end_to_end_ceilings() {
    let eps = 0.1;
    let cases: [(Family, bool, f64); 4] = [
        (Family::VertexCover, false, 16.0 * 1.2),
        (Family::EdgeCover, false, 12.0 * 1.2),
        (Family::FacilityLocation, false, 21.96 * 1.2),
        (Family::VertexCover, true, 8.0 * 1.2),
    ];
    let mut lines = Vec::new();
    let mut passed = true;
    for (c, &(family, linf, ceiling)) in cases.iter().enumerate() {
        let mut within = 0;
        let mut worst = 0.0f64;
        for i in 0..100u64 {
            let seed = mix_seed(mix_seed(6, c as u64), i);
            let problem = small(family, seed);
            let p = problem.as_dyn();
            let u = universe(p);
            let d = center(p, seed);
            let metric = ScenarioMetric::Discrete;
            let (x, ball) = if linf {
                let r = [0.05, 0.1, 0.25, 0.5][i as usize % 4];
                let cfg = LinftyConfig { epsilon: eps, seed, ..LinftyConfig::default() };
                let rep = solve_linfty(p, &Center::Explicit(d.clone()), r, &cfg).unwrap();
                (problem.rounder().local_round(&rep.x, &u).unwrap().x, AmbiguityBall::linf(r))
            } else {
                let r = [0.0, 0.1, 0.25, 0.5][i as usize % 4];
                let space = ScenarioSpace::all_subsets(p.ground_size());
                let oracle: Box<dyn GxyOracle + '_> = match &problem {
                    AnyProblem::Cover(cp) => Box::new(DiscreteGxy { maxmin: CoverGreedyMaxMin::for_problem(cp), space }),
                    AnyProblem::Facility(fl) => Box::new(DiscreteGxy { maxmin: FacilityGreedyMaxMin { fl }, space }),
                    AnyProblem::Steiner(_) => unreachable!(),
                };
                let cfg = PolyConfig { epsilon: eps, iteration_cap: None };
                let rep = solve_saa_poly(p, &d, r, &metric, oracle.as_ref(), problem.rounder(), &u, &cfg).unwrap();
                (rep.x, AmbiguityBall::wasserstein(r))
            };
            let cost = exactref::objective(p, &x, &d, &ball, &metric, &u).unwrap();
            let opt = exactref::discrete_optimum(p, &d, &ball, &metric, &u).unwrap().value;
            let ratio = if opt <= 1e-12 { if cost <= 1e-9 { 1.0 } else { f64::INFINITY } } else { cost / opt };
            worst = worst.max(ratio);
            if ratio <= ceiling {
                within += 1;
            }
        }
        passed &= within >= 95;
        lines.push(format!("{}{} {within}/100 within {ceiling:.2} (max {worst:.3})", if linf { "linf " } else { "" }, family.name()));
    }
    verdict(6, "end-to-end ratio ceilings", passed, &lines.join("; "));
}

#[test]
fn criterion_07_linf_machinery() {
    let eps_prime = 0.1;
    let mut bad = Vec::new();
    for i in 0..100u64 {
        let seed = mix_seed(7, i);
        let family = FAMILIES[i as usize % FAMILIES.len()];
        let problem = small(family, seed);
        let p = problem.as_dyn();
        let u = universe(p);
        let d = center(p, seed);
        let mut g = rng(seed);
        let r = [0.05, 0.1, 0.2, 0.35, 0.6][(i / 5) as usize % 5];
        let x = random_x(&mut g, p.num_decisions());
        let pfree = free_mass(&d, r);
        let p_hat = (pfree * (1.0 + eps_prime * g.random::<f64>())).min(1.0);
        let eval = Evaluator::new(p, x.clone()).unwrap();
        let proxy = Proxy { expectation: Expectation::Exact(d.clone()), radius: r, p_free_hat: p_hat };
        let value = proxy.value(&eval).unwrap().value;
        let h = exactref::objective(p, &x, &d, &AmbiguityBall::linf(r), &ScenarioMetric::Discrete, &u).unwrap();
        if !(h <= value + 1e-6 && value <= 2.0 * (1.0 + eps_prime) * h + 1e-6) {
            bad.push(format!("sandwich {}#{i}: h={h} proxy={value}", family.name()));
        }
        // Greedy fill against the LP over K on every scenario.
        let seq = good_k_sequence(&eval, p.ground_size(), u.len()).unwrap();
        let values: Vec<f64> = seq.iter().map(|s| s.1).collect();
        let q = optimal_q(p_hat, r, values.len());
        let mut lp = LinearProgram::new(Sense::Maximize, values.clone());
        for k in 0..values.len() {
            lp.set_bounds(k, 0.0, Some(r));
        }
        lp.add_constraint((0..values.len()).map(|k| (k, 1.0)).collect(), Relation::Le, p_hat);
        let diff = (lp.solve().unwrap().value - dot(&q, &values)).abs();
        if diff > 1e-9 {
            bad.push(format!("optimal_q {}#{i}: off by {diff}", family.name()));
        }
    }
    let mut bracketed = 0;
    for i in 0..100u64 {
        let seed = mix_seed(77, i);
        let probs = generate::activation_probabilities(4, seed);
        let c = Center::Independent(probs);
        let r = [0.2, 0.3, 0.4, 0.5][i as usize % 4];
        let pfree = free_mass(&c.explicit(64).unwrap(), r);
        let est = estimate_free_mass(&c, r, eps_prime, 0.05, seed).unwrap();
        if est.p_free_hat >= pfree - 1e-12 && est.p_free_hat <= ((1.0 + eps_prime) * pfree).min(1.0) + 1e-12 {
            bracketed += 1;
        }
    }
    let passed = bad.is_empty() && bracketed >= 95;
    verdict(
        7,
        "proxy sandwich, optimal_q, free-mass bracket",
        passed,
        &format!("100 sandwich/LP checks, failures: {bad:?}; free mass bracketed in {bracketed}/100"),
    );
}

#[test]
fn criterion_08_saa_success_curve() {
    let problem = generate::instance(Family::VertexCover, 4, 8).unwrap();
    let probs = generate::activation_probabilities(problem.as_dyn().ground_size(), 81);
    let mut rates = Vec::new();
    for n in [50u64, 200, 800] {
        let mut hits = 0;
        for t in 0..100u64 {
            let seed = mix_seed(mix_seed(8, n), t);
            let (value, opt, rho, _) = saa_trial(&problem, &probs, 0.25, n, 8, 0.2, seed).unwrap();
            if value <= 4.0 * rho * 2.0 * opt + 1e-9 {
                hits += 1;
            }
        }
        rates.push(hits as f64 / 100.0);
    }
    let passed = rates.windows(2).all(|w| w[0] <= w[1]) && rates[2] >= 0.95;
    verdict(8, "SAA success rate nondecreasing in N, >= 0.95 at N=800", passed, &format!("success rates at N=50,200,800: {rates:?}"));
}

#[test]
fn criterion_09_subgradients() {
    let mut bad = Vec::new();
    let mut pairs = 0;
    for (f, family) in FAMILIES.iter().enumerate() {
        let seed = mix_seed(9, f as u64);
        let problem = small(*family, seed);
        let p = problem.as_dyn();
        let u = universe(p);
        let d = center(p, seed);
        let metric = metric_for(&problem, 1);
        let r = radius_for(&metric, 2);
        let oracle = ExactGxy::new(metric.clone(), ScenarioSpace::all_subsets(p.ground_size())).unwrap();
        let ball = AmbiguityBall::wasserstein(r);
        let lr = 0.2;
        let proxy = Proxy { expectation: Expectation::Exact(d.clone()), radius: lr, p_free_hat: free_mass(&d, lr) };
        let omega = 0.05;
        let mut g = rng(seed);
        for _ in 0..100 {
            let x = random_x(&mut g, p.num_decisions());
            let x2 = random_x(&mut g, p.num_decisions());
            let step: Vec<f64> = x2.iter().zip(&x).map(|(a, b)| a - b).collect();
            let eval = Evaluator::new(p, x.clone()).unwrap();
            let plan = approx_transport(&eval, &d, r, &metric, &oracle).unwrap();
            let sub = subgradient_from_transport(&eval, &plan).unwrap();
            let hx = exactref::objective(p, &x, &d, &ball, &metric, &u).unwrap();
            let hx2 = exactref::objective(p, &x2, &d, &ball, &metric, &u).unwrap();
            if hx2 < hx + dot(&sub, &step) - 1e-7 {
                bad.push(format!("transport {}: {hx2} < {hx} + {}", family.name(), dot(&sub, &step)));
            }
            let point = proxy.value(&eval).unwrap();
            let psub = proxy.subgradient(&eval, &point, omega, 0.05, 1000).unwrap();
            let fx2 = proxy.value(&Evaluator::new(p, x2.clone()).unwrap()).unwrap().value;
            if fx2 < point.value + dot(&psub, &step) - 1e-7 - omega * point.value {
                bad.push(format!("proxy {}: {fx2} < {} + {}", family.name(), point.value, dot(&psub, &step)));
            }
            pairs += 1;
        }
    }
    verdict(9, "transport and proxy subgradient inequalities", bad.is_empty(), &format!("{pairs} probe pairs, failures: {bad:?}"));
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_dro")).args(args).output().expect("running dro");
    assert!(out.status.success(), "dro {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn criterion_10_byte_identical_reruns() {
    let dir = std::env::temp_dir().join(format!("dro-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/vc3.toml");
    let sampled = dir.join("sampled.toml");
    let sampled_s = sampled.to_str().unwrap();
    run_cli(&["gen", "facility_location", "--size", "4", "--seed", "3", "--sampler", "--out", sampled_s]);
    let runs: Vec<Vec<&str>> = vec![
        vec!["solve", fixture, "--method", "saa-ellipsoid", "--exact"],
        vec!["solve", fixture, "--method", "collapsible-lp", "--format", "csv"],
        vec!["solve", fixture, "--method", "setcover-special"],
        vec!["solve", sampled_s, "--method", "saa-ellipsoid", "--samples", "60", "--replicates", "3", "--seed", "5"],
        vec!["experiment", "kmaxmin-bench", "--trials", "8", "--format", "csv"],
        vec!["experiment", "acceptance", "--trials", "2"],
    ];
    let mut differing = Vec::new();
    for args in &runs {
        if run_cli(args) != run_cli(args) {
            differing.push(args.join(" "));
        }
    }
    let out = dir.join("out.jsonl");
    let out_s = out.to_str().unwrap();
    let file_run = ["solve", fixture, "--method", "saa-ellipsoid", "--out", out_s];
    run_cli(&file_run);
    let first = (std::fs::read(&out).unwrap(), std::fs::read(dir.join("out.jsonl.manifest.json")).unwrap());
    run_cli(&file_run);
    let second = (std::fs::read(&out).unwrap(), std::fs::read(dir.join("out.jsonl.manifest.json")).unwrap());
    if first != second {
        differing.push(file_run.join(" "));
    }
    std::fs::remove_dir_all(&dir).ok();
    verdict(10, "byte-identical CLI reruns", differing.is_empty(), &format!("{} commands run twice, differing: {differing:?}", runs.len() + 1));
}
