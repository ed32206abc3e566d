//! Seeded random instances. Costs and coordinates sit on coarse decimal
//! grids so that text round-trips are exact, and every cost is at least 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DroError, Result};
use crate::model::{Distribution, Family, Scenario, ScenarioSpace};

use super::{AnyProblem, CoverProblem, FacilityLocation, SteinerTree};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// First-stage cost in [1, 3] and an inflation factor in [1, 3] on a
/// quarter grid.
fn cost_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let first = rng.random_range(100..=300) as f64 / 100.0;
    let factor = rng.random_range(4..=12) as f64 / 4.0;
    (first, first * factor)
}

fn costs(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    (0..n).map(|_| cost_pair(rng)).unzip()
}

fn random_edges(rng: &mut ChaCha8Rng, vertices: usize, density: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..vertices {
        for v in u + 1..vertices {
            if rng.random::<f64>() < density {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Random graph on `vertices` vertices with at least one edge.
pub fn vertex_cover(vertices: usize, density: f64, seed: u64) -> Result<CoverProblem> {
    if vertices < 2 {
        return Err(DroError::InvalidInstance("vertex cover needs two vertices".into()));
    }
    let mut r = rng(seed);
    let mut edges = random_edges(&mut r, vertices, density);
    if edges.is_empty() {
        edges.push((0, 1));
    }
    let (first, second) = costs(&mut r, vertices);
    CoverProblem::vertex_cover(vertices, edges, first, second)
}

/// Random graph without isolated vertices.
pub fn edge_cover(vertices: usize, density: f64, seed: u64) -> Result<CoverProblem> {
    if vertices < 2 {
        return Err(DroError::InvalidInstance("edge cover needs two vertices".into()));
    }
    let mut r = rng(seed);
    let mut edges = random_edges(&mut r, vertices, density);
    for v in 0..vertices {
        if !edges.iter().any(|&(a, b)| a == v || b == v) {
            let mut w = r.random_range(0..vertices - 1);
            if w >= v {
                w += 1;
            }
            edges.push((v.min(w), v.max(w)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let (first, second) = costs(&mut r, edges.len());
    CoverProblem::edge_cover(vertices, edges, first, second)
}

/// Sets of one to three elements; uncovered elements join a random set.
pub fn set_cover(elements: usize, sets: usize, seed: u64) -> Result<CoverProblem> {
    if elements == 0 || sets == 0 {
        return Err(DroError::InvalidInstance("set cover needs elements and sets".into()));
    }
    let mut r = rng(seed);
    let mut members: Vec<Vec<usize>> = (0..sets)
        .map(|_| {
            let size = r.random_range(1..=3.min(elements));
            let mut s: Vec<usize> = (0..size).map(|_| r.random_range(0..elements)).collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    for e in 0..elements {
        if !members.iter().any(|s| s.contains(&e)) {
            let k = r.random_range(0..sets);
            members[k].push(e);
            members[k].sort_unstable();
        }
    }
    let (first, second) = costs(&mut r, sets);
    CoverProblem::set_cover(elements, members, first, second)
}

fn grid_point(rng: &mut ChaCha8Rng) -> Vec<f64> {
    vec![rng.random_range(0..=100) as f64 / 10.0, rng.random_range(0..=100) as f64 / 10.0]
}

/// Points in the 10 x 10 square, opening costs in [1, 4] with inflation in
/// [1.5, 3].
pub fn facility_location(facilities: usize, clients: usize, seed: u64) -> Result<FacilityLocation> {
    let mut r = rng(seed);
    let fac: Vec<Vec<f64>> = (0..facilities).map(|_| grid_point(&mut r)).collect();
    let cli: Vec<Vec<f64>> = (0..clients).map(|_| grid_point(&mut r)).collect();
    let first: Vec<f64> = (0..facilities).map(|_| r.random_range(100..=400) as f64 / 100.0).collect();
    let second = first.iter().map(|f| f * r.random_range(6..=12) as f64 / 4.0).collect();
    FacilityLocation::new(fac, cli, first, second, None)
}

/// Distinct integer points in the 10 x 10 square (so every edge costs at
/// least 1), root first, inflation in [1.25, 3].
pub fn steiner(nodes: usize, seed: u64) -> Result<SteinerTree> {
    let mut r = rng(seed);
    let mut pts: Vec<Vec<f64>> = Vec::new();
    while pts.len() < nodes {
        let p = vec![r.random_range(0..=10) as f64, r.random_range(0..=10) as f64];
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let inflation = r.random_range(5..=12) as f64 / 4.0;
    SteinerTree::new(pts, inflation)
}

/// An instance of `family` whose ground set has about `size` elements:
/// `size` vertices for the graph families (vertex cover has edges as its
/// ground set), `size` clients with half as many facilities, and `size`
/// terminals plus the root for Steiner tree.
pub fn instance(family: Family, size: usize, seed: u64) -> Result<AnyProblem> {
    Ok(match family {
        Family::VertexCover => AnyProblem::Cover(vertex_cover(size, 0.5, seed)?),
        Family::EdgeCover => AnyProblem::Cover(edge_cover(size, 0.4, seed)?),
        Family::SetCover => AnyProblem::Cover(set_cover(size, size, seed)?),
        Family::FacilityLocation => AnyProblem::Facility(facility_location((size / 2).max(1), size, seed)?),
        Family::Steiner => AnyProblem::Steiner(steiner(size + 1, seed)?),
    })
}

/// A distribution on `support` distinct scenarios of `space` with integer
/// weights 1..=9.
pub fn explicit_center(space: ScenarioSpace, support: usize, seed: u64) -> Result<Distribution> {
    let all = space.enumerate(1 << 20)?;
    if support == 0 || support > all.len() {
        return Err(DroError::InvalidDistribution(format!("support {support} not in 1..={}", all.len())));
    }
    let mut r = rng(seed);
    let mut chosen: Vec<Scenario> = Vec::new();
    while chosen.len() < support {
        let s = all[r.random_range(0..all.len())];
        if !chosen.contains(&s) {
            chosen.push(s);
        }
    }
    let weights: Vec<f64> = chosen.iter().map(|_| r.random_range(1..=9) as f64).collect();
    let total: f64 = weights.iter().sum();
    Distribution::new(chosen.into_iter().zip(weights).map(|(s, w)| (s, w / total)))
}

/// Activation probabilities in [0.1, 0.9] for an independent sampler.
pub fn activation_probabilities(ground: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..ground).map(|_| r.random_range(1..=9) as f64 / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TwoStageProblem;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(vertex_cover(5, 0.5, 3).unwrap(), vertex_cover(5, 0.5, 3).unwrap());
        assert_eq!(facility_location(3, 4, 9).unwrap(), facility_location(3, 4, 9).unwrap());
        assert_ne!(set_cover(5, 4, 1).unwrap(), set_cover(5, 4, 2).unwrap());
    }

    #[test]
    fn edge_cover_has_no_isolated_vertex() {
        for seed in 0..20 {
            let p = edge_cover(6, 0.2, seed).unwrap();
            assert_eq!(p.ground_size(), 6);
        }
    }

    #[test]
    fn costs_at_least_one() {
        for seed in 0..10 {
            let p = steiner(5, seed).unwrap();
            assert!(p.first_stage_costs().iter().all(|&c| c >= 1.0));
            let q = set_cover(6, 5, seed).unwrap();
            assert!(q.first_stage_costs().iter().all(|&c| c >= 1.0));
        }
    }

    #[test]
    fn explicit_center_support() {
        let d = explicit_center(ScenarioSpace::all_subsets(4), 5, 7).unwrap();
        assert_eq!(d.atoms().len(), 5);
    }
}
