//! The TOML instance format and its conversion to solver inputs.
//!
//! ```toml
//! [ground]
//! graph = { vertices = 3, edges = [[0, 1], [0, 2], [1, 2]] }
//!
//! [problem]
//! family = "vertex_cover"
//! first_stage_costs = [1.0, 1.0, 1.0]
//! second_stage_costs = [2.0, 2.0, 2.0]
//!
//! [metric]
//! kind = "discrete"
//!
//! [ball]
//! kind = "wasserstein"
//! radius = 0.25
//!
//! [distribution]
//! kind = "explicit"
//! support = [{ scenario = [0], prob = 0.5 }, { scenario = [0, 1, 2], prob = 0.5 }]
//! ```
//!
//! Vertex cover scenarios are sets of edge indices; edge cover scenarios
//! are sets of vertices. Set cover uses `ground.elements` and
//! `problem.sets`, facility location takes clients from `ground.points` and
//! `problem.facilities`, and Steiner tree takes every node from
//! `ground.points` with the root first.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use dro_core::problems::{AnyProblem, CoverProblem, FacilityLocation, SteinerTree};
use dro_core::{AmbiguityBall, BallKind, Center, Distribution, Family, Scenario, ScenarioMetric, ScenarioSpace, TwoStageProblem};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub ground: GroundBlock,
    pub problem: ProblemBlock,
    pub metric: MetricBlock,
    pub ball: BallBlock,
    pub distribution: DistributionBlock,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<Graph>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    /// Largest scenario size; all subsets when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_bound: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Graph {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_stage_costs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_stage_costs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facilities: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricBlock {
    Discrete,
    AsymInf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BallBlock {
    Wasserstein { radius: f64 },
    Linf { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub scenario: Vec<usize>,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionBlock {
    Explicit { support: Vec<Atom> },
    /// Each ground element appears independently with its probability.
    Sampler { seed: u64, element_probs: Vec<f64> },
}

/// A validated instance ready for the solvers.
#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: AnyProblem,
    pub metric: ScenarioMetric,
    pub ball: AmbiguityBall,
    pub center: Center,
    pub space: ScenarioSpace,
    /// Seed of the sampler block, if any.
    pub sampler_seed: Option<u64>,
}

impl Instance {
    pub fn problem(&self) -> &dyn TwoStageProblem {
        self.problem.as_dyn()
    }

    pub fn family(&self) -> Family {
        self.problem().family()
    }
}

/// Git-style content hash: sha256 over `blob <len>\0<bytes>`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

pub fn parse(text: &str) -> Result<InstanceFile> {
    toml::from_str(text).map_err(|e| anyhow!("parse error: {e}"))
}

pub fn load(path: &Path) -> Result<(Instance, String)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let file = parse(text).with_context(|| format!("in {}", path.display()))?;
    let instance = file.build().with_context(|| format!("in {}", path.display()))?;
    Ok((instance, content_hash(&bytes)))
}

fn need<T: Clone>(v: &Option<T>, field: &str) -> Result<T> {
    v.clone().ok_or_else(|| anyhow!("missing field `{field}`"))
}

fn edge_list(g: &Graph) -> Result<Vec<(usize, usize)>> {
    g.edges
        .iter()
        .enumerate()
        .map(|(i, &[u, v])| {
            if u >= g.vertices || v >= g.vertices || u == v {
                bail!("ground.graph.edges[{i}]: [{u}, {v}] is not an edge on {} vertices", g.vertices)
            }
            Ok((u, v))
        })
        .collect()
}

impl InstanceFile {
    pub fn build(&self) -> Result<Instance> {
        let p = &self.problem;
        let g = &self.ground;
        let costs = || -> Result<(Vec<f64>, Vec<f64>)> {
            Ok((need(&p.first_stage_costs, "problem.first_stage_costs")?, need(&p.second_stage_costs, "problem.second_stage_costs")?))
        };
        let problem = match p.family {
            Family::VertexCover | Family::EdgeCover => {
                let graph = need(&g.graph, "ground.graph")?;
                let edges = edge_list(&graph)?;
                let (first, second) = costs()?;
                let built = if p.family == Family::VertexCover {
                    CoverProblem::vertex_cover(graph.vertices, edges, first, second)
                } else {
                    CoverProblem::edge_cover(graph.vertices, edges, first, second)
                };
                AnyProblem::Cover(built.context("problem")?)
            }
            Family::SetCover => {
                let elements = need(&g.elements, "ground.elements")?;
                let sets = need(&p.sets, "problem.sets")?;
                for (i, s) in sets.iter().enumerate() {
                    if let Some(&e) = s.iter().find(|&&e| e >= elements) {
                        bail!("problem.sets[{i}]: element {e} outside a ground set of {elements}");
                    }
                }
                let (first, second) = costs()?;
                AnyProblem::Cover(CoverProblem::set_cover(elements, sets, first, second).context("problem")?)
            }
            Family::FacilityLocation => {
                let clients = need(&g.points, "ground.points")?;
                let facilities = need(&p.facilities, "problem.facilities")?;
                let (first, second) = costs()?;
                AnyProblem::Facility(
                    FacilityLocation::new(facilities, clients, first, second, p.anchor.clone()).context("problem")?,
                )
            }
            Family::Steiner => {
                let points = need(&g.points, "ground.points")?;
                let inflation = need(&p.inflation, "problem.inflation")?;
                AnyProblem::Steiner(SteinerTree::new(points, inflation).context("problem")?)
            }
        };
        let ground = problem.as_dyn().ground_size();
        let space = match g.scenario_bound {
            Some(k) => ScenarioSpace::bounded(ground, k),
            None => ScenarioSpace::all_subsets(ground),
        };
        let metric = match self.metric {
            MetricBlock::Discrete => ScenarioMetric::Discrete,
            MetricBlock::AsymInf => problem
                .asym_metric()
                .ok_or_else(|| anyhow!("metric: asym_inf needs a family with element distances"))?,
        };
        let ball = match self.ball {
            BallBlock::Wasserstein { radius } => AmbiguityBall::wasserstein(radius),
            BallBlock::Linf { radius } => AmbiguityBall::linf(radius),
        };
        if !(ball.radius >= 0.0) || !ball.radius.is_finite() {
            bail!("ball.radius: {} is not a nonnegative number", ball.radius);
        }
        if ball.kind == BallKind::Linf && !space.is_all_subsets() {
            bail!("ball: the linf ball needs every subset as a scenario");
        }
        let (center, sampler_seed) = match &self.distribution {
            DistributionBlock::Explicit { support } => {
                let mut atoms = Vec::with_capacity(support.len());
                for (i, atom) in support.iter().enumerate() {
                    if let Some(&e) = atom.scenario.iter().find(|&&e| e >= ground) {
                        bail!("distribution.support[{i}]: element {e} outside a ground set of {ground}");
                    }
                    let s = Scenario::from_elements(atom.scenario.iter().copied());
                    if !space.contains(s) {
                        bail!("distribution.support[{i}]: scenario larger than the bound {}", space.bound());
                    }
                    atoms.push((s, atom.prob));
                }
                (Center::Explicit(Distribution::new(atoms).context("distribution")?), None)
            }
            DistributionBlock::Sampler { seed, element_probs } => {
                if element_probs.len() != ground {
                    bail!("distribution.element_probs: {} entries for a ground set of {ground}", element_probs.len());
                }
                if let Some(p) = element_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    bail!("distribution.element_probs: {p} is not a probability");
                }
                if !space.is_all_subsets() {
                    bail!("distribution: a sampler needs every subset as a scenario");
                }
                (Center::Independent(element_probs.clone()), Some(*seed))
            }
        };
        Ok(Instance { problem, metric, ball, center, space, sampler_seed })
    }
}

/// The file form of a problem, used by the generator.
pub fn describe(problem: &AnyProblem) -> (GroundBlock, ProblemBlock) {
    let p = problem.as_dyn();
    let mut ground = GroundBlock::default();
    let mut block = ProblemBlock {
        family: p.family(),
        first_stage_costs: Some(p.first_stage_costs().to_vec()),
        second_stage_costs: None,
        sets: None,
        facilities: None,
        anchor: None,
        inflation: None,
    };
    match problem {
        AnyProblem::Cover(c) => {
            block.second_stage_costs = Some(c.second_stage_costs().to_vec());
            match p.family() {
                Family::SetCover => {
                    ground.elements = Some(p.ground_size());
                    block.sets = Some(c.sets().iter().map(|s| s.elements().collect()).collect());
                }
                _ => {
                    ground.graph =
                        Some(Graph { vertices: c.vertices(), edges: c.edges().iter().map(|&(u, v)| [u, v]).collect() });
                }
            }
        }
        AnyProblem::Facility(f) => {
            block.second_stage_costs = Some(f.second_stage_costs().to_vec());
            ground.points = Some(f.clients().to_vec());
            block.facilities = Some(f.facilities().to_vec());
            block.anchor = Some(f.anchor().to_vec());
        }
        AnyProblem::Steiner(s) => {
            block.first_stage_costs = None;
            ground.points = Some(s.points().to_vec());
            block.inflation = Some(p.inflation());
        }
    }
    (ground, block)
}
