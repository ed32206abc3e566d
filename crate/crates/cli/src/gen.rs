//! `dro gen`: seeded random instance files.

use anyhow::{bail, Result};
use clap::ValueEnum;
use dro_core::exactref::{DECISION_GUARD, SCENARIO_GUARD};
use dro_core::problems::generate;
use dro_core::{mix_seed, Family, ScenarioSpace};

use crate::instance::{describe, Atom, BallBlock, DistributionBlock, InstanceFile, MetricBlock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BallArg {
    Wasserstein,
    Linf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Discrete,
    AsymInf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenOptions {
    pub family: Family,
    pub size: usize,
    pub seed: u64,
    /// Atoms of an explicit center.
    pub support: usize,
    /// Use an independent sampler instead of an explicit center.
    pub sampler: bool,
    pub radius: f64,
    pub ball: BallArg,
    pub metric: MetricArg,
    pub scenario_bound: Option<usize>,
    /// Allow instances the exact reference cannot enumerate.
    pub large: bool,
}

pub fn generate_file(opts: &GenOptions) -> Result<InstanceFile> {
    let problem = generate::instance(opts.family, opts.size, opts.seed)?;
    let p = problem.as_dyn();
    let ground = p.ground_size();
    let space = match opts.scenario_bound {
        Some(k) => ScenarioSpace::bounded(ground, k),
        None => ScenarioSpace::all_subsets(ground),
    };
    if !opts.large && (space.count() > SCENARIO_GUARD || p.num_decisions() > DECISION_GUARD) {
        bail!(
            "{} with size {} has {} scenarios and {} decisions, beyond the exact reference ({SCENARIO_GUARD}, {DECISION_GUARD}); pass --large to allow it",
            opts.family.name(),
            opts.size,
            space.count(),
            p.num_decisions()
        );
    }
    if opts.sampler && !space.is_all_subsets() {
        bail!("a sampler needs every subset as a scenario; drop --scenario-bound");
    }
    let (ground_block, problem_block) = describe(&problem);
    let mut ground_block = ground_block;
    ground_block.scenario_bound = opts.scenario_bound;
    let distribution = if opts.sampler {
        DistributionBlock::Sampler { seed: mix_seed(opts.seed, 1), element_probs: generate::activation_probabilities(ground, mix_seed(opts.seed, 2)) }
    } else {
        let support = opts.support.min(space.count());
        let d = generate::explicit_center(space, support, mix_seed(opts.seed, 3))?;
        DistributionBlock::Explicit {
            support: d.atoms().iter().map(|&(s, prob)| Atom { scenario: s.elements().collect(), prob }).collect(),
        }
    };
    Ok(InstanceFile {
        ground: ground_block,
        problem: problem_block,
        metric: match opts.metric {
            MetricArg::Discrete => MetricBlock::Discrete,
            MetricArg::AsymInf => MetricBlock::AsymInf,
        },
        ball: match opts.ball {
            BallArg::Wasserstein => BallBlock::Wasserstein { radius: opts.radius },
            BallArg::Linf => BallBlock::Linf { radius: opts.radius },
        },
        distribution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(family: Family, size: usize) -> GenOptions {
        GenOptions {
            family,
            size,
            seed: 1,
            support: 3,
            sampler: false,
            radius: 0.25,
            ball: BallArg::Wasserstein,
            metric: MetricArg::Discrete,
            scenario_bound: None,
            large: false,
        }
    }

    #[test]
    fn same_seed_same_text() {
        let a = toml::to_string(&generate_file(&opts(Family::VertexCover, 3)).unwrap()).unwrap();
        let b = toml::to_string(&generate_file(&opts(Family::VertexCover, 3)).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generated_files_build() {
        for f in [Family::SetCover, Family::VertexCover, Family::EdgeCover, Family::FacilityLocation, Family::Steiner] {
            let file = generate_file(&opts(f, 4)).unwrap();
            let text = toml::to_string(&file).unwrap();
            crate::instance::parse(&text).unwrap().build().unwrap();
        }
    }

    #[test]
    fn steiner_root_is_node_zero() {
        let file = generate_file(&GenOptions { metric: MetricArg::AsymInf, ..opts(Family::Steiner, 4) }).unwrap();
        let inst = file.build().unwrap();
        assert_eq!(inst.problem().ground_size(), 4);
        assert_eq!(file.ground.points.unwrap().len(), 5);
    }

    #[test]
    fn guard_needs_large() {
        assert!(generate_file(&opts(Family::SetCover, 14)).is_err());
        assert!(generate_file(&GenOptions { large: true, ..opts(Family::SetCover, 14) }).is_ok());
    }
}
