//! Sample average approximation: draw several empirical centers, solve each,
//! keep the one with the smallest estimate. Also the short/long split of the
//! transport problem used to reason about SAA accuracy.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{DroError, Result};
use crate::exactref::SCENARIO_GUARD;
use crate::lp::{LinearProgram, Relation, Sense};
use crate::model::{mix_seed, Center, Distribution, Scenario, ScenarioMetric, TwoStageProblem};

pub const DEFAULT_SAMPLE_CONSTANT: f64 = 4.0;

/// `ceil(C (lambda/eps)^2 (log_x + log_tau_over_kappa + ln(1/delta)))`.
pub fn sample_count(eps: f64, delta: f64, lambda: f64, log_x: f64, log_tau_over_kappa: f64, constant: f64) -> u64 {
    let n = constant * (lambda / eps).powi(2) * (log_x + log_tau_over_kappa + (1.0 / delta).ln());
    n.ceil().max(1.0) as u64
}

/// `ceil((2/eps) ln(1/delta))`, at least 1.
pub fn default_replicates(eps: f64, delta: f64) -> usize {
    ((2.0 / eps) * (1.0 / delta).ln()).ceil().max(1.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaaConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub kappa: f64,
    pub replicates: usize,
    pub samples: u64,
    pub seed: u64,
    /// Solve replicates on the rayon pool.
    pub parallel: bool,
}

impl SaaConfig {
    pub fn new(epsilon: f64, delta: f64, samples: u64, seed: u64) -> Self {
        Self { epsilon, delta, kappa: 0.0, replicates: default_replicates(epsilon, delta), samples, seed, parallel: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0 / 3.0 + 1e-12) {
            return Err(DroError::InvalidInstance(format!("epsilon {} outside (0, 1/3]", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(DroError::InvalidInstance(format!("delta {} outside (0, 1)", self.delta)));
        }
        if self.replicates == 0 || self.samples == 0 {
            return Err(DroError::InvalidInstance("replicates and samples must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replicate {
    pub index: usize,
    pub seed: u64,
    pub support: usize,
    pub x: Vec<f64>,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaaReport {
    pub replicates: Vec<Replicate>,
    pub selected: usize,
}

impl SaaReport {
    pub fn x(&self) -> &[f64] {
        &self.replicates[self.selected].x
    }

    pub fn estimate(&self) -> f64 {
        self.replicates[self.selected].estimate
    }
}

/// Replicate `i` samples with seed `mix_seed(config.seed, i)`. The solver
/// returns a first stage and its estimate for an empirical center. Ties in
/// the estimate keep the lowest index.
pub fn run_saa<F>(center: &Center, config: &SaaConfig, solver: F) -> Result<SaaReport>
where
    F: Fn(&Distribution) -> Result<(Vec<f64>, f64)> + Sync,
{
    config.validate()?;
    let solve = |i: usize| -> Result<Replicate> {
        let seed = mix_seed(config.seed, i as u64);
        let empirical = center.sample(seed, config.samples).distribution()?;
        let (x, estimate) = solver(&empirical)?;
        Ok(Replicate { index: i, seed, support: empirical.atoms().len(), x, estimate })
    };
    let replicates: Vec<Replicate> = if config.parallel {
        (0..config.replicates).into_par_iter().map(solve).collect::<Result<_>>()?
    } else {
        (0..config.replicates).map(solve).collect::<Result<_>>()?
    };
    let selected = replicates
        .iter()
        .fold(0, |best, r| if r.estimate < replicates[best].estimate { r.index } else { best });
    Ok(SaaReport { replicates, selected })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShortLong {
    /// Transport value at `x` using only moves of length at most `lambda r`.
    pub short: f64,
    /// Transport value at the zero first stage using only moves longer than
    /// `lambda r`, with total mass at most `1 / lambda`.
    pub long_at_zero: f64,
}

/// Transport LP over every `(A, B)` pair accepted by `allow`.
fn transport(
    center: &Distribution,
    universe: &[Scenario],
    values: &[f64],
    metric: &ScenarioMetric,
    radius: f64,
    allow: impl Fn(f64) -> bool,
    mass_cap: Option<f64>,
) -> Result<f64> {
    let mut lp = LinearProgram::new(Sense::Maximize, Vec::new());
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); center.atoms().len()];
    let mut budget = Vec::new();
    let mut all = Vec::new();
    for (i, &(a, _)) in center.atoms().iter().enumerate() {
        for (k, &b) in universe.iter().enumerate() {
            let d = metric.distance(a, b)?;
            if !allow(d) {
                continue;
            }
            let col = lp.add_var(values[k]);
            rows[i].push((col, 1.0));
            budget.push((col, d));
            all.push((col, 1.0));
        }
    }
    for (i, row) in rows.into_iter().enumerate() {
        lp.add_constraint(row, Relation::Le, center.atoms()[i].1);
    }
    lp.add_constraint(budget, Relation::Le, radius);
    if let Some(cap) = mass_cap {
        lp.add_constraint(all, Relation::Le, cap);
    }
    Ok(lp.solve()?.value)
}

/// Splits the worst-case transport at `x` into moves no longer than
/// `lambda r` and the rest, bounding the latter at the zero first stage.
/// With `lambda` at least the inflation factor,
/// `h(x) <= c.x + short + long_at_zero <= 2 h(x)`.
pub fn decompose_short_long(
    problem: &dyn TwoStageProblem,
    x: &[f64],
    center: &Distribution,
    radius: f64,
    metric: &ScenarioMetric,
    lambda: f64,
    universe: &[Scenario],
) -> Result<ShortLong> {
    if universe.len() > SCENARIO_GUARD {
        return Err(DroError::EnumerationTooLarge { what: "scenarios", size: universe.len(), guard: SCENARIO_GUARD });
    }
    let at_x = crate::exactref::recourse_table(problem, x, universe)?;
    let at_zero = crate::exactref::recourse_table(problem, &vec![0.0; problem.num_decisions()], universe)?;
    let reach = lambda * radius;
    let short = transport(center, universe, &at_x, metric, radius, |d| d <= reach, None)?;
    let long_at_zero = transport(center, universe, &at_zero, metric, radius, |d| d > reach, Some(1.0 / lambda))?;
    Ok(ShortLong { short, long_at_zero })
}
