use serde::Serialize;

use crate::error::{DroError, Result};
use crate::model::{Scenario, TwoStageProblem};

/// Per-scenario evidence that a rounding stayed within its factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub scenario: Scenario,
    pub fractional: f64,
    pub rounded: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rounding {
    pub x: Vec<f64>,
    pub rho: f64,
    pub first_stage_fractional: f64,
    pub first_stage_rounded: f64,
    pub certificates: Vec<Certificate>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den <= 1e-12 {
        if num <= 1e-9 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

impl Rounding {
    /// Largest observed ratio over the first stage and every certificate.
    pub fn worst_ratio(&self) -> f64 {
        self.certificates
            .iter()
            .map(|c| ratio(c.rounded, c.fractional))
            .fold(ratio(self.first_stage_rounded, self.first_stage_fractional), f64::max)
    }

    pub fn verify(&self) -> Result<()> {
        let within = |rounded: f64, frac: f64| rounded <= self.rho * frac + 1e-7 * (1.0 + frac);
        if !within(self.first_stage_rounded, self.first_stage_fractional) {
            return Err(DroError::RoundingGuaranteeViolated(format!(
                "first stage {} > {} * {}",
                self.first_stage_rounded, self.rho, self.first_stage_fractional
            )));
        }
        for c in &self.certificates {
            if !within(c.rounded, c.fractional) {
                return Err(DroError::RoundingGuaranteeViolated(format!(
                    "scenario {:?}: {} > {} * {}",
                    c.scenario, c.rounded, self.rho, c.fractional
                )));
            }
        }
        Ok(())
    }
}

/// Rounds a fractional first stage to an integral one such that the first
/// stage cost and the integral recourse of every tested scenario grow by at
/// most `rho` against the fractional values at `x`.
pub trait LocalRounding: Sync {
    fn rho(&self) -> f64;

    /// `scenarios` are the scenarios to certify; rounders that pick among
    /// several candidates also use them for the choice.
    fn local_round(&self, x: &[f64], scenarios: &[Scenario]) -> Result<Rounding>;
}

pub(crate) fn certify(
    problem: &dyn TwoStageProblem,
    x: &[f64],
    rounded: Vec<f64>,
    scenarios: &[Scenario],
    rho: f64,
) -> Result<Rounding> {
    let mut certificates = Vec::with_capacity(scenarios.len());
    for &a in scenarios {
        let fractional = problem.recourse(x, a)?.value;
        let r = problem.integral_recourse(&rounded, a)?.cost;
        certificates.push(Certificate { scenario: a, fractional, rounded: r });
    }
    Ok(Rounding {
        first_stage_fractional: problem.first_stage_cost(x),
        first_stage_rounded: problem.first_stage_cost(&rounded),
        x: rounded,
        rho,
        certificates,
    })
}

/// Certifies every candidate and keeps the one with the smallest worst
/// ratio; ties keep the earlier candidate.
pub(crate) fn best_candidate(
    problem: &dyn TwoStageProblem,
    x: &[f64],
    candidates: Vec<Vec<f64>>,
    scenarios: &[Scenario],
    rho: f64,
) -> Result<Rounding> {
    let mut best: Option<Rounding> = None;
    let mut seen: Vec<Vec<f64>> = Vec::new();
    for cand in candidates {
        if seen.contains(&cand) {
            continue;
        }
        seen.push(cand.clone());
        let r = certify(problem, x, cand, scenarios, rho)?;
        if best.as_ref().is_none_or(|b| r.worst_ratio() < b.worst_ratio() - 1e-12) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| DroError::InvalidInstance("no rounding candidates".into()))
}
