//! Concrete problem families, their integral recourse, local rounding and
//! random instance generators.

mod cover;
mod facility;
pub mod generate;
mod rounding;
mod steiner;

pub use cover::CoverProblem;
pub use facility::FacilityLocation;
pub use rounding::{Certificate, LocalRounding, Rounding};
pub use steiner::{MonotoneReduction, SteinerTree};

use crate::error::Result;
use crate::model::{Family, IntegralRecourse, Scenario, ScenarioMetric, SecondStage, TwoStageProblem};

/// A problem whose scenarios have a fixed set of elements removed, so that
/// `g'(x, A) = g(x, A \ covered)`.
pub struct Residual<'a> {
    pub inner: &'a dyn TwoStageProblem,
    pub covered: Scenario,
}

impl TwoStageProblem for Residual<'_> {
    fn family(&self) -> Family {
        self.inner.family()
    }
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }
    fn num_decisions(&self) -> usize {
        self.inner.num_decisions()
    }
    fn first_stage_costs(&self) -> &[f64] {
        self.inner.first_stage_costs()
    }
    fn inflation(&self) -> f64 {
        self.inner.inflation()
    }
    fn second_stage(&self, a: Scenario) -> SecondStage {
        self.inner.second_stage(a.minus(self.covered))
    }
    fn lipschitz(&self, metric: &ScenarioMetric) -> f64 {
        self.inner.lipschitz(metric)
    }
    fn round_recourse(&self, x: &[f64], a: Scenario, z: &[f64]) -> Result<IntegralRecourse> {
        self.inner.round_recourse(x, a.minus(self.covered), z)
    }
}

/// Any family as one enum, handy for CLI dispatch and mixed test suites.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyProblem {
    Cover(CoverProblem),
    Facility(FacilityLocation),
    Steiner(SteinerTree),
}

impl AnyProblem {
    pub fn as_dyn(&self) -> &dyn TwoStageProblem {
        match self {
            AnyProblem::Cover(p) => p,
            AnyProblem::Facility(p) => p,
            AnyProblem::Steiner(p) => p,
        }
    }

    pub fn rounder(&self) -> &dyn LocalRounding {
        match self {
            AnyProblem::Cover(p) => p,
            AnyProblem::Facility(p) => p,
            AnyProblem::Steiner(p) => p,
        }
    }

    /// The scenario metric with element distances, when the family has one.
    pub fn asym_metric(&self) -> Option<ScenarioMetric> {
        match self {
            AnyProblem::Cover(_) => None,
            AnyProblem::Facility(p) => Some(p.asym_metric()),
            AnyProblem::Steiner(p) => Some(p.asym_metric()),
        }
    }
}

pub(crate) const INTEGRAL_TOL: f64 = 1e-9;

pub(crate) fn is_bought(v: f64) -> bool {
    v >= 1.0 - INTEGRAL_TOL
}
