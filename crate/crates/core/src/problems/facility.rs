use crate::error::{DroError, Result};
use crate::lp::Relation;
use crate::model::{
    euclid, Family, GroundMetric, IntegralRecourse, Scenario, ScenarioMetric, SecondStage, StageRow, TwoStageProblem,
    MAX_GROUND,
};

use super::is_bought;
use super::rounding::{best_candidate, LocalRounding, Rounding};

/// Above this many closable facilities the integral recourse switches from
/// exhaustive search to greedy opening.
const EXACT_FACILITY_GUARD: usize = 16;

/// Two-stage uncapacitated facility location on points. Clients are the
/// ground set, facilities the first-stage decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct FacilityLocation {
    facilities: Vec<Vec<f64>>,
    clients: Vec<Vec<f64>>,
    /// `dist[i][j]`: facility `i` to client `j`.
    dist: Vec<Vec<f64>>,
    first_cost: Vec<f64>,
    second_cost: Vec<f64>,
    anchor: Vec<f64>,
}

impl FacilityLocation {
    /// `anchor` is the virtual point present in every scenario when client
    /// distances are used as the scenario metric; it defaults to the first
    /// facility.
    pub fn new(
        facilities: Vec<Vec<f64>>,
        clients: Vec<Vec<f64>>,
        first_cost: Vec<f64>,
        second_cost: Vec<f64>,
        anchor: Option<Vec<f64>>,
    ) -> Result<Self> {
        if facilities.is_empty() {
            return Err(DroError::InvalidInstance("no facilities".into()));
        }
        if clients.len() > MAX_GROUND {
            return Err(DroError::InvalidInstance(format!("more than {MAX_GROUND} clients")));
        }
        for costs in [&first_cost, &second_cost] {
            if costs.len() != facilities.len() {
                return Err(DroError::DimensionMismatch { expected: facilities.len(), got: costs.len() });
            }
        }
        if first_cost.iter().chain(&second_cost).any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(DroError::InvalidInstance("opening costs must be positive and finite".into()));
        }
        let dim = facilities[0].len();
        if facilities.iter().chain(&clients).any(|p| p.len() != dim) {
            return Err(DroError::InvalidInstance("points must share a dimension".into()));
        }
        let dist = facilities.iter().map(|f| clients.iter().map(|c| euclid(f, c)).collect()).collect();
        let anchor = anchor.unwrap_or_else(|| facilities[0].clone());
        Ok(Self { facilities, clients, dist, first_cost, second_cost, anchor })
    }

    pub fn facilities(&self) -> &[Vec<f64>] {
        &self.facilities
    }

    pub fn clients(&self) -> &[Vec<f64>] {
        &self.clients
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn distance(&self, facility: usize, client: usize) -> f64 {
        self.dist[facility][client]
    }

    pub fn second_stage_costs(&self) -> &[f64] {
        &self.second_cost
    }

    /// Opening cost seen by the recourse at integral `x`: zero where the
    /// facility was bought in advance.
    pub fn residual_opening_costs(&self, x: &[f64]) -> Vec<f64> {
        self.second_cost.iter().zip(x).map(|(&f, &v)| if is_bought(v) { 0.0 } else { f }).collect()
    }

    /// Distances between clients with the anchor point.
    pub fn asym_metric(&self) -> ScenarioMetric {
        ScenarioMetric::AsymInf(
            GroundMetric::euclidean(&self.clients, Some(&self.anchor)).expect("euclidean distances are valid"),
        )
    }

    fn assignment_cost(&self, open: &[bool], a: Scenario) -> f64 {
        a.elements()
            .map(|j| (0..self.facilities.len()).filter(|&i| open[i]).map(|i| self.dist[i][j]).fold(f64::INFINITY, f64::min))
            .sum()
    }

    /// Demand-oblivious clustering: each client with enough doubled
    /// first-stage mass gets a ball of twice its fractional service cost;
    /// balls are taken greedily by radius and disjoint balls open their
    /// cheapest facility.
    fn cluster_round(&self, x: &[f64]) -> Vec<f64> {
        let nf = self.facilities.len();
        let doubled: Vec<f64> = x.iter().map(|&v| (2.0 * v).min(1.0)).collect();
        let mut service: Vec<(f64, usize)> = Vec::new();
        for j in 0..self.clients.len() {
            let mut order: Vec<usize> = (0..nf).collect();
            order.sort_by(|&a, &b| self.dist[a][j].total_cmp(&self.dist[b][j]).then(a.cmp(&b)));
            let (mut mass, mut cost) = (0.0, 0.0);
            for i in order {
                let take = doubled[i].min(1.0 - mass);
                mass += take;
                cost += take * self.dist[i][j];
                if mass >= 1.0 - 1e-12 {
                    break;
                }
            }
            if mass >= 1.0 - 1e-9 {
                service.push((cost, j));
            }
        }
        service.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut used = vec![false; nf];
        let mut rounded = vec![0.0; nf];
        for (c, j) in service {
            let ball: Vec<usize> = (0..nf).filter(|&i| self.dist[i][j] <= 2.0 * c + 1e-9).collect();
            if ball.iter().any(|&i| used[i]) {
                continue;
            }
            let cheapest = ball.iter().copied().min_by(|&a, &b| self.first_cost[a].total_cmp(&self.first_cost[b]).then(a.cmp(&b)));
            if let Some(i) = cheapest {
                rounded[i] = 1.0;
            }
            for i in ball {
                used[i] = true;
            }
        }
        rounded
    }
}

impl TwoStageProblem for FacilityLocation {
    fn family(&self) -> Family {
        Family::FacilityLocation
    }

    fn ground_size(&self) -> usize {
        self.clients.len()
    }

    fn num_decisions(&self) -> usize {
        self.facilities.len()
    }

    fn first_stage_costs(&self) -> &[f64] {
        &self.first_cost
    }

    fn inflation(&self) -> f64 {
        self.first_cost.iter().zip(&self.second_cost).map(|(a, b)| b / a).fold(1.0, f64::max)
    }

    /// Variables: `y_i` (open now) then `w_ij` for each client of `a`.
    fn second_stage(&self, a: Scenario) -> SecondStage {
        let nf = self.facilities.len();
        let mut costs = self.second_cost.clone();
        let mut rows = Vec::new();
        for (k, j) in a.elements().enumerate() {
            let base = nf + k * nf;
            costs.extend((0..nf).map(|i| self.dist[i][j]));
            rows.push(StageRow {
                coeffs: (0..nf).map(|i| (base + i, 1.0)).collect(),
                first_stage: Vec::new(),
                relation: Relation::Ge,
                rhs: 1.0,
            });
            for i in 0..nf {
                rows.push(StageRow {
                    coeffs: vec![(i, 1.0), (base + i, -1.0)],
                    first_stage: vec![(i, 1.0)],
                    relation: Relation::Ge,
                    rhs: 0.0,
                });
            }
        }
        SecondStage { costs, rows }
    }

    fn lipschitz(&self, _metric: &ScenarioMetric) -> f64 {
        let total: f64 = self.second_cost.iter().sum::<f64>() + self.dist.iter().flatten().sum::<f64>();
        let min_d = self.dist.iter().flatten().copied().filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min);
        if min_d.is_finite() {
            total / min_d
        } else {
            total
        }
    }

    fn round_recourse(&self, x: &[f64], a: Scenario, _z: &[f64]) -> Result<IntegralRecourse> {
        let nf = self.facilities.len();
        let bought: Vec<bool> = x.iter().map(|&v| is_bought(v)).collect();
        if a.is_empty() {
            return Ok(IntegralRecourse { cost: 0.0, z: vec![0.0; nf] });
        }
        let closed: Vec<usize> = (0..nf).filter(|&i| !bought[i]).collect();
        let price = |open: &[bool]| -> f64 {
            let opening: f64 = closed.iter().filter(|&&i| open[i]).map(|&i| self.second_cost[i]).sum();
            opening + self.assignment_cost(open, a)
        };
        let open = if closed.len() <= EXACT_FACILITY_GUARD {
            let mut best: Option<(f64, Vec<bool>)> = None;
            for mask in 0u32..(1u32 << closed.len()) {
                let mut open = bought.clone();
                for (b, &i) in closed.iter().enumerate() {
                    open[i] |= mask >> b & 1 == 1;
                }
                let c = price(&open);
                if best.as_ref().is_none_or(|(bc, _)| c < bc - 1e-12) {
                    best = Some((c, open));
                }
            }
            best.map(|b| b.1).expect("at least one subset")
        } else {
            let mut open = bought.clone();
            if !open.iter().any(|&o| o) {
                let first = (0..nf)
                    .min_by(|&p, &q| {
                        let mut op = vec![false; nf];
                        op[p] = true;
                        let mut oq = vec![false; nf];
                        oq[q] = true;
                        price(&op).total_cmp(&price(&oq))
                    })
                    .expect("facilities exist");
                open[first] = true;
            }
            loop {
                let current = price(&open);
                let step = closed
                    .iter()
                    .filter(|&&i| !open[i])
                    .map(|&i| {
                        let mut o = open.clone();
                        o[i] = true;
                        (price(&o), i)
                    })
                    .min_by(|a, b| a.0.total_cmp(&b.0));
                match step {
                    Some((c, i)) if c < current - 1e-12 => open[i] = true,
                    _ => break,
                }
            }
            open
        };
        let z = (0..nf).map(|i| if open[i] && !bought[i] { 1.0 } else { 0.0 }).collect();
        Ok(IntegralRecourse { cost: price(&open), z })
    }
}

impl LocalRounding for FacilityLocation {
    fn rho(&self) -> f64 {
        5.488
    }

    /// Candidates: the clustering rounding, thresholds at one half and one
    /// quarter, and buying nothing. The one with the smallest worst ratio on
    /// the tested scenarios wins.
    fn local_round(&self, x: &[f64], scenarios: &[Scenario]) -> Result<Rounding> {
        if x.len() != self.facilities.len() {
            return Err(DroError::DimensionMismatch { expected: self.facilities.len(), got: x.len() });
        }
        let threshold = |t: f64| x.iter().map(|&v| if v >= t - 1e-9 { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        let candidates = vec![self.cluster_round(x), threshold(0.5), threshold(0.25), vec![0.0; x.len()]];
        best_candidate(self, x, candidates, scenarios, self.rho())
    }
}
