//! Dense two-phase primal simplex.
//!
//! Entering columns follow Dantzig's rule until a degenerate pivot is seen;
//! from then on Bland's smallest-index rule is used until the objective moves
//! again. The leaving row comes from a Harris two-pass ratio test, which takes
//! the largest pivot among rows blocking within a small tolerance; negative
//! right-hand sides left by that slack are clamped to zero. A pivot budget of `50 * (rows + cols)` guards against stalls.
//!
//! Duals are reported as sensitivities `d value / d rhs` in the caller's
//! sense, so for a minimisation a `>=` row has a nonnegative dual and the
//! optimal value equals
//! `c.lo + sum(dual * (rhs - a.lo)) + sum(bound_dual * (upper - lo))`.

use std::cell::Cell;

use crate::error::{DroError, Result};

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-10;
const HARRIS_TOL: f64 = 1e-9;

thread_local! {
    static PIVOTS: Cell<u64> = const { Cell::new(0) };
    static SOLVES: Cell<u64> = const { Cell::new(0) };
}

/// (pivots, solves) performed on this thread since the last reset.
pub fn work_counters() -> (u64, u64) {
    (PIVOTS.with(Cell::get), SOLVES.with(Cell::get))
}

pub fn reset_work_counters() {
    PIVOTS.with(|c| c.set(0));
    SOLVES.with(|c| c.set(0));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sparse row as (variable, coefficient); repeated indices are summed.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub primal: Vec<f64>,
    /// One per constraint, in insertion order.
    pub duals: Vec<f64>,
    /// One per variable; zero where no upper bound was set.
    pub bound_duals: Vec<f64>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Appends a variable with the given objective coefficient and returns its index.
    pub fn add_var(&mut self, cost: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(0.0);
        self.upper.push(None);
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: Option<f64>) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn solve(&self) -> Result<LpSolution> {
        SOLVES.with(|c| c.set(c.get() + 1));
        let n = self.objective.len();
        for c in &self.constraints {
            if let Some(&(j, _)) = c.coeffs.iter().find(|(j, _)| *j >= n) {
                return Err(DroError::DimensionMismatch { expected: n, got: j + 1 });
            }
        }
        let flip = if self.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let cost: Vec<f64> = self.objective.iter().map(|c| flip * c).collect();

        // Shift lower bounds to zero and turn finite upper bounds into rows.
        let mut rows: Vec<(Vec<(usize, f64)>, Relation, f64)> = Vec::new();
        for c in &self.constraints {
            let shift: f64 = c.coeffs.iter().map(|&(j, a)| a * self.lower[j]).sum();
            rows.push((c.coeffs.clone(), c.relation, c.rhs - shift));
        }
        let mut bound_rows = Vec::new();
        for j in 0..n {
            if let Some(u) = self.upper[j] {
                if u < self.lower[j] - 1e-12 {
                    return Err(DroError::Infeasible);
                }
                bound_rows.push((j, rows.len()));
                rows.push((vec![(j, 1.0)], Relation::Le, (u - self.lower[j]).max(0.0)));
            }
        }

        let out = Tableau::build(n, &rows).run(&cost)?;

        let primal: Vec<f64> = out.x.iter().zip(&self.lower).map(|(x, lo)| x + lo).collect();
        let value: f64 = self.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();
        let m = self.constraints.len();
        let duals = out.y[..m].iter().map(|y| flip * y).collect();
        let mut bound_duals = vec![0.0; n];
        for (j, r) in bound_rows {
            bound_duals[j] = flip * out.y[r];
        }
        Ok(LpSolution { value, primal, duals, bound_duals })
    }
}

struct Tableau {
    n: usize,
    m: usize,
    width: usize,
    /// Row-major, `width + 1` entries per row, rhs last.
    t: Vec<f64>,
    basis: Vec<usize>,
    /// Row sign applied so that every rhs is nonnegative.
    sign: Vec<f64>,
    artificial: Vec<bool>,
}

struct Basic {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Tableau {
    /// Columns: structural `0..n`, one identity column per row `n..n+m`
    /// (slack for `<=`, artificial otherwise), then surplus columns.
    fn build(n: usize, rows: &[(Vec<(usize, f64)>, Relation, f64)]) -> Self {
        let m = rows.len();
        let surplus = rows
            .iter()
            .filter(|(_, rel, rhs)| {
                let neg = *rhs < 0.0;
                matches!((rel, neg), (Relation::Ge, false) | (Relation::Le, true))
            })
            .count();
        let width = n + m + surplus;
        let stride = width + 1;
        let mut t = vec![0.0; m * stride];
        let mut sign = vec![1.0; m];
        let mut artificial = vec![false; width];
        let mut next_surplus = n + m;
        for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
            let s = if *rhs < 0.0 { -1.0 } else { 1.0 };
            sign[i] = s;
            let row = &mut t[i * stride..(i + 1) * stride];
            for &(j, a) in coeffs {
                row[j] += s * a;
            }
            row[width] = s * rhs;
            let rel = match (rel, s < 0.0) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => *r,
            };
            row[n + i] = 1.0;
            match rel {
                Relation::Le => {}
                Relation::Ge => {
                    row[next_surplus] = -1.0;
                    next_surplus += 1;
                    artificial[n + i] = true;
                }
                Relation::Eq => artificial[n + i] = true,
            }
        }
        Self {
            n,
            m,
            width,
            t,
            basis: (n..n + m).collect(),
            sign,
            artificial,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.width + 1) + j]
    }

    fn run(mut self, cost: &[f64]) -> Result<Basic> {
        let limit = 50 * (self.m + self.width).max(1);
        let mut pivots = 0usize;

        if self.artificial.iter().any(|&a| a) {
            let phase1: Vec<f64> = (0..self.width)
                .map(|j| if self.artificial[j] { 1.0 } else { 0.0 })
                .collect();
            let allowed = vec![true; self.width];
            let mut d = self.reduced_costs(&phase1);
            self.optimize(&mut d, &allowed, &mut pivots, limit)?;
            let infeasibility: f64 = (0..self.m)
                .filter(|&i| self.artificial[self.basis[i]])
                .map(|i| self.at(i, self.width))
                .sum();
            let scale = 1.0 + (0..self.m).map(|i| self.at(i, self.width).abs()).fold(0.0, f64::max);
            if infeasibility > 1e-8 * scale {
                return Err(DroError::Infeasible);
            }
            self.drive_out_artificials(&mut pivots);
        }

        let mut full_cost = vec![0.0; self.width];
        full_cost[..self.n].copy_from_slice(cost);
        let allowed: Vec<bool> = self.artificial.iter().map(|a| !a).collect();
        let mut d = self.reduced_costs(&full_cost);
        self.optimize(&mut d, &allowed, &mut pivots, limit)?;

        let mut x = vec![0.0; self.n];
        for i in 0..self.m {
            let b = self.basis[i];
            if b < self.n {
                x[b] = self.at(i, self.width).max(0.0);
            }
        }
        let y = (0..self.m).map(|i| -d[self.n + i] * self.sign[i]).collect();
        Ok(Basic { x, y })
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * (self.width + 1)..i * (self.width + 1) + self.width];
                for (dj, a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn optimize(&mut self, d: &mut [f64], allowed: &[bool], pivots: &mut usize, limit: usize) -> Result<()> {
        let mut bland = false;
        loop {
            let entering = if bland {
                (0..self.width).find(|&j| allowed[j] && d[j] < -COST_TOL)
            } else {
                let mut best = None;
                let mut best_d = -COST_TOL;
                for j in 0..self.width {
                    if allowed[j] && d[j] < best_d {
                        best_d = d[j];
                        best = Some(j);
                    }
                }
                best
            };
            let Some(q) = entering else { return Ok(()) };

            // Harris ratio test: find the largest step that keeps every row
            // within HARRIS_TOL of feasibility, then take the biggest pivot
            // among rows blocking before it.
            let mut theta = f64::INFINITY;
            for i in 0..self.m {
                let a = self.at(i, q);
                if a > PIVOT_TOL {
                    theta = theta.min((self.at(i, self.width).max(0.0) + HARRIS_TOL) / a);
                }
            }
            if theta == f64::INFINITY {
                return Err(DroError::Unbounded);
            }
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, q);
                if a > PIVOT_TOL && self.at(i, self.width).max(0.0) / a <= theta {
                    let better = match leave {
                        None => true,
                        Some((r, best)) => a > best * (1.0 + 1e-9) || (a >= best * (1.0 - 1e-9) && self.basis[i] < self.basis[r]),
                    };
                    if better {
                        leave = Some((i, a));
                    }
                }
            }
            let (r, a) = leave.expect("a blocking row exists when theta is finite");
            let ratio = self.at(r, self.width).max(0.0) / a;
            bland = ratio <= 1e-12;
            self.pivot(r, q, Some(d));
            *pivots += 1;
            if *pivots > limit {
                return Err(DroError::NumericalFailure(format!("simplex pivot limit {limit} reached")));
            }
        }
    }

    fn drive_out_artificials(&mut self, pivots: &mut usize) {
        for i in 0..self.m {
            if !self.artificial[self.basis[i]] {
                continue;
            }
            let col = (0..self.width).find(|&j| !self.artificial[j] && self.at(i, j).abs() > 1e-9);
            if let Some(j) = col {
                self.pivot(i, j, None);
                *pivots += 1;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize, d: Option<&mut [f64]>) {
        PIVOTS.with(|c| c.set(c.get() + 1));
        let stride = self.width + 1;
        let p = self.t[r * stride + q];
        {
            let row = &mut self.t[r * stride..(r + 1) * stride];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * stride);
        let (prow, after) = rest.split_at_mut(stride);
        for row in before.chunks_exact_mut(stride).chain(after.chunks_exact_mut(stride)) {
            let f = row[q];
            if f != 0.0 {
                for (v, a) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * a;
                }
                row[q] = 0.0;
            }
        }
        if let Some(d) = d {
            let f = d[q];
            if f != 0.0 {
                for (dj, a) in d.iter_mut().zip(prow.iter()) {
                    *dj -= f * a;
                }
                d[q] = 0.0;
            }
        }
        self.basis[r] = q;
        for i in 0..self.m {
            let v = &mut self.t[i * stride + self.width];
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_variable_max() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.add_constraint(vec![(0, 1.0)], Relation::Le, 3.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.value, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.duals[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.add_constraint(vec![(0, 1.0)], Relation::Le, -1.0);
        assert_eq!(lp.solve(), Err(DroError::Infeasible));
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add_constraint(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        assert_eq!(lp.solve(), Err(DroError::Unbounded));
    }

    #[test]
    fn triangle_fractional_vertex_cover() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0; 3]);
        for (u, v) in [(0, 1), (0, 2), (1, 2)] {
            lp.add_constraint(vec![(u, 1.0), (v, 1.0)], Relation::Ge, 1.0);
        }
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.value, 1.5, epsilon = 1e-9);
        let dual_value: f64 = s.duals.iter().sum();
        assert_abs_diff_eq!(dual_value, 1.5, epsilon = 1e-9);
        assert!(s.duals.iter().all(|&y| y >= -1e-12));
    }

    #[test]
    fn equality_and_bounds() {
        // min -x - 2y  s.t. x + y = 1, 0.2 <= x <= 1, y <= 0.5
        let mut lp = LinearProgram::new(Sense::Minimize, vec![-1.0, -2.0]);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0);
        lp.set_bounds(0, 0.2, Some(1.0));
        lp.set_bounds(1, 0.0, Some(0.5));
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.value, -1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(s.primal[0], 0.5, epsilon = 1e-9);
        let recon = -0.2 + s.duals[0] * (1.0 - 0.2) + s.bound_duals[0] * 0.8 + s.bound_duals[1] * 0.5;
        assert_abs_diff_eq!(recon, s.value, epsilon = 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 1.0]);
        lp.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 2.0);
        lp.add_constraint(vec![(0, 2.0), (1, 2.0)], Relation::Eq, 4.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn empty_program() {
        let lp = LinearProgram::new(Sense::Minimize, vec![1.0, 2.0]);
        let s = lp.solve().unwrap();
        assert_eq!(s.value, 0.0);
    }
}
