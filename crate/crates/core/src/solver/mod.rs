//! Embedded optimizer: two-phase simplex for LP relaxations, best-bound
//! branch-and-bound for integrality, and outer-approximation cuts for cone
//! terms.

mod bnb;
mod cone;
pub mod simplex;

pub use bnb::solve_milp;
pub use cone::{solve_cone, supporting_cut, LinearCut};

use serde::Serialize;

use crate::error::Result;
use crate::model::{Model, Solution, SolveStats, StandardForm, Status};
use simplex::LpStatus;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branching {
    MostFractional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeOrder {
    BestBound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    pub feasibility_tol: f64,
    pub integrality_tol: f64,
    /// Cone rows are cut while their residual exceeds `cone_cut_tol · max(1, |rhs|)`.
    pub cone_cut_tol: f64,
    pub max_nodes: u64,
    pub max_cone_rounds: u64,
    pub time_limit_seconds: f64,
    pub max_simplex_iterations: u64,
    pub branching: Branching,
    pub node_order: NodeOrder,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feasibility_tol: crate::model::FEASIBILITY_TOL,
            integrality_tol: crate::model::INTEGRALITY_TOL,
            cone_cut_tol: 1e-6,
            max_nodes: 200_000,
            max_cone_rounds: 200,
            time_limit_seconds: 3600.0,
            max_simplex_iterations: 1_000_000,
            branching: Branching::MostFractional,
            node_order: NodeOrder::BestBound,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let tols = [self.feasibility_tol, self.integrality_tol, self.cone_cut_tol];
        if tols.iter().any(|t| !(*t > 0.0)) {
            return Err(crate::Error::InvalidParameter("solver tolerances must be > 0".into()));
        }
        Ok(())
    }
}

/// Solves a standard-form LP and maps the result back to model variables.
pub fn solve_lp(sf: &StandardForm, options: &SolverOptions) -> Result<Solution> {
    options.validate()?;
    let lp = simplex::solve_standard(sf, options.feasibility_tol, options.max_simplex_iterations)?;
    let stats = SolveStats {
        simplex_iterations: lp.iterations,
        nodes: 1,
        ..SolveStats::default()
    };
    Ok(match lp.status {
        LpStatus::Optimal => Solution {
            status: Status::Optimal,
            values: sf.recover(&lp.x),
            objective: sf.objective_sign * lp.objective,
            stats,
        },
        LpStatus::Infeasible => Solution::without_point(Status::Infeasible, stats),
        LpStatus::Unbounded => Solution::without_point(Status::Unbounded, stats),
        LpStatus::IterationLimit => Solution::without_point(Status::LimitReached, stats),
    })
}

/// Dispatches to [`solve_cone`] when the model carries cone terms and to
/// [`solve_milp`] otherwise.
pub fn solve(model: &Model, options: &SolverOptions) -> Result<Solution> {
    if model.has_cones() {
        solve_cone(model, options)
    } else {
        solve_milp(model, options)
    }
}
