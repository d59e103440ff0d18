use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::simplex::{solve_standard, LpStatus};
use super::SolverOptions;
use crate::error::{Error, Result};
use crate::model::{LinExpr, Model, Sense, Solution, SolveStats, StandardForm, Status};

/// Bound used in place of an infinite bound on an integer variable.
const INTEGER_CAP: f64 = 1e9;
const PRUNE_TOL: f64 = 1e-9;

/// Open node: tightened bounds plus the parent relaxation value (maximization sense).
#[derive(Clone, Debug)]
pub(crate) struct NodeRecord {
    pub bounds: Vec<(f64, f64)>,
    pub parent_bound: f64,
    pub depth: u32,
    seq: u64,
}

impl PartialEq for NodeRecord {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for NodeRecord {}
impl PartialOrd for NodeRecord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for NodeRecord {
    // max-heap: larger bound first, then lower sequence number (FIFO)
    fn cmp(&self, other: &Self) -> Ordering {
        self.parent_bound
            .total_cmp(&other.parent_bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn most_fractional(model: &Model, values: &[f64], tol: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for var in model.variables() {
        if !var.kind().is_integral() {
            continue;
        }
        let v = values[var.id().index()];
        let frac = v - v.floor();
        let dist = frac.min(1.0 - frac);
        if dist > tol && best.is_none_or(|(_, _, d)| dist > d) {
            best = Some((var.id().index(), v, dist));
        }
    }
    best.map(|(i, v, _)| (i, v))
}

/// Globally valid cut `expr >= rhs` produced by a separator.
pub(crate) struct Cut {
    pub label: String,
    pub expr: LinExpr,
    pub rhs: f64,
}

/// Branch-and-bound over LP relaxations: best-bound node order with FIFO
/// ties, most-fractional branching with lowest-index ties.
pub fn solve_milp(model: &Model, options: &SolverOptions) -> Result<Solution> {
    let mut work = model.clone();
    branch_and_cut(&mut work, options, &mut |_: &[f64]| Vec::new())
}

/// Branch-and-bound with lazy cuts: every integral node LP point is handed
/// to `separate`, returned cuts are appended to `work` and the node is
/// re-solved. An integral point is accepted only once the separator has
/// nothing to add; `max_cone_rounds` caps the rounds over the whole search.
pub(crate) fn branch_and_cut(
    work: &mut Model,
    options: &SolverOptions,
    separate: &mut dyn FnMut(&[f64]) -> Vec<Cut>,
) -> Result<Solution> {
    options.validate()?;
    if work.has_cones() {
        return Err(Error::ConeInStandardForm);
    }
    let started = Instant::now();
    let mut stats = SolveStats::default();
    let sign = match work.objective().sense {
        crate::model::ObjSense::Maximize => 1.0,
        crate::model::ObjSense::Minimize => -1.0,
    };

    let mut root = Vec::with_capacity(work.num_variables());
    for var in work.variables() {
        let (mut lo, mut hi) = (var.lower(), var.upper());
        if var.kind().is_integral() {
            let tol = options.integrality_tol;
            lo = if lo.is_finite() { (lo - tol).ceil() } else { stats.capped_integers = true; -INTEGER_CAP };
            hi = if hi.is_finite() { (hi + tol).floor() } else { stats.capped_integers = true; INTEGER_CAP };
        }
        if lo > hi {
            return Ok(Solution::without_point(Status::Infeasible, stats));
        }
        root.push((lo, hi));
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(NodeRecord {
        bounds: root,
        parent_bound: f64::INFINITY,
        depth: 0,
        seq,
    });
    // (maximization-sense objective, values)
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut hit_limit = false;
    // integral point the separator still objected to when rounds ran out
    let mut unsettled: Option<Vec<f64>> = None;

    'nodes: while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.parent_bound <= best + PRUNE_TOL {
                // best-bound order: everything left is dominated
                break;
            }
        }
        if stats.nodes >= options.max_nodes
            || started.elapsed().as_secs_f64() > options.time_limit_seconds
        {
            hit_limit = true;
            break;
        }
        stats.nodes += 1;
        if node.parent_bound.is_finite() {
            stats.bound_history.push(node.parent_bound);
        }

        let (relax, values, fractional, separated) = loop {
            let sf = StandardForm::with_bounds(work, &node.bounds)?;
            let lp = solve_standard(&sf, options.feasibility_tol, options.max_simplex_iterations)?;
            stats.simplex_iterations += lp.iterations;
            match lp.status {
                LpStatus::Infeasible => continue 'nodes,
                LpStatus::Unbounded => {
                    return Ok(Solution::without_point(Status::Unbounded, stats));
                }
                LpStatus::IterationLimit => {
                    hit_limit = true;
                    break 'nodes;
                }
                LpStatus::Optimal => {}
            }
            if let Some((best, _)) = &incumbent {
                if lp.objective <= best + PRUNE_TOL {
                    continue 'nodes;
                }
            }
            let mut values = sf.recover(&lp.x);
            // round-off can leave an integer slightly outside its node bounds
            for var in work.variables() {
                if var.kind().is_integral() {
                    let (lo, hi) = node.bounds[var.id().index()];
                    let x = &mut values[var.id().index()];
                    *x = x.clamp(lo, hi);
                }
            }
            let fractional = most_fractional(work, &values, options.integrality_tol);
            if fractional.is_some() {
                break (lp.objective, values, fractional, true);
            }
            let cuts = separate(&values);
            if cuts.is_empty() || stats.cone_rounds >= options.max_cone_rounds {
                break (lp.objective, values, None, cuts.is_empty());
            }
            stats.cone_rounds += 1;
            for cut in cuts {
                let label = work.fresh_label(&cut.label);
                work.add_constraint(&label, cut.expr, Sense::Ge, cut.rhs)?;
                stats.cone_cuts += 1;
            }
        };
        if node.depth == 0 {
            stats.bound_history.push(relax);
        }
        match fractional {
            None if !separated => {
                hit_limit = true;
                unsettled.get_or_insert(values);
            }
            None => {
                let snapped: Vec<f64> = work
                    .variables()
                    .iter()
                    .map(|v| {
                        let x = values[v.id().index()];
                        if v.kind().is_integral() { x.round() } else { x }
                    })
                    .collect();
                let obj = sign * work.objective_value(&snapped);
                incumbent = Some((obj, snapped));
            }
            Some((idx, v)) => {
                stats.branches += 1;
                let mut down = node.bounds.clone();
                down[idx].1 = v.floor();
                let mut up = node.bounds;
                up[idx].0 = v.ceil();
                for bounds in [down, up] {
                    seq += 1;
                    heap.push(NodeRecord {
                        bounds,
                        parent_bound: relax,
                        depth: node.depth + 1,
                        seq,
                    });
                }
            }
        }
    }

    Ok(match incumbent {
        Some((obj, values)) => Solution {
            status: if hit_limit { Status::LimitReached } else { Status::Optimal },
            values,
            objective: sign * obj,
            stats,
        },
        None if hit_limit => match unsettled {
            Some(values) => Solution {
                status: Status::LimitReached,
                objective: work.objective_value(&values),
                values,
                stats,
            },
            None => Solution::without_point(Status::LimitReached, stats),
        },
        None => Solution::without_point(Status::Infeasible, stats),
    })
}
