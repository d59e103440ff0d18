//! Lazy outer approximation of cone rows.
//!
//! Each row `lhs + s·sqrt(Σ (c_k v_k)² + k) <= rhs` with `s > 0` is replaced
//! by `lhs + s·t <= rhs` plus linear cuts under `t`. Cuts are supporting
//! hyperplanes of the (convex) radical taken at integer-feasible incumbents.

use super::bnb::{branch_and_cut, Cut};
use super::SolverOptions;
use crate::error::Result;
use crate::model::{ConeTerm, LinExpr, Model, Sense, Solution, VarId};

/// `t >= Σ coeffs·v + constant`, the tangent of the radical at some point.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearCut {
    pub coeffs: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinearCut {
    pub fn value(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, c)| c * values[v.index()]).sum::<f64>() + self.constant
    }
}

/// Tangent of `g(v) = sqrt(Σ (c v)² + k)` at `point`:
/// `g(v) >= (Σ c² v̂ v + k) / g(v̂)`. `None` where `g(v̂) = 0`; there the
/// subgradient cut is `t >= 0`, already implied by the bound on `t`.
pub fn supporting_cut(cone: &ConeTerm, point: &[f64]) -> Option<LinearCut> {
    let g = cone.radical(point);
    if !(g > 0.0) {
        return None;
    }
    let coeffs = cone
        .components()
        .iter()
        .map(|&(v, c)| (v, c * c * point[v.index()] / g))
        .collect();
    Some(LinearCut {
        coeffs,
        constant: cone.constant_inside() / g,
    })
}

struct ConeRow {
    /// Constraint index in the source model.
    source: usize,
    cone: ConeTerm,
    epigraph: VarId,
}

pub fn solve_cone(model: &Model, options: &SolverOptions) -> Result<Solution> {
    options.validate()?;
    let mut work = Model::new();
    for var in model.variables() {
        work.add_variable(var.name(), var.kind(), var.lower(), var.upper())?;
    }
    let mut rows = Vec::new();
    for con in model.constraints() {
        match con.cone() {
            Some(cone) if cone.scale() > 0.0 => {
                let t_name = work.fresh_var_name(&format!("cone_t_{}", con.label()));
                let t = work.add_continuous(&t_name, cone.constant_inside().sqrt(), f64::INFINITY)?;
                let lhs = con.lhs().clone().plus(&LinExpr::term(t, cone.scale()));
                work.add_constraint(con.label(), lhs, Sense::Le, con.rhs())?;
                // |c_k v_k| <= radical: a cheap initial polyhedral hull
                for (k, &(v, c)) in cone.components().iter().enumerate() {
                    for (tag, sgn) in [("p", 1.0), ("n", -1.0)] {
                        let label = work.fresh_label(&format!("{}__cone_init{k}{tag}", con.label()));
                        work.add_constraint(
                            &label,
                            LinExpr::from_terms([(t, 1.0), (v, -sgn * c)]),
                            Sense::Ge,
                            0.0,
                        )?;
                    }
                }
                rows.push(ConeRow {
                    source: con.id().index(),
                    cone: cone.clone(),
                    epigraph: t,
                });
            }
            _ => {
                work.add_constraint(con.label(), con.lhs().clone(), con.sense(), con.rhs())?;
            }
        }
    }
    work.set_objective(model.objective().sense, model.objective().expr.clone())?;

    let n = model.num_variables();
    let tol = options.cone_cut_tol;
    let mut separate = |values: &[f64]| {
        rows.iter()
            .filter(|row| {
                let con = &model.constraints()[row.source];
                con.residual(values) > tol * con.rhs().abs().max(1.0)
            })
            .filter_map(|row| {
                let cut = supporting_cut(&row.cone, values)?;
                let mut expr = LinExpr::from_terms(cut.coeffs.iter().map(|&(v, c)| (v, -c)));
                expr.add_term(row.epigraph, 1.0);
                let label = format!("{}__cut", model.constraints()[row.source].label());
                Some(Cut { label, expr, rhs: cut.constant })
            })
            .collect()
    };
    let mut sol = branch_and_cut(&mut work, options, &mut separate)?;
    if !sol.values.is_empty() {
        sol.values.truncate(n);
        sol.objective = model.objective_value(&sol.values);
        sol.stats.max_cone_violation = rows
            .iter()
            .map(|row| model.constraints()[row.source].residual(&sol.values))
            .fold(0.0, f64::max);
    }
    Ok(sol)
}
