//! Algebraic carrier for (mixed-integer) linear programs with optional
//! square-root cone terms on `<=` rows.
//!
//! Nominal models and both kinds of robust counterpart share this one type,
//! so everything downstream (solver, text format, validators) handles them
//! uniformly.

mod expr;
mod standard;
mod text;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

pub use expr::{ConeTerm, LinExpr};
pub use standard::{ColumnMap, StandardForm, StdRow, StdSense};
pub use text::{export_text, import_text};

use crate::error::{Error, Result};

/// Feasibility tolerance used by the solver and validators.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Integrality tolerance used by branch-and-bound.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ConId(pub(crate) usize);

impl ConId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VarKind::Continuous => "continuous",
            VarKind::Binary => "binary",
            VarKind::Integer => "integer",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub(crate) id: VarId,
    pub(crate) name: String,
    pub(crate) kind: VarKind,
    pub(crate) lower: f64,
    pub(crate) upper: f64,
}

impl Variable {
    pub fn id(&self) -> VarId {
        self.id
    }
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn kind(&self) -> VarKind {
        self.kind
    }
    pub fn lower(&self) -> f64 {
        self.lower
    }
    pub fn upper(&self) -> f64 {
        self.upper
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjSense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub(crate) id: ConId,
    pub(crate) label: String,
    pub(crate) lhs: LinExpr,
    pub(crate) cone: Option<ConeTerm>,
    pub(crate) sense: Sense,
    pub(crate) rhs: f64,
}

impl Constraint {
    pub fn id(&self) -> ConId {
        self.id
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn lhs(&self) -> &LinExpr {
        &self.lhs
    }
    pub fn cone(&self) -> Option<&ConeTerm> {
        self.cone.as_ref()
    }
    pub fn sense(&self) -> Sense {
        self.sense
    }
    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    /// Left-hand side value including the constant and any cone term.
    pub fn lhs_value(&self, values: &[f64]) -> f64 {
        let mut total = self.lhs.value(values);
        if let Some(cone) = &self.cone {
            total += cone.value(values);
        }
        total
    }

    /// Signed residual; `<= 0` means satisfied for inequalities.
    pub fn residual(&self, values: &[f64]) -> f64 {
        let lhs = self.lhs_value(values);
        match self.sense {
            Sense::Le => lhs - self.rhs,
            Sense::Ge => self.rhs - lhs,
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    pub sense: ObjSense,
    pub expr: LinExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Objective,
    var_names: HashMap<String, VarId>,
    con_labels: HashMap<String, ConId>,
}

impl Default for Model {
    fn default() -> Self {
        Self::new()
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

impl Model {
    pub fn new() -> Self {
        Model {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Objective {
                sense: ObjSense::Maximize,
                expr: LinExpr::zero(),
            },
            var_names: HashMap::new(),
            con_labels: HashMap::new(),
        }
    }

    /// Appends a variable. Binary variables always get bounds `[0, 1]`.
    pub fn add_variable(
        &mut self,
        name: &str,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId> {
        if name.is_empty() {
            return Err(Error::EmptyName);
        }
        if !is_identifier(name) {
            return Err(Error::InvalidIdentifier(name.to_string()));
        }
        if self.var_names.contains_key(name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        let (lower, upper) = match kind {
            VarKind::Binary => (0.0, 1.0),
            _ => (lower, upper),
        };
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::BoundInversion {
                name: name.to_string(),
                lower,
                upper,
            });
        }
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            id,
            name: name.to_string(),
            kind,
            lower,
            upper,
        });
        self.var_names.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_continuous(&mut self, name: &str, lower: f64, upper: f64) -> Result<VarId> {
        self.add_variable(name, VarKind::Continuous, lower, upper)
    }

    pub fn add_binary(&mut self, name: &str) -> Result<VarId> {
        self.add_variable(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn add_integer(&mut self, name: &str, lower: f64, upper: f64) -> Result<VarId> {
        self.add_variable(name, VarKind::Integer, lower, upper)
    }

    pub fn add_constraint(
        &mut self,
        label: &str,
        lhs: LinExpr,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConId> {
        self.push_constraint(label, lhs, None, sense, rhs)
    }

    /// Appends `lhs + cone (sense) rhs`. Cone terms are only admitted on `<=` rows.
    pub fn add_cone_constraint(
        &mut self,
        label: &str,
        lhs: LinExpr,
        cone: ConeTerm,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConId> {
        self.push_constraint(label, lhs, Some(cone), sense, rhs)
    }

    fn push_constraint(
        &mut self,
        label: &str,
        lhs: LinExpr,
        cone: Option<ConeTerm>,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConId> {
        if label.is_empty() {
            return Err(Error::EmptyName);
        }
        if !is_identifier(label) {
            return Err(Error::InvalidIdentifier(label.to_string()));
        }
        if self.con_labels.contains_key(label) {
            return Err(Error::DuplicateName(label.to_string()));
        }
        self.check_expr(&lhs)?;
        if let Some(cone) = &cone {
            if sense != Sense::Le {
                return Err(Error::ConeSense(label.to_string()));
            }
            cone.validate()?;
            for &(var, _) in cone.components() {
                self.check_var(var)?;
            }
        }
        if !rhs.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "constraint `{label}`: right-hand side must be finite"
            )));
        }
        let id = ConId(self.constraints.len());
        self.constraints.push(Constraint {
            id,
            label: label.to_string(),
            lhs,
            cone,
            sense,
            rhs,
        });
        self.con_labels.insert(label.to_string(), id);
        Ok(id)
    }

    pub fn set_objective(&mut self, sense: ObjSense, expr: LinExpr) -> Result<()> {
        self.check_expr(&expr)?;
        self.objective = Objective { sense, expr };
        Ok(())
    }

    fn check_var(&self, var: VarId) -> Result<()> {
        if var.0 < self.variables.len() {
            Ok(())
        } else {
            Err(Error::UnknownVariable(var.0))
        }
    }

    fn check_expr(&self, expr: &LinExpr) -> Result<()> {
        for &(var, coef) in expr.terms() {
            self.check_var(var)?;
            if !coef.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite coefficient on `{}`",
                    self.variables[var.0].name
                )));
            }
        }
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, id: ConId) -> Result<&Constraint> {
        self.constraints
            .get(id.0)
            .ok_or(Error::UnknownConstraint(id.0))
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_names.get(name).copied()
    }

    pub fn constraint_by_label(&self, label: &str) -> Option<ConId> {
        self.con_labels.get(label).copied()
    }

    pub fn has_cones(&self) -> bool {
        self.constraints.iter().any(|c| c.cone.is_some())
    }

    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.kind.is_integral())
    }

    /// A name not yet used by any variable, derived from `base`.
    pub fn fresh_var_name(&self, base: &str) -> String {
        fresh(base, |n| self.var_names.contains_key(n))
    }

    pub fn fresh_label(&self, base: &str) -> String {
        fresh(base, |n| self.con_labels.contains_key(n))
    }

    /// Residual of one constraint at `values` (see [`Constraint::residual`]).
    pub fn evaluate_constraint(&self, values: &[f64], id: ConId) -> Result<f64> {
        let con = self.constraint(id)?;
        self.check_values(values, con)?;
        Ok(con.residual(values))
    }

    fn check_values(&self, values: &[f64], con: &Constraint) -> Result<()> {
        let cone_vars = con
            .cone
            .iter()
            .flat_map(|c| c.components().iter().map(|&(v, _)| v));
        for var in con.lhs.terms().iter().map(|&(v, _)| v).chain(cone_vars) {
            match values.get(var.0) {
                Some(v) if !v.is_nan() => {}
                _ => return Err(Error::MissingValue(self.variables[var.0].name.clone())),
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.expr.value(values)
    }

    /// Largest constraint residual and bound violation at `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.residual(values).max(0.0));
        let bounds = self.variables.iter().map(|v| {
            let x = values[v.id.0];
            (v.lower - x).max(x - v.upper).max(0.0)
        });
        rows.chain(bounds).fold(0.0, f64::max)
    }

    /// Copy of the model with every cone term removed.
    pub fn without_cones(&self) -> Model {
        let mut m = self.clone();
        for c in &mut m.constraints {
            c.cone = None;
        }
        m
    }

    pub fn to_standard_form(&self) -> Result<StandardForm> {
        StandardForm::from_model(self)
    }
}

fn fresh(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}_{k}"))
        .find(|n| !taken(n))
        .expect("unbounded search")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    LimitReached,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::LimitReached => "limit_reached",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub simplex_iterations: u64,
    pub nodes: u64,
    pub branches: u64,
    pub cone_cuts: u64,
    pub cone_rounds: u64,
    /// Relaxation bounds of nodes in the order they were processed (maximization sense).
    #[serde(skip)]
    pub bound_history: Vec<f64>,
    /// Set when an unbounded integer variable had to be capped for branching.
    pub capped_integers: bool,
    /// Largest remaining cone-row violation when the cut loop gave up.
    pub max_cone_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    pub status: Status,
    /// One value per model variable, indexed by [`VarId::index`]. Empty when no point is known.
    pub values: Vec<f64>,
    pub objective: f64,
    pub stats: SolveStats,
}

impl Solution {
    pub fn without_point(status: Status, stats: SolveStats) -> Self {
        Solution {
            status,
            values: Vec::new(),
            objective: f64::NAN,
            stats,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }
}
