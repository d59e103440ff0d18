//! Hospital site selection: choose sites to open and assign population
//! units to them, maximizing expected utilization under a cost budget.
//!
//! Variables are `x_i_j` (unit `i` served by site `j`) and `y_j` (site `j`
//! open), all binary and 1-based in their names.

mod load;

pub use load::load_instance;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ConeTerm, LinExpr, Model, ObjSense, Sense, Solution, VarId};
use crate::robustify::{tolerance_allowance, Mode};
use crate::uncertainty::{omega_from_kappa, RobustConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PopulationUnit {
    pub id: String,
    pub name: String,
    pub population: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteCandidate {
    pub id: String,
    pub name: String,
    pub fixed_cost: f64,
    /// Cost per expected subscriber.
    pub variable_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UtilizationMatrix {
    /// `u[i][j] = n_i · p_ij`
    pub u: Vec<Vec<f64>>,
    pub column_totals: Vec<f64>,
}

pub fn build_utilization(units: &[PopulationUnit], probabilities: &[Vec<f64>]) -> Result<UtilizationMatrix> {
    if probabilities.len() != units.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} probability rows for {} units",
            probabilities.len(),
            units.len()
        )));
    }
    let width = probabilities.first().map_or(0, Vec::len);
    let mut u = Vec::with_capacity(units.len());
    for (i, (unit, row)) in units.iter().zip(probabilities).enumerate() {
        if row.len() != width {
            return Err(Error::DimensionMismatch(format!(
                "probability row {} has {} entries, expected {width}",
                i + 1,
                row.len()
            )));
        }
        if let Some((j, p)) = row.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Validation(format!(
                "probability p[{}][{}] = {p} for unit `{}` is outside [0, 1]",
                i + 1,
                j + 1,
                unit.id
            )));
        }
        u.push(row.iter().map(|p| unit.population * p).collect::<Vec<f64>>());
    }
    let column_totals = (0..width).map(|j| u.iter().map(|r| r[j]).sum()).collect();
    Ok(UtilizationMatrix { u, column_totals })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteSelectionInstance {
    pub units: Vec<PopulationUnit>,
    pub sites: Vec<SiteCandidate>,
    /// Row per unit, column per site.
    pub probabilities: Vec<Vec<f64>>,
    pub budget: f64,
    pub min_enrollment: f64,
    pub max_sites: u32,
    /// Sites (0-based) whose fixed cost is uncertain.
    pub uncertain_fixed: Vec<usize>,
    /// Sites (0-based) whose variable cost is uncertain.
    pub uncertain_variable: Vec<usize>,
    pub uncertain_budget: bool,
    /// Assign every unit to exactly one site instead of at least one.
    pub exact_assignment: bool,
}

impl SiteSelectionInstance {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        if self.units.is_empty() || self.sites.is_empty() {
            return fail("an instance needs at least one unit and one site".into());
        }
        for unit in &self.units {
            if !(unit.population.is_finite() && unit.population >= 0.0) {
                return fail(format!("unit `{}`: population {} must be >= 0", unit.id, unit.population));
            }
        }
        for site in &self.sites {
            if !(site.fixed_cost.is_finite() && site.fixed_cost >= 0.0) {
                return fail(format!("site `{}`: fixed_cost {} must be >= 0", site.id, site.fixed_cost));
            }
            if !(site.variable_cost.is_finite() && site.variable_cost >= 0.0) {
                return fail(format!("site `{}`: variable_cost {} must be >= 0", site.id, site.variable_cost));
            }
        }
        if self.probabilities.len() != self.units.len()
            || self.probabilities.iter().any(|r| r.len() != self.sites.len())
        {
            return Err(Error::DimensionMismatch(format!(
                "probability matrix must be {} x {}",
                self.units.len(),
                self.sites.len()
            )));
        }
        build_utilization(&self.units, &self.probabilities)?;
        for (unit, row) in self.units.iter().zip(&self.probabilities) {
            let total: f64 = row.iter().sum();
            if total > 1.0 + 1e-9 {
                return fail(format!("unit `{}`: probabilities sum to {total} > 1", unit.id));
            }
        }
        if !(self.budget.is_finite() && self.budget > 1.0) {
            return fail(format!("budget {} must be > 1", self.budget));
        }
        if !(self.min_enrollment.is_finite() && self.min_enrollment >= 0.0) {
            return fail(format!("min_enrollment {} must be >= 0", self.min_enrollment));
        }
        if self.max_sites < 1 {
            return fail("max_sites must be >= 1".into());
        }
        for &j in self.uncertain_fixed.iter().chain(&self.uncertain_variable) {
            if j >= self.sites.len() {
                return fail(format!("uncertain site index {j} out of range"));
            }
        }
        Ok(())
    }

    pub fn utilization(&self) -> Result<UtilizationMatrix> {
        build_utilization(&self.units, &self.probabilities)
    }
}

pub fn x_name(i: usize, j: usize) -> String {
    format!("x_{}_{}", i + 1, j + 1)
}

pub fn y_name(j: usize) -> String {
    format!("y_{}", j + 1)
}

struct Built {
    model: Model,
    x: Vec<Vec<VarId>>,
    y: Vec<VarId>,
    util: UtilizationMatrix,
}

impl Built {
    /// `Σ_i u_ij x_ij` for site `j`.
    fn served(&self, j: usize) -> LinExpr {
        LinExpr::from_terms(self.x.iter().zip(&self.util.u).map(|(xs, us)| (xs[j], us[j])))
    }

    /// `Σ_j v_j · served_j`, the variable-cost part of the budget row.
    fn variable_cost(&self, sites: &[SiteCandidate], inflate: impl Fn(usize) -> f64) -> LinExpr {
        sites
            .iter()
            .enumerate()
            .fold(LinExpr::zero(), |acc, (j, s)| acc.plus(&self.served(j).scaled(s.variable_cost * inflate(j))))
    }
}

fn nominal_parts(inst: &SiteSelectionInstance) -> Result<Built> {
    inst.validate()?;
    let util = inst.utilization()?;
    let (m_units, n_sites) = (inst.units.len(), inst.sites.len());
    let mut model = Model::new();
    let mut x = Vec::with_capacity(m_units);
    for i in 0..m_units {
        x.push((0..n_sites).map(|j| model.add_binary(&x_name(i, j))).collect::<Result<Vec<_>>>()?);
    }
    let y = (0..n_sites).map(|j| model.add_binary(&y_name(j))).collect::<Result<Vec<_>>>()?;
    let mut built = Built { model, x, y, util };

    let fixed = LinExpr::from_terms(built.y.iter().zip(&inst.sites).map(|(&y, s)| (y, s.fixed_cost)));
    let budget = fixed.plus(&built.variable_cost(&inst.sites, |_| 1.0));
    built.model.add_constraint("budget", budget, Sense::Le, inst.budget)?;
    for j in 0..n_sites {
        let mut row = built.served(j);
        row.add_term(built.y[j], -inst.min_enrollment);
        built.model.add_constraint(&format!("enroll_{}", j + 1), row, Sense::Ge, 0.0)?;
    }
    let assign_sense = if inst.exact_assignment { Sense::Eq } else { Sense::Ge };
    for i in 0..m_units {
        let row = LinExpr::from_terms(built.x[i].iter().map(|&v| (v, 1.0)));
        built.model.add_constraint(&format!("assign_{}", i + 1), row, assign_sense, 1.0)?;
    }
    let card = LinExpr::from_terms(built.y.iter().map(|&v| (v, 1.0)));
    built.model.add_constraint("card", card, Sense::Le, inst.max_sites as f64)?;
    for i in 0..m_units {
        for j in 0..n_sites {
            let row = LinExpr::from_terms([(built.x[i][j], 1.0), (built.y[j], -1.0)]);
            built.model.add_constraint(&format!("link_{}_{}", i + 1, j + 1), row, Sense::Le, 0.0)?;
        }
    }
    let objective = (0..n_sites).fold(LinExpr::zero(), |acc, j| acc.plus(&built.served(j)));
    built.model.set_objective(ObjSense::Maximize, objective)?;
    Ok(built)
}

pub fn build_nominal(inst: &SiteSelectionInstance) -> Result<Model> {
    Ok(nominal_parts(inst)?.model)
}

/// Nominal model plus the worst-case budget row
/// `Σ f y + ε Σ_M f s + Σ_{j∉K} v·served + Σ_{j∈K} (1+ε) v·served
///  <= C - ε C·[budget uncertain] + δ·max{1, C}` with `-s <= y <= s`.
pub fn build_irc(inst: &SiteSelectionInstance, epsilon: f64, delta: f64) -> Result<Model> {
    RobustConfig::new(epsilon, delta, 1.0)?;
    let mut b = nominal_parts(inst)?;
    let inflate = |j: usize| if inst.uncertain_variable.contains(&j) { 1.0 + epsilon } else { 1.0 };
    let mut row = LinExpr::from_terms(b.y.iter().zip(&inst.sites).map(|(&y, s)| (y, s.fixed_cost)))
        .plus(&b.variable_cost(&inst.sites, inflate));
    for &j in &inst.uncertain_fixed {
        let s = b.model.add_continuous(&format!("s_{}", j + 1), 0.0, f64::INFINITY)?;
        row.add_term(s, epsilon * inst.sites[j].fixed_cost.abs());
        for (tag, sign) in [("ub", 1.0), ("lb", -1.0)] {
            let link = LinExpr::from_terms([(b.y[j], sign), (s, -1.0)]);
            b.model.add_constraint(&format!("budget__irc__{tag}_{}", j + 1), link, Sense::Le, 0.0)?;
        }
    }
    let c = inst.budget;
    let shift = if inst.uncertain_budget { epsilon * c.abs() } else { 0.0 };
    b.model.add_constraint("budget__irc", row, Sense::Le, c - shift + tolerance_allowance(delta, c))?;
    Ok(b.model)
}

/// Nominal model plus the budget row
/// `Σ f y + Σ v·served + ε[Σ_M f l + Ω sqrt(Σ_M f² z² + Σ_K (v U)² w² + C²)] <= C + δ·max{1, C}`
/// with `-l <= y - z <= l` and `U_j w_j = served_j` (`U_j` the column total).
pub fn build_rc(inst: &SiteSelectionInstance, epsilon: f64, delta: f64, kappa: f64) -> Result<Model> {
    RobustConfig::new(epsilon, delta, kappa)?;
    let omega = omega_from_kappa(kappa)?;
    let mut b = nominal_parts(inst)?;
    let mut row = LinExpr::from_terms(b.y.iter().zip(&inst.sites).map(|(&y, s)| (y, s.fixed_cost)))
        .plus(&b.variable_cost(&inst.sites, |_| 1.0));
    let mut components = Vec::new();
    for &j in &inst.uncertain_fixed {
        let l = b.model.add_continuous(&format!("l_{}", j + 1), 0.0, f64::INFINITY)?;
        let z = b.model.add_continuous(&format!("z_{}", j + 1), f64::NEG_INFINITY, f64::INFINITY)?;
        row.add_term(l, epsilon * inst.sites[j].fixed_cost.abs());
        for (tag, sign) in [("ub", 1.0), ("lb", -1.0)] {
            let link = LinExpr::from_terms([(b.y[j], sign), (z, -sign), (l, -1.0)]);
            b.model.add_constraint(&format!("budget__rc__{tag}_{}", j + 1), link, Sense::Le, 0.0)?;
        }
        components.push((z, inst.sites[j].fixed_cost));
    }
    for &j in &inst.uncertain_variable {
        let total = b.util.column_totals[j];
        if total == 0.0 {
            continue;
        }
        let w = b.model.add_continuous(&format!("w_{}", j + 1), 0.0, f64::INFINITY)?;
        let mut link = b.served(j);
        link.add_term(w, -total);
        b.model.add_constraint(&format!("budget__rc__served_{}", j + 1), link, Sense::Eq, 0.0)?;
        components.push((w, inst.sites[j].variable_cost * total));
    }
    let c = inst.budget;
    let constant = if inst.uncertain_budget { c * c } else { 0.0 };
    let cone = ConeTerm::new(epsilon * omega, components, constant)?;
    b.model.add_cone_constraint("budget__rc", row, cone, Sense::Le, c + tolerance_allowance(delta, c))?;
    Ok(b.model)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteMode {
    Nominal,
    Irc,
    Rc,
}

impl SiteMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SiteMode::Nominal => "nominal",
            SiteMode::Irc => "irc",
            SiteMode::Rc => "rc",
        }
    }
}

impl From<Mode> for SiteMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Irc => SiteMode::Irc,
            Mode::Rc => SiteMode::Rc,
        }
    }
}

pub fn build(inst: &SiteSelectionInstance, mode: SiteMode, cfg: &RobustConfig) -> Result<Model> {
    match mode {
        SiteMode::Nominal => build_nominal(inst),
        SiteMode::Irc => build_irc(inst, cfg.epsilon, cfg.delta),
        SiteMode::Rc => build_rc(inst, cfg.epsilon, cfg.delta, cfg.kappa),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteSummary {
    pub open: Vec<String>,
    /// `(unit name, site name)` for every assignment made.
    pub assignments: Vec<(String, String)>,
    pub utilization: f64,
    /// Nominal budget usage `Σ f y + Σ v·served`.
    pub budget_used: f64,
    pub budget: f64,
}

pub fn summarize(inst: &SiteSelectionInstance, solution: &Solution) -> Result<SiteSummary> {
    let util = inst.utilization()?;
    let (m, n) = (inst.units.len(), inst.sites.len());
    if solution.values.len() < m * n + n {
        return Err(Error::DimensionMismatch("solution does not cover the site-selection variables".into()));
    }
    let x = |i: usize, j: usize| solution.values[i * n + j] > 0.5;
    let y = |j: usize| solution.values[m * n + j] > 0.5;
    let mut summary = SiteSummary {
        open: Vec::new(),
        assignments: Vec::new(),
        utilization: 0.0,
        budget_used: 0.0,
        budget: inst.budget,
    };
    for (j, site) in inst.sites.iter().enumerate() {
        if y(j) {
            summary.open.push(site.name.clone());
            summary.budget_used += site.fixed_cost;
        }
    }
    for (i, unit) in inst.units.iter().enumerate() {
        for (j, site) in inst.sites.iter().enumerate() {
            if x(i, j) {
                summary.assignments.push((unit.name.clone(), site.name.clone()));
                summary.utilization += util.u[i][j];
                summary.budget_used += site.variable_cost * util.u[i][j];
            }
        }
    }
    Ok(summary)
}
