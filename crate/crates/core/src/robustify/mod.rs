//! Deterministic robust counterparts of a nominal model.
//!
//! Both builders copy every variable and constraint of the input verbatim
//! (same ids) and append one robust row per uncertain constraint together
//! with its auxiliary variables and link rows. Robust rows are labelled
//! `<label>__irc` or `<label>__rc`.

pub mod timing;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ConId, ConeTerm, LinExpr, Model, Sense, VarId};
use crate::uncertainty::{
    omega_from_kappa, target_name, Distribution, RobustConfig, Target, UncertainEntry, UncertainSet,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Irc,
    Rc,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Irc => "irc",
            Mode::Rc => "rc",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CounterpartArtifacts {
    pub model: Model,
    pub aux_u: BTreeMap<(ConId, VarId), VarId>,
    /// Split variables of the symmetric counterpart; empty for the interval one.
    pub aux_v: BTreeMap<(ConId, VarId), VarId>,
    /// Robust row -> nominal row it was derived from.
    pub provenance: BTreeMap<ConId, ConId>,
    pub notes: Vec<String>,
}

/// Midpoint and half-width of the admissible interval of one entry.
/// The global `epsilon` applies to entries without their own level.
pub fn entry_interval(nominal: f64, dist: &Distribution, epsilon: f64) -> Result<(f64, f64)> {
    match dist {
        Distribution::Bounded { epsilon: Some(e) } => Ok((nominal, e * nominal.abs())),
        Distribution::Bounded { epsilon: None } | Distribution::Uniform => {
            Ok((nominal, epsilon * nominal.abs()))
        }
        Distribution::BoundedRange { low, high } => Ok(((low + high) / 2.0, (high - low) / 2.0)),
        other => Err(Error::UnsupportedDistribution(format!(
            "`{}` has unbounded support; interval and symmetric counterparts need bounded entries",
            other.name()
        ))),
    }
}

/// Slack granted to a row: `δ·max{1, |b̄|}`.
pub fn tolerance_allowance(delta: f64, rhs: f64) -> f64 {
    delta * rhs.abs().max(1.0)
}

struct Prepared<'a> {
    con: ConId,
    label: String,
    /// nominal lhs with uncertain coefficients moved to their midpoints
    center_lhs: LinExpr,
    rhs: f64,
    coeff_entries: Vec<(VarId, f64, &'a UncertainEntry)>,
    rhs_entry: Option<(f64, f64)>,
}

fn prepare<'a>(model: &Model, set: &'a UncertainSet, epsilon: f64) -> Result<Vec<Prepared<'a>>> {
    if model.has_cones() {
        return Err(Error::InvalidParameter("the nominal model already carries cone terms".into()));
    }
    set.validate(model)?;
    let mut out = Vec::new();
    for con_id in set.constraints() {
        let con = model.constraint(con_id)?;
        if con.sense() != Sense::Le {
            return Err(Error::UncertainSense(con.label().to_string()));
        }
        let mut center_lhs = con.lhs().clone();
        let mut coeff_entries = Vec::new();
        let mut rhs_entry = None;
        for entry in set.for_constraint(con_id) {
            match entry.target {
                Target::Var(v) => {
                    let nominal = con.lhs().coefficient(v);
                    let (center, radius) = entry_interval(nominal, &entry.distribution, epsilon)?;
                    center_lhs.add_term(v, center - nominal);
                    coeff_entries.push((v, radius, entry));
                }
                Target::Rhs => {
                    rhs_entry = Some(entry_interval(con.rhs(), &entry.distribution, epsilon)?);
                }
            }
        }
        coeff_entries.sort_by_key(|(v, _, _)| *v);
        out.push(Prepared {
            con: con_id,
            label: con.label().to_string(),
            center_lhs,
            rhs: con.rhs(),
            coeff_entries,
            rhs_entry,
        });
    }
    Ok(out)
}

fn copy_nominal(model: &Model) -> Result<Model> {
    let mut out = Model::new();
    for var in model.variables() {
        out.add_variable(var.name(), var.kind(), var.lower(), var.upper())?;
    }
    for con in model.constraints() {
        out.add_constraint(con.label(), con.lhs().clone(), con.sense(), con.rhs())?;
    }
    out.set_objective(model.objective().sense, model.objective().expr.clone())?;
    Ok(out)
}

fn add_aux(out: &mut Model, prefix: &str, label: &str, var_name: &str, lower: f64) -> Result<VarId> {
    let name = out.fresh_var_name(&format!("{prefix}__{label}__{var_name}"));
    out.add_continuous(&name, lower, f64::INFINITY)
}

/// Interval counterpart: per uncertain row
/// `Σ c x + Σ r u <= b_low + δ·max{1,|b̄|}` with `-u <= x <= u`, `u >= 0`,
/// where `c`/`r` are interval midpoints/half-widths and `b_low` is the
/// lower end of the RHS interval (the nominal RHS when it is certain).
pub fn interval_robust_counterpart(
    model: &Model,
    set: &UncertainSet,
    epsilon: f64,
    delta: f64,
) -> Result<CounterpartArtifacts> {
    RobustConfig::new(epsilon, delta, 1.0)?;
    let prepared = prepare(model, set, epsilon)?;
    let mut out = copy_nominal(model)?;
    let mut aux_u = BTreeMap::new();
    let mut provenance = BTreeMap::new();

    for p in &prepared {
        let mut lhs = p.center_lhs.clone();
        for &(x, radius, _) in &p.coeff_entries {
            let x_name = model.variable(x).name().to_string();
            let u = add_aux(&mut out, "u", &p.label, &x_name, 0.0)?;
            lhs.add_term(u, radius);
            for (tag, sign) in [("ub", 1.0), ("lb", -1.0)] {
                let label = out.fresh_label(&format!("{}__irc__{tag}__{x_name}", p.label));
                out.add_constraint(&label, LinExpr::from_terms([(x, sign), (u, -1.0)]), Sense::Le, 0.0)?;
            }
            aux_u.insert((p.con, x), u);
        }
        let rhs_low = match p.rhs_entry {
            Some((center, radius)) => center - radius,
            None => p.rhs,
        };
        let label = out.fresh_label(&format!("{}__irc", p.label));
        let id = out.add_constraint(&label, lhs, Sense::Le, rhs_low + tolerance_allowance(delta, p.rhs))?;
        provenance.insert(id, p.con);
    }

    Ok(CounterpartArtifacts {
        model: out,
        aux_u,
        aux_v: BTreeMap::new(),
        provenance,
        notes: Vec::new(),
    })
}

/// Symmetric counterpart: per uncertain row
/// `Σ c x + Σ r u + Ω·sqrt(Σ r² v² + r_b²) <= c_b + δ·max{1,|b̄|}` with
/// `-u <= x - v <= u`, `u >= 0`, `v` free and `Ω = sqrt(-2 ln κ)`.
///
/// The cone term is stored as `ε·Ω·sqrt(Σ (r/ε)² v² + (r_b/ε)²)` so that for
/// relative entries its components are the nominal coefficients.
pub fn symmetric_robust_counterpart(
    model: &Model,
    set: &UncertainSet,
    epsilon: f64,
    delta: f64,
    kappa: f64,
) -> Result<CounterpartArtifacts> {
    RobustConfig::new(epsilon, delta, kappa)?;
    let omega = omega_from_kappa(kappa)?;
    let prepared = prepare(model, set, epsilon)?;
    let mut out = copy_nominal(model)?;
    let mut aux_u = BTreeMap::new();
    let mut aux_v = BTreeMap::new();
    let mut provenance = BTreeMap::new();

    let (scale, unit) = if epsilon > 0.0 { (epsilon * omega, epsilon) } else { (omega, 1.0) };
    for p in &prepared {
        let mut lhs = p.center_lhs.clone();
        let mut components = Vec::new();
        for &(x, radius, entry) in &p.coeff_entries {
            let x_name = model.variable(x).name().to_string();
            let u = add_aux(&mut out, "u", &p.label, &x_name, 0.0)?;
            let v = add_aux(&mut out, "v", &p.label, &x_name, f64::NEG_INFINITY)?;
            lhs.add_term(u, radius);
            for (tag, sign) in [("ub", 1.0), ("lb", -1.0)] {
                let label = out.fresh_label(&format!("{}__rc__{tag}__{x_name}", p.label));
                out.add_constraint(
                    &label,
                    LinExpr::from_terms([(x, sign), (v, -sign), (u, -1.0)]),
                    Sense::Le,
                    0.0,
                )?;
            }
            let nominal = model.constraint(p.con)?.lhs().coefficient(x);
            let coef = match entry.distribution {
                Distribution::Bounded { epsilon: None } | Distribution::Uniform if epsilon > 0.0 => nominal,
                _ => radius / unit,
            };
            components.push((v, coef));
            aux_u.insert((p.con, x), u);
            aux_v.insert((p.con, x), v);
        }
        let (rhs_center, constant) = match p.rhs_entry {
            Some((center, radius)) => (center, (radius / unit).powi(2)),
            None => (p.rhs, 0.0),
        };
        let cone = ConeTerm::new(scale, components, constant)?;
        let label = out.fresh_label(&format!("{}__rc", p.label));
        let id = out.add_cone_constraint(
            &label,
            lhs,
            cone,
            Sense::Le,
            rhs_center + tolerance_allowance(delta, p.rhs),
        )?;
        provenance.insert(id, p.con);
    }

    Ok(CounterpartArtifacts {
        model: out,
        aux_u,
        aux_v,
        provenance,
        notes: Vec::new(),
    })
}

pub fn robustify(model: &Model, set: &UncertainSet, mode: Mode, cfg: &RobustConfig) -> Result<CounterpartArtifacts> {
    match mode {
        Mode::Irc => interval_robust_counterpart(model, set, cfg.epsilon, cfg.delta),
        Mode::Rc => symmetric_robust_counterpart(model, set, cfg.epsilon, cfg.delta, cfg.kappa),
    }
}

/// Human-readable listing of the uncertain entries, one per line.
pub fn describe_entries(model: &Model, set: &UncertainSet) -> Vec<String> {
    set.entries()
        .iter()
        .map(|e| {
            let label = model.constraint(e.constraint).map(|c| c.label().to_string()).unwrap_or_default();
            format!("{label} {}({})", target_name(model, e.target), e.distribution)
        })
        .collect()
}
