//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use robustcounter::model::{LinExpr, Model, ObjSense, Sense, VarId};
use robustcounter::uncertainty::{Distribution, Target, UncertainSet};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub const SITE_FIXTURES: &[&str] = &["sitesel_one_site", "sitesel_small", "sitesel_demo"];

/// `(model, annotations)` pairs under `fixtures/models`.
pub const ANNOTATED_MODELS: &[(&str, &str)] = &[
    ("models/production.txt", "models/production.unc"),
    ("models/production.txt", "models/production_scaled.unc"),
    ("models/single_row.txt", "models/single_row.unc"),
];

/// True when every entry's width is proportional to the global ε, so the
/// set vanishes at ε = 0. Explicit ranges and per-entry levels do not.
pub fn scales_with_epsilon(set: &UncertainSet) -> bool {
    set.entries()
        .iter()
        .all(|e| matches!(e.distribution, Distribution::Bounded { epsilon: None } | Distribution::Uniform))
}

pub const PLAIN_MODELS: &[&str] = &[
    "models/demo_lp.txt",
    "models/infeasible.txt",
    "models/production.txt",
    "models/single_row.txt",
];

pub fn read_model(rel: &str) -> Model {
    let text = std::fs::read_to_string(fixture(rel)).unwrap();
    robustcounter::model::import_text(&text).unwrap()
}

pub fn read_annotations(rel: &str, model: &Model) -> UncertainSet {
    let text = std::fs::read_to_string(fixture(rel)).unwrap();
    UncertainSet::parse(&text, model).unwrap()
}

/// Small integer program together with the raw data the oracles need.
#[derive(Clone, Debug)]
pub struct RandomIlp {
    pub model: Model,
    pub upper: Vec<i64>,
    pub objective: Vec<f64>,
    /// `(coefficients, rhs)` per `<=` row.
    pub rows: Vec<(Vec<f64>, f64)>,
}

/// Maximization over integers in `[0, upper_j]` with `<=` rows whose
/// coefficients are small integers.
pub fn random_ilp(rng: &mut impl Rng, max_vars: usize, max_rows: usize, max_upper: i64) -> RandomIlp {
    let n = rng.random_range(1..=max_vars);
    let m = rng.random_range(1..=max_rows);
    let mut model = Model::new();
    let mut upper = Vec::new();
    let vars: Vec<VarId> = (0..n)
        .map(|j| {
            let u = rng.random_range(1..=max_upper);
            upper.push(u);
            model.add_integer(&format!("x{j}"), 0.0, u as f64).unwrap()
        })
        .collect();
    let objective: Vec<f64> = (0..n).map(|_| rng.random_range(1..=6) as f64).collect();
    let mut rows = Vec::new();
    for i in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-2..=5) as f64).collect();
        let rhs = rng.random_range(3..=15) as f64;
        model
            .add_constraint(
                &format!("r{i}"),
                LinExpr::from_terms(vars.iter().zip(&coeffs).map(|(&v, &c)| (v, c))),
                Sense::Le,
                rhs,
            )
            .unwrap();
        rows.push((coeffs, rhs));
    }
    model
        .set_objective(ObjSense::Maximize, LinExpr::from_terms(vars.iter().zip(&objective).map(|(&v, &c)| (v, c))))
        .unwrap();
    RandomIlp { model, upper, objective, rows }
}

/// Picks up to `max_entries` uncertain entries among nonzero coefficients and
/// right-hand sides, with a mix of interval families.
pub fn random_interval_set(rng: &mut impl Rng, ilp: &RandomIlp, max_entries: usize) -> UncertainSet {
    let mut slots = Vec::new();
    for (i, (coeffs, _)) in ilp.rows.iter().enumerate() {
        for (j, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                slots.push((i, Some(j)));
            }
        }
        slots.push((i, None));
    }
    let k = rng.random_range(1..=max_entries.min(slots.len()));
    let mut set = UncertainSet::new();
    for _ in 0..k {
        let pick = slots.swap_remove(rng.random_range(0..slots.len()));
        let con = ilp.model.constraint_by_label(&format!("r{}", pick.0)).unwrap();
        let nominal = match pick.1 {
            Some(j) => ilp.rows[pick.0].0[j],
            None => ilp.rows[pick.0].1,
        };
        let dist = match rng.random_range(0..4) {
            0 => Distribution::Bounded { epsilon: None },
            1 => Distribution::Bounded { epsilon: Some([0.05, 0.15, 0.3][rng.random_range(0..3)]) },
            2 => Distribution::Uniform,
            _ => {
                let below = rng.random_range(0..=4) as f64 * 0.25;
                let above = rng.random_range(0..=4) as f64 * 0.25;
                Distribution::BoundedRange { low: nominal - below, high: nominal + above }
            }
        };
        let target = match pick.1 {
            Some(j) => Target::Var(ilp.model.var_by_name(&format!("x{j}")).unwrap()),
            None => Target::Rhs,
        };
        set.add(con, target, dist).unwrap();
    }
    set
}

/// Interval `[low, high]` of an entry, straight from the family definitions.
pub fn oracle_interval(nominal: f64, dist: &Distribution, epsilon: f64) -> (f64, f64) {
    match dist {
        Distribution::Bounded { epsilon: Some(e) } => (nominal - e * nominal.abs(), nominal + e * nominal.abs()),
        Distribution::Bounded { epsilon: None } | Distribution::Uniform => {
            (nominal - epsilon * nominal.abs(), nominal + epsilon * nominal.abs())
        }
        Distribution::BoundedRange { low, high } => (*low, *high),
        other => panic!("no interval for {other:?}"),
    }
}

/// Every integer point of the box `∏ [0, upper_j]`.
pub fn integer_points(upper: &[i64]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for &u in upper {
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                (0..=u).map(move |v| {
                    let mut q = p.clone();
                    q.push(v as f64);
                    q
                })
            })
            .collect();
    }
    out
}

/// Robust optimum by enumerating every integer point and, per row, every
/// corner of that row's uncertain data. Rows are independent because the
/// uncertainty box is a product, so per-row corners cover all corners.
/// `None` when no point is robust feasible.
pub fn brute_force_robust(ilp: &RandomIlp, set: &UncertainSet, epsilon: f64, delta: f64) -> Option<f64> {
    let n = ilp.upper.len();
    // per row: entries as (column or None for rhs, low, high)
    let row_entries: Vec<Vec<(Option<usize>, f64, f64)>> = ilp
        .rows
        .iter()
        .enumerate()
        .map(|(i, (coeffs, rhs))| {
            let con = ilp.model.constraint_by_label(&format!("r{i}")).unwrap();
            set.entries()
                .iter()
                .filter(|e| e.constraint == con)
                .map(|e| match e.target {
                    Target::Var(v) => {
                        let (lo, hi) = oracle_interval(coeffs[v.index()], &e.distribution, epsilon);
                        (Some(v.index()), lo, hi)
                    }
                    Target::Rhs => {
                        let (lo, hi) = oracle_interval(*rhs, &e.distribution, epsilon);
                        (None, lo, hi)
                    }
                })
                .collect()
        })
        .collect();

    let mut best: Option<f64> = None;
    for x in integer_points(&ilp.upper) {
        let feasible = ilp.rows.iter().zip(&row_entries).all(|((coeffs, rhs), entries)| {
            let nominal: f64 = coeffs.iter().zip(&x).map(|(a, v)| a * v).sum();
            if nominal > rhs + 1e-9 {
                return false;
            }
            let allowance = delta * rhs.abs().max(1.0);
            (0u32..1 << entries.len()).all(|mask| {
                let mut a = coeffs.clone();
                let mut b = *rhs;
                for (k, &(col, lo, hi)) in entries.iter().enumerate() {
                    let v = if mask >> k & 1 == 1 { hi } else { lo };
                    match col {
                        Some(j) => a[j] = v,
                        None => b = v,
                    }
                }
                let lhs: f64 = (0..n).map(|j| a[j] * x[j]).sum();
                lhs <= b + allowance + 1e-9
            })
        });
        if feasible {
            let obj: f64 = ilp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            best = Some(best.map_or(obj, |b: f64| b.max(obj)));
        }
    }
    best
}

/// Rows as `(coefficients, sense, rhs)`.
pub type DenseRows = Vec<(Vec<f64>, Sense, f64)>;

/// Binary maximization with integer data.
pub fn random_binary_model(rng: &mut impl Rng, max_vars: usize, max_rows: usize) -> (Model, Vec<f64>, DenseRows) {
    let n = rng.random_range(1..=max_vars);
    let m = rng.random_range(1..=max_rows);
    let mut model = Model::new();
    let vars: Vec<VarId> = (0..n).map(|j| model.add_binary(&format!("b{j}")).unwrap()).collect();
    let objective: Vec<f64> = (0..n).map(|_| rng.random_range(-4..=9) as f64).collect();
    let mut rows = Vec::new();
    for i in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-3..=6) as f64).collect();
        let sense = match rng.random_range(0..6) {
            0 => Sense::Ge,
            1 => Sense::Eq,
            _ => Sense::Le,
        };
        let rhs = rng.random_range(-2..=12) as f64;
        model
            .add_constraint(
                &format!("c{i}"),
                LinExpr::from_terms(vars.iter().zip(&coeffs).map(|(&v, &c)| (v, c))),
                sense,
                rhs,
            )
            .unwrap();
        rows.push((coeffs, sense, rhs));
    }
    model
        .set_objective(ObjSense::Maximize, LinExpr::from_terms(vars.iter().zip(&objective).map(|(&v, &c)| (v, c))))
        .unwrap();
    (model, objective, rows)
}

pub fn satisfies(coeffs: &[f64], sense: Sense, rhs: f64, x: &[f64]) -> bool {
    let lhs: f64 = coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
    match sense {
        Sense::Le => lhs <= rhs + 1e-9,
        Sense::Ge => lhs >= rhs - 1e-9,
        Sense::Eq => (lhs - rhs).abs() <= 1e-9,
    }
}

/// Exhaustive optimum over `{0,1}^n`.
pub fn brute_force_binary(objective: &[f64], rows: &[(Vec<f64>, Sense, f64)]) -> Option<f64> {
    let n = objective.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..1 << n {
        let x: Vec<f64> = (0..n).map(|j| (mask >> j & 1) as f64).collect();
        if rows.iter().all(|(c, s, b)| satisfies(c, *s, *b, &x)) {
            let obj: f64 = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            best = Some(best.map_or(obj, |b: f64| b.max(obj)));
        }
    }
    best
}
