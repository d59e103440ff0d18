use super::{Model, ObjSense, Sense};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StdSense {
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StdRow {
    /// Dense coefficients over the standard-form columns.
    pub coeffs: Vec<f64>,
    pub sense: StdSense,
    pub rhs: f64,
    /// Index of the originating model constraint; `None` for upper-bound rows.
    pub origin: Option<usize>,
}

/// How one model variable is expressed through nonnegative columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ColumnMap {
    /// `x = offset + col`
    Shifted { col: usize, offset: f64 },
    /// `x = offset - col` (variable with only an upper bound)
    Mirrored { col: usize, offset: f64 },
    /// `x = pos - neg` (free variable)
    Split { pos: usize, neg: usize },
}

/// `max c·y + offset  s.t.  rows, y >= 0`, with every model row normalized
/// to `<=` or `=`. Minimization problems are negated.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardForm {
    pub num_cols: usize,
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub rows: Vec<StdRow>,
    pub integrality: Vec<bool>,
    pub columns: Vec<ColumnMap>,
    /// `+1` when the source model maximizes, `-1` when it minimizes.
    pub objective_sign: f64,
}

impl StandardForm {
    pub fn from_model(model: &Model) -> Result<Self> {
        let bounds: Vec<(f64, f64)> = model
            .variables()
            .iter()
            .map(|v| (v.lower(), v.upper()))
            .collect();
        Self::with_bounds(model, &bounds)
    }

    /// Standard form of `model` with its variable bounds replaced by `bounds`.
    pub fn with_bounds(model: &Model, bounds: &[(f64, f64)]) -> Result<Self> {
        if model.has_cones() {
            return Err(Error::ConeInStandardForm);
        }
        if bounds.len() != model.num_variables() {
            return Err(Error::DimensionMismatch(format!(
                "{} bounds for {} variables",
                bounds.len(),
                model.num_variables()
            )));
        }
        let mut columns = Vec::with_capacity(bounds.len());
        let mut integrality = Vec::new();
        let mut upper_rows: Vec<(usize, f64)> = Vec::new();
        for (var, &(lower, upper)) in model.variables().iter().zip(bounds) {
            let integral = var.kind().is_integral();
            let next = integrality.len();
            if lower.is_finite() {
                columns.push(ColumnMap::Shifted { col: next, offset: lower });
                integrality.push(integral);
                if upper.is_finite() {
                    upper_rows.push((next, upper - lower));
                }
            } else if upper.is_finite() {
                columns.push(ColumnMap::Mirrored { col: next, offset: upper });
                integrality.push(integral);
            } else {
                columns.push(ColumnMap::Split { pos: next, neg: next + 1 });
                integrality.push(integral);
                integrality.push(integral);
            }
        }
        let num_cols = integrality.len();

        let substitute = |expr: &super::LinExpr| -> (Vec<f64>, f64) {
            let mut dense = vec![0.0; num_cols];
            let mut constant = expr.constant_term();
            for &(var, coef) in expr.terms() {
                match columns[var.0] {
                    ColumnMap::Shifted { col, offset } => {
                        dense[col] += coef;
                        constant += coef * offset;
                    }
                    ColumnMap::Mirrored { col, offset } => {
                        dense[col] -= coef;
                        constant += coef * offset;
                    }
                    ColumnMap::Split { pos, neg } => {
                        dense[pos] += coef;
                        dense[neg] -= coef;
                    }
                }
            }
            (dense, constant)
        };

        let mut rows = Vec::with_capacity(model.constraints().len() + upper_rows.len());
        for con in model.constraints() {
            let (coeffs, constant) = substitute(con.lhs());
            let rhs = con.rhs() - constant;
            let row = match con.sense() {
                Sense::Le => StdRow { coeffs, sense: StdSense::Le, rhs, origin: Some(con.id().0) },
                Sense::Ge => StdRow {
                    coeffs: coeffs.into_iter().map(|c| -c).collect(),
                    sense: StdSense::Le,
                    rhs: -rhs,
                    origin: Some(con.id().0),
                },
                Sense::Eq => StdRow { coeffs, sense: StdSense::Eq, rhs, origin: Some(con.id().0) },
            };
            rows.push(row);
        }
        for (col, cap) in upper_rows {
            let mut coeffs = vec![0.0; num_cols];
            coeffs[col] = 1.0;
            rows.push(StdRow { coeffs, sense: StdSense::Le, rhs: cap, origin: None });
        }

        let objective_sign = match model.objective().sense {
            ObjSense::Maximize => 1.0,
            ObjSense::Minimize => -1.0,
        };
        let (obj, constant) = substitute(&model.objective().expr);
        Ok(StandardForm {
            num_cols,
            objective: obj.into_iter().map(|c| objective_sign * c).collect(),
            objective_offset: objective_sign * constant,
            rows,
            integrality,
            columns,
            objective_sign,
        })
    }

    /// Model variable values from standard-form column values.
    pub fn recover(&self, cols: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|map| match *map {
                ColumnMap::Shifted { col, offset } => offset + cols[col],
                ColumnMap::Mirrored { col, offset } => offset - cols[col],
                ColumnMap::Split { pos, neg } => cols[pos] - cols[neg],
            })
            .collect()
    }

    /// Standard-form columns for a point of the original model.
    pub fn map_point(&self, values: &[f64]) -> Vec<f64> {
        let mut cols = vec![0.0; self.num_cols];
        for (map, &x) in self.columns.iter().zip(values) {
            match *map {
                ColumnMap::Shifted { col, offset } => cols[col] = x - offset,
                ColumnMap::Mirrored { col, offset } => cols[col] = offset - x,
                ColumnMap::Split { pos, neg } => {
                    cols[pos] = x.max(0.0);
                    cols[neg] = (-x).max(0.0);
                }
            }
        }
        cols
    }

    /// Maximization-sense objective at `cols`, including the offset.
    pub fn objective_value(&self, cols: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(cols)
            .map(|(c, y)| c * y)
            .sum::<f64>()
            + self.objective_offset
    }

    /// Largest row or sign violation at `cols`.
    pub fn max_violation(&self, cols: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|row| {
            let lhs: f64 = row.coeffs.iter().zip(cols).map(|(a, y)| a * y).sum();
            match row.sense {
                StdSense::Le => (lhs - row.rhs).max(0.0),
                StdSense::Eq => (lhs - row.rhs).abs(),
            }
        });
        let signs = cols.iter().map(|&y| (-y).max(0.0));
        rows.chain(signs).fold(0.0, f64::max)
    }
}
