//! Robust versions of batch sequencing rows in which a processing time
//! `α·wv + β·B` appears with one uncertain parameter.
//!
//! The nominal rows are
//!
//! ```text
//! Ts(n+1) - Tf(n) <= α wv(n) + β B(n)       + H (2 - wv(n) - wv(n+1))
//! Ts(n+1) - Ts(n) <= α wv(n) + β B(n) + tcl + H (2 - wv(n) - wv(n+1))
//! ```
//!
//! The robust rows use lowered coefficients and an extra slack `δ2` chosen
//! so that `δ + δ2` equals the full width of the coefficient's range.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ConId, LinExpr, Model, Sense, VarId};
use crate::uncertainty::normal_lambda;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingConstraintTemplate {
    /// Fixed processing time (hours).
    pub alpha: f64,
    /// Processing time per unit of batch size (hours per unit).
    pub beta: f64,
    pub horizon: f64,
    /// Clean-up time before the next task on the same unit.
    pub changeover: f64,
    pub next_start: VarId,
    pub start: VarId,
    /// When present, the finish-time row is emitted as well.
    pub finish: Option<VarId>,
    pub assign_current: VarId,
    pub assign_next: VarId,
    pub batch: VarId,
}

impl TimingConstraintTemplate {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("horizon", self.horizon),
            ("changeover", self.changeover),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// Which coefficient carries the uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitBasis {
    Duration,
    Rate,
}

/// Square-root argument in the normal-case slack: the standard deviation
/// (matching the coefficient multipliers) or the tolerance δ as printed in
/// some sources.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaSplitReading {
    #[default]
    Sigma,
    Delta,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub label: String,
    pub lhs: LinExpr,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustTiming {
    pub rows: Vec<TimingRow>,
    pub alpha: f64,
    pub beta: f64,
    pub delta2: f64,
    pub notes: Vec<String>,
}

impl RobustTiming {
    /// Appends the rows (as `<=` rows) to `model` under `prefix`.
    pub fn apply(&self, model: &mut Model, prefix: &str) -> Result<Vec<ConId>> {
        self.rows
            .iter()
            .map(|row| {
                let label = model.fresh_label(&format!("{prefix}__{}", row.label));
                model.add_constraint(&label, row.lhs.clone(), Sense::Le, row.rhs)
            })
            .collect()
    }
}

fn emit(t: &TimingConstraintTemplate, alpha: f64, beta: f64, delta2: f64) -> RobustTiming {
    // Ts(n+1) - prev - α wv - β B + H wv + H wv' <= 2H + extra + δ2
    let row = |prev: VarId, extra: f64| {
        let mut lhs = LinExpr::from_terms([(t.next_start, 1.0), (prev, -1.0), (t.batch, -beta)]);
        lhs.add_term(t.assign_current, t.horizon - alpha);
        lhs.add_term(t.assign_next, t.horizon);
        (lhs, 2.0 * t.horizon + extra + delta2)
    };
    let mut rows = Vec::new();
    if let Some(finish) = t.finish {
        let (lhs, rhs) = row(finish, 0.0);
        rows.push(TimingRow { label: "finish".into(), lhs, rhs });
    }
    let (lhs, rhs) = row(t.start, t.changeover);
    rows.push(TimingRow { label: "start".into(), lhs, rhs });
    let notes = if delta2 < 0.0 {
        vec![format!("delta2 = {delta2} is negative and tightens the rows")]
    } else {
        Vec::new()
    };
    RobustTiming { rows, alpha, beta, delta2, notes }
}

fn check_eps_delta(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon >= 0.0 && delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {epsilon} and delta {delta} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// Relative box of level ε on both coefficients; `δ2 = 2εα - δ` (duration
/// basis) or `2εβ - δ` (rate basis).
pub fn robust_timing_bounded(
    template: &TimingConstraintTemplate,
    epsilon: f64,
    delta: f64,
    basis: SplitBasis,
) -> Result<RobustTiming> {
    template.validate()?;
    check_eps_delta(epsilon, delta)?;
    let width = match basis {
        SplitBasis::Duration => 2.0 * epsilon * template.alpha,
        SplitBasis::Rate => 2.0 * epsilon * template.beta,
    };
    Ok(emit(
        template,
        (1.0 - epsilon) * template.alpha,
        (1.0 - epsilon) * template.beta,
        width - delta,
    ))
}

/// Explicit range `[low, high]` for the coefficient named by `basis`; the
/// other coefficient is kept nominal. `δ2 = (high - low) - δ`.
pub fn robust_timing_bounded_range(
    template: &TimingConstraintTemplate,
    low: f64,
    high: f64,
    delta: f64,
    basis: SplitBasis,
) -> Result<RobustTiming> {
    template.validate()?;
    check_eps_delta(0.0, delta)?;
    if !(low.is_finite() && high.is_finite() && 0.0 <= low && low <= high) {
        return Err(Error::InvalidParameter(format!("range [{low}, {high}] must satisfy 0 <= low <= high")));
    }
    let (alpha, beta) = match basis {
        SplitBasis::Duration => (low, template.beta),
        SplitBasis::Rate => (template.alpha, low),
    };
    Ok(emit(template, alpha, beta, (high - low) - delta))
}

/// Normal perturbation with mean `mu` and deviation `sigma`: both
/// coefficients are multiplied by `1 - ε(λ√σ - μ)` and
/// `δ2 = 2ε(λ√s - μ) - δ` where `s` is σ or δ per `reading`.
pub fn robust_timing_normal(
    template: &TimingConstraintTemplate,
    mu: f64,
    sigma: f64,
    epsilon: f64,
    delta: f64,
    kappa: f64,
    reading: DeltaSplitReading,
) -> Result<RobustTiming> {
    template.validate()?;
    check_eps_delta(epsilon, delta)?;
    if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("need finite mu and sigma > 0 (got {mu}, {sigma})")));
    }
    let lambda = normal_lambda(kappa)?;
    let shift = lambda * sigma.sqrt() - mu;
    let multiplier = 1.0 - epsilon * shift;
    let split = match reading {
        DeltaSplitReading::Sigma => shift,
        DeltaSplitReading::Delta => lambda * delta.sqrt() - mu,
    };
    Ok(emit(
        template,
        multiplier * template.alpha,
        multiplier * template.beta,
        2.0 * epsilon * split - delta,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ProcessingSpread {
    Normal { mean: f64, std_dev: f64 },
    Range { low: f64, high: f64 },
}

/// Measured spread of one uncertain processing parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProcessingUncertainty {
    pub tasks: &'static str,
    pub units: &'static str,
    pub nominal: f64,
    pub spread: ProcessingSpread,
}

/// Plant data for the uncertain processing durations and rates of the
/// bundled batch-scheduling case.
pub const PROCESSING_UNCERTAINTIES: &[ProcessingUncertainty] = &[
    ProcessingUncertainty { tasks: "1", units: "4", nominal: 9.5, spread: ProcessingSpread::Normal { mean: 9.912, std_dev: 0.523 } },
    ProcessingUncertainty { tasks: "7,10,13", units: "1-3", nominal: 6.09, spread: ProcessingSpread::Normal { mean: 6.153, std_dev: 0.152 } },
    ProcessingUncertainty { tasks: "7,10,13", units: "4", nominal: 11.1, spread: ProcessingSpread::Range { low: 10.1, high: 11.3 } },
    ProcessingUncertainty { tasks: "20", units: "3", nominal: 8.38, spread: ProcessingSpread::Range { low: 8.00, high: 10.42 } },
    ProcessingUncertainty { tasks: "2", units: "7", nominal: 0.95, spread: ProcessingSpread::Normal { mean: 0.9611, std_dev: 0.112 } },
    ProcessingUncertainty { tasks: "8,11,14,16", units: "5-6", nominal: 0.60, spread: ProcessingSpread::Range { low: 0.344, high: 0.853 } },
    ProcessingUncertainty { tasks: "3,6", units: "9", nominal: 12.8, spread: ProcessingSpread::Range { low: 10.5, high: 19.3 } },
    ProcessingUncertainty { tasks: "9,12,15,17", units: "9", nominal: 13.8, spread: ProcessingSpread::Range { low: 12.0, high: 16.3 } },
    ProcessingUncertainty { tasks: "9,12,15,17", units: "10", nominal: 12.9, spread: ProcessingSpread::Normal { mean: 12.100, std_dev: 0.760 } },
];

/// Applies the matching robust transformation to a template whose duration
/// coefficient is `row.nominal`.
pub fn robust_timing_for(
    row: &ProcessingUncertainty,
    template: &TimingConstraintTemplate,
    epsilon: f64,
    delta: f64,
    kappa: f64,
) -> Result<RobustTiming> {
    let t = TimingConstraintTemplate { alpha: row.nominal, ..template.clone() };
    match row.spread {
        ProcessingSpread::Normal { mean, std_dev } => {
            robust_timing_normal(&t, mean, std_dev, epsilon, delta, kappa, DeltaSplitReading::Sigma)
        }
        ProcessingSpread::Range { low, high } => robust_timing_bounded_range(&t, low, high, delta, SplitBasis::Duration),
    }
}

/// Model with the six variables a template refers to, for tests and demos.
pub fn template_model(alpha: f64, beta: f64, horizon: f64, changeover: f64) -> Result<(Model, TimingConstraintTemplate)> {
    let mut m = Model::new();
    let start = m.add_continuous("ts_n", 0.0, horizon)?;
    let finish = m.add_continuous("tf_n", 0.0, horizon)?;
    let next_start = m.add_continuous("ts_next", 0.0, horizon)?;
    let assign_current = m.add_binary("wv_n")?;
    let assign_next = m.add_binary("wv_next")?;
    let batch = m.add_continuous("b_n", 0.0, f64::INFINITY)?;
    let t = TimingConstraintTemplate {
        alpha,
        beta,
        horizon,
        changeover,
        next_start,
        start,
        finish: Some(finish),
        assign_current,
        assign_next,
        batch,
    };
    Ok((m, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template(alpha: f64, beta: f64) -> TimingConstraintTemplate {
        template_model(alpha, beta, 24.0, 0.5).unwrap().1
    }

    #[test]
    fn bounded_examples() {
        let r = robust_timing_bounded(&template(7.0, 0.1), 0.0, 0.3, SplitBasis::Duration).unwrap();
        assert_eq!(r.alpha, 7.0);
        assert_eq!(r.delta2, -0.3);
        assert!(!r.notes.is_empty());

        let r = robust_timing_bounded(&template(10.0, 0.1), 0.05, 0.5, SplitBasis::Duration).unwrap();
        assert!((r.alpha - 9.5).abs() < 1e-12);
        assert!((r.delta2 - 0.5).abs() < 1e-12);
        assert_eq!(r.rows.len(), 2);

        let r = robust_timing_bounded_range(&template(9.5, 0.0), 8.00, 10.42, 1.0, SplitBasis::Duration).unwrap();
        assert!((r.delta2 - 1.42).abs() < 1e-12);
        assert_eq!(r.alpha, 8.0);
    }

    #[test]
    fn normal_examples() {
        let r = robust_timing_normal(&template(6.0, 0.2), 0.3, 0.4, 0.0, 0.2, 0.05, DeltaSplitReading::Sigma).unwrap();
        assert_eq!((r.alpha, r.beta, r.delta2), (6.0, 0.2, -0.2));

        let r = robust_timing_normal(&template(6.0, 0.2), 0.0, 0.4, 0.1, 0.2, 0.5, DeltaSplitReading::Sigma).unwrap();
        assert_eq!((r.alpha, r.delta2), (6.0, -0.2));

        let r = robust_timing_normal(&template(9.5, 0.0), 9.912, 0.523, 0.05, 0.0, 0.05, DeltaSplitReading::Sigma).unwrap();
        let lambda = 1.6448536269514722;
        let multiplier = 1.0 - 0.05 * (lambda * 0.523f64.sqrt() - 9.912);
        assert!((r.alpha - multiplier * 9.5).abs() < 1e-9);
    }

    #[test]
    fn rows_bind_exactly_at_nominal_sequence() {
        // both tasks assigned, batch 10: Ts(n+1) - Tf(n) <= α + 10β + δ2
        let (mut m, t) = template_model(4.0, 0.1, 24.0, 0.5).unwrap();
        let r = robust_timing_bounded(&t, 0.1, 0.2, SplitBasis::Duration).unwrap();
        let ids = r.apply(&mut m, "op1").unwrap();
        let mut x = vec![0.0; m.num_variables()];
        x[t.assign_current.index()] = 1.0;
        x[t.assign_next.index()] = 1.0;
        x[t.batch.index()] = 10.0;
        x[t.finish.unwrap().index()] = 3.0;
        x[t.start.index()] = 1.0;
        let gap = r.alpha + 10.0 * r.beta + r.delta2;
        x[t.next_start.index()] = 3.0 + gap;
        let finish_row = m.constraint(ids[0]).unwrap();
        assert!(finish_row.residual(&x).abs() < 1e-12);
        // releasing one assignment relaxes the row by H
        x[t.assign_next.index()] = 0.0;
        assert!((finish_row.residual(&x) + 24.0).abs() < 1e-12);
    }

    #[test]
    fn table_rows_round_trip() {
        let t = template(1.0, 0.0);
        for row in PROCESSING_UNCERTAINTIES {
            let r = robust_timing_for(row, &t, 0.05, 0.5, 0.05).unwrap();
            assert!(r.delta2.is_finite());
        }
    }

    #[test]
    fn rejects_negative_template_fields() {
        let mut t = template(1.0, 0.0);
        t.horizon = -1.0;
        assert!(robust_timing_bounded(&t, 0.1, 0.0, SplitBasis::Duration).is_err());
    }
}
