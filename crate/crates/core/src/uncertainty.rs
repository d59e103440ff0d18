//! Distributions of uncertain data and the scalar deviation machinery:
//! cone weight from reliability, normal quantiles, and integer tail
//! quantiles for count distributions.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{ConId, Model, VarId};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    /// Relative box `|ã - ā| <= ε|ā|`; `epsilon` overrides the global level.
    Bounded { epsilon: Option<f64> },
    /// Explicit interval for the true value.
    BoundedRange { low: f64, high: f64 },
    Normal { mean: f64, std_dev: f64 },
    /// Perturbation uniform on `[-1, 1]`.
    Uniform,
    Poisson { mean: f64 },
    Binomial { trials: u64, prob: f64 },
    Discrete { values: Vec<f64>, probs: Vec<f64> },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        match self {
            Distribution::Bounded { epsilon: Some(e) } if !(e.is_finite() && *e >= 0.0) => {
                bad(format!("bounded level {e} must be >= 0"))
            }
            Distribution::BoundedRange { low, high }
                if !(low.is_finite() && high.is_finite() && low <= high) =>
            {
                bad(format!("range [{low}, {high}] must satisfy low <= high"))
            }
            Distribution::Normal { mean, std_dev } if !(mean.is_finite() && *std_dev > 0.0 && std_dev.is_finite()) => {
                bad(format!("normal needs finite mean and sigma > 0 (got {mean}, {std_dev})"))
            }
            Distribution::Poisson { mean } if !(*mean > 0.0 && mean.is_finite()) => {
                bad(format!("poisson mean {mean} must be > 0"))
            }
            Distribution::Binomial { prob, .. } if !(0.0..=1.0).contains(prob) => {
                bad(format!("binomial probability {prob} outside [0, 1]"))
            }
            Distribution::Discrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return bad("discrete needs matching, nonempty values and probabilities".into());
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("discrete support values must be finite".into());
                }
                if probs.iter().any(|p| !(*p >= 0.0)) {
                    return bad("discrete probabilities must be nonnegative".into());
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad(format!("discrete probabilities sum to {total}, not 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Bounded { .. } => "bounded",
            Distribution::BoundedRange { .. } => "range",
            Distribution::Normal { .. } => "normal",
            Distribution::Uniform => "uniform",
            Distribution::Poisson { .. } => "poisson",
            Distribution::Binomial { .. } => "binomial",
            Distribution::Discrete { .. } => "discrete",
        }
    }

    /// Whether the realization stays inside a finite interval (the families
    /// usable for worst-case counterparts and corner enumeration).
    pub fn has_bounded_support(&self) -> bool {
        matches!(
            self,
            Distribution::Bounded { .. } | Distribution::BoundedRange { .. } | Distribution::Uniform
        )
    }

    /// Parses `name arg arg ...` as written inside an annotation's parentheses.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.split_whitespace();
        let name = parts.next().unwrap_or("");
        let args: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::InvalidDistribution(format!("`{p}` is not a number")))
            })
            .collect::<Result<_>>()?;
        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidDistribution(format!(
                    "`{name}` takes {n} argument(s), got {}",
                    args.len()
                )))
            }
        };
        let dist = match name {
            "bounded" => match args.len() {
                0 => Distribution::Bounded { epsilon: None },
                1 => Distribution::Bounded { epsilon: Some(args[0]) },
                _ => return Err(Error::InvalidDistribution("`bounded` takes at most 1 argument".into())),
            },
            "range" | "bounded_range" => {
                arity(2)?;
                Distribution::BoundedRange { low: args[0], high: args[1] }
            }
            "normal" => {
                arity(2)?;
                Distribution::Normal { mean: args[0], std_dev: args[1] }
            }
            "uniform" => {
                arity(0)?;
                Distribution::Uniform
            }
            "poisson" => {
                arity(1)?;
                Distribution::Poisson { mean: args[0] }
            }
            "binomial" => {
                arity(2)?;
                if !(args[0] >= 0.0 && args[0].fract() == 0.0) {
                    return Err(Error::InvalidDistribution("binomial trials must be a nonnegative integer".into()));
                }
                Distribution::Binomial { trials: args[0] as u64, prob: args[1] }
            }
            "discrete" => {
                if args.is_empty() || !args.len().is_multiple_of(2) {
                    return Err(Error::InvalidDistribution(
                        "`discrete` takes value/probability pairs".into(),
                    ));
                }
                Distribution::Discrete {
                    values: args.iter().step_by(2).copied().collect(),
                    probs: args.iter().skip(1).step_by(2).copied().collect(),
                }
            }
            other => return Err(Error::InvalidDistribution(format!("unknown distribution `{other}`"))),
        };
        dist.validate()?;
        Ok(dist)
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Bounded { epsilon: None } => write!(f, "bounded"),
            Distribution::Bounded { epsilon: Some(e) } => write!(f, "bounded {e:?}"),
            Distribution::BoundedRange { low, high } => write!(f, "range {low:?} {high:?}"),
            Distribution::Normal { mean, std_dev } => write!(f, "normal {mean:?} {std_dev:?}"),
            Distribution::Uniform => write!(f, "uniform"),
            Distribution::Poisson { mean } => write!(f, "poisson {mean:?}"),
            Distribution::Binomial { trials, prob } => write!(f, "binomial {trials} {prob:?}"),
            Distribution::Discrete { values, probs } => {
                write!(f, "discrete")?;
                for (v, p) in values.iter().zip(probs) {
                    write!(f, " {v:?} {p:?}")?;
                }
                Ok(())
            }
        }
    }
}

/// Uncertainty level ε, infeasibility tolerance δ, reliability level κ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RobustConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub kappa: f64,
}

impl RobustConfig {
    pub fn new(epsilon: f64, delta: f64, kappa: f64) -> Result<Self> {
        let cfg = RobustConfig { epsilon, delta, kappa };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `(0, 0, 1)`: every counterpart collapses to the nominal problem.
    pub fn nominal() -> Self {
        RobustConfig { epsilon: 0.0, delta: 0.0, kappa: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon {} must be >= 0", self.epsilon)));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("delta {} must be >= 0", self.delta)));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::InvalidParameter(format!("kappa {} must lie in (0, 1]", self.kappa)));
        }
        Ok(())
    }
}

/// Cone weight Ω with `κ = exp(-Ω²/2)`, i.e. `Ω = sqrt(-2 ln κ)`.
pub fn omega_from_kappa(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::InvalidParameter(format!("kappa {kappa} must lie in (0, 1]")));
    }
    Ok((-2.0 * kappa.ln()).max(0.0).sqrt())
}

/// Standard-normal quantile at `1 - κ`.
pub fn normal_lambda(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidParameter(format!("kappa {kappa} must lie in (0, 1)")));
    }
    let std = Normal::standard();
    // evaluate in the tail that keeps the argument away from 1
    Ok(if kappa <= 0.5 {
        -std.inverse_cdf(kappa)
    } else {
        std.inverse_cdf(1.0 - kappa)
    })
}

fn log_space_pmf(first: f64, len: usize, mut step: impl FnMut(usize) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut lp = first;
    for k in 0..len {
        out.push(lp.exp());
        lp += step(k);
    }
    out
}

/// Probability mass on `0, 1, ...` up to where the remaining tail is negligible.
fn poisson_pmf(mean: f64) -> Vec<f64> {
    let len = (mean + 40.0 * mean.sqrt() + 40.0).ceil() as usize;
    let ln_mean = mean.ln();
    log_space_pmf(-mean, len, |k| ln_mean - ((k + 1) as f64).ln())
}

fn binomial_pmf(trials: u64, prob: f64) -> Vec<f64> {
    let n = trials as usize;
    if prob <= 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    if prob >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    let odds = prob.ln() - (-prob).ln_1p();
    log_space_pmf(trials as f64 * (-prob).ln_1p(), n + 1, |k| {
        ((n - k) as f64).ln() - ((k + 1) as f64).ln() + odds
    })
}

/// Support points (ascending) and `P(X > point)` for each.
fn support_and_tails(dist: &Distribution) -> Result<(Vec<f64>, Vec<f64>)> {
    let (support, pmf): (Vec<f64>, Vec<f64>) = match dist {
        Distribution::Poisson { mean } => {
            let pmf = poisson_pmf(*mean);
            ((0..pmf.len()).map(|k| k as f64).collect(), pmf)
        }
        Distribution::Binomial { trials, prob } => {
            let pmf = binomial_pmf(*trials, *prob);
            ((0..pmf.len()).map(|k| k as f64).collect(), pmf)
        }
        Distribution::Discrete { values, probs } => {
            let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(probs.iter().copied()).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut merged: Vec<(f64, f64)> = Vec::new();
            for (v, p) in pairs {
                match merged.last_mut() {
                    Some((lv, lp)) if *lv == v => *lp += p,
                    _ => merged.push((v, p)),
                }
            }
            merged.into_iter().unzip()
        }
        other => {
            return Err(Error::UnsupportedDistribution(format!(
                "`{}` has no integer tail quantile",
                other.name()
            )))
        }
    };
    // suffix sums avoid the cancellation in 1 - CDF
    let mut tails = vec![0.0; pmf.len()];
    let mut acc = 0.0;
    for k in (0..pmf.len()).rev() {
        tails[k] = acc;
        acc += pmf[k];
    }
    Ok((support, tails))
}

/// Smallest support point `t` with `P(X > t) <= κ` (strict tail convention).
pub fn discrete_deviation(dist: &Distribution, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::InvalidParameter(format!("kappa {kappa} must lie in (0, 1]")));
    }
    dist.validate()?;
    let (support, tails) = support_and_tails(dist)?;
    support
        .iter()
        .zip(&tails)
        .find(|(_, &tail)| tail <= kappa)
        .map(|(&t, _)| t)
        .ok_or_else(|| Error::InvalidParameter("tail never drops below kappa".into()))
}

/// Interval of admissible true values for an uncertain coefficient with
/// nominal value `nominal`. `epsilon` is the global uncertainty level.
pub fn bounded_interval(nominal: f64, dist: &Distribution, epsilon: f64) -> Result<(f64, f64)> {
    if !nominal.is_finite() {
        return Err(Error::InvalidParameter(format!("nominal value {nominal} must be finite")));
    }
    dist.validate()?;
    let eps = match dist {
        Distribution::Bounded { epsilon: Some(e) } => *e,
        Distribution::Bounded { epsilon: None } | Distribution::Uniform => epsilon,
        Distribution::BoundedRange { low, high } => return Ok((*low, *high)),
        other => {
            return Err(Error::UnsupportedDistribution(format!(
                "`{}` has unbounded support",
                other.name()
            )))
        }
    };
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon {eps} must be >= 0")));
    }
    let half = eps * nominal.abs();
    Ok((nominal - half, nominal + half))
}

/// Deviation of a single uncertain coefficient that is exceeded with
/// probability at most κ: `ε|ā|` times the `(1-κ)`-quantile of the
/// perturbation (1 for the bounded box, `μ + λσ` for a normal perturbation).
pub fn deviation_radius(nominal: f64, dist: &Distribution, epsilon: f64, kappa: f64) -> Result<f64> {
    dist.validate()?;
    let scale = epsilon * nominal.abs();
    Ok(match dist {
        Distribution::Bounded { .. } | Distribution::BoundedRange { .. } => {
            let (lo, hi) = bounded_interval(nominal, dist, epsilon)?;
            (hi - lo) / 2.0
        }
        Distribution::Uniform => scale * (1.0 - 2.0 * kappa).max(0.0),
        Distribution::Normal { mean, std_dev } => scale * (mean + normal_lambda(kappa)? * std_dev),
        _ => scale * discrete_deviation(dist, kappa)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Target {
    Var(VarId),
    Rhs,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UncertainEntry {
    pub constraint: ConId,
    pub target: Target,
    pub distribution: Distribution,
}

/// Uncertain coefficients and right-hand sides, grouped by constraint.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct UncertainSet {
    entries: Vec<UncertainEntry>,
}

impl UncertainSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: UncertainEntry) -> Result<()> {
        entry.distribution.validate()?;
        if self
            .entries
            .iter()
            .any(|e| e.constraint == entry.constraint && e.target == entry.target)
        {
            return Err(Error::DuplicateUncertainEntry {
                constraint: format!("#{}", entry.constraint.index()),
                target: match entry.target {
                    Target::Var(v) => format!("var #{}", v.index()),
                    Target::Rhs => "RHS".into(),
                },
            });
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn add(&mut self, constraint: ConId, target: Target, distribution: Distribution) -> Result<()> {
        self.push(UncertainEntry { constraint, target, distribution })
    }

    pub fn entries(&self) -> &[UncertainEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Constraints carrying at least one uncertain entry, in model order.
    pub fn constraints(&self) -> Vec<ConId> {
        let mut ids: Vec<ConId> = self.entries.iter().map(|e| e.constraint).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn for_constraint(&self, con: ConId) -> impl Iterator<Item = &UncertainEntry> {
        self.entries.iter().filter(move |e| e.constraint == con)
    }

    pub fn rhs_entry(&self, con: ConId) -> Option<&UncertainEntry> {
        self.for_constraint(con).find(|e| e.target == Target::Rhs)
    }

    pub fn validate(&self, model: &Model) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            let con = model.constraint(e.constraint)?;
            if let Target::Var(v) = e.target {
                if v.index() >= model.num_variables() {
                    return Err(Error::UnknownVariable(v.index()));
                }
            }
            if !seen.insert((e.constraint, e.target)) {
                return Err(Error::DuplicateUncertainEntry {
                    constraint: con.label().to_string(),
                    target: target_name(model, e.target),
                });
            }
            e.distribution.validate()?;
        }
        Ok(())
    }

    /// Parses an annotation document against `model`:
    /// one `constraint_label target(dist args)` per line, `target` being a
    /// variable name or `RHS`. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, model: &Model) -> Result<Self> {
        let mut set = UncertainSet::new();
        let mut unknown_labels = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let col_of = |needle: &str| raw.find(needle).map(|b| raw[..b].chars().count() + 1).unwrap_or(1);
            let (label, rest) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::parse(line_no, col_of(line), "expected `label target(distribution)`"))?;
            let rest = rest.trim();
            let open = rest
                .find('(')
                .ok_or_else(|| Error::parse(line_no, col_of(rest), "expected `(` after target"))?;
            if !rest.ends_with(')') {
                return Err(Error::parse(line_no, raw.trim_end().chars().count(), "expected `)` at end of line"));
            }
            let target_name = rest[..open].trim();
            let dist_text = &rest[open + 1..rest.len() - 1];
            let dist = Distribution::parse(dist_text)
                .map_err(|e| Error::parse(line_no, col_of(dist_text), e.to_string()))?;
            let Some(con) = model.constraint_by_label(label) else {
                unknown_labels.push(label.to_string());
                continue;
            };
            let target = if target_name == "RHS" {
                Target::Rhs
            } else {
                model
                    .var_by_name(target_name)
                    .map(Target::Var)
                    .ok_or_else(|| Error::UnknownVariableName(target_name.to_string()))?
            };
            set.push(UncertainEntry { constraint: con, target, distribution: dist })
                .map_err(|e| Error::parse(line_no, 1, e.to_string()))?;
        }
        if !unknown_labels.is_empty() {
            return Err(Error::UnknownLabel(unknown_labels.join(", ")));
        }
        Ok(set)
    }

    pub fn to_text(&self, model: &Model) -> String {
        self.entries
            .iter()
            .map(|e| {
                let label = model
                    .constraint(e.constraint)
                    .map(|c| c.label().to_string())
                    .unwrap_or_default();
                format!("{label} {}({})\n", target_name(model, e.target), e.distribution)
            })
            .collect()
    }
}

pub(crate) fn target_name(model: &Model, target: Target) -> String {
    match target {
        Target::Var(v) => model.variable(v).name().to_string(),
        Target::Rhs => "RHS".to_string(),
    }
}
