//! Independent robustness checks of a candidate solution: exhaustive
//! corner enumeration for interval data, Monte Carlo violation frequencies
//! for random data, and parameter sweeps against the nominal optimum.

mod sweep;

pub use sweep::{sweep, write_sweep_csv, SweepGrid, SweepRow, SWEEP_CSV_HEADER};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _, Normal, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ConId, Model, Sense};
use crate::robustify::{entry_interval, tolerance_allowance};
use crate::uncertainty::{target_name, Distribution, Target, UncertainSet};

/// Largest number of uncertain entries enumerated by [`corner_check`].
pub const MAX_CORNER_ENTRIES: usize = 20;
const CERTIFY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub label: String,
    pub worst_violation: f64,
    pub allowance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CornerReport {
    pub corners_checked: u64,
    pub constraints: Vec<ConstraintCheck>,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolationEstimate {
    pub samples: u64,
    /// Largest per-constraint violation count.
    pub violations: u64,
    pub frequency: f64,
    pub ci_half_width: f64,
    pub seed: u64,
    pub per_constraint: Vec<(String, u64)>,
}

/// Uncertain data of one row, split into the certain part and the entries.
struct RowData {
    con: ConId,
    /// lhs value without the uncertain coefficient terms
    certain_lhs: f64,
    rhs: f64,
    allowance: f64,
    /// (value of x, index into the entry list)
    coeffs: Vec<(f64, usize)>,
    rhs_entry: Option<usize>,
}

fn point<'a>(model: &Model, values: &'a [f64]) -> Result<&'a [f64]> {
    let n = model.num_variables();
    if values.len() < n {
        return Err(Error::DimensionMismatch(format!("{} values for {n} variables", values.len())));
    }
    let point = &values[..n];
    if let Some(i) = point.iter().position(|v| !v.is_finite()) {
        return Err(Error::MissingValue(model.variables()[i].name().to_string()));
    }
    Ok(point)
}

fn row_data(model: &Model, set: &UncertainSet, x: &[f64], delta: f64) -> Result<Vec<RowData>> {
    set.validate(model)?;
    let mut rows = Vec::new();
    for con_id in set.constraints() {
        let con = model.constraint(con_id)?;
        if con.sense() != Sense::Le {
            return Err(Error::UncertainSense(con.label().to_string()));
        }
        let mut certain_lhs = con.lhs_value(x) + con.cone().map_or(0.0, |c| c.value(x));
        let mut coeffs = Vec::new();
        let mut rhs_entry = None;
        for (k, e) in set.entries().iter().enumerate().filter(|(_, e)| e.constraint == con_id) {
            match e.target {
                Target::Var(v) => {
                    certain_lhs -= con.lhs().coefficient(v) * x[v.index()];
                    coeffs.push((x[v.index()], k));
                }
                Target::Rhs => rhs_entry = Some(k),
            }
        }
        rows.push(RowData {
            con: con_id,
            certain_lhs,
            rhs: con.rhs(),
            allowance: tolerance_allowance(delta, con.rhs()),
            coeffs,
            rhs_entry,
        });
    }
    Ok(rows)
}

fn nominal_of(model: &Model, con: ConId, target: Target) -> Result<f64> {
    let c = model.constraint(con)?;
    Ok(match target {
        Target::Var(v) => c.lhs().coefficient(v),
        Target::Rhs => c.rhs(),
    })
}

/// Evaluates every corner of the box of uncertain data and reports the worst
/// violation of each constraint against its allowance `δ·max{1,|b̄|}`.
pub fn corner_check(
    model: &Model,
    set: &UncertainSet,
    values: &[f64],
    epsilon: f64,
    delta: f64,
) -> Result<CornerReport> {
    if set.len() > MAX_CORNER_ENTRIES {
        return Err(Error::TooManyEntries { count: set.len(), cap: MAX_CORNER_ENTRIES });
    }
    let x = point(model, values)?;
    let rows = row_data(model, set, x, delta)?;
    // (low, high) per entry
    let ends: Vec<(f64, f64)> = set
        .entries()
        .iter()
        .map(|e| {
            let (c, r) = entry_interval(nominal_of(model, e.constraint, e.target)?, &e.distribution, epsilon)?;
            Ok((c - r, c + r))
        })
        .collect::<Result<_>>()?;

    let mut worst: Vec<f64> = model.constraints().iter().map(|c| c.residual(x).max(0.0)).collect();
    let corners = 1u64 << set.len();
    for mask in 0..corners {
        let pick = |k: usize| if mask >> k & 1 == 1 { ends[k].1 } else { ends[k].0 };
        for row in &rows {
            let lhs = row.certain_lhs + row.coeffs.iter().map(|&(xv, k)| pick(k) * xv).sum::<f64>();
            let rhs = row.rhs_entry.map_or(row.rhs, pick);
            let slot = &mut worst[row.con.index()];
            *slot = slot.max(lhs - rhs);
        }
    }

    let constraints: Vec<ConstraintCheck> = model
        .constraints()
        .iter()
        .zip(worst)
        .map(|(c, w)| ConstraintCheck {
            label: c.label().to_string(),
            worst_violation: w,
            allowance: tolerance_allowance(delta, c.rhs()),
        })
        .collect();
    let certified = constraints.iter().all(|c| c.worst_violation <= c.allowance + CERTIFY_TOL);
    Ok(CornerReport { corners_checked: corners, constraints, certified })
}

/// 64-bit FNV-1a, used to derive a stable stream id per uncertain entry.
fn fnv1a(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for b in part.bytes().chain(std::iter::once(0xff)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

enum Sampler {
    /// center + radius·U[-1, 1]
    Box { center: f64, radius: f64 },
    /// nominal + sign·ε|nominal|·ξ with ξ from the tagged distribution
    Shift { nominal: f64, scale: f64, draw: Draw },
}

enum Draw {
    Normal { dist: Normal<f64>, mean: f64, std_dev: f64 },
    Poisson(Poisson<f64>),
    Binomial(Binomial),
    Discrete { values: Vec<f64>, cumulative: Vec<f64> },
}

impl Draw {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Draw::Normal { dist, mean, std_dev } => loop {
                let v = dist.sample(rng);
                if (v - mean).abs() <= 6.0 * std_dev {
                    break v;
                }
            },
            Draw::Poisson(p) => p.sample(rng),
            Draw::Binomial(b) => b.sample(rng) as f64,
            Draw::Discrete { values, cumulative } => {
                let u: f64 = rng.random();
                let k = cumulative.partition_point(|&c| c <= u).min(values.len() - 1);
                values[k]
            }
        }
    }
}

fn sampler(dist: &Distribution, nominal: f64, epsilon: f64, sign: f64) -> Result<Sampler> {
    let bad = |e: String| Error::InvalidDistribution(e);
    let draw = match dist {
        Distribution::Bounded { .. } | Distribution::BoundedRange { .. } | Distribution::Uniform => {
            let (center, radius) = entry_interval(nominal, dist, epsilon)?;
            return Ok(Sampler::Box { center, radius });
        }
        Distribution::Normal { mean, std_dev } => Draw::Normal {
            dist: Normal::new(*mean, *std_dev).map_err(|e| bad(e.to_string()))?,
            mean: *mean,
            std_dev: *std_dev,
        },
        Distribution::Poisson { mean } => Draw::Poisson(Poisson::new(*mean).map_err(|e| bad(e.to_string()))?),
        Distribution::Binomial { trials, prob } => {
            Draw::Binomial(Binomial::new(*trials, *prob).map_err(|e| bad(e.to_string()))?)
        }
        Distribution::Discrete { values, probs } => {
            let mut acc = 0.0;
            let cumulative = probs
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect();
            Draw::Discrete { values: values.clone(), cumulative }
        }
    };
    Ok(Sampler::Shift { nominal, scale: sign * epsilon * nominal.abs(), draw })
}

impl Sampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Box { center, radius } => center + radius * rng.random_range(-1.0..=1.0),
            Sampler::Shift { nominal, scale, draw } => nominal + scale * draw.sample(rng),
        }
    }
}

/// Fraction of `samples` independent realizations of the uncertain data in
/// which an uncertain row exceeds `b̃ + δ·max{1,|b̄|}`. Every entry draws
/// from its own ChaCha8 stream keyed by `(seed, constraint label, target)`.
pub fn monte_carlo_check(
    model: &Model,
    set: &UncertainSet,
    values: &[f64],
    epsilon: f64,
    delta: f64,
    samples: u64,
    seed: u64,
) -> Result<ViolationEstimate> {
    if samples < 1000 {
        return Err(Error::InvalidParameter(format!("need at least 1000 samples, got {samples}")));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0 && delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter("epsilon and delta must be finite and >= 0".into()));
    }
    let x = point(model, values)?;
    let rows = row_data(model, set, x, delta)?;
    let mut streams = Vec::with_capacity(set.len());
    for e in set.entries() {
        let label = model.constraint(e.constraint)?.label();
        let sign = if e.target == Target::Rhs { -1.0 } else { 1.0 };
        let s = sampler(&e.distribution, nominal_of(model, e.constraint, e.target)?, epsilon, sign)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(fnv1a(&[label, &target_name(model, e.target)]));
        streams.push((s, rng));
    }

    let mut counts = vec![0u64; rows.len()];
    let mut draws = vec![0.0; streams.len()];
    for _ in 0..samples {
        for (slot, (s, rng)) in draws.iter_mut().zip(streams.iter_mut()) {
            *slot = s.sample(rng);
        }
        for (row, count) in rows.iter().zip(counts.iter_mut()) {
            let lhs = row.certain_lhs + row.coeffs.iter().map(|&(xv, k)| draws[k] * xv).sum::<f64>();
            let rhs = row.rhs_entry.map_or(row.rhs, |k| draws[k]);
            if lhs - rhs > row.allowance + CERTIFY_TOL {
                *count += 1;
            }
        }
    }

    let violations = counts.iter().copied().max().unwrap_or(0);
    let frequency = violations as f64 / samples as f64;
    Ok(ViolationEstimate {
        samples,
        violations,
        frequency,
        ci_half_width: 3.0 * (frequency * (1.0 - frequency) / samples as f64).sqrt(),
        seed,
        per_constraint: rows
            .iter()
            .zip(&counts)
            .map(|(r, &c)| Ok((model.constraint(r.con)?.label().to_string(), c)))
            .collect::<Result<_>>()?,
    })
}
