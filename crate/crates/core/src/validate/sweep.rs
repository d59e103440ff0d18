use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Model, Status};
use crate::solver::{solve, SolverOptions};
use crate::uncertainty::RobustConfig;

pub const SWEEP_CSV_HEADER: &str = "epsilon,delta,kappa,status,objective,nominal_objective,relative_gap";

/// Cartesian grid of `(ε, δ, κ)`, ε varying slowest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepGrid {
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub kappas: Vec<f64>,
}

fn parse_values(key: &str, text: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::InvalidParameter(format!("grid `{key}`: {msg}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number")));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (a, h, b) = (num(start)?, num(step)?, num(stop)?);
            if !(h > 0.0) || b < a {
                return Err(bad(format!("range `{text}` needs step > 0 and start <= stop")));
            }
            let n = ((b - a) / h).round();
            if ((a + n * h) - b).abs() > 1e-9 * b.abs().max(1.0) {
                return Err(bad(format!("step {h} does not divide [{a}, {b}]")));
            }
            // rounding keeps 0.15 from printing as 0.15000000000000002
            let point = |k: usize| if k == n as usize { b } else { ((a + k as f64 * h) * 1e12).round() / 1e12 };
            Ok((0..=n as usize).map(point).collect())
        }
        [list] if !list.trim().is_empty() => list.split(',').map(num).collect(),
        _ => Err(bad(format!("cannot read `{text}`"))),
    }
}

impl SweepGrid {
    /// Reads `eps=0:0.05:0.2 delta=0,0.1 kappa=1,0.14`; omitted keys default
    /// to ε = 0, δ = 0, κ = 1.
    pub fn parse(text: &str) -> Result<Self> {
        let mut grid = SweepGrid { epsilons: Vec::new(), deltas: Vec::new(), kappas: Vec::new() };
        let mut seen = 0;
        for token in text.split_whitespace() {
            let (key, values) = token
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("grid token `{token}` is not key=values")))?;
            let slot = match key {
                "eps" | "epsilon" => &mut grid.epsilons,
                "delta" => &mut grid.deltas,
                "kappa" => &mut grid.kappas,
                other => return Err(Error::InvalidParameter(format!("unknown grid key `{other}`"))),
            };
            if !slot.is_empty() {
                return Err(Error::InvalidParameter(format!("grid key `{key}` given twice")));
            }
            *slot = parse_values(key, values)?;
            seen += 1;
        }
        if seen == 0 {
            return Err(Error::InvalidParameter("empty grid".into()));
        }
        for (slot, default) in [(&mut grid.epsilons, 0.0), (&mut grid.deltas, 0.0), (&mut grid.kappas, 1.0)] {
            if slot.is_empty() {
                slot.push(default);
            }
        }
        grid.points()?;
        Ok(grid)
    }

    pub fn points(&self) -> Result<Vec<RobustConfig>> {
        let mut out = Vec::new();
        for &e in &self.epsilons {
            for &d in &self.deltas {
                for &k in &self.kappas {
                    out.push(RobustConfig::new(e, d, k)?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub config: RobustConfig,
    /// Solver status, or `error` when the model could not be built or solved.
    pub status: String,
    pub objective: Option<f64>,
    pub nominal_objective: Option<f64>,
    pub relative_gap: Option<f64>,
    pub message: Option<String>,
}

fn run_point<F>(builder: &F, cfg: RobustConfig, options: &SolverOptions) -> (String, Option<f64>, Option<String>)
where
    F: Fn(&RobustConfig) -> Result<Model>,
{
    match builder(&cfg).and_then(|m| solve(&m, options)) {
        Ok(sol) => {
            let obj = (sol.status == Status::Optimal).then_some(sol.objective);
            (sol.status.as_str().to_string(), obj, None)
        }
        Err(e) => ("error".to_string(), None, Some(e.to_string())),
    }
}

/// Solves `builder(point)` for every grid point; the nominal reference is
/// `builder((0, 0, 1))`. Failures are recorded per row. `jobs = 0` uses
/// the default thread count.
pub fn sweep<F>(builder: F, points: &[RobustConfig], options: &SolverOptions, jobs: usize) -> Result<Vec<SweepRow>>
where
    F: Fn(&RobustConfig) -> Result<Model> + Sync,
{
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let (nominal, results) = pool.install(|| {
        rayon::join(
            || run_point(&builder, RobustConfig::nominal(), options).1,
            || points.par_iter().map(|&cfg| run_point(&builder, cfg, options)).collect::<Vec<_>>(),
        )
    });
    Ok(points
        .iter()
        .zip(results)
        .map(|(&config, (status, objective, message))| {
            let relative_gap = match (nominal, objective) {
                (Some(n), Some(o)) if n != 0.0 => Some((n - o) / n.abs()),
                _ => None,
            };
            SweepRow { config, status, objective, nominal_objective: nominal, relative_gap, message }
        })
        .collect())
}

pub fn write_sweep_csv(rows: &[SweepRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidParameter(format!("writing CSV: {e}"));
    w.write_record(SWEEP_CSV_HEADER.split(',')).map_err(io)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.config.epsilon.to_string(),
            r.config.delta.to_string(),
            r.config.kappa.to_string(),
            r.status.clone(),
            opt(r.objective),
            opt(r.nominal_objective),
            opt(r.relative_gap),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidParameter(format!("writing CSV: {e}")))?;
    Ok(())
}
