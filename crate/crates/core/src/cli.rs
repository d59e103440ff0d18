//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{export_text, import_text, Model, Solution, Status};
use crate::robustify::{robustify, CounterpartArtifacts, Mode};
use crate::sitesel::{self, SiteMode};
use crate::solver::{solve, SolverOptions};
use crate::uncertainty::{RobustConfig, UncertainSet};
use crate::validate::{corner_check, monte_carlo_check, sweep, write_sweep_csv, SweepGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_UNBOUNDED: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "robustcounter", version, about = "Robust counterparts of linear and integer programs")]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a model file.
    Solve {
        model: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Write the robust counterpart of a model.
    Robustify {
        model: PathBuf,
        annotations: PathBuf,
        #[arg(long, value_enum, default_value_t = CliMode::Irc)]
        mode: CliMode,
        #[command(flatten)]
        robust: RobustArgs,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build and solve a site-selection instance directory.
    Sitesel {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = SiteCliMode::Nominal)]
        mode: SiteCliMode,
        #[command(flatten)]
        robust: RobustArgs,
        /// Assign every unit to exactly one site.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solve a grid of (epsilon, delta, kappa) and write CSV.
    Sweep {
        /// Site-selection instance directory.
        #[arg(long, conflicts_with_all = ["model", "annotations"])]
        instance: Option<PathBuf>,
        #[arg(long, requires = "annotations")]
        model: Option<PathBuf>,
        #[arg(long, requires = "model")]
        annotations: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = CliMode::Irc)]
        mode: CliMode,
        /// For example `eps=0:0.05:0.2 delta=0,0.1 kappa=1,0.14`.
        #[arg(long)]
        grid: String,
        #[arg(long, env = "ROBUSTCOUNTER_SEED", default_value_t = 0)]
        seed: u64,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check a solution against the uncertain data.
    Validate {
        model: PathBuf,
        annotations: PathBuf,
        /// Counterpart whose optimum is checked.
        #[arg(long, value_enum, default_value_t = SiteCliMode::Irc)]
        mode: SiteCliMode,
        /// Check this point (`name value` per line) instead of solving.
        #[arg(long)]
        values: Option<PathBuf>,
        #[command(flatten)]
        robust: RobustArgs,
        /// Enumerate every corner of the uncertainty box.
        #[arg(long)]
        corner: bool,
        /// Number of Monte Carlo samples (0 = skip).
        #[arg(long, default_value_t = 0)]
        monte_carlo: u64,
        #[arg(long, env = "ROBUSTCOUNTER_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CliMode {
    Irc,
    Rc,
}

impl From<CliMode> for Mode {
    fn from(m: CliMode) -> Self {
        match m {
            CliMode::Irc => Mode::Irc,
            CliMode::Rc => Mode::Rc,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SiteCliMode {
    Nominal,
    Irc,
    Rc,
}

impl From<SiteCliMode> for SiteMode {
    fn from(m: SiteCliMode) -> Self {
        match m {
            SiteCliMode::Nominal => SiteMode::Nominal,
            SiteCliMode::Irc => SiteMode::Irc,
            SiteCliMode::Rc => SiteMode::Rc,
        }
    }
}

#[derive(Debug, Args)]
struct RobustArgs {
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
}

impl RobustArgs {
    fn config(&self) -> Result<RobustConfig> {
        RobustConfig::new(self.epsilon, self.delta, self.kappa)
    }
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long)]
    max_nodes: Option<u64>,
    #[arg(long)]
    max_cone_rounds: Option<u64>,
    #[arg(long)]
    time_limit: Option<f64>,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        let mut o = SolverOptions::default();
        if let Some(n) = self.max_nodes {
            o.max_nodes = n;
        }
        if let Some(n) = self.max_cone_rounds {
            o.max_cone_rounds = n;
        }
        if let Some(t) = self.time_limit {
            o.time_limit_seconds = t;
        }
        o
    }
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Optimal => EXIT_OK,
        Status::Infeasible => EXIT_INFEASIBLE,
        Status::Unbounded => EXIT_UNBOUNDED,
        Status::LimitReached => EXIT_LIMIT,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

fn load_model(path: &Path) -> Result<Model> {
    import_text(&read(path)?).map_err(|e| with_path(path, e))
}

fn load_annotations(path: &Path, model: &Model) -> Result<UncertainSet> {
    UncertainSet::parse(&read(path)?, model).map_err(|e| with_path(path, e))
}

/// Reads `name value` or `name = value` lines.
fn load_values(path: &Path, model: &Model) -> Result<Vec<f64>> {
    let mut values = vec![f64::NAN; model.num_variables()];
    for (k, raw) in read(path)?.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(|c: char| c == '=' || c.is_whitespace()).filter(|s| !s.is_empty());
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(k + 1, 1, "expected `name value`"));
        };
        let var = model.var_by_name(name).ok_or_else(|| Error::UnknownVariableName(name.to_string()))?;
        values[var.index()] = value
            .parse()
            .map_err(|_| Error::parse(k + 1, 1, format!("`{value}` is not a number")))?;
    }
    Ok(values)
}

fn solution_json(model: &Model, sol: &Solution) -> Value {
    let values: serde_json::Map<String, Value> = model
        .variables()
        .iter()
        .zip(&sol.values)
        .map(|(v, &x)| (v.name().to_string(), json!(x)))
        .collect();
    json!({
        "status": sol.status.as_str(),
        "objective": sol.is_optimal().then_some(sol.objective),
        "values": values,
        "stats": sol.stats,
    })
}

fn write_solution_text(out: &mut dyn Write, model: &Model, sol: &Solution) -> std::io::Result<()> {
    writeln!(out, "status: {}", sol.status.as_str())?;
    if sol.values.is_empty() {
        return Ok(());
    }
    writeln!(out, "objective: {:.6}", sol.objective)?;
    for (var, &x) in model.variables().iter().zip(&sol.values) {
        if x.abs() > 1e-9 {
            writeln!(out, "{} = {:.6}", var.name(), x)?;
        }
    }
    if sol.stats.max_cone_violation > 0.0 {
        writeln!(out, "max cone violation: {:.6}", sol.stats.max_cone_violation)?;
    }
    Ok(())
}

struct Io<'a> {
    out: &'a mut dyn Write,
    json: bool,
}

impl Io<'_> {
    fn emit(&mut self, value: &Value) -> Result<()> {
        writeln!(self.out, "{}", serde_json::to_string_pretty(value).unwrap_or_default())
            .map_err(|e| Error::io("<stdout>", e))
    }

    fn text(&mut self, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        f(self.out).map_err(|e| Error::io("<stdout>", e))
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let help = matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion);
            let _ = if help { write!(out, "{e}") } else { write!(err, "{e}") };
            return if help { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let mut io = Io { out, json: cli.json };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(e) => {
            if io.json {
                let _ = io.emit(&json!({ "error": e.to_string() }));
            }
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, io: &mut Io<'_>) -> Result<i32> {
    match command {
        Command::Solve { model, solver } => cmd_solve(&model, &solver.options(), io),
        Command::Robustify { model, annotations, mode, robust, output } => {
            cmd_robustify(&model, &annotations, mode.into(), &robust.config()?, output.as_deref(), io)
        }
        Command::Sitesel { instance, mode, robust, exact, solver } => {
            cmd_sitesel(&instance, mode.into(), &robust.config()?, exact, &solver.options(), io)
        }
        Command::Sweep { instance, model, annotations, mode, grid, seed, jobs, output, solver } => {
            let target = match (instance, model, annotations) {
                (Some(dir), _, _) => SweepTarget::Instance(dir),
                (None, Some(m), Some(a)) => SweepTarget::Model(m, a),
                _ => return Err(Error::InvalidParameter("sweep needs --instance or --model with --annotations".into())),
            };
            cmd_sweep(&target, mode.into(), &grid, seed, jobs, output.as_deref(), &solver.options(), io)
        }
        Command::Validate { model, annotations, mode, values, robust, corner, monte_carlo, seed, solver } => {
            let checks = Checks { corner, samples: monte_carlo, seed };
            cmd_validate(&model, &annotations, mode.into(), values.as_deref(), &robust.config()?, &checks, &solver.options(), io)
        }
    }
}

fn cmd_solve(path: &Path, options: &SolverOptions, io: &mut Io<'_>) -> Result<i32> {
    let model = load_model(path)?;
    let sol = solve(&model, options)?;
    if io.json {
        io.emit(&solution_json(&model, &sol))?;
    } else {
        io.text(|out| write_solution_text(out, &model, &sol))?;
    }
    Ok(exit_code(sol.status))
}

fn counterpart(model_path: &Path, annotations: &Path, mode: Mode, cfg: &RobustConfig) -> Result<(Model, UncertainSet, CounterpartArtifacts)> {
    let model = load_model(model_path)?;
    let set = load_annotations(annotations, &model)?;
    let art = robustify(&model, &set, mode, cfg)?;
    Ok((model, set, art))
}

fn cmd_robustify(
    model_path: &Path,
    annotations: &Path,
    mode: Mode,
    cfg: &RobustConfig,
    output: Option<&Path>,
    io: &mut Io<'_>,
) -> Result<i32> {
    let (_, _, art) = counterpart(model_path, annotations, mode, cfg)?;
    let text = export_text(&art.model);
    let robust_rows: Vec<String> = art
        .provenance
        .keys()
        .map(|&id| art.model.constraint(id).map(|c| c.label().to_string()))
        .collect::<Result<_>>()?;
    match output {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            if io.json {
                io.emit(&json!({
                    "mode": mode.as_str(),
                    "output": path.display().to_string(),
                    "variables": art.model.num_variables(),
                    "constraints": art.model.constraints().len(),
                    "robust_rows": robust_rows,
                }))?;
            } else {
                io.text(|out| {
                    writeln!(
                        out,
                        "wrote {} variables, {} constraints ({} robust) to {}",
                        art.model.num_variables(),
                        art.model.constraints().len(),
                        robust_rows.len(),
                        path.display()
                    )
                })?;
            }
        }
        None if io.json => io.emit(&json!({ "mode": mode.as_str(), "model": text, "robust_rows": robust_rows }))?,
        None => io.text(|out| out.write_all(text.as_bytes()))?,
    }
    Ok(EXIT_OK)
}

fn cmd_sitesel(
    dir: &Path,
    mode: SiteMode,
    cfg: &RobustConfig,
    exact: bool,
    options: &SolverOptions,
    io: &mut Io<'_>,
) -> Result<i32> {
    let mut inst = sitesel::load_instance(dir)?;
    inst.exact_assignment |= exact;
    let model = sitesel::build(&inst, mode, cfg)?;
    let sol = solve(&model, options)?;
    let summary = if sol.values.is_empty() { None } else { Some(sitesel::summarize(&inst, &sol)?) };
    if io.json {
        io.emit(&json!({
            "mode": mode.as_str(),
            "config": cfg,
            "status": sol.status.as_str(),
            "objective": sol.is_optimal().then_some(sol.objective),
            "summary": summary,
        }))?;
    } else {
        io.text(|out| {
            writeln!(out, "status: {}", sol.status.as_str())?;
            if let Some(s) = &summary {
                writeln!(out, "open: {}; E = {:.6}", s.open.join(", "), s.utilization)?;
                writeln!(out, "budget used: {:.6} of {:.6}", s.budget_used, s.budget)?;
                writeln!(out, "assignments:")?;
                for (unit, site) in &s.assignments {
                    writeln!(out, "  {unit} -> {site}")?;
                }
            }
            Ok(())
        })?;
    }
    Ok(exit_code(sol.status))
}

enum SweepTarget {
    Instance(PathBuf),
    Model(PathBuf, PathBuf),
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    target: &SweepTarget,
    mode: Mode,
    grid: &str,
    seed: u64,
    jobs: usize,
    output: Option<&Path>,
    options: &SolverOptions,
    io: &mut Io<'_>,
) -> Result<i32> {
    let points = SweepGrid::parse(grid)?.points()?;
    let rows = match target {
        SweepTarget::Instance(dir) => {
            let inst = sitesel::load_instance(dir)?;
            let site_mode = SiteMode::from(mode);
            sweep(|cfg| sitesel::build(&inst, site_mode, cfg), &points, options, jobs)?
        }
        SweepTarget::Model(m, a) => {
            let model = load_model(m)?;
            let set = load_annotations(a, &model)?;
            sweep(|cfg| robustify(&model, &set, mode, cfg).map(|art| art.model), &points, options, jobs)?
        }
    };
    let mut csv = Vec::new();
    write_sweep_csv(&rows, &mut csv)?;
    match output {
        Some(path) => {
            write_file(path, &csv)?;
            if io.json {
                io.emit(&json!({ "seed": seed, "output": path.display().to_string(), "rows": rows }))?;
            } else {
                io.text(|out| writeln!(out, "wrote {} rows to {}", rows.len(), path.display()))?;
            }
        }
        None if io.json => io.emit(&json!({ "seed": seed, "rows": rows }))?,
        None => io.text(|out| out.write_all(&csv))?,
    }
    Ok(EXIT_OK)
}

struct Checks {
    corner: bool,
    samples: u64,
    seed: u64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_validate(
    model_path: &Path,
    annotations: &Path,
    mode: SiteMode,
    values_path: Option<&Path>,
    cfg: &RobustConfig,
    checks: &Checks,
    options: &SolverOptions,
    io: &mut Io<'_>,
) -> Result<i32> {
    let model = load_model(model_path)?;
    let set = load_annotations(annotations, &model)?;
    let (values, status) = match values_path {
        Some(p) => (load_values(p, &model)?, None),
        None => {
            let target = match mode {
                SiteMode::Nominal => model.clone(),
                SiteMode::Irc => robustify(&model, &set, Mode::Irc, cfg)?.model,
                SiteMode::Rc => robustify(&model, &set, Mode::Rc, cfg)?.model,
            };
            let sol = solve(&target, options)?;
            if !sol.is_optimal() {
                if io.json {
                    io.emit(&json!({ "status": sol.status.as_str(), "certified": Value::Null }))?;
                } else {
                    io.text(|out| writeln!(out, "status: {}\nnothing to validate", sol.status.as_str()))?;
                }
                return Ok(exit_code(sol.status));
            }
            (sol.values[..model.num_variables()].to_vec(), Some(sol))
        }
    };
    let run_corner = checks.corner || checks.samples == 0;
    let corner = if run_corner { Some(corner_check(&model, &set, &values, cfg.epsilon, cfg.delta)?) } else { None };
    let mc = if checks.samples > 0 {
        Some(monte_carlo_check(&model, &set, &values, cfg.epsilon, cfg.delta, checks.samples, checks.seed)?)
    } else {
        None
    };
    let kappa_bound = 3.0 * (cfg.kappa * (1.0 - cfg.kappa) / checks.samples.max(1) as f64).sqrt();
    let mc_ok = mc.as_ref().map(|m| m.frequency <= cfg.kappa + kappa_bound);
    let certified = corner.as_ref().is_none_or(|c| c.certified) && mc_ok.unwrap_or(true);

    if io.json {
        io.emit(&json!({
            "status": status.as_ref().map(|s| s.status.as_str()),
            "objective": status.as_ref().map(|s| s.objective),
            "corner": corner,
            "monte_carlo": mc,
            "certified": certified,
        }))?;
    } else {
        io.text(|out| {
            if let Some(s) = &status {
                writeln!(out, "status: {}", s.status.as_str())?;
                writeln!(out, "objective: {:.6}", s.objective)?;
            }
            if let Some(c) = &corner {
                let worst = c
                    .constraints
                    .iter()
                    .map(|k| k.worst_violation - k.allowance)
                    .fold(f64::NEG_INFINITY, f64::max)
                    .max(0.0);
                writeln!(
                    out,
                    "corner: {} ({} corners, worst excess {:.6})",
                    if c.certified { "certified" } else { "violated" },
                    c.corners_checked,
                    worst
                )?;
            }
            if let Some(m) = &mc {
                writeln!(
                    out,
                    "monte carlo: frequency {:.6} +/- {:.6} over {} samples (seed {}), kappa {:.6}",
                    m.frequency, m.ci_half_width, m.samples, m.seed, cfg.kappa
                )?;
            }
            writeln!(out, "certified: {certified}")
        })?;
    }
    Ok(EXIT_OK)
}
