use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{PopulationUnit, SiteCandidate, SiteSelectionInstance};
use crate::error::{Error, Result};

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Validation(format!("{}: {e}", path.display()))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn expect_header(path: &Path, headers: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Validation(format!(
            "{}: expected header `{}`, found `{}`",
            file_name(path),
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

fn number(path: &Path, row: usize, column: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| {
        Error::Validation(format!("{} row {row}, column `{column}`: `{raw}` is not a number", file_name(path)))
    })
}

fn read_units(path: &Path) -> Result<Vec<PopulationUnit>> {
    let mut rdr = open_csv(path)?;
    expect_header(path, rdr.headers().map_err(|e| csv_error(path, e))?, &["id", "name", "population"])?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let population = number(path, k + 1, "population", &rec[2])?;
        if !(population >= 0.0) {
            return Err(Error::Validation(format!(
                "{} row {}, column `population`: {population} must be >= 0",
                file_name(path),
                k + 1
            )));
        }
        out.push(PopulationUnit { id: rec[0].to_string(), name: rec[1].to_string(), population });
    }
    Ok(out)
}

fn read_sites(path: &Path) -> Result<Vec<SiteCandidate>> {
    let mut rdr = open_csv(path)?;
    expect_header(
        path,
        rdr.headers().map_err(|e| csv_error(path, e))?,
        &["id", "name", "fixed_cost", "variable_cost"],
    )?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let fixed_cost = number(path, k + 1, "fixed_cost", &rec[2])?;
        let variable_cost = number(path, k + 1, "variable_cost", &rec[3])?;
        for (col, v) in [("fixed_cost", fixed_cost), ("variable_cost", variable_cost)] {
            if !(v >= 0.0) {
                return Err(Error::Validation(format!(
                    "{} row {}, column `{col}`: {v} must be >= 0",
                    file_name(path),
                    k + 1
                )));
            }
        }
        out.push(SiteCandidate {
            id: rec[0].to_string(),
            name: rec[1].to_string(),
            fixed_cost,
            variable_cost,
        });
    }
    Ok(out)
}

/// Header row of site ids, optionally preceded by a `unit` column naming
/// the unit of each row.
fn read_probabilities(path: &Path, units: &[PopulationUnit], sites: &[SiteCandidate]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let labelled = headers.get(0) == Some("unit");
    let site_cols: Vec<&str> = headers.iter().skip(usize::from(labelled)).collect();
    let site_index: HashMap<&str, usize> = sites.iter().enumerate().map(|(j, s)| (s.id.as_str(), j)).collect();
    let mut order = Vec::with_capacity(site_cols.len());
    for id in &site_cols {
        let j = *site_index.get(id).ok_or_else(|| {
            Error::Validation(format!("{}: header names unknown site `{id}`", file_name(path)))
        })?;
        order.push(j);
    }
    if order.len() != sites.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}: {} site columns for {} sites",
            file_name(path),
            order.len(),
            sites.len()
        )));
    }
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let unit = units.get(k).ok_or_else(|| {
            Error::DimensionMismatch(format!("{}: more rows than the {} units", file_name(path), units.len()))
        })?;
        if labelled && rec[0] != unit.id {
            return Err(Error::Validation(format!(
                "{} row {}: unit `{}` does not match units file order (expected `{}`)",
                file_name(path),
                k + 1,
                &rec[0],
                unit.id
            )));
        }
        let mut row = vec![0.0; sites.len()];
        for (c, &j) in order.iter().enumerate() {
            let p = number(path, k + 1, site_cols[c], &rec[c + usize::from(labelled)])?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!(
                    "{} row {} (unit `{}`), column `{}`: probability {p} outside [0, 1]",
                    file_name(path),
                    k + 1,
                    unit.id,
                    site_cols[c]
                )));
            }
            row[j] = p;
        }
        rows.push(row);
    }
    if rows.len() != units.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}: {} rows for {} units",
            file_name(path),
            rows.len(),
            units.len()
        )));
    }
    Ok(rows)
}

fn site_list(value: &str, sites: &[SiteCandidate], key: &str) -> Result<Vec<usize>> {
    match value.trim() {
        "all" => return Ok((0..sites.len()).collect()),
        "" | "none" => return Ok(Vec::new()),
        _ => {}
    }
    value
        .split(',')
        .map(|id| {
            let id = id.trim();
            sites
                .iter()
                .position(|s| s.id == id)
                .ok_or_else(|| Error::Validation(format!("config `{key}`: unknown site `{id}`")))
        })
        .collect()
}

fn flag(value: &str, key: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Validation(format!("config `{key}`: expected true/false, got `{other}`"))),
    }
}

fn config_path(dir: &Path) -> PathBuf {
    let txt = dir.join("config.txt");
    if txt.exists() {
        txt
    } else {
        dir.join("config")
    }
}

/// Reads `units.csv`, `sites.csv`, `prob.csv` and `config.txt` (or
/// `config`) from `dir` and validates the result.
pub fn load_instance(dir: impl AsRef<Path>) -> Result<SiteSelectionInstance> {
    let dir = dir.as_ref();
    let units = read_units(&dir.join("units.csv"))?;
    let sites = read_sites(&dir.join("sites.csv"))?;
    let probabilities = read_probabilities(&dir.join("prob.csv"), &units, &sites)?;

    let cfg_path = config_path(dir);
    let text = fs::read_to_string(&cfg_path).map_err(|e| Error::io(&cfg_path, e))?;
    let mut budget = None;
    let mut min_enrollment = None;
    let mut max_sites = None;
    let mut inst = SiteSelectionInstance {
        uncertain_fixed: (0..sites.len()).collect(),
        uncertain_variable: (0..sites.len()).collect(),
        units,
        sites,
        probabilities,
        budget: 0.0,
        min_enrollment: 0.0,
        max_sites: 0,
        uncertain_budget: true,
        exact_assignment: false,
    };
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(k + 1, 1, format!("expected `key=value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let num = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::Validation(format!("config `{key}`: `{value}` is not a number")))
        };
        match key {
            "budget" => budget = Some(num()?),
            "min_enrollment" => min_enrollment = Some(num()?),
            "max_sites" => {
                let v = num()?;
                if !(v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64) {
                    return Err(Error::Validation(format!("config `max_sites`: `{value}` must be a positive integer")));
                }
                max_sites = Some(v as u32);
            }
            "uncertain_fixed" => inst.uncertain_fixed = site_list(value, &inst.sites, key)?,
            "uncertain_variable" => inst.uncertain_variable = site_list(value, &inst.sites, key)?,
            "uncertain_budget" => inst.uncertain_budget = flag(value, key)?,
            "exact_assignment" => inst.exact_assignment = flag(value, key)?,
            other => return Err(Error::Validation(format!("config: unknown key `{other}`"))),
        }
    }
    let missing = |key: &str| Error::Validation(format!("config: missing `{key}`"));
    inst.budget = budget.ok_or_else(|| missing("budget"))?;
    inst.min_enrollment = min_enrollment.ok_or_else(|| missing("min_enrollment"))?;
    inst.max_sites = max_sites.ok_or_else(|| missing("max_sites"))?;
    inst.validate()?;
    Ok(inst)
}
