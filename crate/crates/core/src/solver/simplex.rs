//! Dense two-phase primal simplex with Bland's rule.

use crate::error::{Error, Result};
use crate::model::{StandardForm, StdSense};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpResult {
    pub status: LpStatus,
    /// Column values (standard-form space); empty unless optimal.
    pub x: Vec<f64>,
    /// Maximization-sense objective including the offset.
    pub objective: f64,
    /// One multiplier per standard-form row, in the row's original orientation.
    pub duals: Vec<f64>,
    pub iterations: u64,
}

/// Pivots between tableau refreshes from the original rows.
const REINVERT_EVERY: u64 = 50;

struct Tableau {
    /// `rows × (cols + 1)`; the last entry of each row is the right-hand side.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced costs `c_j - c_B B^-1 A_j` (maximization), last entry is `-z`.
    d: Vec<f64>,
    cols: usize,
    /// Initial tableau, used to rebuild `a` and shed accumulated round-off.
    original: Vec<Vec<f64>>,
    cost: Vec<f64>,
}

fn eliminate(a: &mut [Vec<f64>], row: usize, col: usize) {
    let p = a[row][col];
    for v in &mut a[row] {
        *v /= p;
    }
    let pivot_row = a[row].clone();
    for (r, line) in a.iter_mut().enumerate() {
        if r == row {
            continue;
        }
        let f = line[col];
        if f != 0.0 {
            for (v, &pv) in line.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            line[col] = 0.0;
        }
    }
}

impl Tableau {
    fn new(a: Vec<Vec<f64>>, basis: Vec<usize>, cols: usize) -> Self {
        Tableau { original: a.clone(), a, basis, d: Vec::new(), cols, cost: Vec::new() }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        eliminate(&mut self.a, row, col);
        let f = self.d[col];
        if f != 0.0 {
            for (v, &pv) in self.d.iter_mut().zip(&self.a[row]) {
                *v -= f * pv;
            }
            self.d[col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn set_costs(&mut self, cost: &[f64]) {
        self.cost = cost.to_vec();
        self.d = cost.to_vec();
        self.d.push(0.0);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (v, &av) in self.d.iter_mut().zip(&self.a[r]) {
                    *v -= cb * av;
                }
            }
        }
    }

    /// Recomputes the tableau for the current basis from the original rows
    /// with partially pivoted elimination. Tiny negative right-hand sides
    /// left by round-off are cleared. Keeps the old tableau if the basis
    /// looks singular.
    fn reinvert(&mut self, feasibility_tol: f64) {
        let m = self.a.len();
        let mut a = self.original.clone();
        let mut assigned = vec![false; m];
        let mut basis = vec![0; m];
        for &col in &self.basis {
            let best = (0..m)
                .filter(|&r| !assigned[r])
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()));
            let Some(row) = best.filter(|&r| a[r][col].abs() > PIVOT_TOL) else {
                return;
            };
            eliminate(&mut a, row, col);
            assigned[row] = true;
            basis[row] = col;
        }
        let rhs = self.cols;
        for line in &mut a {
            if line[rhs] < 0.0 && line[rhs] > -feasibility_tol {
                line[rhs] = 0.0;
            }
        }
        self.a = a;
        self.basis = basis;
        let cost = std::mem::take(&mut self.cost);
        self.set_costs(&cost);
    }

    /// Bland's rule iterations. Returns `Err(col)` with an unbounded column.
    fn run(
        &mut self,
        allowed: &[bool],
        iters: &mut u64,
        cap: u64,
        feasibility_tol: f64,
    ) -> std::result::Result<bool, usize> {
        let mut since_refresh = 0u64;
        let mut refreshed_at_end = false;
        loop {
            let entering = (0..self.cols).find(|&j| allowed[j] && self.d[j] > COST_TOL);
            let Some(col) = entering else {
                if since_refresh == 0 || refreshed_at_end {
                    return Ok(true);
                }
                self.reinvert(feasibility_tol);
                refreshed_at_end = true;
                since_refresh = 0;
                continue;
            };
            if *iters >= cap {
                return Ok(false);
            }
            let mut leave: Option<(usize, f64)> = None;
            for (r, line) in self.a.iter().enumerate() {
                let coef = line[col];
                if coef > PIVOT_TOL {
                    let ratio = line[self.cols] / coef;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, best)) => {
                            let tol = 1e-12 * best.abs().max(1.0);
                            if ratio < best - tol
                                || (ratio <= best + tol && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, best))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Err(col);
            };
            self.pivot(row, col);
            *iters += 1;
            since_refresh += 1;
            if since_refresh >= REINVERT_EVERY {
                self.reinvert(feasibility_tol);
                since_refresh = 0;
            }
        }
    }
}

/// Solves `max c·y + offset, rows, y >= 0` from a standard form.
pub fn solve_standard(sf: &StandardForm, feasibility_tol: f64, iteration_cap: u64) -> Result<LpResult> {
    let n = sf.num_cols;
    if sf.objective.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "objective has {} entries for {} columns",
            sf.objective.len(),
            n
        )));
    }
    for (i, row) in sf.rows.iter().enumerate() {
        if row.coeffs.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} coefficients for {} columns",
                row.coeffs.len(),
                n
            )));
        }
    }
    let m = sf.rows.len();

    // Column layout: structural | one slack or surplus per inequality | artificials.
    let num_slack = sf.rows.iter().filter(|r| r.sense == StdSense::Le).count();
    let flips: Vec<f64> = sf
        .rows
        .iter()
        .map(|r| if r.rhs < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let needs_art: Vec<bool> = sf
        .rows
        .iter()
        .zip(&flips)
        .map(|(r, &s)| r.sense == StdSense::Eq || s < 0.0)
        .collect();
    let num_art = needs_art.iter().filter(|&&b| b).count();
    let cols = n + num_slack + num_art;

    let mut a = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    // column holding +e_i in the sign-normalized system, used for duals
    let mut identity_col = vec![0; m];
    let mut is_art = vec![false; cols];
    let mut next_slack = n;
    let mut next_art = n + num_slack;
    for (i, row) in sf.rows.iter().enumerate() {
        let s = flips[i];
        for (dst, &c) in a[i][..n].iter_mut().zip(&row.coeffs) {
            *dst = s * c;
        }
        a[i][cols] = s * row.rhs;
        if row.sense == StdSense::Le {
            a[i][next_slack] = s;
            if s > 0.0 {
                basis[i] = next_slack;
                identity_col[i] = next_slack;
            }
            next_slack += 1;
        }
        if needs_art[i] {
            a[i][next_art] = 1.0;
            is_art[next_art] = true;
            basis[i] = next_art;
            identity_col[i] = next_art;
            next_art += 1;
        }
    }

    let mut tab = Tableau::new(a, basis, cols);
    let mut iters = 0u64;

    if num_art > 0 {
        let phase1: Vec<f64> = (0..cols).map(|j| if is_art[j] { -1.0 } else { 0.0 }).collect();
        tab.set_costs(&phase1);
        let allowed = vec![true; cols];
        match tab.run(&allowed, &mut iters, iteration_cap, feasibility_tol) {
            Ok(true) => {}
            Ok(false) => return Ok(limit(iters, m)),
            Err(_) => unreachable!("phase one is bounded"),
        }
        let infeasibility: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| is_art[b])
            .map(|(r, _)| tab.a[r][cols])
            .sum();
        if infeasibility > feasibility_tol {
            return Ok(LpResult {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: f64::NAN,
                duals: vec![0.0; m],
                iterations: iters,
            });
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if is_art[tab.basis[r]] {
                if let Some(j) = (0..cols).find(|&j| !is_art[j] && tab.a[r][j].abs() > PIVOT_TOL) {
                    tab.pivot(r, j);
                    iters += 1;
                }
            }
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&sf.objective);
    tab.set_costs(&cost);
    let allowed: Vec<bool> = is_art.iter().map(|&b| !b).collect();
    match tab.run(&allowed, &mut iters, iteration_cap, feasibility_tol) {
        Ok(true) => {}
        Ok(false) => return Ok(limit(iters, m)),
        Err(_) => {
            return Ok(LpResult {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                objective: f64::INFINITY,
                duals: vec![0.0; m],
                iterations: iters,
            })
        }
    }

    let mut x = vec![0.0; n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.a[r][cols].max(0.0);
        }
    }
    let duals = (0..m).map(|i| -tab.d[identity_col[i]] * flips[i]).collect();
    Ok(LpResult {
        status: LpStatus::Optimal,
        objective: sf.objective_value(&x),
        x,
        duals,
        iterations: iters,
    })
}

fn limit(iterations: u64, m: usize) -> LpResult {
    LpResult {
        status: LpStatus::IterationLimit,
        x: Vec::new(),
        objective: f64::NAN,
        duals: vec![0.0; m],
        iterations,
    }
}
