//! Small dense linear programs solved by the two-phase tableau simplex method
//! with Bland's anti-cycling rule.
//!
//! Problems are stated as `minimize c'x` subject to rows `a'x (<=|>=|=) b` and
//! per-variable bounds `lo <= x <= hi` (`lo` may be `-inf`, `hi` may be `+inf`).

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const LP_TOLERANCE: f64 = 1e-8;
pub const LP_ITERATION_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub var_names: Vec<String>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Vec<f64>, f64)> {
        match self {
            LpOutcome::Optimal { x, objective } => Some((x, objective)),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// Nonnegative variables with the given names and a zero objective.
    pub fn new(var_names: Vec<String>) -> Self {
        let n = var_names.len();
        Self { var_names, objective: vec![0.0; n], constraints: Vec::new(), bounds: vec![(0.0, f64::INFINITY); n] }
    }

    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn add(&mut self, name: impl Into<String>, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { coeffs, sense, rhs, name: name.into() });
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        let bad = |m: String| Err(Error::NumericalFailure(format!("malformed LP: {m}")));
        if self.objective.len() != n || self.bounds.len() != n {
            return bad("objective or bounds length mismatch".into());
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return bad("non-finite objective coefficient".into());
        }
        for c in &self.constraints {
            if c.coeffs.len() != n {
                return bad(format!("row `{}` has {} coefficients for {n} variables", c.name, c.coeffs.len()));
            }
            if c.coeffs.iter().any(|v| !v.is_finite()) || !c.rhs.is_finite() {
                return bad(format!("row `{}` has a non-finite entry", c.name));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return bad(format!("variable {j} has invalid bounds"));
            }
        }
        Ok(())
    }

    /// CPLEX LP text format, readable by common external solvers.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::from("\\ uavsar offloading relaxation\nMinimize\n obj:");
        write_expr(&mut out, &self.objective, &self.var_names);
        out.push_str("\nSubject To\n");
        for (k, c) in self.constraints.iter().enumerate() {
            let name = if c.name.is_empty() { format!("c{k}") } else { c.name.clone() };
            let _ = write!(out, " {name}:");
            write_expr(&mut out, &c.coeffs, &self.var_names);
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {:?}", c.rhs);
        }
        out.push_str("Bounds\n");
        for (name, &(lo, hi)) in self.var_names.iter().zip(&self.bounds) {
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => {
                    let _ = writeln!(out, " {lo:?} <= {name} <= {hi:?}");
                }
                (true, false) => {
                    let _ = writeln!(out, " {name} >= {lo:?}");
                }
                (false, true) => {
                    let _ = writeln!(out, " -inf <= {name} <= {hi:?}");
                }
                (false, false) => {
                    let _ = writeln!(out, " {name} free");
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

fn write_expr(out: &mut String, coeffs: &[f64], names: &[String]) {
    let mut any = false;
    for (c, name) in coeffs.iter().zip(names) {
        if *c == 0.0 {
            continue;
        }
        let sign = if *c < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {:?} {name}", c.abs());
        any = true;
    }
    if !any {
        out.push_str(" 0");
    }
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + col`
    Shift { col: usize, offset: f64 },
    /// `x = offset - col`
    Flip { col: usize, offset: f64 },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// `rows x (cols + 1)`; last column is the right-hand side.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    iterations: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, cost: &mut [f64]) {
        let width = self.cols + 1;
        let p = self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for k in 0..width {
                    row[k] -= f * pivot_row[k];
                }
                row[c] = 0.0;
            }
        }
        let f = cost[c];
        if f != 0.0 {
            for k in 0..width {
                cost[k] -= f * pivot_row[k];
            }
            cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on `cost` (reduced costs, last entry holds
    /// minus the objective) over the allowed columns.
    fn optimize(&mut self, cost: &mut [f64], allowed: &dyn Fn(usize) -> bool) -> Result<bool> {
        loop {
            if self.iterations >= LP_ITERATION_CAP {
                return Err(Error::NumericalFailure(format!("simplex hit the iteration cap of {LP_ITERATION_CAP}")));
            }
            // Bland: lowest-index improving column.
            let Some(c) = (0..self.cols).find(|&j| allowed(j) && cost[j] < -LP_TOLERANCE) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.a.iter().enumerate() {
                if row[c] > LP_TOLERANCE {
                    let ratio = row[self.cols] / row[c];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else {
                return Ok(false);
            };
            self.pivot(r, c, cost);
            self.iterations += 1;
        }
    }
}

/// Solves a linear program to optimality, or reports infeasibility or
/// unboundedness.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.n_vars();

    // Map variables to nonnegative columns; finite upper bounds become rows.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: ncols, offset: lo });
            if hi.is_finite() {
                if hi < lo - LP_TOLERANCE {
                    return Ok(LpOutcome::Infeasible);
                }
                extra_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Flip { col: ncols, offset: hi });
            ncols += 1;
        } else {
            maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        }
    }

    // Rows in terms of the structural columns: (coeffs, sense, rhs).
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = vec![0.0; ncols];
        let mut rhs = c.rhs;
        for (j, &a) in c.coeffs.iter().enumerate() {
            match maps[j] {
                VarMap::Shift { col, offset } => {
                    coeffs[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Flip { col, offset } => {
                    coeffs[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push((coeffs, c.sense, rhs));
    }
    for (col, ub) in extra_rows {
        let mut coeffs = vec![0.0; ncols];
        coeffs[col] = 1.0;
        rows.push((coeffs, Sense::Le, ub));
    }
    let mut cost_struct = vec![0.0; ncols];
    let mut cost_offset = 0.0;
    for (j, &cj) in lp.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shift { col, offset } => {
                cost_struct[col] += cj;
                cost_offset += cj * offset;
            }
            VarMap::Flip { col, offset } => {
                cost_struct[col] -= cj;
                cost_offset += cj * offset;
            }
            VarMap::Split { pos, neg } => {
                cost_struct[pos] += cj;
                cost_struct[neg] -= cj;
            }
        }
    }

    // Normalize to nonnegative right-hand sides.
    for (coeffs, sense, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            coeffs.iter_mut().for_each(|v| *v = -*v);
            *rhs = -*rhs;
            *sense = match *sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let slack0 = ncols;
    let art0 = ncols + n_slack;
    let total = art0 + n_art;

    let mut a = vec![vec![0.0; total + 1]; m];
    let mut basis = vec![0; m];
    let (mut s, mut t) = (slack0, art0);
    for (i, (coeffs, sense, rhs)) in rows.iter().enumerate() {
        a[i][..ncols].copy_from_slice(coeffs);
        a[i][total] = *rhs;
        match sense {
            Sense::Le => {
                a[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Sense::Ge => {
                a[i][s] = -1.0;
                s += 1;
                a[i][t] = 1.0;
                basis[i] = t;
                t += 1;
            }
            Sense::Eq => {
                a[i][t] = 1.0;
                basis[i] = t;
                t += 1;
            }
        }
    }
    let mut tab = Tableau { a, basis, cols: total, iterations: 0 };

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let mut cost = vec![0.0; total + 1];
        for c in cost.iter_mut().take(total).skip(art0) {
            *c = 1.0;
        }
        for i in 0..m {
            if tab.basis[i] >= art0 {
                for k in 0..=total {
                    cost[k] -= tab.a[i][k];
                }
            }
        }
        tab.optimize(&mut cost, &|_| true)?;
        let infeasibility = -cost[total];
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if infeasibility > LP_TOLERANCE * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining artificials out of the basis.
        let mut i = 0;
        while i < tab.a.len() {
            if tab.basis[i] >= art0 {
                if let Some(c) = (0..art0).find(|&j| tab.a[i][j].abs() > LP_TOLERANCE) {
                    let mut dummy = vec![0.0; total + 1];
                    tab.pivot(i, c, &mut dummy);
                } else {
                    // Redundant row.
                    tab.a.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
    }

    // Phase 2 over structural and slack columns.
    let mut cost = vec![0.0; total + 1];
    cost[..ncols].copy_from_slice(&cost_struct);
    for i in 0..tab.a.len() {
        let b = tab.basis[i];
        let f = cost[b];
        if f != 0.0 {
            for k in 0..=total {
                cost[k] -= f * tab.a[i][k];
            }
        }
    }
    if !tab.optimize(&mut cost, &|j| j < art0)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut col_val = vec![0.0; total];
    for (i, &b) in tab.basis.iter().enumerate() {
        col_val[b] = tab.a[i][total];
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, offset } => offset + col_val[col],
            VarMap::Flip { col, offset } => offset - col_val[col],
            VarMap::Split { pos, neg } => col_val[pos] - col_val[neg],
        })
        .collect();
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
    debug_assert!((objective - (cost_offset - cost[total])).abs() <= 1e-6 * (1.0 + objective.abs()));
    Ok(LpOutcome::Optimal { x, objective })
}
