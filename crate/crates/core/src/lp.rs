//! Dense two-phase primal simplex for small linear programs.
//!
//! Problems are stated as minimize `c·x` subject to linear rows
//! (`≤`, `≥`, `=`) and per-variable bounds, any of which may be infinite.
//! The solver is deterministic: entering columns are chosen by Dantzig's rule
//! until the objective stalls on degenerate pivots, after which Bland's
//! smallest-index rule takes over so cycling cannot occur.

use thiserror::Error;

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-9;
const FEAS_EPS: f64 = 1e-7;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Clone, Debug)]
struct Var {
    lower: f64,
    upper: f64,
    cost: f64,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LpError {
    #[error("linear program is infeasible (phase-one residual {0:e})")]
    Infeasible(f64),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

impl LpSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.0]
    }
}

/// A linear program under construction.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    vars: Vec<Var>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, lower: f64, upper: f64, cost: f64) -> VarId {
        self.vars.push(Var { lower, upper, cost });
        VarId(self.vars.len() - 1)
    }

    pub fn set_cost(&mut self, v: VarId, cost: f64) {
        self.vars[v.0].cost = cost;
    }

    pub fn clear_costs(&mut self) {
        for v in &mut self.vars {
            v.cost = 0.0;
        }
    }

    pub fn add_row(&mut self, coeffs: &[(VarId, f64)], relation: Relation, rhs: f64) {
        let coeffs = coeffs.iter().filter(|(_, a)| *a != 0.0).map(|(v, a)| (v.0, *a)).collect();
        self.rows.push(Row { coeffs, relation, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xi) in self.vars.iter().zip(x) {
            worst = worst.max(v.lower - xi).max(xi - v.upper);
        }
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match r.relation {
                Relation::Le => lhs - r.rhs,
                Relation::Ge => r.rhs - lhs,
                Relation::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        StandardForm::build(self).solve(self)
    }
}

/// How an original variable maps onto non-negative tableau columns:
/// `x = offset + Σ sign · column`.
#[derive(Clone, Debug)]
struct VarMap {
    offset: f64,
    terms: Vec<(usize, f64)>,
}

struct StandardForm {
    maps: Vec<VarMap>,
    /// Dense constraint matrix, `m` rows of `n` columns, rhs kept apart.
    a: Vec<f64>,
    b: Vec<f64>,
    m: usize,
    n: usize,
    /// Columns that are artificial variables.
    first_artificial: usize,
    basis: Vec<usize>,
    cost: Vec<f64>,
    cost_offset: f64,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut n_struct = 0;
        let mut maps = Vec::with_capacity(lp.vars.len());
        // (column, upper bound on the shifted column)
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for v in &lp.vars {
            let map = match (v.lower.is_finite(), v.upper.is_finite()) {
                (true, _) => {
                    let col = n_struct;
                    n_struct += 1;
                    if v.upper.is_finite() {
                        bound_rows.push((col, v.upper - v.lower));
                    }
                    VarMap { offset: v.lower, terms: vec![(col, 1.0)] }
                }
                (false, true) => {
                    let col = n_struct;
                    n_struct += 1;
                    VarMap { offset: v.upper, terms: vec![(col, -1.0)] }
                }
                (false, false) => {
                    let col = n_struct;
                    n_struct += 2;
                    VarMap { offset: 0.0, terms: vec![(col, 1.0), (col + 1, -1.0)] }
                }
            };
            maps.push(map);
        }

        // Rows in structural columns, normalized to rhs ≥ 0.
        let mut rows: Vec<(Vec<(usize, f64)>, Relation, f64)> = Vec::with_capacity(lp.rows.len() + bound_rows.len());
        for r in &lp.rows {
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            let mut rhs = r.rhs;
            for &(j, a) in &r.coeffs {
                rhs -= a * maps[j].offset;
                for &(col, sign) in &maps[j].terms {
                    coeffs.push((col, a * sign));
                }
            }
            rows.push((coeffs, r.relation, rhs));
        }
        for (col, ub) in bound_rows {
            rows.push((vec![(col, 1.0)], Relation::Le, ub));
        }
        for (coeffs, rel, rhs) in rows.iter_mut() {
            if *rhs < 0.0 {
                *rhs = -*rhs;
                for c in coeffs.iter_mut() {
                    c.1 = -c.1;
                }
                *rel = match *rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }

        let m = rows.len();
        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = n_struct + n_slack;
        let n = first_artificial + n_art;
        let mut a = vec![0.0; m * n];
        let mut b = vec![0.0; m];
        let mut basis = vec![0; m];
        let (mut slack, mut art) = (n_struct, first_artificial);
        for (i, (coeffs, rel, rhs)) in rows.into_iter().enumerate() {
            let row = &mut a[i * n..(i + 1) * n];
            for (col, v) in coeffs {
                row[col] += v;
            }
            b[i] = rhs;
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }

        let mut cost = vec![0.0; n];
        let mut cost_offset = 0.0;
        for (v, map) in lp.vars.iter().zip(&maps) {
            cost_offset += v.cost * map.offset;
            for &(col, sign) in &map.terms {
                cost[col] += v.cost * sign;
            }
        }
        StandardForm { maps, a, b, m, n, first_artificial, basis, cost, cost_offset }
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [f64], obj_val: &mut f64) {
        let n = self.n;
        let p = self.a[r * n + c];
        for v in &mut self.a[r * n..(r + 1) * n] {
            *v /= p;
        }
        self.b[r] /= p;
        let (pivot_row, pivot_b) = (self.a[r * n..(r + 1) * n].to_vec(), self.b[r]);
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * n + c];
            if f != 0.0 {
                let row = &mut self.a[i * n..(i + 1) * n];
                for (x, &pr) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * pr;
                }
                row[c] = 0.0;
                self.b[i] -= f * pivot_b;
                if self.b[i] < 0.0 && self.b[i] > -PIVOT_EPS {
                    self.b[i] = 0.0;
                }
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for (x, &pr) in obj.iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
            obj[c] = 0.0;
            *obj_val -= f * pivot_b;
        }
        self.basis[r] = c;
    }

    /// Run simplex iterations on reduced-cost row `obj` over columns `< limit`.
    fn iterate(&mut self, obj: &mut [f64], obj_val: &mut f64, limit: usize, pivots: &mut usize) -> Result<(), LpError> {
        let max_pivots = 50 * (self.m + self.n) + 1000;
        let mut stall = 0;
        loop {
            let bland = stall >= STALL_LIMIT;
            let entering = if bland {
                (0..limit).find(|&j| obj[j] < -COST_EPS)
            } else {
                let mut best = None;
                let mut best_val = -COST_EPS;
                for (j, &d) in obj[..limit].iter().enumerate() {
                    if d < best_val {
                        best_val = d;
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else { return Ok(()) };
            let n = self.n;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let aic = self.a[i * n + c];
                if aic > PIVOT_EPS {
                    let ratio = self.b[i] / aic;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else { return Err(LpError::Unbounded) };
            stall = if ratio <= 1e-12 { stall + 1 } else { 0 };
            self.pivot(r, c, obj, obj_val);
            *pivots += 1;
            if *pivots > max_pivots {
                return Err(LpError::IterationLimit(max_pivots));
            }
        }
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let (m, n) = (self.m, self.n);
        let mut pivots = 0;

        if self.first_artificial < n {
            // phase one: minimize the sum of artificials
            let mut obj = vec![0.0; n];
            let mut obj_val = 0.0;
            for j in self.first_artificial..n {
                obj[j] = 1.0;
            }
            for i in 0..m {
                if self.basis[i] >= self.first_artificial {
                    for j in 0..n {
                        obj[j] -= self.a[i * n + j];
                    }
                    obj_val -= self.b[i];
                }
            }
            self.iterate(&mut obj, &mut obj_val, n, &mut pivots)?;
            let residual = -obj_val;
            let scale = 1.0 + self.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if residual > FEAS_EPS * scale {
                return Err(LpError::Infeasible(residual));
            }
            // drive remaining artificials out of the basis
            for r in 0..m {
                if self.basis[r] >= self.first_artificial {
                    let c = (0..self.first_artificial).find(|&j| self.a[r * n + j].abs() > PIVOT_EPS);
                    if let Some(c) = c {
                        let mut dummy = vec![0.0; n];
                        let mut dv = 0.0;
                        self.pivot(r, c, &mut dummy, &mut dv);
                        pivots += 1;
                    }
                }
            }
        }

        // phase two
        let mut obj = self.cost.clone();
        let mut obj_val = 0.0;
        for i in 0..m {
            let cb = obj[self.basis[i]];
            if cb != 0.0 {
                for j in 0..n {
                    obj[j] -= cb * self.a[i * n + j];
                }
                obj_val -= cb * self.b[i];
            }
        }
        let limit = self.first_artificial;
        self.iterate(&mut obj, &mut obj_val, limit, &mut pivots)?;

        let mut cols = vec![0.0; n];
        for i in 0..m {
            cols[self.basis[i]] = self.b[i];
        }
        let values: Vec<f64> = self
            .maps
            .iter()
            .map(|map| map.offset + map.terms.iter().map(|&(c, s)| s * cols[c]).sum::<f64>())
            .collect();
        let objective: f64 = lp.vars.iter().zip(&values).map(|(v, x)| v.cost * x).sum();
        debug_assert!((objective - (self.cost_offset - obj_val)).abs() <= 1e-6 * (1.0 + objective.abs()));
        Ok(LpSolution { values, objective, pivots })
    }
}
