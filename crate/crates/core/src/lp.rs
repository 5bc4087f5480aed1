//! Small dense linear programs.
//!
//! Two-phase tableau simplex for `minimize cᵀx` subject to linear rows and
//! `x ≥ 0`. Pricing is Dantzig's most-negative reduced cost; after a run of
//! degenerate pivots the solver switches to Bland's rule, which cannot cycle.
//! Ratio-test ties go to the largest pivot element, or to the lowest basic
//! variable index once Bland's rule is active.
//!
//! Sized for the bound solvers: a few hundred rows and columns at most.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }

    /// Signed violation at `x` (positive means violated).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        match self.relation {
            Relation::Le => lhs - self.rhs,
            Relation::Ge => self.rhs - lhs,
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `minimize objectiveᵀx` subject to `constraints` and `x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Multiplier of each row: the rate of change of the optimum per unit of rhs.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-10;
const DEGENERATE_STREAK: usize = 8;

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        LpProblem {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.objective.len());
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    /// Largest row violation at `x`, also counting negative entries.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0f64, f64::max);
        x.iter().fold(rows, |acc, &v| acc.max(-v))
    }

    /// Solve after equilibrating rows, columns and the objective so that
    /// every scaled entry has magnitude at most one; tolerances are then
    /// meaningful whatever the units of the input.
    pub fn solve(&self) -> LpSolution {
        let max_abs = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, |a, v| a.max(v.abs()));
        let unit = |m: f64| if m > 0.0 && m.is_finite() { 1.0 / m } else { 1.0 };
        let row_scale: Vec<f64> = self
            .constraints
            .iter()
            .map(|c| unit(max_abs(&mut c.coeffs.iter().copied())))
            .collect();
        let col_scale: Vec<f64> = (0..self.vars())
            .map(|j| {
                unit(max_abs(
                    &mut self.constraints.iter().zip(&row_scale).map(|(c, r)| c.coeffs[j] * r),
                ))
            })
            .collect();
        let cost: Vec<f64> = self.objective.iter().zip(&col_scale).map(|(c, s)| c * s).collect();
        let cost_scale = unit(max_abs(&mut cost.iter().copied()));
        let scaled = LpProblem {
            objective: cost.iter().map(|c| c * cost_scale).collect(),
            constraints: self
                .constraints
                .iter()
                .zip(&row_scale)
                .map(|(c, &r)| Constraint {
                    coeffs: c.coeffs.iter().zip(&col_scale).map(|(a, s)| a * r * s).collect(),
                    relation: c.relation,
                    rhs: c.rhs * r,
                })
                .collect(),
        };
        let mut sol = Tableau::build(&scaled).run();
        for (x, s) in sol.x.iter_mut().zip(&col_scale) {
            *x *= s;
        }
        for (y, r) in sol.duals.iter_mut().zip(&row_scale) {
            *y *= r / cost_scale;
        }
        sol.objective = sol.x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        sol
    }
}

struct Tableau {
    rows: usize,
    /// structural + slack/surplus + artificial
    cols: usize,
    stride: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    n_struct: usize,
    art_start: usize,
    /// Column holding `+e_i` for row `i` (slack or artificial), used for duals.
    unit_col: Vec<usize>,
    negated: Vec<bool>,
    objective: Vec<f64>,
    /// Costs currently priced into the objective row, by column.
    cost: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn build(p: &LpProblem) -> Tableau {
        let m = p.constraints.len();
        let n = p.vars();
        let mut negated = vec![false; m];
        let mut rel = Vec::with_capacity(m);
        for (i, c) in p.constraints.iter().enumerate() {
            let mut r = c.relation;
            if c.rhs < 0.0 {
                negated[i] = true;
                r = match r {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            rel.push(r);
        }
        let n_slack = rel.iter().filter(|r| **r != Relation::Eq).count();
        let n_art = rel.iter().filter(|r| **r != Relation::Le).count();
        let cols = n + n_slack + n_art;
        let stride = cols + 1;
        let mut data = vec![0.0; (m + 1) * stride];
        let mut basis = vec![0; m];
        let mut unit_col = vec![0; m];
        let mut slack = n;
        let art_start = n + n_slack;
        let mut art = art_start;
        for (i, c) in p.constraints.iter().enumerate() {
            let sign = if negated[i] { -1.0 } else { 1.0 };
            let row = &mut data[i * stride..(i + 1) * stride];
            for (j, &a) in c.coeffs.iter().enumerate() {
                row[j] = sign * a;
            }
            row[cols] = sign * c.rhs;
            match rel[i] {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis[i] = slack;
                    unit_col[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis[i] = art;
                    unit_col[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis[i] = art;
                    unit_col[i] = art;
                    art += 1;
                }
            }
        }
        Tableau {
            rows: m,
            cols,
            stride,
            data,
            basis,
            n_struct: n,
            art_start,
            unit_col,
            negated,
            objective: p.objective.clone(),
            cost: Vec::new(),
            iterations: 0,
            max_iterations: 50 * (m + cols) + 1000,
        }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.stride + c]
    }

    fn obj_row(&self) -> usize {
        self.rows
    }

    /// Load `cost` (indexed by column) into the objective row and price out
    /// the current basis.
    fn set_costs(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.reprice();
    }

    /// Rebuild the objective row from `self.cost`, discarding the rounding
    /// error accumulated over pivots.
    fn reprice(&mut self) {
        let s = self.stride;
        let (body, obj) = self.data.split_at_mut(self.rows * s);
        for (c, d) in obj.iter_mut().enumerate() {
            *d = if c < self.cols { self.cost[c] } else { 0.0 };
        }
        for (row, &b) in body.chunks(s).zip(&self.basis) {
            let cb = self.cost[b];
            if cb != 0.0 {
                for (d, a) in obj.iter_mut().zip(row) {
                    *d -= cb * a;
                }
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let s = self.stride;
        let inv = 1.0 / self.data[pr * s + pc];
        for c in 0..s {
            self.data[pr * s + c] *= inv;
        }
        self.data[pr * s + pc] = 1.0;
        let (before, rest) = self.data.split_at_mut(pr * s);
        let (prow, after) = rest.split_at_mut(s);
        let eliminate = |row: &mut [f64]| {
            let f = row[pc];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
                row[pc] = 0.0;
            }
        };
        before.chunks_mut(s).for_each(eliminate);
        after.chunks_mut(s).for_each(eliminate);
        for r in 0..self.rows {
            let b = &mut self.data[r * s + self.cols];
            if *b < 0.0 && *b > -1e-12 {
                *b = 0.0;
            }
        }
        self.basis[pr] = pc;
        self.iterations += 1;
    }

    /// Simplex iterations on the current objective row; columns `>= col_limit`
    /// never enter. With `bounded` set the objective is known to be bounded
    /// below, so a column without a pivot row only has a spurious negative
    /// reduced cost and is skipped until the next pivot.
    fn optimize(&mut self, col_limit: usize, bounded: bool) -> LpStatus {
        let mut degenerate = 0usize;
        let mut repriced = false;
        let mut blocked = vec![false; col_limit];
        let z = self.obj_row();
        loop {
            if self.iterations >= self.max_iterations {
                return LpStatus::IterationLimit;
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut enter = None;
            let mut best = -COST_EPS;
            for c in (0..col_limit).filter(|&c| !blocked[c]) {
                let d = self.at(z, c);
                if d < best {
                    enter = Some(c);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(pc) = enter else {
                return LpStatus::Optimal;
            };
            // Minimum ratio over nonnegative right-hand sides. Near-ties go to
            // the largest pivot element, or to the lowest basic index under
            // Bland's rule.
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.at(r, self.cols).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        let tol = 1e-12 * (1.0 + lratio.abs());
                        let better = if ratio < lratio - tol {
                            true
                        } else if ratio <= lratio + tol {
                            if bland {
                                self.basis[r] < self.basis[lr]
                            } else {
                                a > self.at(lr, pc)
                            }
                        } else {
                            false
                        };
                        if better {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            let Some((pr, ratio)) = leave else {
                if !repriced {
                    self.reprice();
                    repriced = true;
                    continue;
                }
                if bounded {
                    blocked[pc] = true;
                    continue;
                }
                return LpStatus::Unbounded;
            };
            if ratio.abs() <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(pr, pc);
            repriced = false;
            blocked.iter_mut().for_each(|b| *b = false);
        }
    }

    fn run(mut self) -> LpSolution {
        let n_art = self.cols - self.art_start;
        let scale = 1.0
            + (0..self.rows)
                .map(|r| self.at(r, self.cols).abs())
                .fold(0.0, f64::max);
        if n_art > 0 {
            let mut cost = vec![0.0; self.cols];
            for c in cost.iter_mut().skip(self.art_start) {
                *c = 1.0;
            }
            self.set_costs(cost);
            match self.optimize(self.cols, true) {
                LpStatus::Optimal => {}
                LpStatus::IterationLimit => return self.finish(LpStatus::IterationLimit),
                // phase one is bounded below by zero
                _ => return self.finish(LpStatus::Infeasible),
            }
            // Read the residual off the basic artificials: the objective row
            // accumulates cancellation error.
            let infeasibility = (0..self.rows)
                .filter(|&r| self.basis[r] >= self.art_start)
                .map(|r| self.at(r, self.cols).abs())
                .fold(0.0, f64::max);
            if infeasibility > 1e-9 * scale {
                return self.finish(LpStatus::Infeasible);
            }
            // Drive zero-level artificials out of the basis where possible.
            for r in 0..self.rows {
                if self.basis[r] >= self.art_start {
                    if let Some(c) = (0..self.art_start).find(|&c| self.at(r, c).abs() > 1e-9) {
                        self.pivot(r, c);
                    }
                }
            }
        }
        let mut cost = vec![0.0; self.cols];
        cost[..self.n_struct].copy_from_slice(&self.objective);
        self.set_costs(cost);
        let status = self.optimize(self.art_start, false);
        self.finish(status)
    }

    fn finish(self, status: LpStatus) -> LpSolution {
        let mut x = vec![0.0; self.n_struct];
        for r in 0..self.rows {
            let b = self.basis[r];
            if b < self.n_struct {
                x[b] = self.at(r, self.cols).max(0.0);
            }
        }
        let objective = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        let z = self.obj_row();
        let duals = (0..self.rows)
            .map(|i| {
                let pi = -self.at(z, self.unit_col[i]);
                if self.negated[i] {
                    -pi
                } else {
                    pi
                }
            })
            .collect();
        LpSolution {
            status,
            x,
            objective,
            duals,
            iterations: self.iterations,
        }
    }
}
