//! Dense two-phase tableau simplex with Bland's rule.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const MAX_PIVOTS: usize = 200_000;

/// minimise `objective · x` subject to `ub` rows (`a · x <= b`), `eq` rows (`a · x = b`)
/// and `x_j >= 0` wherever `nonneg[j]` holds.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub n: usize,
    pub objective: Vec<f64>,
    pub ub: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub nonneg: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        LinearProgram {
            n,
            objective: vec![0.0; n],
            ub: Vec::new(),
            eq: Vec::new(),
            nonneg: vec![true; n],
        }
    }

    pub fn free(n: usize) -> Self {
        let mut lp = Self::new(n);
        lp.nonneg = vec![false; n];
        lp
    }

    pub fn le(&mut self, a: Vec<f64>, b: f64) -> &mut Self {
        self.ub.push((a, b));
        self
    }

    pub fn eq(&mut self, a: Vec<f64>, b: f64) -> &mut Self {
        self.eq.push((a, b));
        self
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        for (a, b) in self.ub.iter().chain(&self.eq) {
            if a.len() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: a.len(),
                });
            }
            if !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("linear program"));
            }
        }
        Tableau::build(self).run(self)
    }

    /// Convenience: is the constraint set nonempty?
    pub fn feasible(&self) -> Result<bool> {
        let mut probe = self.clone();
        probe.objective = vec![0.0; self.n];
        Ok(matches!(probe.solve()?, LpOutcome::Optimal { .. }))
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// (rows + 1) x (cols + 1); last row is the reduced-cost row, last column the rhs.
    t: Vec<f64>,
    basis: Vec<usize>,
    first_art: usize,
    /// column index of x_j^+ and, for free variables, x_j^-
    var_cols: Vec<(usize, Option<usize>)>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let mut var_cols = Vec::with_capacity(lp.n);
        let mut c = 0;
        for j in 0..lp.n {
            if lp.nonneg[j] {
                var_cols.push((c, None));
                c += 1;
            } else {
                var_cols.push((c, Some(c + 1)));
                c += 2;
            }
        }
        let n_struct = c;
        let n_slack = lp.ub.len();
        let rows = lp.ub.len() + lp.eq.len();
        // every row with a negative rhs (after the slack sign) or equality needs an artificial
        let mut needs_art = Vec::with_capacity(rows);
        for (_, b) in &lp.ub {
            needs_art.push(*b < 0.0);
        }
        for _ in &lp.eq {
            needs_art.push(true);
        }
        let n_art = needs_art.iter().filter(|&&x| x).count();
        let first_art = n_struct + n_slack;
        let cols = first_art + n_art;
        let w = cols + 1;
        let mut t = vec![0.0; (rows + 1) * w];
        let mut basis = vec![0; rows];
        let mut art = first_art;
        for (r, (a, b)) in lp.ub.iter().chain(&lp.eq).enumerate() {
            let sign = if *b < 0.0 { -1.0 } else { 1.0 };
            for (j, &(cp, cm)) in var_cols.iter().enumerate() {
                t[r * w + cp] = sign * a[j];
                if let Some(cm) = cm {
                    t[r * w + cm] = -sign * a[j];
                }
            }
            if r < n_slack {
                t[r * w + n_struct + r] = sign;
            }
            t[r * w + cols] = sign * b;
            if needs_art[r] {
                t[r * w + art] = 1.0;
                basis[r] = art;
                art += 1;
            } else {
                basis[r] = n_struct + r;
            }
        }
        Tableau {
            rows,
            cols,
            t,
            basis,
            first_art,
            var_cols,
        }
    }

    fn w(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.w() + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.w();
        let p = self.t[pr * w + pc];
        for k in 0..w {
            self.t[pr * w + k] /= p;
        }
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f != 0.0 {
                for k in 0..w {
                    self.t[r * w + k] -= f * self.t[pr * w + k];
                }
            }
        }
        self.basis[pr] = pc;
    }

    /// Load a cost vector into the objective row and price out the basis.
    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.w();
        let obj = self.rows * w;
        for k in 0..w {
            self.t[obj + k] = if k < self.cols { cost[k] } else { 0.0 };
        }
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for k in 0..w {
                    self.t[obj + k] -= cb * self.t[r * w + k];
                }
            }
        }
    }

    /// Minimise the loaded objective over columns `< allowed`. Returns false if unbounded.
    fn optimise(&mut self, allowed: usize) -> Result<bool> {
        let obj = self.rows;
        for _ in 0..MAX_PIVOTS {
            let entering = (0..allowed).find(|&j| self.at(obj, j) < -COST_TOL);
            let Some(pc) = entering else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, self.cols) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bv)) => {
                            if ratio < bv - 1e-12
                                || (ratio <= bv + 1e-12 && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bv))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(false),
                Some((pr, _)) => self.pivot(pr, pc),
            }
        }
        Err(Error::Lp("pivot limit reached"))
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpOutcome> {
        if self.first_art < self.cols {
            let mut cost = vec![0.0; self.cols];
            for c in cost.iter_mut().skip(self.first_art) {
                *c = 1.0;
            }
            self.set_costs(&cost);
            self.optimise(self.cols)?;
            let scale = 1.0
                + lp
                    .ub
                    .iter()
                    .chain(&lp.eq)
                    .map(|(_, b)| b.abs())
                    .fold(0.0, f64::max);
            let infeas = -self.at(self.rows, self.cols);
            if infeas > 1e-9 * scale {
                return Ok(LpOutcome::Infeasible);
            }
            // drive zero-level artificials out of the basis where possible
            for r in 0..self.rows {
                if self.basis[r] >= self.first_art {
                    if let Some(pc) = (0..self.first_art).find(|&j| self.at(r, j).abs() > PIVOT_TOL) {
                        self.pivot(r, pc);
                    }
                }
            }
        }
        let mut cost = vec![0.0; self.cols];
        for (j, &(cp, cm)) in self.var_cols.iter().enumerate() {
            cost[cp] = lp.objective[j];
            if let Some(cm) = cm {
                cost[cm] = -lp.objective[j];
            }
        }
        self.set_costs(&cost);
        if !self.optimise(self.first_art)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut col_val = vec![0.0; self.cols];
        for r in 0..self.rows {
            col_val[self.basis[r]] = self.at(r, self.cols);
        }
        let x: Vec<f64> = self
            .var_cols
            .iter()
            .map(|&(cp, cm)| col_val[cp] - cm.map_or(0.0, |c| col_val[c]))
            .collect();
        let value = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        Ok(LpOutcome::Optimal { x, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(o: LpOutcome) -> (Vec<f64>, f64) {
        match o {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_maximisation() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-3.0, -5.0];
        lp.le(vec![1.0, 0.0], 4.0)
            .le(vec![0.0, 2.0], 12.0)
            .le(vec![3.0, 2.0], 18.0);
        let (x, v) = optimal(lp.solve().unwrap());
        assert!((v + 36.0).abs() < 1e-9);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_free_variables() {
        // min x + y, x - y = -3, x >= -1 (free vars), y <= 10
        let mut lp = LinearProgram::free(2);
        lp.objective = vec![1.0, 1.0];
        lp.eq(vec![1.0, -1.0], -3.0)
            .le(vec![-1.0, 0.0], 1.0)
            .le(vec![0.0, 1.0], 10.0);
        let (x, v) = optimal(lp.solve().unwrap());
        assert!((x[0] + 1.0).abs() < 1e-9 && (x[1] - 2.0).abs() < 1e-9);
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.le(vec![1.0], -1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![-1.0];
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = LinearProgram::new(3);
        lp.objective = vec![1.0, 2.0, 3.0];
        lp.eq(vec![1.0, 1.0, 1.0], 1.0)
            .eq(vec![2.0, 2.0, 2.0], 2.0)
            .eq(vec![1.0, 1.0, 0.0], 0.5);
        let (x, v) = optimal(lp.solve().unwrap());
        assert!((v - 2.0).abs() < 1e-9, "{x:?}");
    }
}
