//! Exact linear programming over the rationals.
//!
//! Two-phase primal simplex on a dense tableau with Bland's anti-cycling rule.
//! All variables are nonnegative. Optima are attained at vertices of the
//! feasible polytope, so an `Optimal` outcome is a vertex enumeration answer
//! with no numerical tolerance anywhere.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<Rational>,
    eq: Vec<(Vec<Rational>, Rational)>,
    le: Vec<(Vec<Rational>, Rational)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: Rational, x: Vec<Rational> },
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// A program over `num_vars` nonnegative variables with zero objective.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            eq: Vec::new(),
            le: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_objective(&mut self, c: Vec<Rational>) {
        assert_eq!(c.len(), self.num_vars);
        self.objective = c;
    }

    pub fn add_eq(&mut self, row: Vec<Rational>, rhs: Rational) {
        assert_eq!(row.len(), self.num_vars);
        self.eq.push((row, rhs));
    }

    pub fn add_le(&mut self, row: Vec<Rational>, rhs: Rational) {
        assert_eq!(row.len(), self.num_vars);
        self.le.push((row, rhs));
    }

    pub fn add_ge(&mut self, row: Vec<Rational>, rhs: Rational) {
        let neg = row.into_iter().map(|x| -x).collect();
        self.add_le(neg, -rhs);
    }

    /// Maximizes the objective.
    pub fn maximize(&self) -> LpOutcome {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Structural + slack columns; artificials follow.
    real_cols: usize,
    total_cols: usize,
    num_vars: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars;
        let slacks = lp.le.len();
        let m = lp.eq.len() + lp.le.len();
        let real_cols = n + slacks;
        let total_cols = real_cols + m;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let all = lp
            .eq
            .iter()
            .map(|(r, b)| (r, b, None))
            .chain(lp.le.iter().enumerate().map(|(i, (r, b))| (r, b, Some(i))));
        for (i, (row, rhs, slack)) in all.enumerate() {
            let mut t = vec![Rational::zero(); total_cols + 1];
            t[..n].clone_from_slice(row);
            if let Some(s) = slack {
                t[n + s] = Rational::one();
            }
            t[total_cols] = rhs.clone();
            if rhs.is_negative() {
                for x in t.iter_mut() {
                    *x = -x.clone();
                }
            }
            t[real_cols + i] = Rational::one();
            rows.push(t);
            basis.push(real_cols + i);
        }
        Tableau {
            rows,
            basis,
            real_cols,
            total_cols,
            num_vars: n,
        }
    }

    fn pivot(&mut self, obj: &mut [Rational], r: usize, c: usize) {
        let inv = Rational::one() / &self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            *x *= &inv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for (x, y) in obj.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the z-row `obj` (entries are z_j - c_j, last is value).
    /// Returns false when unbounded.
    fn iterate(&mut self, obj: &mut [Rational], allowed_cols: usize) -> bool {
        let rhs = self.total_cols;
        loop {
            let Some(c) = (0..allowed_cols).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(obj, r, c);
        }
    }

    fn solve(mut self, objective: &[Rational]) -> LpOutcome {
        let rhs = self.total_cols;
        // Phase 1: maximize -sum(artificials).
        let mut obj = vec![Rational::zero(); self.total_cols + 1];
        for row in &self.rows {
            for j in 0..self.real_cols {
                obj[j] -= &row[j];
            }
            obj[rhs] -= &row[rhs];
        }
        self.iterate(&mut obj, self.total_cols);
        if !obj[rhs].is_zero() {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.real_cols {
                match (0..self.real_cols).find(|&j| !self.rows[r][j].is_zero()) {
                    Some(c) => {
                        let mut dummy = vec![Rational::zero(); self.total_cols + 1];
                        self.pivot(&mut dummy, r, c);
                        r += 1;
                    }
                    None => {
                        self.rows.remove(r);
                        self.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        // Phase 2.
        let cost = |j: usize| -> Rational {
            if j < self.num_vars {
                objective[j].clone()
            } else {
                Rational::zero()
            }
        };
        let mut obj = vec![Rational::zero(); self.total_cols + 1];
        for j in 0..self.real_cols {
            obj[j] = -cost(j);
        }
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost(self.basis[i]);
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.real_cols {
                obj[j] += &cb * &row[j];
            }
            obj[rhs] += &cb * &row[rhs];
        }
        if !self.iterate(&mut obj, self.real_cols) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); self.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_vars {
                x[b] = self.rows[i][rhs].clone();
            }
        }
        LpOutcome::Optimal {
            value: obj[rhs].clone(),
            x,
        }
    }
}
