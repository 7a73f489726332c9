//! Dense two-phase tableau simplex.
//!
//! Entering columns are priced by largest reduced cost until a run of
//! degenerate pivots is seen, after which Bland's smallest-index rule is used
//! for the rest of the phase, which rules out cycling. Leaving rows use the
//! minimum ratio test with ties broken towards the smallest basic index.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub coefficients: Vec<T>,
    pub relation: Relation,
    pub bound: T,
}

/// `maximize objective . x` subject to linear constraints and per-variable
/// bounds `lo <= x <= hi` (`hi = None` means unbounded above).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub bounds: Vec<(T, Option<T>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Optimal point; empty when infeasible.
    pub x: Vec<T>,
    pub objective: T,
}

impl<T: Scalar> LinearProgram<T> {
    /// Program over `vars` nonnegative variables with no constraints yet.
    pub fn maximize(objective: Vec<T>) -> Self {
        let bounds = vec![(T::zero(), None); objective.len()];
        Self {
            objective,
            constraints: Vec::new(),
            bounds,
        }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, coefficients: Vec<T>, relation: Relation, bound: T) {
        self.constraints.push(Constraint {
            coefficients,
            relation,
            bound,
        });
    }

    fn validate(&self) -> Result<()> {
        let k = self.vars();
        if self.bounds.len() != k {
            return Err(Error::MalformedLp(format!(
                "{} bounds for {k} variables",
                self.bounds.len()
            )));
        }
        if let Some((r, c)) = self
            .constraints
            .iter()
            .enumerate()
            .find(|(_, c)| c.coefficients.len() != k)
        {
            return Err(Error::MalformedLp(format!(
                "constraint {r} has {} coefficients, expected {k}",
                c.coefficients.len()
            )));
        }
        if let Some(v) = self
            .bounds
            .iter()
            .position(|(lo, hi)| hi.as_ref().is_some_and(|h| h < lo))
        {
            return Err(Error::MalformedLp(format!("variable {v} has lo > hi")));
        }
        Ok(())
    }
}

const DEGENERATE_STREAK_BEFORE_BLAND: usize = 50;
const MAX_PIVOTS: usize = 100_000;

struct Tableau<T> {
    /// Constraint rows followed by the objective row; last column is the rhs.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    eps: T,
}

impl<T: Scalar> Tableau<T> {
    fn width(&self) -> usize {
        self.rows[0].len()
    }

    fn rhs_col(&self) -> usize {
        self.width() - 1
    }

    fn obj(&self) -> usize {
        self.rows.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let rhs = self.rhs_col();
        let obj = self.obj();
        let eps = self.eps.clone();
        let piv = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x = x.clone() / piv.clone();
        }
        self.rows[r][c] = T::one();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c].clone();
            if factor.is_zero() {
                continue;
            }
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = x.clone() - factor.clone() * p.clone();
                }
            }
            row[c] = T::zero();
            if i != obj && row[rhs].abs() <= eps {
                row[rhs] = T::zero();
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the objective row over `allowed` columns.
    fn optimize(&mut self, allowed: usize) -> Result<()> {
        let obj = self.obj();
        let rhs = self.rhs_col();
        let mut degenerate = 0usize;
        let mut bland = false;
        for _ in 0..MAX_PIVOTS {
            let entering = if bland {
                (0..allowed).find(|&j| self.rows[obj][j] > self.eps)
            } else {
                let mut best: Option<usize> = None;
                for j in 0..allowed {
                    if self.rows[obj][j] > self.eps && best.is_none_or(|b| self.rows[obj][j] > self.rows[obj][b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, T)> = None;
            for r in 0..obj {
                let a = &self.rows[r][c];
                if *a <= self.eps {
                    continue;
                }
                let ratio = self.rows[r][rhs].clone() / a.clone();
                let better = match &leaving {
                    None => true,
                    Some((lr, best)) => {
                        ratio < best.clone() - self.eps.clone()
                            || ((ratio.clone() - best.clone()).abs() <= self.eps && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            let Some((r, ratio)) = leaving else {
                return Err(Error::Unbounded);
            };
            if ratio.abs() <= self.eps {
                degenerate += 1;
                if degenerate >= DEGENERATE_STREAK_BEFORE_BLAND {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
        Err(Error::IterationLimit(MAX_PIVOTS))
    }

    fn load_objective(&mut self, costs: &[T]) {
        let obj = self.obj();
        let width = self.width();
        let mut row = vec![T::zero(); width];
        row[..costs.len()].clone_from_slice(costs);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = costs.get(b).cloned().unwrap_or_else(T::zero);
            if cb.is_zero() {
                continue;
            }
            for (x, a) in row.iter_mut().zip(&self.rows[r]) {
                *x = x.clone() - cb.clone() * a.clone();
            }
        }
        self.rows[obj] = row;
    }
}

/// Solves `lp` to optimality, reporting infeasibility as a status and an
/// unbounded objective as an error.
pub fn solve_lp<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    lp.validate()?;
    let k = lp.vars();
    let eps = T::pivot_tolerance();

    // Shift x = lo + y so every variable is y >= 0; finite upper bounds become rows.
    let mut rows: Vec<(Vec<T>, Relation, T)> = Vec::new();
    for c in &lp.constraints {
        let shift = c
            .coefficients
            .iter()
            .zip(&lp.bounds)
            .fold(T::zero(), |acc, (a, (lo, _))| acc + a.clone() * lo.clone());
        rows.push((c.coefficients.clone(), c.relation, c.bound.clone() - shift));
    }
    for (v, (lo, hi)) in lp.bounds.iter().enumerate() {
        if let Some(hi) = hi {
            let mut a = vec![T::zero(); k];
            a[v] = T::one();
            rows.push((a, Relation::Le, hi.clone() - lo.clone()));
        }
    }
    for (a, rel, b) in rows.iter_mut() {
        if b.is_neg() {
            a.iter_mut().for_each(|x| *x = -x.clone());
            *b = -b.clone();
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let slacks = rows.iter().filter(|(_, rel, _)| *rel != Relation::Eq).count();
    let artificials = rows.iter().filter(|(_, rel, _)| *rel != Relation::Le).count();
    let art_start = k + slacks;
    let width = art_start + artificials + 1;
    let mut tab = Tableau {
        rows: Vec::with_capacity(rows.len() + 1),
        basis: Vec::with_capacity(rows.len()),
        eps: eps.clone(),
    };
    let (mut s, mut a) = (k, art_start);
    for (coeffs, rel, b) in rows {
        let mut row = vec![T::zero(); width];
        row[..k].clone_from_slice(&coeffs);
        row[width - 1] = b;
        match rel {
            Relation::Le => {
                row[s] = T::one();
                tab.basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = -T::one();
                s += 1;
                row[a] = T::one();
                tab.basis.push(a);
                a += 1;
            }
            Relation::Eq => {
                row[a] = T::one();
                tab.basis.push(a);
                a += 1;
            }
        }
        tab.rows.push(row);
    }
    tab.rows.push(vec![T::zero(); width]);

    if artificials > 0 {
        let mut phase_one = vec![T::zero(); width - 1];
        phase_one[art_start..].iter_mut().for_each(|x| *x = -T::one());
        tab.load_objective(&phase_one);
        tab.optimize(width - 1)?;
        // Objective row rhs holds minus the objective value, i.e. the artificial sum.
        let infeasibility = tab.rows[tab.obj()][width - 1].clone();
        if infeasibility > T::tolerance() {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: T::zero(),
            });
        }
        let mut r = 0;
        while r < tab.obj() {
            if tab.basis[r] >= art_start {
                match (0..art_start).find(|&j| tab.rows[r][j].abs() > eps) {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut costs = vec![T::zero(); art_start];
    costs[..k].clone_from_slice(&lp.objective);
    tab.load_objective(&costs);
    tab.optimize(art_start)?;

    let mut y = vec![T::zero(); k];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < k {
            y[b] = tab.rows[r][width - 1].clone();
        }
    }
    let x: Vec<T> = y
        .into_iter()
        .zip(&lp.bounds)
        .map(|(y, (lo, _))| y + lo.clone())
        .collect();
    let objective = x
        .iter()
        .zip(&lp.objective)
        .fold(T::zero(), |acc, (x, c)| acc + x.clone() * c.clone());
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
    })
}
