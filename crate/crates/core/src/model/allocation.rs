use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fractional (random) allocation: entry `(i, j)` is the probability that
/// agent `i` receives object `j`.
///
/// Construction checks only the shape. Feasibility is reported by
/// [`check_feasible`] so that infeasible matrices can still be inspected.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<T> {
    probs: Vec<Vec<T>>,
    m: usize,
}

impl<T: Scalar> Allocation<T> {
    pub fn from_rows(probs: Vec<Vec<T>>) -> Result<Self> {
        let m = probs.first().map(Vec::len).unwrap_or(0);
        if probs.is_empty() || m == 0 {
            return Err(Error::InvalidAllocation("empty matrix".into()));
        }
        if let Some(i) = probs.iter().position(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: format!("{m} entries in row {i}"),
                found: probs[i].len().to_string(),
            });
        }
        Ok(Self { probs, m })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            probs: vec![vec![T::zero(); m]; n],
            m,
        }
    }

    /// Every agent gets `1/n` of every object.
    pub fn uniform(n: usize, m: usize) -> Self {
        let share = T::ratio(1, n as u64);
        Self {
            probs: vec![vec![share; m]; n],
            m,
        }
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, agent: usize, object: usize) -> &T {
        &self.probs[agent][object]
    }

    pub fn row(&self, agent: usize) -> &[T] {
        &self.probs[agent]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.probs
    }

    pub(crate) fn rows_mut(&mut self) -> &mut [Vec<T>] {
        &mut self.probs
    }

    pub fn row_mass(&self, agent: usize) -> T {
        self.probs[agent].iter().fold(T::zero(), |acc, x| acc + x.clone())
    }

    /// Total probability with which each object is allocated.
    pub fn column_masses(&self) -> Vec<T> {
        (0..self.m)
            .map(|j| self.probs.iter().fold(T::zero(), |acc, row| acc + row[j].clone()))
            .collect()
    }

    pub fn is_feasible(&self) -> bool {
        check_feasible(self).is_empty()
    }

    pub fn to_f64(&self) -> Allocation<f64> {
        Allocation {
            probs: self
                .probs
                .iter()
                .map(|r| r.iter().map(Scalar::to_f64_lossy).collect())
                .collect(),
            m: self.m,
        }
    }

    /// Largest absolute entrywise difference to `other` (shapes must agree).
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for (a, b) in self.probs.iter().zip(&other.probs) {
            for (x, y) in a.iter().zip(b) {
                let d = (x.clone() - y.clone()).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// A single failed feasibility constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation<T> {
    EntryOutOfRange { agent: usize, object: usize, value: T },
    ColumnOverfull { object: usize, mass: T },
}

impl<T: fmt::Display> fmt::Display for Violation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EntryOutOfRange { agent, object, value } => {
                write!(f, "p[{agent}][{object}] = {value} outside [0, 1]")
            }
            Violation::ColumnOverfull { object, mass } => {
                write!(f, "object {object} allocated with total mass {mass} > 1")
            }
        }
    }
}

/// Lists every entry outside `[0, 1]` and every object allocated more than once
/// in expectation, up to the scalar tolerance. Empty means feasible.
pub fn check_feasible<T: Scalar>(p: &Allocation<T>) -> Vec<Violation<T>> {
    let tol = T::tolerance();
    let mut out = Vec::new();
    for (i, row) in p.rows().iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if *x < -tol.clone() || *x > T::one() + tol.clone() {
                out.push(Violation::EntryOutOfRange {
                    agent: i,
                    object: j,
                    value: x.clone(),
                });
            }
        }
    }
    for (j, mass) in p.column_masses().into_iter().enumerate() {
        if mass > T::one() + tol.clone() {
            out.push(Violation::ColumnOverfull { object: j, mass });
        }
    }
    out
}
