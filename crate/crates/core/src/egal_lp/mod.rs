//! Optimal egalitarian value by linear programming.
//!
//! Variables are the allocation entries `p[i][j]` (row-major) followed by the
//! egalitarian level `lambda`. Every agent's normalized utility must reach
//! `lambda`, and each object is allocated at most once in expectation.
//! Objects may be left partly unallocated and rows carry no mass constraint.

mod simplex;

pub use simplex::{solve_lp, Constraint, LinearProgram, LpSolution, LpStatus, Relation};

use crate::error::{Error, Result};
use crate::model::{Allocation, ValuationProfile};
use crate::scalar::Scalar;

/// Optimal egalitarian level together with an allocation attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct EgalSolution<T> {
    pub value: T,
    pub allocation: Allocation<T>,
    pub status: LpStatus,
}

fn egal_program<T: Scalar>(v: &ValuationProfile<T>, envy_free: bool) -> LinearProgram<T> {
    let (n, m) = (v.n(), v.m());
    let vars = n * m + 1;
    let lambda = n * m;
    let idx = |i: usize, j: usize| i * m + j;
    let mut objective = vec![T::zero(); vars];
    objective[lambda] = T::one();
    let mut lp = LinearProgram::maximize(objective);
    // p[i][j] <= 1 is implied by the column capacity rows and p >= 0.
    let normalized: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let total = v.row_total(i);
            v.row(i).iter().map(|x| x.clone() / total.clone()).collect()
        })
        .collect();

    for (i, w) in normalized.iter().enumerate() {
        let mut a = vec![T::zero(); vars];
        for (j, wj) in w.iter().enumerate() {
            a[idx(i, j)] = -wj.clone();
        }
        a[lambda] = T::one();
        lp.push(a, Relation::Le, T::zero());
    }
    for j in 0..m {
        let mut a = vec![T::zero(); vars];
        for i in 0..n {
            a[idx(i, j)] = T::one();
        }
        lp.push(a, Relation::Le, T::one());
    }
    if envy_free {
        for (i, w) in normalized.iter().enumerate() {
            for k in (0..n).filter(|&k| k != i) {
                let mut a = vec![T::zero(); vars];
                for (j, wj) in w.iter().enumerate() {
                    a[idx(k, j)] = wj.clone();
                    a[idx(i, j)] = -wj.clone();
                }
                lp.push(a, Relation::Le, T::zero());
            }
        }
    }
    lp
}

fn solve_egal<T: Scalar>(v: &ValuationProfile<T>, envy_free: bool) -> Result<EgalSolution<T>> {
    let lp = egal_program(v, envy_free);
    let sol = solve_lp(&lp)?;
    if sol.status == LpStatus::Infeasible {
        // The uniform allocation with lambda = 0 is always feasible.
        return Err(Error::Precondition("egalitarian LP reported infeasible".into()));
    }
    let m = v.m();
    let rows: Vec<Vec<T>> = sol.x[..v.n() * m]
        .chunks(m)
        .map(|r| {
            r.iter()
                .map(|x| if x.is_neg() { T::zero() } else { x.clone() })
                .collect()
        })
        .collect();
    Ok(EgalSolution {
        value: sol.x[v.n() * m].clone(),
        allocation: Allocation::from_rows(rows)?,
        status: LpStatus::Optimal,
    })
}

/// Maximum egalitarian value over all feasible fractional allocations.
pub fn solve_oev<T: Scalar>(v: &ValuationProfile<T>) -> Result<EgalSolution<T>> {
    solve_egal(v, false)
}

/// Maximum egalitarian value over envy-free feasible allocations (the OEEF
/// mechanism's outcome).
pub fn solve_oeef<T: Scalar>(v: &ValuationProfile<T>) -> Result<EgalSolution<T>> {
    solve_egal(v, true)
}

/// Largest `n * m` accepted by [`oev_grid_oracle`].
pub const GRID_ORACLE_MAX_CELLS: usize = 6;

/// Brute-force lower bound on the optimal egalitarian value: the best
/// egalitarian value over allocations whose entries are multiples of `step`.
///
/// Raising any entry never lowers a nonnegative utility, so only grid
/// columns whose mass is as large as the grid allows are enumerated.
pub fn oev_grid_oracle(v: &ValuationProfile<f64>, step: f64) -> Result<f64> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::InvalidParameter(format!("grid step {step} outside (0, 0.5]")));
    }
    let (n, m) = (v.n(), v.m());
    if n * m > GRID_ORACLE_MAX_CELLS {
        return Err(Error::InvalidParameter(format!(
            "grid oracle limited to n*m <= {GRID_ORACLE_MAX_CELLS}, got {n}x{m}"
        )));
    }
    let units = (1.0 / step + 1e-9).floor() as usize;
    let totals: Vec<f64> = (0..n).map(|i| v.row_total(i)).collect();
    let mut utils = vec![0.0; n];
    let mut column = vec![0usize; n];
    let mut best = 0.0f64;
    grid_search(v, step, units, &totals, 0, &mut column, &mut utils, &mut best);
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn grid_search(
    v: &ValuationProfile<f64>,
    step: f64,
    units: usize,
    totals: &[f64],
    object: usize,
    column: &mut [usize],
    utils: &mut [f64],
    best: &mut f64,
) {
    if object == v.m() {
        let ev = utils
            .iter()
            .zip(totals)
            .map(|(u, t)| u / t)
            .fold(f64::INFINITY, f64::min);
        *best = best.max(ev);
        return;
    }
    // Enumerate every way to split `units` grid cells of this object among agents.
    fn compositions(agent: usize, left: usize, column: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
        if agent + 1 == column.len() {
            column[agent] = left;
            visit(column);
            return;
        }
        for t in 0..=left {
            column[agent] = t;
            compositions(agent + 1, left - t, column, visit);
        }
    }
    let mut visit = |col: &[usize]| {
        let mut next = utils.to_vec();
        for (i, &t) in col.iter().enumerate() {
            next[i] += t as f64 * step * v.value(i, object);
        }
        let mut inner = vec![0usize; col.len()];
        grid_search(v, step, units, totals, object + 1, &mut inner, &mut next, best);
    };
    compositions(0, units, column, &mut visit);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_envy_free, check_feasible, egalitarian_value};
    use num::BigRational;

    fn profile(rows: Vec<Vec<f64>>) -> ValuationProfile<f64> {
        ValuationProfile::new(rows).unwrap()
    }

    #[test]
    fn disjoint_valuations_reach_one() {
        let v = profile(vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 5.0]]);
        assert!((solve_oev(&v).unwrap().value - 1.0).abs() < 1e-9);
        assert!((solve_oeef(&v).unwrap().value - 1.0).abs() < 1e-9);
        let v = profile(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(oev_grid_oracle(&v, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn single_common_object() {
        for n in 2..=5 {
            let mut row = vec![0.0; 3];
            row[1] = 1.0;
            let v = profile(vec![row; n]);
            let sol = solve_oev(&v).unwrap();
            assert!((sol.value - 1.0 / n as f64).abs() < 1e-9);
        }
        let v = profile(vec![vec![1.0], vec![1.0]]);
        assert_eq!(oev_grid_oracle(&v, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn favourite_share_pair() {
        let v = profile(vec![vec![1.0, 0.0], vec![0.51, 0.49]]);
        let sol = solve_oev(&v).unwrap();
        assert!((sol.value - 1.0 / 1.51).abs() < 1e-9, "{}", sol.value);
        let grid = oev_grid_oracle(&v, 0.05).unwrap();
        assert!(grid <= sol.value + 1e-9 && (sol.value - grid).abs() <= 0.05);
        // Exact route: the same program in rationals gives exactly 100/151.
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let v = ValuationProfile::new(vec![vec![q(1, 1), q(0, 1)], vec![q(51, 100), q(49, 100)]]).unwrap();
        assert_eq!(solve_oev(&v).unwrap().value, q(100, 151));
    }

    #[test]
    fn borda_pair_is_two_thirds() {
        let v = profile(vec![vec![2.0, 1.0, 0.0], vec![2.0, 0.0, 1.0]]);
        let sol = solve_oev(&v).unwrap();
        assert!((sol.value - 2.0 / 3.0).abs() < 1e-9);
        assert!(check_feasible(&sol.allocation).is_empty());
        assert!((egalitarian_value(&v, &sol.allocation).unwrap() - sol.value).abs() < 1e-9);
    }

    #[test]
    fn identical_rows_oeef_is_one_over_n() {
        let v = profile(vec![vec![4.0, 2.0, 1.0, 0.5]; 3]);
        let sol = solve_oeef(&v).unwrap();
        assert!((sol.value - 1.0 / 3.0).abs() < 1e-9);
        assert!(check_envy_free(&v, &sol.allocation).unwrap());
    }

    #[test]
    fn oeef_below_oev_on_favourite_share() {
        let v = profile(vec![vec![1.0, 0.0, 0.0], vec![0.6, 0.4, 0.0], vec![0.6, 0.0, 0.4]]);
        let oev = solve_oev(&v).unwrap().value;
        let oeef = solve_oeef(&v).unwrap();
        assert!(oeef.value <= oev + 1e-9);
        assert!(oeef.value >= 1.0 / 3.0 - 1e-9);
        assert!(check_envy_free(&v, &oeef.allocation).unwrap());
    }

    #[test]
    fn grid_oracle_guards() {
        let v = profile(vec![vec![1.0; 4]; 2]);
        assert!(oev_grid_oracle(&v, 0.1).is_err());
        let v = profile(vec![vec![1.0; 2]; 2]);
        assert!(oev_grid_oracle(&v, 0.0).is_err());
        assert!(oev_grid_oracle(&v, 0.6).is_err());
    }
}
