//! Fairness property checkers.
//!
//! Utility comparisons are made on normalized utilities (divided by the
//! agent's total value) so results do not depend on how an agent scales
//! their valuations. Each checker has a `*_slack` companion returning the
//! smallest constraint slack; a property holds when that slack is at least
//! `-tolerance`.

use std::fmt;

use super::metrics::{bundle_value, ensure_same_shape};
use super::{Allocation, ValuationProfile};
use crate::error::{Error, Result};
use crate::scalar::{min_of, Scalar};

/// Summary of the fairness properties of one allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport<T> {
    pub proportional: bool,
    pub envy_free: bool,
    pub sd_envy_free: bool,
    /// Smallest slack over every checked constraint.
    /// Negative values are deficits.
    pub worst_violation: T,
}

impl<T: fmt::Display> fmt::Display for PropertyReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "proportional {}", self.proportional)?;
        writeln!(f, "envy_free {}", self.envy_free)?;
        writeln!(f, "sd_envy_free {}", self.sd_envy_free)?;
        write!(f, "worst_violation {}", self.worst_violation)
    }
}

fn holds<T: Scalar>(slack: &T) -> bool {
    *slack >= -T::tolerance()
}

/// `min_i (u_i(p(i)) / u_i(O) - 1/n)`.
pub fn proportionality_slack<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>) -> Result<T> {
    ensure_same_shape(v, p)?;
    let share = T::ratio(1, v.n() as u64);
    Ok((0..v.n())
        .map(|i| bundle_value(v.row(i), p.row(i)) / v.row_total(i) - share.clone())
        .reduce(min_of)
        .expect("at least one agent"))
}

/// `min_{i != j} (u_i(p(i)) - u_i(p(j))) / u_i(O)`; positive infinity stand-in
/// (one) when there is a single agent.
pub fn envy_slack<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>) -> Result<T> {
    ensure_same_shape(v, p)?;
    let mut worst = T::one();
    for i in 0..v.n() {
        let total = v.row_total(i);
        let own = bundle_value(v.row(i), p.row(i));
        for j in (0..v.n()).filter(|&j| j != i) {
            let slack = (own.clone() - bundle_value(v.row(i), p.row(j))) / total.clone();
            worst = min_of(worst, slack);
        }
    }
    Ok(worst)
}

/// Smallest gap over upper contour sets: for every agent `i`, rival `j` and
/// distinct value level `t` of row `i`, the mass `i` holds on
/// `{o : v[i][o] >= t}` minus the mass `j` holds there.
pub fn sd_envy_slack<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>) -> Result<T> {
    ensure_same_shape(v, p)?;
    let mut worst = T::one();
    for i in 0..v.n() {
        let ranking = v.ranking(i);
        for j in (0..v.n()).filter(|&j| j != i) {
            let mut gap = T::zero();
            for tier in ranking.tiers() {
                for &o in tier {
                    gap = gap + p.get(i, o).clone() - p.get(j, o).clone();
                }
                worst = min_of(worst, gap.clone());
            }
        }
    }
    Ok(worst)
}

/// Every agent receives at least a `1/n` share of their total value.
pub fn check_proportional<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>) -> Result<bool> {
    Ok(holds(&proportionality_slack(v, p)?))
}

/// No agent prefers another agent's bundle to their own.
pub fn check_envy_free<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>) -> Result<bool> {
    Ok(holds(&envy_slack(v, p)?))
}

/// Envy-free under every cardinal utility consistent with the agents' weak
/// rankings. Implies [`check_envy_free`].
pub fn check_sd_envy_free<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>) -> Result<bool> {
    Ok(holds(&sd_envy_slack(v, p)?))
}

/// The object every agent ranks uniquely first, if there is one.
pub fn common_top_object<T: Scalar>(v: &ValuationProfile<T>) -> Option<usize> {
    let mut common = None;
    for i in 0..v.n() {
        let ranking = v.ranking(i);
        let top = &ranking.tiers()[0];
        if top.len() != 1 {
            return None;
        }
        match common {
            None => common = Some(top[0]),
            Some(o) if o == top[0] => {}
            Some(_) => return None,
        }
    }
    common
}

/// Whether each agent holds exactly `1/n` of the commonly top-ranked object.
///
/// Errors when the agents do not share a unique favourite object.
pub fn check_favourite_share<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>) -> Result<bool> {
    ensure_same_shape(v, p)?;
    let top = common_top_object(v)
        .ok_or_else(|| Error::Precondition("agents do not share a unique most preferred object".into()))?;
    let share = T::ratio(1, v.n() as u64);
    let tol = T::tolerance();
    Ok((0..v.n()).all(|i| (p.get(i, top).clone() - share.clone()).abs() <= tol))
}

pub fn property_report<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>) -> Result<PropertyReport<T>> {
    let prop = proportionality_slack(v, p)?;
    let envy = envy_slack(v, p)?;
    let sd = sd_envy_slack(v, p)?;
    let sd_envy_free = holds(&sd);
    let report = PropertyReport {
        proportional: holds(&prop),
        envy_free: holds(&envy),
        sd_envy_free,
        worst_violation: min_of(min_of(prop, envy), sd),
    };
    debug_assert!(!report.sd_envy_free || report.envy_free);
    Ok(report)
}
