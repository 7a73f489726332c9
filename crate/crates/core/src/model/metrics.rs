use super::{Allocation, ValuationProfile};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) fn ensure_same_shape<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>) -> Result<()> {
    if v.n() != p.n() || v.m() != p.m() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{} allocation", v.n(), v.m()),
            found: format!("{}x{}", p.n(), p.m()),
        });
    }
    Ok(())
}

/// Value of `bundle` under `values`, i.e. the dot product.
pub(crate) fn bundle_value<T: Scalar>(values: &[T], bundle: &[T]) -> T {
    values
        .iter()
        .zip(bundle)
        .fold(T::zero(), |acc, (v, p)| acc + v.clone() * p.clone())
}

/// Expected utility `sum_j p[i][j] * v[i][j]` of agent `i`.
pub fn agent_utility<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>, i: usize) -> Result<T> {
    ensure_same_shape(v, p)?;
    if i >= v.n() {
        return Err(Error::AgentOutOfRange { index: i, n: v.n() });
    }
    Ok(bundle_value(v.row(i), p.row(i)))
}

/// Utility of each agent divided by that agent's value for all objects.
pub fn normalized_utilities<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>) -> Result<Vec<T>> {
    ensure_same_shape(v, p)?;
    Ok((0..v.n())
        .map(|i| bundle_value(v.row(i), p.row(i)) / v.row_total(i))
        .collect())
}

/// Egalitarian value: the smallest normalized utility over all agents.
pub fn egalitarian_value<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>) -> Result<T> {
    let utils = normalized_utilities(v, p)?;
    Ok(utils
        .into_iter()
        .reduce(crate::scalar::min_of)
        .expect("profile has at least one agent"))
}

/// Egalitarian value of `p` relative to the optimum `oev`.
pub fn achieved_ratio<T: Scalar>(v: &ValuationProfile<T>, p: &Allocation<T>, oev: &T) -> Result<T> {
    if !oev.is_pos() {
        return Err(Error::InvalidParameter(format!(
            "optimal egalitarian value must be positive, got {oev}"
        )));
    }
    Ok(egalitarian_value(v, p)? / oev.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn borda_pair() -> ValuationProfile<f64> {
        ValuationProfile::new(vec![vec![2.0, 1.0, 0.0], vec![2.0, 0.0, 1.0]]).unwrap()
    }

    #[test]
    fn utility_of_half_plus_one() {
        let v = borda_pair();
        let p = Allocation::from_rows(vec![vec![0.5, 1.0, 0.0], vec![0.5, 0.0, 1.0]]).unwrap();
        assert_eq!(agent_utility(&v, &p, 0).unwrap(), 2.0);
        assert_eq!(egalitarian_value(&v, &p).unwrap(), 2.0 / 3.0);
        assert!((achieved_ratio(&v, &p, &(2.0 / 3.0)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_allocation_gives_zero() {
        let v = borda_pair();
        let p = Allocation::zeros(2, 3);
        assert_eq!(agent_utility(&v, &p, 1).unwrap(), 0.0);
        assert_eq!(egalitarian_value(&v, &p).unwrap(), 0.0);
    }

    #[test]
    fn equal_values_uniform_share() {
        let v = ValuationProfile::new(vec![vec![1.0f64; 3]; 3]).unwrap();
        let p = Allocation::uniform(3, 3);
        assert!((agent_utility(&v, &p, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!((egalitarian_value(&v, &p).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_arithmetic_route() {
        let q = |a: u64, b: u64| BigRational::ratio(a, b);
        let v = ValuationProfile::new(vec![vec![q(2, 1), q(1, 1), q(0, 1)], vec![q(2, 1), q(0, 1), q(1, 1)]]).unwrap();
        let p = Allocation::from_rows(vec![vec![q(1, 2), q(1, 1), q(0, 1)], vec![q(1, 2), q(0, 1), q(1, 1)]]).unwrap();
        assert_eq!(egalitarian_value(&v, &p).unwrap(), q(2, 3));
        assert_eq!(achieved_ratio(&v, &p, &q(2, 3)).unwrap(), q(1, 1));
        assert_eq!(achieved_ratio(&v, &p, &q(4, 3)).unwrap(), q(1, 2));
    }

    #[test]
    fn errors() {
        let v = borda_pair();
        let p = Allocation::<f64>::uniform(2, 2);
        assert!(matches!(agent_utility(&v, &p, 0), Err(Error::DimensionMismatch { .. })));
        let p = Allocation::<f64>::uniform(2, 3);
        assert!(matches!(agent_utility(&v, &p, 2), Err(Error::AgentOutOfRange { .. })));
        assert!(achieved_ratio(&v, &p, &0.0).is_err());
        assert!(achieved_ratio(&v, &p, &-1.0).is_err());
    }
}
