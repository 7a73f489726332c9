use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Additive cardinal valuations of `n` agents over `m` objects.
///
/// Entries are nonnegative and every agent values at least one object
/// strictly positively, so normalized utilities are always defined.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationProfile<T> {
    rows: Vec<Vec<T>>,
    m: usize,
}

impl<T: Scalar> ValuationProfile<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidProfile("no agents".into()));
        }
        let m = rows[0].len();
        if m == 0 {
            return Err(Error::InvalidProfile("no objects".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: format!("{m} values in row {i}"),
                    found: row.len().to_string(),
                });
            }
            if let Some(j) = row.iter().position(|x| x.is_neg()) {
                return Err(Error::InvalidProfile(format!(
                    "agent {i} has negative value {} for object {j}",
                    row[j]
                )));
            }
            if !row.iter().any(|x| x.is_pos()) {
                return Err(Error::InvalidProfile(format!("agent {i} values every object at zero")));
            }
        }
        Ok(Self { rows, m })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn value(&self, agent: usize, object: usize) -> &T {
        &self.rows[agent][object]
    }

    pub fn row(&self, agent: usize) -> &[T] {
        &self.rows[agent]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    /// `u_i(O)`, the agent's value for the whole object set.
    pub fn row_total(&self, agent: usize) -> T {
        self.rows[agent].iter().fold(T::zero(), |acc, x| acc + x.clone())
    }

    /// Copy with agent `agent`'s row replaced.
    pub fn with_row(&self, agent: usize, row: Vec<T>) -> Result<Self> {
        if agent >= self.n() {
            return Err(Error::AgentOutOfRange {
                index: agent,
                n: self.n(),
            });
        }
        let mut rows = self.rows.clone();
        rows[agent] = row;
        Self::new(rows)
    }

    pub fn ranking(&self, agent: usize) -> Ranking {
        Ranking::from_values(&self.rows[agent])
    }

    /// True when both profiles induce the same weak ranking for every agent.
    pub fn ordinally_equivalent(&self, other: &Self) -> bool {
        self.n() == other.n() && self.m() == other.m() && (0..self.n()).all(|i| self.ranking(i) == other.ranking(i))
    }

    pub fn to_f64(&self) -> ValuationProfile<f64> {
        ValuationProfile {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(Scalar::to_f64_lossy).collect())
                .collect(),
            m: self.m,
        }
    }
}

/// Weak order over objects: tier 0 is most preferred, objects in a tier are tied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    tiers: Vec<Vec<usize>>,
}

impl Ranking {
    /// Groups equal values into tiers in descending order of value.
    pub fn from_values<T: Scalar>(values: &[T]) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| {
            values[b]
                .partial_cmp(&values[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut tiers: Vec<Vec<usize>> = Vec::new();
        for j in order {
            match tiers.last_mut() {
                Some(tier) if values[tier[0]] == values[j] => tier.push(j),
                _ => tiers.push(vec![j]),
            }
        }
        Self { tiers }
    }

    /// Builds a ranking from explicit tiers, checking they partition `0..m`.
    pub fn from_tiers(tiers: Vec<Vec<usize>>, m: usize) -> Result<Self> {
        let mut seen = vec![false; m];
        for tier in &tiers {
            if tier.is_empty() {
                return Err(Error::InvalidParameter("empty tier in ranking".into()));
            }
            for &o in tier {
                if o >= m || seen[o] {
                    return Err(Error::InvalidParameter(format!("object {o} repeated or out of range")));
                }
                seen[o] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParameter("ranking does not cover every object".into()));
        }
        Ok(Self { tiers })
    }

    pub fn tiers(&self) -> &[Vec<usize>] {
        &self.tiers
    }

    pub fn is_strict(&self) -> bool {
        self.tiers.iter().all(|t| t.len() == 1)
    }

    /// Objects from most to least preferred (ties in ascending index order).
    pub fn order(&self) -> Vec<usize> {
        self.tiers.iter().flatten().copied().collect()
    }
}
