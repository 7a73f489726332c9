//! Randomized assignment mechanisms returning expected allocations.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::egal_lp;
use crate::error::{Error, Result};
use crate::model::{Allocation, ValuationProfile};
use crate::scalar::{min_of, Scalar};

/// Default largest `n` for which exact RSD enumerates all `n!` orders.
pub const DEFAULT_RSD_CAP: usize = 8;
/// Exact RSD refuses to enumerate beyond this many agents whatever the cap.
pub const RSD_HARD_CAP: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MechanismId {
    Ps,
    RsdExact,
    RsdMc,
    Uniform,
    Oeef,
}

impl MechanismId {
    pub const ALL: [MechanismId; 5] = [
        MechanismId::Ps,
        MechanismId::RsdExact,
        MechanismId::RsdMc,
        MechanismId::Uniform,
        MechanismId::Oeef,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MechanismId::Ps => "ps",
            MechanismId::RsdExact => "rsd_exact",
            MechanismId::RsdMc => "rsd_mc",
            MechanismId::Uniform => "uniform",
            MechanismId::Oeef => "oeef",
        }
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MechanismId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MechanismId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownMechanism(s.to_string()))
    }
}

/// A mechanism together with the parameters needed to run it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    Ps,
    RsdExact { cap: usize },
    RsdSampled { samples: u64, seed: u64 },
    Uniform,
    Oeef,
}

impl Mechanism {
    pub fn id(&self) -> MechanismId {
        match self {
            Mechanism::Ps => MechanismId::Ps,
            Mechanism::RsdExact { .. } => MechanismId::RsdExact,
            Mechanism::RsdSampled { .. } => MechanismId::RsdMc,
            Mechanism::Uniform => MechanismId::Uniform,
            Mechanism::Oeef => MechanismId::Oeef,
        }
    }

    pub fn run<T: Scalar>(&self, v: &ValuationProfile<T>) -> Result<MechanismOutcome<T>> {
        match *self {
            Mechanism::Ps => Ok(ps(v)),
            Mechanism::RsdExact { cap } => rsd_exact_capped(v, cap),
            Mechanism::RsdSampled { samples, seed } => rsd_sampled(v, samples, seed),
            Mechanism::Uniform => Ok(uniform(v)),
            Mechanism::Oeef => {
                let sol = egal_lp::solve_oeef(v)?;
                Ok(MechanismOutcome::exact(sol.allocation, MechanismId::Oeef))
            }
        }
    }
}

impl From<MechanismId> for Mechanism {
    /// Parameterless form; sampled RSD gets one sample with seed zero.
    fn from(id: MechanismId) -> Self {
        match id {
            MechanismId::Ps => Mechanism::Ps,
            MechanismId::RsdExact => Mechanism::RsdExact { cap: DEFAULT_RSD_CAP },
            MechanismId::RsdMc => Mechanism::RsdSampled { samples: 1, seed: 0 },
            MechanismId::Uniform => Mechanism::Uniform,
            MechanismId::Oeef => Mechanism::Oeef,
        }
    }
}

/// Expected allocation plus how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismOutcome<T> {
    pub allocation: Allocation<T>,
    pub mechanism: MechanismId,
    pub exact: bool,
    /// Number of sampled orders; zero for exact outcomes.
    pub samples: u64,
    /// Generator seed; zero when no randomness was drawn.
    pub seed: u64,
}

impl<T> MechanismOutcome<T> {
    fn exact(allocation: Allocation<T>, mechanism: MechanismId) -> Self {
        Self {
            allocation,
            mechanism,
            exact: true,
            samples: 0,
            seed: 0,
        }
    }
}

/// Every agent receives `1/n` of every object.
pub fn uniform<T: Scalar>(v: &ValuationProfile<T>) -> MechanismOutcome<T> {
    MechanismOutcome::exact(Allocation::uniform(v.n(), v.m()), MechanismId::Uniform)
}

/// Strict preference order of every agent; ties go to the lower object index.
fn preference_orders<T: Scalar>(v: &ValuationProfile<T>) -> Vec<Vec<usize>> {
    (0..v.n()).map(|i| v.ranking(i).order()).collect()
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    let ok = order.len() == n && order.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidPermutation {
            order: order.to_vec(),
            n,
        })
    }
}

/// Adds the serial-dictatorship allocation for `order` into `acc`.
///
/// Each agent in turn takes `m/n` units, always from its most preferred
/// object that still has mass left.
fn accumulate_serial<T: Scalar>(prefs: &[Vec<usize>], quota: &T, order: &[usize], acc: &mut [Vec<T>]) {
    let m = prefs[0].len();
    let mut remaining = vec![T::one(); m];
    for &agent in order {
        let mut left = quota.clone();
        for &o in &prefs[agent] {
            if !left.is_pos() {
                break;
            }
            if !remaining[o].is_pos() {
                continue;
            }
            let take = min_of(left.clone(), remaining[o].clone());
            remaining[o] = remaining[o].clone() - take.clone();
            left = left - take.clone();
            acc[agent][o] = acc[agent][o].clone() + take;
        }
    }
}

/// Deterministic allocation where agents pick `m/n` units in the given order.
pub fn serial_dictatorship<T: Scalar>(v: &ValuationProfile<T>, order: &[usize]) -> Result<Allocation<T>> {
    check_permutation(order, v.n())?;
    let prefs = preference_orders(v);
    let quota = T::ratio(v.m() as u64, v.n() as u64);
    let mut acc = Allocation::zeros(v.n(), v.m());
    accumulate_serial(&prefs, &quota, order, acc.rows_mut());
    Ok(acc)
}

fn add_into<T: Scalar>(acc: &mut [Vec<T>], other: &[Vec<T>]) {
    for (a, b) in acc.iter_mut().zip(other) {
        for (x, y) in a.iter_mut().zip(b) {
            *x = x.clone() + y.clone();
        }
    }
}

fn scale_down<T: Scalar>(acc: &mut [Vec<T>], by: &T) {
    for row in acc {
        for x in row {
            *x = x.clone() / by.clone();
        }
    }
}

/// Exact random serial dictatorship with the default enumeration cap.
pub fn rsd_exact<T: Scalar>(v: &ValuationProfile<T>) -> Result<MechanismOutcome<T>> {
    rsd_exact_capped(v, DEFAULT_RSD_CAP)
}

/// Averages serial dictatorship over all `n!` agent orders.
///
/// Orders are walked depth first so each prefix is played once; an agent's
/// picks at depth `d` are weighted by the `(n - d - 1)!` orders sharing that
/// prefix. Subtrees under each first agent run in parallel and are added in
/// agent order, so the result does not depend on the worker count.
pub fn rsd_exact_capped<T: Scalar>(v: &ValuationProfile<T>, cap: usize) -> Result<MechanismOutcome<T>> {
    if cap > RSD_HARD_CAP {
        return Err(Error::InvalidParameter(format!(
            "RSD enumeration cap {cap} exceeds hard cap {RSD_HARD_CAP}"
        )));
    }
    let n = v.n();
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    let walk = PrefixWalk {
        prefs: preference_orders(v),
        quota: T::ratio(v.m() as u64, n as u64),
        completions: (0..n)
            .map(|d| T::from_u64((1..(n - d) as u64).product()).expect("n! fits the scalar"))
            .collect(),
    };
    let partials: Vec<Vec<Vec<T>>> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut acc = vec![vec![T::zero(); v.m()]; n];
            let mut remaining = vec![T::one(); v.m()];
            let mut placed = vec![false; n];
            walk.visit(first, 0, &mut remaining, &mut placed, &mut acc);
            acc
        })
        .collect();
    let mut total = vec![vec![T::zero(); v.m()]; n];
    for part in &partials {
        add_into(&mut total, part);
    }
    let orders: u64 = (1..=n as u64).product();
    scale_down(&mut total, &T::from_u64(orders).expect("n! fits the scalar"));
    Ok(MechanismOutcome::exact(
        Allocation::from_rows(total)?,
        MechanismId::RsdExact,
    ))
}

struct PrefixWalk<T> {
    prefs: Vec<Vec<usize>>,
    quota: T,
    /// `completions[d]` orders extend any prefix of length `d + 1`.
    completions: Vec<T>,
}

impl<T: Scalar> PrefixWalk<T> {
    fn visit(&self, agent: usize, depth: usize, remaining: &mut [T], placed: &mut [bool], acc: &mut [Vec<T>]) {
        let weight = &self.completions[depth];
        let mut taken: Vec<(usize, T)> = Vec::new();
        let mut left = self.quota.clone();
        for &o in &self.prefs[agent] {
            if !left.is_pos() {
                break;
            }
            if !remaining[o].is_pos() {
                continue;
            }
            let take = min_of(left.clone(), remaining[o].clone());
            let before = std::mem::replace(&mut remaining[o], T::zero());
            remaining[o] = before.clone() - take.clone();
            left = left - take.clone();
            acc[agent][o] = acc[agent][o].clone() + take * weight.clone();
            taken.push((o, before));
        }
        placed[agent] = true;
        for next in 0..placed.len() {
            if !placed[next] {
                self.visit(next, depth + 1, remaining, placed, acc);
            }
        }
        placed[agent] = false;
        for (o, before) in taken {
            remaining[o] = before;
        }
    }
}

/// Monte Carlo RSD: averages serial dictatorship over `samples` uniformly
/// random orders drawn from a ChaCha8 generator seeded with `seed`.
pub fn rsd_sampled<T: Scalar>(v: &ValuationProfile<T>, samples: u64, seed: u64) -> Result<MechanismOutcome<T>> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sampled RSD needs at least one sample".into()));
    }
    let prefs = preference_orders(v);
    let quota = T::ratio(v.m() as u64, v.n() as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![vec![T::zero(); v.m()]; v.n()];
    let mut order: Vec<usize> = (0..v.n()).collect();
    for _ in 0..samples {
        order.sort_unstable();
        order.shuffle(&mut rng);
        accumulate_serial(&prefs, &quota, &order, &mut acc);
    }
    scale_down(&mut acc, &T::from_u64(samples).expect("sample count fits the scalar"));
    Ok(MechanismOutcome {
        allocation: Allocation::from_rows(acc)?,
        mechanism: MechanismId::RsdMc,
        exact: false,
        samples,
        seed,
    })
}

/// Probabilistic serial by exact event simulation.
///
/// All agents eat at unit speed from their most preferred tier of objects
/// that still have mass, splitting speed equally inside a tied tier. Between
/// events the eating rates are constant, so the next event time is the
/// earliest moment some object runs out.
pub fn ps<T: Scalar>(v: &ValuationProfile<T>) -> MechanismOutcome<T> {
    let (n, m) = (v.n(), v.m());
    let rankings: Vec<_> = (0..n).map(|i| v.ranking(i)).collect();
    let mut remaining = vec![T::one(); m];
    let mut eaten = vec![vec![T::zero(); m]; n];
    let eps = T::pivot_tolerance();

    loop {
        let active: Vec<Vec<usize>> = rankings
            .iter()
            .map(|r| {
                r.tiers()
                    .iter()
                    .map(|tier| {
                        tier.iter()
                            .copied()
                            .filter(|&o| remaining[o].is_pos())
                            .collect::<Vec<_>>()
                    })
                    .find(|tier| !tier.is_empty())
                    .unwrap_or_default()
            })
            .collect();
        if active.iter().all(Vec::is_empty) {
            break;
        }
        let speeds: Vec<T> = active.iter().map(|a| T::ratio(1, a.len().max(1) as u64)).collect();
        let mut rate = vec![T::zero(); m];
        for (objs, speed) in active.iter().zip(&speeds) {
            for &o in objs {
                rate[o] = rate[o].clone() + speed.clone();
            }
        }
        let dt = (0..m)
            .filter(|&o| rate[o].is_pos())
            .map(|o| remaining[o].clone() / rate[o].clone())
            .reduce(min_of)
            .expect("some object is being eaten");
        for (i, objs) in active.iter().enumerate() {
            for &o in objs {
                eaten[i][o] = eaten[i][o].clone() + dt.clone() * speeds[i].clone();
            }
        }
        for o in (0..m).filter(|&o| rate[o].is_pos()) {
            let exhausts_now = remaining[o].clone() / rate[o].clone() <= dt;
            let left = remaining[o].clone() - dt.clone() * rate[o].clone();
            remaining[o] = if exhausts_now || left <= eps { T::zero() } else { left };
        }
    }
    let allocation = Allocation::from_rows(eaten).expect("shape fixed by the profile");
    MechanismOutcome::exact(allocation, MechanismId::Ps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_feasible;
    use itertools::Itertools;
    use num::BigRational;

    fn profile(rows: Vec<Vec<f64>>) -> ValuationProfile<f64> {
        ValuationProfile::new(rows).unwrap()
    }

    fn assert_close(p: &Allocation<f64>, expected: &[Vec<f64>], tol: f64) {
        let e = Allocation::from_rows(expected.to_vec()).unwrap();
        let d = p.max_abs_diff(&e);
        assert!(d <= tol, "got {:?}, expected {expected:?} (diff {d})", p.rows());
    }

    #[test]
    fn uniform_entries() {
        let out = uniform(&profile(vec![vec![1.0, 2.0]; 2]));
        assert_close(&out.allocation, &[vec![0.5, 0.5], vec![0.5, 0.5]], 0.0);
        let out = uniform(&profile(vec![vec![1.0; 8]; 4]));
        assert!(out.allocation.rows().iter().flatten().all(|&x| x == 0.25));
        assert_eq!(out.allocation.row_mass(3), 2.0);
        assert!(out.exact && out.samples == 0);
    }

    #[test]
    fn serial_dictatorship_examples() {
        let v = profile(vec![vec![2.0, 1.0], vec![2.0, 1.0]]);
        assert_close(
            &serial_dictatorship(&v, &[0, 1]).unwrap(),
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            0.0,
        );
        let v = profile(vec![vec![3.0, 2.0, 1.0], vec![3.0, 2.0, 1.0]]);
        assert_close(
            &serial_dictatorship(&v, &[0, 1]).unwrap(),
            &[vec![1.0, 0.5, 0.0], vec![0.0, 0.5, 1.0]],
            0.0,
        );
        let v = profile(vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        for order in [[0, 1, 2], [2, 1, 0], [1, 2, 0]] {
            assert_close(
                &serial_dictatorship(&v, &order).unwrap(),
                &[vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
                0.0,
            );
        }
    }

    #[test]
    fn serial_dictatorship_rejects_bad_orders() {
        let v = profile(vec![vec![1.0, 1.0]; 3]);
        assert!(matches!(
            serial_dictatorship(&v, &[0, 1]),
            Err(Error::InvalidPermutation { .. })
        ));
        assert!(serial_dictatorship(&v, &[0, 1, 1]).is_err());
        assert!(serial_dictatorship(&v, &[0, 1, 3]).is_err());
    }

    #[test]
    fn serial_dictatorship_ties_take_lower_index() {
        let v = profile(vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_close(
            &serial_dictatorship(&v, &[1, 0]).unwrap(),
            &[vec![0.0, 1.0], vec![1.0, 0.0]],
            0.0,
        );
    }

    #[test]
    fn serial_dictatorship_more_agents_than_objects() {
        let v = profile(vec![vec![2.0, 1.0]; 3]);
        let p = serial_dictatorship(&v, &[2, 0, 1]).unwrap();
        let third = 2.0 / 3.0;
        assert_close(
            &p,
            &[vec![1.0 / 3.0, 1.0 / 3.0], vec![0.0, third], vec![third, 0.0]],
            1e-12,
        );
    }

    #[test]
    fn rsd_exact_examples() {
        let v = profile(vec![vec![2.0, 1.0], vec![2.0, 1.0]]);
        assert_close(
            &rsd_exact(&v).unwrap().allocation,
            &[vec![0.5, 0.5], vec![0.5, 0.5]],
            1e-15,
        );
        let v = profile(vec![vec![3.0, 2.0, 1.0], vec![3.0, 2.0, 1.0]]);
        assert_close(&rsd_exact(&v).unwrap().allocation, &[vec![0.5; 3], vec![0.5; 3]], 1e-15);
        for n in 2..=5 {
            let row: Vec<f64> = (0..n).map(|j| (n - j) as f64).collect();
            let out = rsd_exact(&profile(vec![row; n])).unwrap();
            assert_close(&out.allocation, &vec![vec![1.0 / n as f64; n]; n], 1e-12);
        }
    }

    #[test]
    fn rsd_exact_caps() {
        let v = profile(vec![vec![1.0, 2.0]; 4]);
        assert!(matches!(
            rsd_exact_capped(&v, 3),
            Err(Error::EnumerationCap { n: 4, cap: 3 })
        ));
        assert!(matches!(rsd_exact_capped(&v, 10), Err(Error::InvalidParameter(_))));
        let v9 = profile(vec![vec![1.0, 2.0]; 9]);
        assert!(rsd_exact(&v9).is_err());
    }

    #[test]
    fn rsd_prefix_walk_matches_brute_force_average() {
        let q = |k: i64| BigRational::from_integer(k.into());
        let rows = vec![
            vec![q(4), q(0), q(2), q(1), q(3)],
            vec![q(4), q(3), q(2), q(0), q(1)],
            vec![q(1), q(1), q(3), q(0), q(2)],
            vec![q(0), q(4), q(3), q(2), q(1)],
            vec![q(4), q(3), q(0), q(2), q(2)],
        ];
        let v = ValuationProfile::new(rows).unwrap();
        let mut sum = vec![vec![q(0); 5]; 5];
        for order in (0..5).permutations(5) {
            add_into(&mut sum, serial_dictatorship(&v, &order).unwrap().rows());
        }
        scale_down(&mut sum, &q(120));
        assert_eq!(rsd_exact(&v).unwrap().allocation.rows(), &sum[..]);
    }

    #[test]
    fn rsd_sampled_single_sample_is_one_serial_order() {
        let v = profile(vec![vec![3.0, 2.0, 1.0], vec![1.0, 3.0, 2.0], vec![3.0, 1.0, 2.0]]);
        let out = rsd_sampled(&v, 1, 42).unwrap();
        let perms: Vec<Allocation<f64>> = (0..3)
            .permutations(3)
            .map(|o| serial_dictatorship(&v, &o).unwrap())
            .collect();
        assert!(perms.contains(&out.allocation));
        assert!(!out.exact && out.samples == 1 && out.seed == 42);
        assert!(rsd_sampled(&v, 0, 1).is_err());
    }

    #[test]
    fn rsd_sampled_is_reproducible() {
        let v = profile(vec![
            vec![3.0, 2.0, 1.0, 0.5],
            vec![1.0, 3.0, 2.0, 0.0],
            vec![3.0, 1.0, 2.0, 4.0],
        ]);
        let a = rsd_sampled(&v, 500, 7).unwrap();
        let b = rsd_sampled(&v, 500, 7).unwrap();
        assert_eq!(a, b);
        let c = rsd_sampled(&v, 500, 8).unwrap();
        assert_ne!(a.allocation, c.allocation);
    }

    #[test]
    fn ps_examples() {
        let v = profile(vec![vec![2.0, 1.0, 0.0], vec![2.0, 0.0, 1.0]]);
        assert_close(&ps(&v).allocation, &[vec![0.5, 1.0, 0.0], vec![0.5, 0.0, 1.0]], 1e-15);
        let v = profile(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert_close(&ps(&v).allocation, &[vec![1.0, 0.0], vec![0.0, 1.0]], 0.0);
        for n in 2..=6 {
            let row: Vec<f64> = (0..n + 1).map(|j| (j * 7 % (n + 1)) as f64 + 1.0).collect();
            let out = ps(&profile(vec![row; n]));
            assert_close(&out.allocation, &vec![vec![1.0 / n as f64; n + 1]; n], 1e-12);
        }
    }

    #[test]
    fn ps_splits_speed_across_tied_tier() {
        // Agent 0 is indifferent between a and b; agent 1 wants only a.
        let v = profile(vec![vec![1.0, 1.0], vec![1.0, 0.0]]);
        let p = ps(&v).allocation;
        // t in [0, 2/3): a eaten at rate 1.5 and exhausted at 2/3; agent 0 got
        // 1/3 of each, agent 1 2/3 of a; then both eat b (2/3 left) until t = 1.
        assert_close(&p, &[vec![1.0 / 3.0, 2.0 / 3.0], vec![2.0 / 3.0, 1.0 / 3.0]], 1e-12);
    }

    #[test]
    fn ps_exact_rational_route() {
        let q = |a: u64, b: u64| BigRational::ratio(a, b);
        let v = ValuationProfile::new(vec![
            vec![q(3, 1), q(2, 1), q(1, 1)],
            vec![q(3, 1), q(1, 1), q(2, 1)],
            vec![q(1, 1), q(3, 1), q(2, 1)],
        ])
        .unwrap();
        let p = ps(&v).allocation;
        // a: agents 0 and 1 eat it by t = 1/2; b: agent 2 alone until 1/2,
        // then agents 0 and 2 share the remaining 1/2 until t = 3/4.
        assert_eq!(p.row(0), &[q(1, 2), q(1, 4), q(1, 4)]);
        assert_eq!(p.row(1), &[q(1, 2), q(0, 1), q(1, 2)]);
        assert_eq!(p.row(2), &[q(0, 1), q(3, 4), q(1, 4)]);
        assert!(check_feasible(&p).is_empty());
    }

    #[test]
    fn ps_runs_in_single_precision() {
        let v = ValuationProfile::new(vec![vec![2.0f32, 1.0, 0.0], vec![2.0, 0.0, 1.0]]).unwrap();
        let p = ps(&v).allocation;
        assert!((p.get(0, 0) - 0.5).abs() < 1e-6);
        assert!((p.get(1, 2) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mechanism_ids_parse() {
        for id in MechanismId::ALL {
            assert_eq!(id.as_str().parse::<MechanismId>().unwrap(), id);
        }
        assert!(matches!(
            "serial".parse::<MechanismId>(),
            Err(Error::UnknownMechanism(_))
        ));
    }
}
