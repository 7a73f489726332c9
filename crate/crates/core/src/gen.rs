//! Mallows rankings turned into rank-based utilities, plus the adversarial
//! profile families used to probe worst-case behaviour.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::ValuationProfile;
use crate::scalar::Scalar;

/// Strict ranking: `ranking[k]` is the object in position `k` (0 = best).
pub type StrictRanking = Vec<usize>;

fn positions(r: &[usize]) -> Option<Vec<usize>> {
    let mut pos = vec![usize::MAX; r.len()];
    for (k, &o) in r.iter().enumerate() {
        if o >= r.len() || pos[o] != usize::MAX {
            return None;
        }
        pos[o] = k;
    }
    Some(pos)
}

/// Number of object pairs the two rankings order differently.
pub fn kendall_tau(r1: &[usize], r2: &[usize]) -> Result<usize> {
    let mismatch = || {
        Error::InvalidParameter(format!(
            "rankings {r1:?} and {r2:?} are not permutations of the same objects"
        ))
    };
    if r1.len() != r2.len() {
        return Err(mismatch());
    }
    let pos2 = positions(r2).ok_or_else(mismatch)?;
    positions(r1).ok_or_else(mismatch)?;
    let mapped: Vec<usize> = r1.iter().map(|&o| pos2[o]).collect();
    let mut discordant = 0;
    for a in 0..mapped.len() {
        for b in a + 1..mapped.len() {
            if mapped[a] > mapped[b] {
                discordant += 1;
            }
        }
    }
    Ok(discordant)
}

/// Mallows distribution centred on `sigma` with dispersion `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct MallowsConfig {
    sigma: StrictRanking,
    phi: f64,
}

impl MallowsConfig {
    pub fn new(sigma: StrictRanking, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::InvalidParameter(format!("dispersion {phi} outside [0, 1]")));
        }
        if sigma.is_empty() || positions(&sigma).is_none() {
            return Err(Error::InvalidParameter(format!(
                "reference order {sigma:?} is not a permutation"
            )));
        }
        Ok(Self { sigma, phi })
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `prod_{k=1..m} (1 + phi + ... + phi^(k-1))`.
    pub fn normalizer(&self) -> f64 {
        (1..=self.sigma.len())
            .map(|k| (0..k).map(|j| self.phi.powi(j as i32)).sum::<f64>())
            .product()
    }

    /// Probability of drawing `r`.
    pub fn probability(&self, r: &[usize]) -> Result<f64> {
        let d = kendall_tau(&self.sigma, r)?;
        Ok(self.phi.powi(d as i32) / self.normalizer())
    }
}

/// Draws one ranking by repeated insertion.
///
/// The `k`-th object of the reference order is inserted into the partial
/// ranking at `j` places above the bottom with probability proportional to
/// `phi^j`; each such step adds exactly `j` discordant pairs.
pub fn mallows_sample<R: Rng + ?Sized>(cfg: &MallowsConfig, rng: &mut R) -> StrictRanking {
    let mut ranking: Vec<usize> = Vec::with_capacity(cfg.sigma.len());
    let mut weights: Vec<f64> = Vec::with_capacity(cfg.sigma.len());
    for (k, &object) in cfg.sigma.iter().enumerate() {
        weights.clear();
        weights.extend((0..=k).map(|j| cfg.phi.powi(j as i32)));
        let total: f64 = weights.iter().sum();
        let mut u = rng.gen::<f64>() * total;
        let mut up = k;
        for (j, w) in weights.iter().enumerate() {
            if u < *w {
                up = j;
                break;
            }
            u -= w;
        }
        ranking.insert(k - up, object);
    }
    ranking
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UtilityModel {
    Borda,
    Exponential,
}

impl UtilityModel {
    pub fn as_str(self) -> &'static str {
        match self {
            UtilityModel::Borda => "borda",
            UtilityModel::Exponential => "exponential",
        }
    }
}

impl fmt::Display for UtilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UtilityModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "borda" => Ok(UtilityModel::Borda),
            "exponential" | "exp" => Ok(UtilityModel::Exponential),
            other => Err(Error::InvalidParameter(format!("unknown utility model `{other}`"))),
        }
    }
}

/// Cardinal values for a strict ranking: the object in position `i`
/// (1-based) gets `m - i` under Borda and `2^(m - i)` under exponential.
pub fn score_utilities<T: Scalar>(r: &[usize], model: UtilityModel) -> Result<Vec<T>> {
    let m = r.len();
    if positions(r).is_none() || m == 0 {
        return Err(Error::InvalidParameter(format!("{r:?} is not a strict ranking")));
    }
    if model == UtilityModel::Borda && m == 1 {
        return Err(Error::InvalidProfile(
            "Borda scores of a single object are all zero".into(),
        ));
    }
    let mut row = vec![T::zero(); m];
    for (k, &o) in r.iter().enumerate() {
        let rank_from_bottom = (m - 1 - k) as u32;
        let score = match model {
            UtilityModel::Borda => u64::from(rank_from_bottom),
            UtilityModel::Exponential => 1u64 << rank_from_bottom,
        };
        row[o] = T::from_u64(score).expect("small integers fit every scalar");
    }
    Ok(row)
}

/// Uniform reference order, then `n` i.i.d. Mallows rankings scored by `model`.
pub fn sample_profile<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    m: usize,
    phi: f64,
    model: UtilityModel,
    rng: &mut R,
) -> Result<ValuationProfile<T>> {
    if n < 2 || m < 2 {
        return Err(Error::InvalidParameter(format!(
            "profiles need n, m >= 2 (got n={n}, m={m})"
        )));
    }
    let mut sigma: Vec<usize> = (0..m).collect();
    sigma.shuffle(rng);
    let cfg = MallowsConfig::new(sigma, phi)?;
    let rows = (0..n)
        .map(|_| score_utilities(&mallows_sample(&cfg, rng), model))
        .collect::<Result<Vec<_>>>()?;
    ValuationProfile::new(rows)
}

/// Default epsilon for [`fav_share_profile`].
pub const DEFAULT_FAV_SHARE_EPS: f64 = 1e-3;

/// `n = m` profile: agent 0 values only object 0; agent `i > 0` values
/// object 0 at `0.5 + eps` and object `i` at `0.5 - eps`.
pub fn fav_share_profile<T: Scalar>(n: usize, eps: T) -> Result<ValuationProfile<T>> {
    let half = T::ratio(1, 2);
    if n < 2 || !eps.is_pos() || eps >= half {
        return Err(Error::InvalidParameter(format!(
            "favourite-share profile needs n >= 2 and eps in (0, 0.5), got n={n}, eps={eps}"
        )));
    }
    let rows = (0..n)
        .map(|i| {
            let mut row = vec![T::zero(); n];
            if i == 0 {
                row[0] = T::one();
            } else {
                row[0] = half.clone() + eps.clone();
                row[i] = half.clone() - eps.clone();
            }
            row
        })
        .collect();
    ValuationProfile::new(rows)
}

fn integer_sqrt(x: usize) -> Option<usize> {
    let r = (x as f64).sqrt().round() as usize;
    (r * r == x).then_some(r)
}

/// Lower-bound instance for truthful mechanisms, built from a perfect square
/// `n1 >= 4`.
///
/// Agents come in three groups: `n1` agents wanting only object 0;
/// `n1^2` agents `n1 + l` valuing object 0 at `1 - eps` and object `l + 1`
/// at `eps`, with `eps = 1/(n1 - sqrt(n1))`; and for each `l` a block of
/// `sqrt(n1)` agents wanting only object `l + 1`.
pub fn lower_bound_profile<T: Scalar>(n1: usize) -> Result<ValuationProfile<T>> {
    ValuationProfile::new(lower_bound_rows(n1)?)
}

/// The profile of [`lower_bound_profile`] where agent `n1 + l - 1` (for
/// `l` in `1..=n1^2`) instead reports value one for object `l` only.
pub fn lower_bound_variant<T: Scalar>(n1: usize, l: usize) -> Result<ValuationProfile<T>> {
    let mut rows = lower_bound_rows::<T>(n1)?;
    if l == 0 || l > n1 * n1 {
        return Err(Error::InvalidParameter(format!(
            "variant index {l} outside 1..={}",
            n1 * n1
        )));
    }
    let row = &mut rows[n1 + l - 1];
    row.iter_mut().for_each(|x| *x = T::zero());
    row[l] = T::one();
    ValuationProfile::new(rows)
}

fn lower_bound_rows<T: Scalar>(n1: usize) -> Result<Vec<Vec<T>>> {
    let root = integer_sqrt(n1)
        .filter(|_| n1 >= 4)
        .ok_or_else(|| Error::InvalidParameter(format!("n1 = {n1} must be a perfect square >= 4")))?;
    let m = n1 * n1 + 1;
    let eps = T::ratio(1, (n1 - root) as u64);
    let unit = |o: usize| {
        let mut row = vec![T::zero(); m];
        row[o] = T::one();
        row
    };
    let mut rows = Vec::with_capacity(n1 + n1 * n1 + n1 * n1 * root);
    rows.extend((0..n1).map(|_| unit(0)));
    for l in 1..=n1 * n1 {
        let mut row = vec![T::zero(); m];
        row[0] = T::one() - eps.clone();
        row[l] = eps.clone();
        rows.push(row);
    }
    for l in 1..=n1 * n1 {
        rows.extend((0..root).map(|_| unit(l)));
    }
    Ok(rows)
}

/// Scale of the small positive values used to fix the tail of the rankings
/// in [`cyclic_ordinal_profile`].
pub const CYCLIC_TAIL_SCALE: f64 = 1e-6;

/// `n` agents, `n + 1` objects; object 0 is everyone's favourite. Agent 0
/// ranks objects `1..=n` in order and every later agent rotates the
/// previous agent's order by one. Agent 0 values object 0 at one, agent
/// `i > 0` values it at `0.5 + eps` and its next object at `0.5 - eps`; all
/// other objects get values `1e-6 * 2^-k` decreasing along the ranking.
pub fn cyclic_ordinal_profile<T: Scalar>(n: usize, eps: T) -> Result<ValuationProfile<T>> {
    let half = T::ratio(1, 2);
    if n < 2 || !eps.is_pos() || eps >= half {
        return Err(Error::InvalidParameter(format!(
            "cyclic profile needs n >= 2 and eps in (0, 0.5), got n={n}, eps={eps}"
        )));
    }
    let delta = T::ratio(1, 1_000_000);
    let rows = (0..n)
        .map(|i| {
            let mut row = vec![T::zero(); n + 1];
            row[0] = if i == 0 { T::one() } else { half.clone() + eps.clone() };
            let mut tail = delta.clone();
            for k in 0..n {
                let object = 1 + (i + k) % n;
                row[object] = if i > 0 && k == 0 {
                    half.clone() - eps.clone()
                } else {
                    tail.clone()
                };
                tail = tail / T::from_u64(2).expect("two");
            }
            row
        })
        .collect();
    ValuationProfile::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kendall_examples() {
        assert_eq!(kendall_tau(&[0, 1, 2], &[0, 1, 2]).unwrap(), 0);
        assert_eq!(kendall_tau(&[0, 1, 2], &[2, 1, 0]).unwrap(), 3);
        assert_eq!(kendall_tau(&[0, 1, 2], &[1, 2, 0]).unwrap(), 2);
        assert!(kendall_tau(&[0, 1], &[0, 1, 2]).is_err());
        assert!(kendall_tau(&[0, 0, 1], &[0, 1, 2]).is_err());
        assert!(kendall_tau(&[0, 1, 2], &[0, 1, 3]).is_err());
    }

    #[test]
    fn kendall_is_a_metric() {
        for m in 1..=4 {
            let perms: Vec<Vec<usize>> = (0..m).permutations(m).collect();
            for a in &perms {
                for b in &perms {
                    let dab = kendall_tau(a, b).unwrap();
                    assert_eq!(dab, kendall_tau(b, a).unwrap());
                    assert_eq!(dab == 0, a == b);
                    assert!(dab <= m * (m.max(1) - 1) / 2);
                    for c in &perms {
                        assert!(kendall_tau(a, c).unwrap() <= dab + kendall_tau(b, c).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn mallows_phi_zero_is_reference() {
        let cfg = MallowsConfig::new(vec![2, 0, 3, 1], 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(mallows_sample(&cfg, &mut rng), vec![2, 0, 3, 1]);
        }
    }

    #[test]
    fn mallows_probability_by_enumeration() {
        let cfg = MallowsConfig::new(vec![0, 1, 2], 0.5).unwrap();
        // Distances over all 6 rankings: 0, 1, 1, 2, 2, 3.
        let z: f64 = (0..3)
            .permutations(3)
            .map(|r| 0.5f64.powi(kendall_tau(&[0, 1, 2], &r).unwrap() as i32))
            .sum();
        assert!((z - 2.625).abs() < 1e-12);
        assert!((cfg.normalizer() - 2.625).abs() < 1e-12);
        assert!((cfg.probability(&[0, 1, 2]).unwrap() - 1.0 / 2.625).abs() < 1e-12);
    }

    #[test]
    fn mallows_rejects_bad_config() {
        assert!(MallowsConfig::new(vec![0, 1], 1.5).is_err());
        assert!(MallowsConfig::new(vec![0, 1], -0.1).is_err());
        assert!(MallowsConfig::new(vec![0, 0], 0.5).is_err());
    }

    #[test]
    fn scoring() {
        let borda: Vec<f64> = score_utilities(&[0, 1, 2, 3], UtilityModel::Borda).unwrap();
        assert_eq!(borda, vec![3.0, 2.0, 1.0, 0.0]);
        let exp: Vec<f64> = score_utilities(&[0, 1, 2], UtilityModel::Exponential).unwrap();
        assert_eq!(exp, vec![4.0, 2.0, 1.0]);
        let exp: Vec<f64> = score_utilities(&[2, 0, 1], UtilityModel::Exponential).unwrap();
        assert_eq!(exp, vec![2.0, 1.0, 4.0]);
        assert!(score_utilities::<f64>(&[0], UtilityModel::Borda).is_err());
        assert_eq!(
            score_utilities::<f64>(&[0], UtilityModel::Exponential).unwrap(),
            vec![1.0]
        );
    }

    #[test]
    fn sampled_profiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v: ValuationProfile<f64> = sample_profile(4, 5, 0.0, UtilityModel::Borda, &mut rng).unwrap();
        assert!(v.rows().iter().all(|r| r == v.row(0)));
        let v: ValuationProfile<f64> = sample_profile(5, 5, 0.5, UtilityModel::Borda, &mut rng).unwrap();
        for row in v.rows() {
            let mut sorted = row.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert_eq!(sorted, vec![4.0, 3.0, 2.0, 1.0, 0.0]);
        }
        let a: ValuationProfile<f64> =
            sample_profile(3, 4, 0.7, UtilityModel::Exponential, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b: ValuationProfile<f64> =
            sample_profile(3, 4, 0.7, UtilityModel::Exponential, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert!(sample_profile::<f64, _>(1, 4, 0.5, UtilityModel::Borda, &mut rng).is_err());
    }

    #[test]
    fn fav_share_rows() {
        let v: ValuationProfile<f64> = fav_share_profile(3, 0.1).unwrap();
        assert_eq!(
            v.rows(),
            &[vec![1.0, 0.0, 0.0], vec![0.6, 0.4, 0.0], vec![0.6, 0.0, 0.4]]
        );
        assert!(fav_share_profile(3, 0.5).is_err());
        assert!(fav_share_profile(1, 0.1).is_err());
        assert!(fav_share_profile(3, 0.0).is_err());
    }

    #[test]
    fn lower_bound_shape() {
        let v: ValuationProfile<f64> = lower_bound_profile(4).unwrap();
        assert_eq!((v.n(), v.m()), (52, 17));
        let mut expected = vec![0.0; 17];
        expected[0] = 0.5;
        expected[1] = 0.5;
        assert_eq!(v.row(4), expected.as_slice());
        assert_eq!(v.row(0)[0], 1.0);
        // First block of C agents all want object 1.
        assert!((20..22).all(|i| v.row(i)[1] == 1.0 && v.row_total(i) == 1.0));
        assert!((50..52).all(|i| v.row(i)[16] == 1.0));
        let var: ValuationProfile<f64> = lower_bound_variant(4, 1).unwrap();
        let differing: Vec<usize> = (0..52).filter(|&i| var.row(i) != v.row(i)).collect();
        assert_eq!(differing, vec![4]);
        assert_eq!(var.row(4)[1], 1.0);
        assert!(lower_bound_profile::<f64>(5).is_err());
        assert!(lower_bound_profile::<f64>(1).is_err());
        assert!(lower_bound_variant::<f64>(4, 0).is_err());
        assert!(lower_bound_variant::<f64>(4, 17).is_err());
    }

    #[test]
    fn cyclic_rankings() {
        let v: ValuationProfile<f64> = cyclic_ordinal_profile(3, 0.1).unwrap();
        let orders: Vec<Vec<usize>> = (0..3).map(|i| v.ranking(i).order()).collect();
        // Objects: 0 = o*, 1 + k = o_k.
        assert_eq!(orders, vec![vec![0, 1, 2, 3], vec![0, 2, 3, 1], vec![0, 3, 1, 2]]);
        assert!((0..3).all(|i| v.ranking(i).is_strict()));
        assert!((v.row(1)[2] - 0.4).abs() < 1e-15);
        assert!(cyclic_ordinal_profile::<f64>(1, 0.1).is_err());
    }
}
