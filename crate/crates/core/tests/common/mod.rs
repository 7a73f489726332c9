#![allow(dead_code)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use randassign::gen::{sample_profile, UtilityModel};
use randassign::Profile;

pub fn mallows(n: usize, m: usize, phi: f64, model: UtilityModel, seed: u64) -> Profile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_profile(n, m, phi, model, &mut rng).unwrap()
}

/// Mallows-sampled profiles with n, m in 2..=max.
pub fn mallows_profiles(max: usize) -> impl Strategy<Value = Profile> {
    (2..=max, 2..=max, 0..=10u32, any::<bool>(), any::<u64>()).prop_map(|(n, m, k, borda, seed)| {
        let model = if borda {
            UtilityModel::Borda
        } else {
            UtilityModel::Exponential
        };
        mallows(n, m, k as f64 / 10.0, model, seed)
    })
}

/// Small-integer profiles, which are full of ties and zero entries.
pub fn tied_profiles(max: usize) -> impl Strategy<Value = Profile> {
    (2..=max, 2..=max).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::vec(0u8..4, m), n).prop_map(|rows| {
            let rows = rows
                .into_iter()
                .map(|mut r| {
                    if r.iter().all(|&x| x == 0) {
                        r[0] = 1;
                    }
                    r.into_iter().map(f64::from).collect()
                })
                .collect();
            Profile::new(rows).unwrap()
        })
    })
}
