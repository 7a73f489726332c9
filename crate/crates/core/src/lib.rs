//! Randomized assignment of indivisible objects under cardinal valuations.
//!
//! Expected allocations come from [`mechanisms`]; the best achievable
//! egalitarian value comes from the linear programs in [`egal_lp`].
//! Sweeps over sampled preference profiles live in [`experiment`].
//!
//! Numeric code is generic over [`Scalar`]. The aliases below fix it to
//! `f64`, `f32` or [`num::BigRational`].

pub mod cli;
pub mod egal_lp;
pub mod error;
pub mod experiment;
pub mod gen;
pub mod mechanisms;
pub mod model;
pub mod scalar;

pub use error::{Error, Result};
pub use mechanisms::{Mechanism, MechanismId, MechanismOutcome};
pub use model::{Allocation, PropertyReport, Ranking, ValuationProfile};
pub use scalar::Scalar;

pub type Profile = ValuationProfile<f64>;
pub type Assignment = Allocation<f64>;
pub type Profile32 = ValuationProfile<f32>;
pub type Assignment32 = Allocation<f32>;
pub type ExactProfile = ValuationProfile<num::BigRational>;
pub type ExactAssignment = Allocation<num::BigRational>;
