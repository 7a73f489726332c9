//! Profiles and allocations with the fairness and strategy checkers.

mod allocation;
mod checks;
pub mod io;
mod metrics;
mod profile;
mod strategy;

pub use allocation::{check_feasible, Allocation, Violation};
pub use checks::{
    check_envy_free, check_favourite_share, check_proportional, check_sd_envy_free, common_top_object, envy_slack,
    property_report, proportionality_slack, sd_envy_slack, PropertyReport,
};
pub use metrics::{achieved_ratio, agent_utility, egalitarian_value, normalized_utilities};
pub use profile::{Ranking, ValuationProfile};
pub use strategy::misreport_gain;
