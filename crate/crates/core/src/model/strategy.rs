use super::metrics::bundle_value;
use super::ValuationProfile;
use crate::error::{Error, Result};
use crate::mechanisms::Mechanism;
use crate::scalar::Scalar;

/// Best improvement agent `i` can obtain, measured with their true
/// valuation, by reporting one of `candidates` instead of their true row.
///
/// Only mechanisms whose expected outcome is a function of the reports are
/// accepted. The result is negative when every candidate is worse than
/// truth-telling; include the true row to anchor it at zero or above.
pub fn misreport_gain<T: Scalar>(
    mechanism: &Mechanism,
    v: &ValuationProfile<T>,
    i: usize,
    candidates: &[Vec<T>],
) -> Result<T> {
    if matches!(mechanism, Mechanism::RsdSampled { .. }) {
        return Err(Error::Precondition(
            "misreport search needs a mechanism with an exact expected outcome".into(),
        ));
    }
    if i >= v.n() {
        return Err(Error::AgentOutOfRange { index: i, n: v.n() });
    }
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidate misreports".into()));
    }
    let truth = v.row(i);
    let honest = bundle_value(truth, mechanism.run(v)?.allocation.row(i));
    let mut best: Option<T> = None;
    for c in candidates {
        let reported = v.with_row(i, c.clone())?;
        let u = bundle_value(truth, mechanism.run(&reported)?.allocation.row(i));
        if best.as_ref().is_none_or(|b| u > *b) {
            best = Some(u);
        }
    }
    Ok(best.expect("candidates is nonempty") - honest)
}
