//! Reference assignments: exhaustive search (BFCA) and the link-ordered
//! greedy CCA baseline.

mod bfca;
mod cca;

pub use bfca::{assign_bfca, assign_bfca_with, BfcaOutcome, SearchBudget, DEFAULT_MAX_STATES};
pub use cca::{assign_cca, assign_cca_with};

use crate::error::{Error, Result};
use crate::topology::Topology;

pub(crate) fn check_channels(topology: &Topology, cs_max: u8) -> Result<()> {
    if cs_max == 0 || cs_max > topology.channels() {
        return Err(Error::InvalidInput(format!(
            "cs_max {cs_max} must be in 1..={}",
            topology.channels()
        )));
    }
    if cs_max < topology.max_radios() {
        return Err(Error::InvalidInput(format!(
            "{cs_max} channels cannot serve {} radios on one node",
            topology.max_radios()
        )));
    }
    Ok(())
}
