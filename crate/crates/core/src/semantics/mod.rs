//! Agent beliefs under the clock and perfect-recall semantics, and the
//! graph analyses behind qualitative probability checks.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// How an agent's local state is formed from its observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semantics {
    /// Time and the current observation.
    Clock,
    /// The full observation history.
    PerfectRecall,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Clock => "clk",
            Semantics::PerfectRecall => "spr",
        })
    }
}

impl FromStr for Semantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "clk" | "clock" => Ok(Semantics::Clock),
            "spr" | "perfect-recall" => Ok(Semantics::PerfectRecall),
            other => Err(Error::Unsupported(format!("unknown semantics `{other}`"))),
        }
    }
}

mod belief;
pub mod fixtures;
mod qualitative;

pub use belief::{
    clock_belief, enumerate_histories, filter_step, forward_filter, history_probability,
    knowledge_support, mask_observation, spr_belief, BeliefState, Conditioning,
    ObservationSequence,
};
pub use qualitative::{
    can_reach, exists_path_globally, exists_path_within, infinite_path_states,
    largest_closed_subset, prob_globally_positive, reachable_within, states_satisfying,
    stay_forever_positive, support_at, support_step,
};
