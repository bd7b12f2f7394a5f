//! Exact model checking over bounded horizons, the semi-decision
//! procedures for time-existential questions, and Monte Carlo simulation.

use std::fmt;

mod ctl;
mod runs;
mod semidecide;
mod simulate;
mod wmlo;

pub use ctl::{
    eval_point, eval_prob_term, model_check, prop5_equivalence, state_holds, CheckReport,
    CtlEvaluator, Failure,
};
pub use runs::{Classes, RunTable, DEFAULT_RUN_LIMIT};
pub use semidecide::{check_mixed_time, check_skolem_form};
pub use simulate::{simulate_runs, FrequencyTable};
pub use wmlo::{eval_wmlo, WmloEvaluator};

/// Values of time variables, in quantifier order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment(pub Vec<(String, u64)>);

impl Assignment {
    pub fn get(&self, var: &str) -> Option<u64> {
        self.0.iter().rev().find(|(v, _)| v == var).map(|(_, n)| *n)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(v, n)| format!("{v}={n}")).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// With the least failing assignment of a universal prefix, if any.
    Fails(Option<Assignment>),
    /// Least assignment of an existential prefix, lexicographically.
    Witness(Assignment),
    /// The search bound was exhausted. This is not a refutation.
    NoWitnessUpTo(u64),
}

impl Verdict {
    /// 0 for holds or a witness, 1 for fails, 2 for an exhausted search.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Holds | Verdict::Witness(_) => 0,
            Verdict::Fails(_) => 1,
            Verdict::NoWitnessUpTo(_) => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => f.write_str("holds"),
            Verdict::Fails(None) => f.write_str("fails"),
            Verdict::Fails(Some(a)) => write!(f, "fails {a}"),
            Verdict::Witness(a) => write!(f, "witness {a}"),
            Verdict::NoWitnessUpTo(t) => write!(f, "no-witness-up-to {t}"),
        }
    }
}
