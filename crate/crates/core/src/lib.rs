//! Exact model checking of probabilistic temporal-epistemic logic over
//! finite partially observed discrete-time Markov chains.
//!
//! * [`markov`]: the chain, its observation maps and exact cylinder measure.
//! * [`logic`]: branching-time and first-order formula syntax, parsing and
//!   translations between them.
//! * [`semantics`]: clock and perfect-recall beliefs, qualitative graph
//!   analyses.
//! * [`checker`]: bounded and qualitative evaluation, semidecision search,
//!   Monte Carlo simulation.
//! * [`reductions`]: automata, recurrence and Diophantine encodings.

pub mod error;
pub mod logic;
pub mod semantics;
pub mod markov;
pub mod checker;
pub mod reductions;

pub use error::{Error, ParseError, Result};
