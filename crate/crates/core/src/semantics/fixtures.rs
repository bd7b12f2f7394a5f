//! Small hand-built models used in tests, examples and the CLI.

use crate::markov::{int, rat, Model, ModelBuilder};

/// `s` (labelled `q`) loops with probability 1/2 and otherwise moves to
/// the absorbing state `u` (labelled `not_q`). Agent `i` is blind.
///
/// The run that stays at `s` forever is possible but has probability zero,
/// so `i` assigns probability one to `F not_q` without knowing it.
pub fn knowledge_gap_chain() -> Model {
    ModelBuilder::new(&["s", "u"])
        .init("s", int(1))
        .trans("s", "s", rat(1, 2))
        .trans("s", "u", rat(1, 2))
        .trans("u", "u", int(1))
        .agent("i", &[("s", "o"), ("u", "o")])
        .label("s", &["q"])
        .label("u", &["not_q"])
        .build()
        .expect("fixture is valid")
}
