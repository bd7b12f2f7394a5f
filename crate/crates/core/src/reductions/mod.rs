//! Executable versions of the hardness constructions: automata to chains,
//! recurrences to matrix forms, sign-preserving stochastic embeddings and
//! Diophantine equations to marginal questions.

mod diophantine;
mod embedding;
mod lrs;
mod pfa;

pub use diophantine::{diophantine_chain, diophantine_to_formula, least_root, IntPolynomial, P_EXP, P_LIN};
pub use embedding::{stochastic_embedding, StochasticEmbedding};
pub use lrs::{lrs_eval, lrs_to_bilinear, lrs_to_companion, skolem_search, Lrs, SkolemMode};
pub use pfa::{
    exists_word_above, nonemptiness_formula, parse_pfa, pfa_correspondence_check, pfa_to_podtmc,
    pfa_value, product_state, words, write_pfa, Pfa, PFA_AGENT, PFA_PROP,
};
