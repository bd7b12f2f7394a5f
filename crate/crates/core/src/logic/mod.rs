//! Formula syntax for the branching-time logic and the first-order
//! fragment, with polynomial probability comparisons.

mod ast;
mod mixed;
mod parse;
mod polynomial;
mod translate;

pub use ast::{
    is_qualitative_context, qualitative_path, temporal_depth, unsupported_until, CmpOp,
    Comparison, Ctl, Depth, ProbTerm, Wmlo, WmloTerm,
};
pub use mixed::MixedTimeFormula;
pub use parse::{parse_conditional_sum, parse_ctl, parse_wmlo, parse_wmlo_open, Conditional};
pub use polynomial::{Monomial, Polynomial};
pub use translate::{
    eliminate_clock, normalize_conditional, translate_prop2, NormalizedComparison, ROOT_TIME,
};
