use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use super::polynomial::Polynomial;
use crate::error::{Error, Result};
use crate::markov::{Agent, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Le,
    Lt,
    Eq,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            CmpOp::Le => lhs <= rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Eq => "=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn parse(s: &str) -> Option<CmpOp> {
        Some(match s {
            "<=" => CmpOp::Le,
            "<" => CmpOp::Lt,
            "=" => CmpOp::Eq,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return None,
        })
    }

    pub const ALL: [CmpOp; 5] = [CmpOp::Le, CmpOp::Lt, CmpOp::Eq, CmpOp::Gt, CmpOp::Ge];
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `f(P1, …, Pk) ⋈ c` with the probability terms held separately from the
/// polynomial, which refers to them by index.
///
/// Canonical form: the polynomial has no constant term, every term is
/// referenced, and terms are sorted without duplicates. Structural equality
/// of canonical comparisons is syntactic equality up to term order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Comparison<T> {
    terms: Vec<T>,
    poly: Polynomial,
    op: CmpOp,
    bound: Rational,
}

impl<T: Ord + Clone> Comparison<T> {
    pub fn new(terms: Vec<T>, poly: Polynomial, op: CmpOp, bound: Rational) -> Result<Self> {
        let constant = poly.constant_term();
        let poly = poly.without_constant();
        let bound = bound - constant;
        let used = poly.variables();
        if used.is_empty() {
            return Err(Error::Unsupported(
                "comparison does not mention any probability term".into(),
            ));
        }
        if let Some(&v) = used.iter().next_back() {
            if v >= terms.len() {
                return Err(Error::DimensionMismatch(format!(
                    "polynomial variable {v} has no term"
                )));
            }
        }
        let canonical: Vec<T> = used
            .iter()
            .map(|&v| terms[v].clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let poly = poly.remap(|v| {
            canonical
                .binary_search(&terms[v])
                .expect("every used term is kept")
        });
        if poly.is_zero() {
            return Err(Error::Unsupported(
                "comparison polynomial cancels to a constant".into(),
            ));
        }
        Ok(Comparison {
            terms: canonical,
            poly,
            op,
            bound,
        })
    }

    /// `term ⋈ bound`.
    pub fn single(term: T, op: CmpOp, bound: Rational) -> Self {
        Comparison::new(vec![term], Polynomial::var(0), op, bound)
            .expect("a single variable is a valid comparison")
    }

    pub fn map_terms<U: Ord + Clone>(&self, f: impl FnMut(&T) -> U) -> Result<Comparison<U>> {
        let terms: Vec<U> = self.terms.iter().map(f).collect();
        Comparison::new(terms, self.poly.clone(), self.op, self.bound.clone())
    }

    pub fn try_map_terms<U: Ord + Clone>(
        &self,
        f: impl FnMut(&T) -> Result<U>,
    ) -> Result<Comparison<U>> {
        let terms: Vec<U> = self.terms.iter().map(f).collect::<Result<_>>()?;
        Comparison::new(terms, self.poly.clone(), self.op, self.bound.clone())
    }
}

impl<T> Comparison<T> {
    pub fn terms(&self) -> &[T] {
        &self.terms
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn op(&self) -> CmpOp {
        self.op
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    /// Evaluates the comparison given one value per term.
    pub fn holds(&self, values: &[Rational]) -> Result<bool> {
        Ok(self.op.holds(&self.poly.eval(values)?, &self.bound))
    }

    /// The comparison is literally `term ⋈ bound` for a single term.
    pub fn as_single(&self) -> Option<(&T, CmpOp, &Rational)> {
        (self.terms.len() == 1 && self.poly == Polynomial::var(0))
            .then(|| (&self.terms[0], self.op, &self.bound))
    }

    fn render(&self, f: &mut fmt::Formatter<'_>, term: impl Fn(&T) -> String) -> fmt::Result {
        write!(
            f,
            "({} {} {})",
            self.poly.render(|v| term(&self.terms[v])),
            self.op,
            self.bound
        )
    }
}

/// Formulas of the branching-time logic with knowledge and probability.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ctl {
    True,
    Prop(String),
    Not(Box<Ctl>),
    And(Box<Ctl>, Box<Ctl>),
    /// Path quantifier over all continuations of the current prefix.
    All(Box<Ctl>),
    Next(Box<Ctl>),
    BoundedUntil(Box<Ctl>, Box<Ctl>, u32),
    Until(Box<Ctl>, Box<Ctl>),
    Know(Agent, Box<Ctl>),
    Compare(Comparison<ProbTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProbTerm {
    /// The agent's current probability.
    Current(Agent, Box<Ctl>),
    /// The agent's probability at time zero.
    Prior(Agent, Box<Ctl>),
}

impl ProbTerm {
    pub fn agent(&self) -> &Agent {
        match self {
            ProbTerm::Current(a, _) | ProbTerm::Prior(a, _) => a,
        }
    }

    pub fn body(&self) -> &Ctl {
        match self {
            ProbTerm::Current(_, b) | ProbTerm::Prior(_, b) => b,
        }
    }
}

impl Ctl {
    pub fn prop(p: &str) -> Ctl {
        Ctl::Prop(p.to_string())
    }

    pub fn not(self) -> Ctl {
        Ctl::Not(Box::new(self))
    }

    pub fn and(self, other: Ctl) -> Ctl {
        Ctl::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Ctl) -> Ctl {
        self.not().and(other.not()).not()
    }

    pub fn implies(self, other: Ctl) -> Ctl {
        self.and(other.not()).not()
    }

    pub fn all(self) -> Ctl {
        Ctl::All(Box::new(self))
    }

    /// `E φ = ¬A¬φ`.
    pub fn exists(self) -> Ctl {
        self.not().all().not()
    }

    pub fn next(self) -> Ctl {
        Ctl::Next(Box::new(self))
    }

    pub fn until(self, other: Ctl) -> Ctl {
        Ctl::Until(Box::new(self), Box::new(other))
    }

    pub fn until_within(self, other: Ctl, k: u32) -> Ctl {
        Ctl::BoundedUntil(Box::new(self), Box::new(other), k)
    }

    /// `F φ = true U φ`.
    pub fn eventually(self) -> Ctl {
        Ctl::True.until(self)
    }

    pub fn eventually_within(self, k: u32) -> Ctl {
        Ctl::True.until_within(self, k)
    }

    /// `G φ = ¬F¬φ`.
    pub fn globally(self) -> Ctl {
        self.not().eventually().not()
    }

    pub fn globally_within(self, k: u32) -> Ctl {
        self.not().eventually_within(k).not()
    }

    pub fn know(agent: Agent, body: Ctl) -> Ctl {
        Ctl::Know(agent, Box::new(body))
    }

    pub fn current(agent: Agent, body: Ctl) -> ProbTerm {
        ProbTerm::Current(agent, Box::new(body))
    }

    /// Propositional: built from `true`, propositions, negation and
    /// conjunction only.
    pub fn is_propositional(&self) -> bool {
        match self {
            Ctl::True | Ctl::Prop(_) => true,
            Ctl::Not(a) => a.is_propositional(),
            Ctl::And(a, b) => a.is_propositional() && b.is_propositional(),
            _ => false,
        }
    }

    /// Direct subformulas, including the bodies of probability terms.
    pub fn children(&self) -> Vec<&Ctl> {
        match self {
            Ctl::True | Ctl::Prop(_) => vec![],
            Ctl::Not(a) | Ctl::All(a) | Ctl::Next(a) | Ctl::Know(_, a) => vec![a],
            Ctl::And(a, b) | Ctl::BoundedUntil(a, b, _) | Ctl::Until(a, b) => vec![a, b],
            Ctl::Compare(c) => c.terms().iter().map(ProbTerm::body).collect(),
        }
    }

    pub fn propositions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<String>) {
        if let Ctl::Prop(p) = self {
            out.insert(p.clone());
        }
        for c in self.children() {
            c.collect_props(out);
        }
    }

    pub fn agents(&self) -> BTreeSet<Agent> {
        let mut out = BTreeSet::new();
        self.collect_agents(&mut out);
        out
    }

    fn collect_agents(&self, out: &mut BTreeSet<Agent>) {
        match self {
            Ctl::Know(a, _) => {
                out.insert(a.clone());
            }
            Ctl::Compare(c) => {
                for t in c.terms() {
                    out.insert(t.agent().clone());
                }
            }
            _ => {}
        }
        for c in self.children() {
            c.collect_agents(out);
        }
    }
}

fn atomic_ctl(phi: &Ctl) -> bool {
    matches!(phi, Ctl::True | Ctl::Prop(_))
}

/// A conjunction inside term brackets needs no parentheses of its own.
fn bare<T: fmt::Display>(rendered: &T, is_and: bool) -> String {
    let s = rendered.to_string();
    if is_and {
        s[1..s.len() - 1].to_string()
    } else {
        s
    }
}

impl fmt::Display for ProbTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = bare(self.body(), matches!(self.body(), Ctl::And(..)));
        match self {
            ProbTerm::Current(a, _) => write!(f, "Pr[{a}]({body})"),
            ProbTerm::Prior(a, _) => write!(f, "Prior[{a}]({body})"),
        }
    }
}

impl fmt::Display for Ctl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ctl::True => f.write_str("true"),
            Ctl::Prop(p) => f.write_str(p),
            Ctl::Not(a) if atomic_ctl(a) => write!(f, "!{a}"),
            Ctl::Not(a) => write!(f, "!({a})"),
            Ctl::And(a, b) => write!(f, "({a} & {b})"),
            Ctl::All(a) => write!(f, "A {a}"),
            Ctl::Next(a) => write!(f, "X {a}"),
            Ctl::BoundedUntil(a, b, k) => write!(f, "({a} U<={k} {b})"),
            Ctl::Until(a, b) => write!(f, "({a} U {b})"),
            Ctl::Know(i, a) => write!(f, "K[{i}] {a}"),
            Ctl::Compare(c) => c.render(f, |t| t.to_string()),
        }
    }
}

/// Formulas of the first-order fragment over explicit time variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Wmlo {
    True,
    /// `p(t)`
    PropAt(String, String),
    /// `X(t)` for a set variable; parsed but never evaluated.
    SetAt(String, String),
    /// `t1 < t2`
    Less(String, String),
    Not(Box<Wmlo>),
    And(Box<Wmlo>, Box<Wmlo>),
    /// `K_{i,t}(φ)`
    KnowAt(Agent, String, Box<Wmlo>),
    ForallT(String, Box<Wmlo>),
    ExistsT(String, Box<Wmlo>),
    /// Weak second-order quantifier; parsed but never evaluated.
    ForallSet(String, Box<Wmlo>),
    Compare(Comparison<WmloTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WmloTerm {
    /// `Pr(φ)` over the run measure.
    Global(Box<Wmlo>),
    /// `Pr_{i,t}(φ)`
    AgentAt(Agent, String, Box<Wmlo>),
}

impl WmloTerm {
    pub fn body(&self) -> &Wmlo {
        match self {
            WmloTerm::Global(b) | WmloTerm::AgentAt(_, _, b) => b,
        }
    }
}

impl Wmlo {
    pub fn prop_at(p: &str, t: &str) -> Wmlo {
        Wmlo::PropAt(p.into(), t.into())
    }

    pub fn less(a: &str, b: &str) -> Wmlo {
        Wmlo::Less(a.into(), b.into())
    }

    pub fn not(self) -> Wmlo {
        Wmlo::Not(Box::new(self))
    }

    pub fn and(self, other: Wmlo) -> Wmlo {
        Wmlo::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Wmlo) -> Wmlo {
        self.not().and(other.not()).not()
    }

    pub fn implies(self, other: Wmlo) -> Wmlo {
        self.and(other.not()).not()
    }

    pub fn forall(var: &str, body: Wmlo) -> Wmlo {
        Wmlo::ForallT(var.into(), Box::new(body))
    }

    pub fn exists(var: &str, body: Wmlo) -> Wmlo {
        Wmlo::ExistsT(var.into(), Box::new(body))
    }

    pub fn know_at(agent: Agent, t: &str, body: Wmlo) -> Wmlo {
        Wmlo::KnowAt(agent, t.into(), Box::new(body))
    }

    /// `□φ`, the universal modality, as knowledge of the blind agent.
    pub fn necessarily(t: &str, body: Wmlo) -> Wmlo {
        Wmlo::know_at(Agent::Bottom, t, body)
    }

    pub fn global(body: Wmlo) -> WmloTerm {
        WmloTerm::Global(Box::new(body))
    }

    pub fn agent_at(agent: Agent, t: &str, body: Wmlo) -> WmloTerm {
        WmloTerm::AgentAt(agent, t.into(), Box::new(body))
    }

    /// Conjunction of all items; `true` when empty.
    pub fn conjunction(items: impl IntoIterator<Item = Wmlo>) -> Wmlo {
        items
            .into_iter()
            .reduce(|a, b| a.and(b))
            .unwrap_or(Wmlo::True)
    }

    pub fn free_time_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out, false);
        out
    }

    pub fn free_set_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out, true);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>, sets: bool) {
        fn note(v: &str, is_set: bool, sets: bool, bound: &[String], out: &mut BTreeSet<String>) {
            if is_set == sets && !bound.iter().any(|b| b == v) {
                out.insert(v.to_string());
            }
        }
        match self {
            Wmlo::True => {}
            Wmlo::PropAt(_, t) => note(t, false, sets, bound, out),
            Wmlo::SetAt(x, t) => {
                note(x, true, sets, bound, out);
                note(t, false, sets, bound, out);
            }
            Wmlo::Less(a, b) => {
                note(a, false, sets, bound, out);
                note(b, false, sets, bound, out);
            }
            Wmlo::Not(a) => a.collect_free(bound, out, sets),
            Wmlo::And(a, b) => {
                a.collect_free(bound, out, sets);
                b.collect_free(bound, out, sets);
            }
            Wmlo::KnowAt(_, t, a) => {
                note(t, false, sets, bound, out);
                a.collect_free(bound, out, sets);
            }
            Wmlo::ForallT(v, a) | Wmlo::ExistsT(v, a) | Wmlo::ForallSet(v, a) => {
                bound.push(v.clone());
                a.collect_free(bound, out, sets);
                bound.pop();
            }
            Wmlo::Compare(c) => {
                for t in c.terms() {
                    if let WmloTerm::AgentAt(_, v, _) = t {
                        note(v, false, sets, bound, out);
                    }
                    t.body().collect_free(bound, out, sets);
                }
            }
        }
    }

    /// Uses set variables anywhere.
    pub fn has_second_order(&self) -> bool {
        match self {
            Wmlo::SetAt(..) | Wmlo::ForallSet(..) => true,
            Wmlo::True | Wmlo::PropAt(..) | Wmlo::Less(..) => false,
            Wmlo::Not(a) | Wmlo::KnowAt(_, _, a) | Wmlo::ForallT(_, a) | Wmlo::ExistsT(_, a) => {
                a.has_second_order()
            }
            Wmlo::And(a, b) => a.has_second_order() || b.has_second_order(),
            Wmlo::Compare(c) => c.terms().iter().any(|t| t.body().has_second_order()),
        }
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Wmlo::ForallT(..) | Wmlo::ExistsT(..) | Wmlo::ForallSet(..) => true,
            Wmlo::True | Wmlo::PropAt(..) | Wmlo::SetAt(..) | Wmlo::Less(..) => false,
            Wmlo::Not(a) | Wmlo::KnowAt(_, _, a) => a.has_quantifier(),
            Wmlo::And(a, b) => a.has_quantifier() || b.has_quantifier(),
            Wmlo::Compare(c) => c.terms().iter().any(|t| t.body().has_quantifier()),
        }
    }

    /// Mentions knowledge or agent probability.
    pub fn has_agent_operator(&self) -> bool {
        match self {
            Wmlo::KnowAt(..) => true,
            Wmlo::True | Wmlo::PropAt(..) | Wmlo::SetAt(..) | Wmlo::Less(..) => false,
            Wmlo::Not(a) | Wmlo::ForallT(_, a) | Wmlo::ExistsT(_, a) | Wmlo::ForallSet(_, a) => {
                a.has_agent_operator()
            }
            Wmlo::And(a, b) => a.has_agent_operator() || b.has_agent_operator(),
            Wmlo::Compare(c) => c.terms().iter().any(|t| match t {
                WmloTerm::AgentAt(..) => true,
                WmloTerm::Global(b) => b.has_agent_operator(),
            }),
        }
    }
}

fn atomic_wmlo(phi: &Wmlo) -> bool {
    matches!(phi, Wmlo::True | Wmlo::PropAt(..) | Wmlo::SetAt(..))
}

impl fmt::Display for WmloTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = bare(self.body(), matches!(self.body(), Wmlo::And(..)));
        match self {
            WmloTerm::Global(_) => write!(f, "P({body})"),
            WmloTerm::AgentAt(a, t, _) => write!(f, "Pr[{a}]@{t}({body})"),
        }
    }
}

impl fmt::Display for Wmlo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Wmlo::True => f.write_str("true"),
            Wmlo::PropAt(p, t) | Wmlo::SetAt(p, t) => write!(f, "{p}@{t}"),
            Wmlo::Less(a, b) => write!(f, "({a} < {b})"),
            Wmlo::Not(a) if atomic_wmlo(a) => write!(f, "!{a}"),
            Wmlo::Not(a) => write!(f, "!({a})"),
            Wmlo::And(a, b) => write!(f, "({a} & {b})"),
            Wmlo::KnowAt(i, t, a) => write!(f, "K[{i}]@{t} ({a})"),
            Wmlo::ForallT(v, a) | Wmlo::ForallSet(v, a) => write!(f, "(forall {v} . {a})"),
            Wmlo::ExistsT(v, a) => write!(f, "(exists {v} . {a})"),
            Wmlo::Compare(c) => c.render(f, |t| t.to_string()),
        }
    }
}

/// How far into the future a formula looks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Depth {
    Bounded(usize),
    Unbounded,
}

/// Whether `phi` is `F p` or `G p` with `p` propositional, returned as
/// `(is_eventually, p)`. `G p` is recognised as `¬(true U ¬p)` and yields
/// `p` itself.
pub fn qualitative_path(phi: &Ctl) -> Option<(bool, Ctl)> {
    match phi {
        Ctl::Until(a, b) if **a == Ctl::True && b.is_propositional() => Some((true, (**b).clone())),
        Ctl::Not(inner) => match &**inner {
            Ctl::Until(a, b) if **a == Ctl::True && b.is_propositional() => {
                let p = match &**b {
                    Ctl::Not(q) => (**q).clone(),
                    other => other.clone().not(),
                };
                Some((false, p))
            }
            _ => None,
        },
        _ => None,
    }
}

/// The qualitative shapes in which an unbounded until may occur:
/// `K_i(F p)`, `K_i(G p)`, `A(F p)`, `A(G p)`, and a single probability
/// term over `F p` or `G p` compared against 0 or 1.
pub fn is_qualitative_context(phi: &Ctl) -> bool {
    match phi {
        Ctl::Know(_, body) | Ctl::All(body) => qualitative_path(body).is_some(),
        Ctl::Compare(c) => match c.as_single() {
            Some((term, _, bound)) => {
                (bound.is_zero() || *bound == Rational::from_integer(1.into()))
                    && qualitative_path(term.body()).is_some()
            }
            None => false,
        },
        _ => false,
    }
}

/// Maximal reach of `X` and bounded until. Qualitative contexts contribute
/// zero; any other unbounded until makes the formula [`Depth::Unbounded`].
pub fn temporal_depth(phi: &Ctl) -> Depth {
    match unsupported_until(phi) {
        Some(_) => Depth::Unbounded,
        None => Depth::Bounded(bounded_depth(phi)),
    }
}

fn bounded_depth(phi: &Ctl) -> usize {
    if is_qualitative_context(phi) {
        return 0;
    }
    match phi {
        Ctl::True | Ctl::Prop(_) => 0,
        Ctl::Not(a) | Ctl::All(a) | Ctl::Know(_, a) => bounded_depth(a),
        Ctl::And(a, b) => bounded_depth(a).max(bounded_depth(b)),
        Ctl::Next(a) => 1 + bounded_depth(a),
        Ctl::BoundedUntil(a, b, k) => *k as usize + bounded_depth(a).max(bounded_depth(b)),
        Ctl::Until(a, b) => bounded_depth(a).max(bounded_depth(b)),
        Ctl::Compare(c) => c
            .terms()
            .iter()
            .map(|t| bounded_depth(t.body()))
            .max()
            .unwrap_or(0),
    }
}

/// The first unbounded until that is not inside a qualitative context.
pub fn unsupported_until(phi: &Ctl) -> Option<&Ctl> {
    if is_qualitative_context(phi) {
        return None;
    }
    if let Ctl::Until(..) = phi {
        return Some(phi);
    }
    phi.children().into_iter().find_map(unsupported_until)
}
