//! Probabilistic finite automata and their encoding as a one-agent chain
//! whose observations are the letters read.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::checker::CtlEvaluator;
use crate::error::{Error, ParseError, Result};
use crate::logic::{CmpOp, Comparison, Ctl, ProbTerm};
use crate::markov::format::{header_lines, split_entries, Tok};
use crate::markov::{dot, Agent, Model, Rational, RationalMatrix};
use crate::semantics::{forward_filter, ObservationSequence, Semantics};

/// Agent and proposition names used by [`pfa_to_podtmc`].
pub const PFA_AGENT: &str = "i";
pub const PFA_PROP: &str = "p";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pfa {
    states: Vec<String>,
    alphabet: Vec<String>,
    init: Vec<Rational>,
    letters: Vec<RationalMatrix>,
    accepting: Vec<bool>,
    threshold: Rational,
}

impl Pfa {
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<String>,
        init: Vec<Rational>,
        letters: Vec<RationalMatrix>,
        accepting: Vec<bool>,
        threshold: Rational,
    ) -> Result<Pfa> {
        let n = states.len();
        let bad = |m: String| Err(Error::InvalidPfa(m));
        if n == 0 || alphabet.is_empty() {
            return bad("automaton needs states and letters".into());
        }
        if init.len() != n || accepting.len() != n || letters.len() != alphabet.len() {
            return bad("dimensions disagree".into());
        }
        if init.iter().any(|x| x < &Rational::zero())
            || init.iter().fold(Rational::zero(), |a, x| a + x) != Rational::one()
        {
            return bad("initial vector is not a distribution".into());
        }
        for (a, m) in alphabet.iter().zip(&letters) {
            if m.rows() != n || m.cols() != n || !m.is_stochastic() {
                return bad(format!("matrix of letter `{a}` is not stochastic"));
            }
        }
        if threshold <= Rational::zero() || threshold >= Rational::one() {
            return bad(format!("threshold {threshold} is not strictly between 0 and 1"));
        }
        if !accepting.contains(&true) {
            return bad("no accepting state".into());
        }
        let distinct: BTreeSet<&String> = alphabet.iter().collect();
        if distinct.len() != alphabet.len() {
            return bad("duplicate letter".into());
        }
        Ok(Pfa {
            states,
            alphabet,
            init,
            letters,
            accepting,
            threshold,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn init(&self) -> &[Rational] {
        &self.init
    }

    pub fn letter_matrix(&self, a: usize) -> &RationalMatrix {
        &self.letters[a]
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    pub fn threshold(&self) -> &Rational {
        &self.threshold
    }

    pub fn letter_index(&self, a: &str) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|x| x == a)
            .ok_or_else(|| Error::UnknownLetter(a.to_string()))
    }

    /// `v0·A(a1)…A(an)`, the state distribution after reading `word`.
    pub fn run_vector(&self, word: &[usize]) -> Vec<Rational> {
        let mut v = self.init.clone();
        for &a in word {
            v = self.letters[a].left_mul(&v).expect("square by construction");
        }
        v
    }

    fn final_vector(&self) -> Vec<Rational> {
        self.accepting
            .iter()
            .map(|&f| if f { Rational::one() } else { Rational::zero() })
            .collect()
    }

    fn value_of(&self, word: &[usize]) -> Rational {
        dot(&self.run_vector(word), &self.final_vector())
    }
}

/// `f(w) = v0·A(a1)…A(an)·vF` for a nonempty word.
pub fn pfa_value<S: AsRef<str>>(pfa: &Pfa, word: &[S]) -> Result<Rational> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    let idx = word
        .iter()
        .map(|a| pfa.letter_index(a.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok(pfa.value_of(&idx))
}

/// Name of the chain state `(q, a)`.
pub fn product_state(q: &str, a: &str) -> String {
    format!("{q}.{a}")
}

/// States `Q × Σ`, `PI(q,a) = v0(q)/N`, `PT((q,a),(q',b)) = A(b)(q,q')/N`
/// with `N = |Σ|`; agent `i` observes the letter, `p` marks accepting `q`.
pub fn pfa_to_podtmc(pfa: &Pfa) -> Model {
    let nq = pfa.states.len();
    let na = pfa.alphabet.len();
    let n = Rational::from_integer((na as i64).into());
    let idx = |q: usize, a: usize| q * na + a;
    let mut names = Vec::with_capacity(nq * na);
    let mut init = Vec::with_capacity(nq * na);
    let mut obs = Vec::with_capacity(nq * na);
    let mut labels = Vec::with_capacity(nq * na);
    for q in 0..nq {
        for a in 0..na {
            names.push(product_state(&pfa.states[q], &pfa.alphabet[a]));
            init.push(&pfa.init[q] / &n);
            obs.push(pfa.alphabet[a].clone());
            let mut l = BTreeSet::new();
            if pfa.accepting[q] {
                l.insert(PFA_PROP.to_string());
            }
            labels.push(l);
        }
    }
    let mut trans = RationalMatrix::zeros(nq * na, nq * na);
    for q in 0..nq {
        for a in 0..na {
            for q2 in 0..nq {
                for b in 0..na {
                    trans[(idx(q, a), idx(q2, b))] = &pfa.letters[b][(q, q2)] / &n;
                }
            }
        }
    }
    Model::new(names, init, trans, vec![(PFA_AGENT.to_string(), obs)], labels)
        .expect("product construction is well formed")
}

/// `EF<=T (Pr[i](p) > λ)`, the bounded nonemptiness question.
pub fn nonemptiness_formula(pfa: &Pfa, bound: u32) -> Ctl {
    let sure = Ctl::Compare(Comparison::single(
        ProbTerm::Current(Agent::named(PFA_AGENT), Box::new(Ctl::prop(PFA_PROP))),
        CmpOp::Gt,
        pfa.threshold.clone(),
    ));
    sure.eventually_within(bound).exists()
}

/// All words of length `1..=maxlen` as letter indices, shortest first.
pub fn words(alphabet: usize, maxlen: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..maxlen {
        layer = layer
            .iter()
            .flat_map(|w| {
                (0..alphabet).map(move |a| {
                    let mut x = w.clone();
                    x.push(a);
                    x
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// For every word `w` with `1 ≤ |w| ≤ maxlen`: the perfect-recall filter
/// on the encoding, summed over the letter observed at time 0 and over
/// letter components, equals `v0·A(w)`; and `Pr_i(p)` at every point
/// whose observations at times `1..=m` spell `w` equals `f(w)`.
pub fn pfa_correspondence_check(pfa: &Pfa, maxlen: usize) -> Result<bool> {
    let model = pfa_to_podtmc(pfa);
    let agent = Agent::named(PFA_AGENT);
    let nq = pfa.states.len();
    let na = pfa.alphabet.len();

    for w in words(na, maxlen) {
        let mut aggregate = vec![Rational::zero(); nq];
        for first in 0..na {
            let mut symbols = vec![pfa.alphabet[first].clone()];
            symbols.extend(w.iter().map(|&a| pfa.alphabet[a].clone()));
            let alpha = forward_filter(&model, &ObservationSequence::new(agent.clone(), symbols)?)?;
            for (s, x) in alpha.iter().enumerate() {
                aggregate[s / na] += x;
            }
        }
        let total = aggregate.iter().fold(Rational::zero(), |a, x| a + x);
        if total.is_zero() {
            return Ok(false);
        }
        let belief: Vec<Rational> = aggregate.iter().map(|x| x / &total).collect();
        if belief != pfa.run_vector(&w) {
            return Ok(false);
        }
    }

    let term = ProbTerm::Current(agent.clone(), Box::new(Ctl::prop(PFA_PROP)));
    let mut ev = CtlEvaluator::new(&model, Semantics::PerfectRecall, maxlen)?;
    let mut cache: HashMap<Vec<usize>, Rational> = HashMap::new();
    for m in 1..=maxlen {
        let values = ev.term_values(&term, m)?;
        for (r, value) in values.iter().enumerate() {
            let word: Vec<usize> = (1..=m)
                .map(|t| model.observation(&agent, ev.table().state(r, t)))
                .collect::<Result<_>>()?;
            let expected = cache
                .entry(word.clone())
                .or_insert_with(|| pfa.value_of(&word));
            if value != expected {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether some word of length at most `bound` has value above the
/// threshold, the empty word included (its value is `v0·vF`).
pub fn exists_word_above(pfa: &Pfa, bound: usize) -> bool {
    pfa.value_of(&[]) > pfa.threshold
        || words(pfa.alphabet.len(), bound)
            .iter()
            .any(|w| pfa.value_of(w) > pfa.threshold)
}

/// Reads the automaton format:
///
/// ```text
/// states: q1 q2
/// letters: a b
/// init: q1 1
/// letter a: q1 -> q1 1/2, q1 -> q2 1/2, q2 -> q2 1
/// letter b: q1 -> q1 1, q2 -> q1 1
/// accept: q2
/// threshold: 1/2
/// ```
pub fn parse_pfa(text: &str) -> Result<Pfa> {
    let mut states: Vec<String> = Vec::new();
    let mut alphabet: Vec<String> = Vec::new();
    let mut init: Vec<(usize, Rational)> = Vec::new();
    let mut letters: HashMap<String, Vec<(usize, usize, Rational)>> = HashMap::new();
    let mut accept: Vec<usize> = Vec::new();
    let mut threshold: Option<Rational> = None;

    for item in header_lines(text) {
        let (ctx, head, body) = item?;
        let key: Vec<&str> = head.iter().map(|t| t.text).collect();
        let state = |tok: Option<&Tok<'_>>| -> Result<usize> {
            let name = ctx.name(tok, "a state name")?;
            states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| ctx.at(tok, format!("undeclared state `{name}`")))
        };
        match key.as_slice() {
            ["states"] => {
                for t in &body {
                    states.push(ctx.name(Some(t), "a state name")?.to_string());
                }
            }
            ["letters"] => {
                for t in &body {
                    alphabet.push(ctx.name(Some(t), "a letter")?.to_string());
                }
            }
            ["init"] => {
                for entry in split_entries(&body) {
                    let mut it = entry.iter();
                    let s = state(it.next())?;
                    init.push((s, ctx.rational(it.next())?));
                    ctx.done(it.next())?;
                }
            }
            ["letter", a] => {
                if !alphabet.iter().any(|x| x == a) {
                    return Err(ctx.at(head.get(1), format!("undeclared letter `{a}`")));
                }
                let rows = letters.entry(a.to_string()).or_default();
                for entry in split_entries(&body) {
                    let mut it = entry.iter();
                    let from = state(it.next())?;
                    ctx.expect(it.next(), "->")?;
                    let to = state(it.next())?;
                    rows.push((from, to, ctx.rational(it.next())?));
                    ctx.done(it.next())?;
                }
            }
            ["accept"] => {
                for t in &body {
                    accept.push(state(Some(t))?);
                }
            }
            ["threshold"] => {
                let mut it = body.iter();
                threshold = Some(ctx.rational(it.next())?);
                ctx.done(it.next())?;
            }
            _ => return Err(ctx.at(head.first(), format!("unknown key `{}`", key.join(" ")))),
        }
    }
    let n = states.len();
    let mut v0 = vec![Rational::zero(); n];
    for (s, p) in init {
        v0[s] = p;
    }
    let mut matrices = Vec::new();
    for a in &alphabet {
        let mut m = RationalMatrix::zeros(n, n);
        for (i, j, p) in letters.remove(a).unwrap_or_default() {
            m[(i, j)] = p;
        }
        matrices.push(m);
    }
    let mut accepting = vec![false; n];
    for s in accept {
        accepting[s] = true;
    }
    let threshold =
        threshold.ok_or_else(|| Error::Parse(ParseError::new(1, 1, "missing `threshold:` line")))?;
    Pfa::new(states, alphabet, v0, matrices, accepting, threshold)
}

pub fn write_pfa(pfa: &Pfa) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "states: {}", pfa.states.join(" "));
    let _ = writeln!(out, "letters: {}", pfa.alphabet.join(" "));
    let init: Vec<String> = pfa
        .init
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(s, p)| format!("{} {p}", pfa.states[s]))
        .collect();
    let _ = writeln!(out, "init: {}", init.join(", "));
    for (a, m) in pfa.alphabet.iter().zip(&pfa.letters) {
        let mut entries = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if !m[(i, j)].is_zero() {
                    entries.push(format!("{} -> {} {}", pfa.states[i], pfa.states[j], m[(i, j)]));
                }
            }
        }
        let _ = writeln!(out, "letter {a}: {}", entries.join(", "));
    }
    let accept: Vec<&str> = pfa
        .states
        .iter()
        .zip(&pfa.accepting)
        .filter(|(_, &f)| f)
        .map(|(s, _)| s.as_str())
        .collect();
    let _ = writeln!(out, "accept: {}", accept.join(" "));
    let _ = writeln!(out, "threshold: {}", pfa.threshold);
    out
}
