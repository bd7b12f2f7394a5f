//! Random models, formulas and automata shared by the integration suites,
//! plus brute-force oracles that enumerate paths directly.

#![allow(dead_code)]

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use podtmc::logic::{CmpOp, Comparison, Ctl, Monomial, Polynomial, ProbTerm, Wmlo, WmloTerm};
use podtmc::markov::{int, rat, Agent, Model, ModelBuilder, PathPrefix, Rational, RationalMatrix};
use podtmc::reductions::{Lrs, Pfa};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const PROPS: [&str; 2] = ["p", "q"];
pub const SYMBOLS: [&str; 3] = ["a", "b", "c"];

#[derive(Debug, Clone, Copy)]
pub struct ModelShape {
    pub max_states: usize,
    pub max_obs: usize,
    pub agents: usize,
    /// Largest number of successors per state.
    pub max_succ: usize,
}

impl ModelShape {
    pub const SMALL: ModelShape = ModelShape {
        max_states: 4,
        max_obs: 3,
        agents: 1,
        max_succ: 2,
    };
}

/// Small positive integer weights normalized to a distribution.
pub fn random_distribution(r: &mut impl Rng, n: usize) -> Vec<Rational> {
    let w: Vec<i64> = (0..n).map(|_| r.gen_range(1..=3)).collect();
    let total: i64 = w.iter().sum();
    w.into_iter().map(|x| rat(x, total)).collect()
}

fn pick(r: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(r);
    all.truncate(k);
    all.sort();
    all
}

pub fn state_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

pub fn agent_name(k: usize) -> String {
    ["i", "j"][k].to_string()
}

/// A random model whose labels mention both `p` and `q`.
pub fn random_model(r: &mut impl Rng, shape: ModelShape) -> Model {
    let n = if r.gen_bool(0.1) { 1 } else { r.gen_range(2..=shape.max_states.max(2)) };
    let names = state_names(n);
    let mut b = ModelBuilder::new(&names);
    let k0 = r.gen_range(1..=n.min(2));
    let starts = pick(r, n, k0);
    for (s, p) in starts.iter().zip(random_distribution(r, starts.len())) {
        b = b.init(&names[*s], p);
    }
    for s in 0..n {
        let k = r.gen_range(1..=shape.max_succ.min(n));
        let succ = pick(r, n, k);
        for (t, p) in succ.iter().zip(random_distribution(r, k)) {
            b = b.trans(&names[s], &names[*t], p);
        }
    }
    for a in 0..shape.agents {
        let nobs = r.gen_range(1..=shape.max_obs);
        let obs: Vec<(String, String)> = names
            .iter()
            .map(|s| (s.clone(), SYMBOLS[r.gen_range(0..nobs)].to_string()))
            .collect();
        let obs: Vec<(&str, &str)> = obs.iter().map(|(s, o)| (s.as_str(), o.as_str())).collect();
        b = b.agent(&agent_name(a), &obs);
    }
    let mut labels: Vec<Vec<&str>> = (0..n)
        .map(|_| PROPS.iter().copied().filter(|_| r.gen_bool(0.5)).collect())
        .collect();
    for p in PROPS {
        if !labels.iter().any(|l| l.contains(&p)) {
            labels[r.gen_range(0..n)].push(p);
        }
    }
    for (s, l) in labels.iter().enumerate() {
        b = b.label(&names[s], l);
    }
    b.build().expect("generated model is valid")
}

pub fn agents_of(model: &Model) -> Vec<Agent> {
    let mut v: Vec<Agent> = model.agent_names().map(Agent::named).collect();
    v.push(Agent::Top);
    v.push(Agent::Bottom);
    v
}

const CONSTANTS: [(i64, i64); 5] = [(0, 1), (1, 3), (1, 2), (2, 3), (1, 1)];
const OPS: [CmpOp; 5] = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ge, CmpOp::Gt];

pub fn random_constant(r: &mut impl Rng) -> Rational {
    let (n, d) = CONSTANTS[r.gen_range(0..CONSTANTS.len())];
    rat(n, d)
}

pub fn random_op(r: &mut impl Rng) -> CmpOp {
    OPS[r.gen_range(0..OPS.len())]
}

/// Options for [`random_ctl`].
#[derive(Debug, Clone)]
pub struct CtlShape {
    pub agents: Vec<Agent>,
    /// Largest temporal depth.
    pub depth: usize,
    /// Largest number of connectives.
    pub size: usize,
    pub prior: bool,
    pub unbounded: bool,
}

/// A random formula using only `p`, `q` and the given agents, with
/// temporal depth at most `shape.depth`.
pub fn random_ctl(r: &mut impl Rng, shape: &CtlShape) -> Ctl {
    gen_ctl(r, shape, shape.size, shape.depth)
}

fn gen_ctl(r: &mut impl Rng, shape: &CtlShape, size: usize, depth: usize) -> Ctl {
    if size == 0 || r.gen_bool(0.1) {
        return match r.gen_range(0..8) {
            0 => Ctl::True,
            k => Ctl::prop(PROPS[k % 2]),
        };
    }
    let sub = size - 1;
    let agent = shape.agents[r.gen_range(0..shape.agents.len())].clone();
    match r.gen_range(0..14) {
        0 => gen_ctl(r, shape, sub, depth).not(),
        1 => gen_ctl(r, shape, sub / 2, depth).and(gen_ctl(r, shape, sub / 2, depth)),
        2 => gen_ctl(r, shape, sub / 2, depth).or(gen_ctl(r, shape, sub / 2, depth)),
        3 | 8 if depth > 0 => gen_ctl(r, shape, sub, depth - 1).next(),
        4 | 9 if depth > 0 => {
            let k = r.gen_range(0..=depth.min(2));
            let a = gen_ctl(r, shape, sub / 2, depth - k);
            let b = gen_ctl(r, shape, sub / 2, depth - k);
            a.until_within(b, k as u32)
        }
        5 if shape.unbounded && r.gen_bool(0.3) => {
            let a = gen_ctl(r, shape, sub / 2, depth);
            let b = gen_ctl(r, shape, sub / 2, depth);
            a.until(b)
        }
        5 | 6 => {
            let body = gen_ctl(r, shape, sub, depth);
            if r.gen_bool(0.5) {
                body.all()
            } else {
                body.exists()
            }
        }
        7 | 10 => Ctl::know(agent, gen_ctl(r, shape, sub, depth)),
        _ => {
            let body = Box::new(gen_ctl(r, shape, sub, depth));
            let term = if shape.prior && r.gen_bool(0.2) {
                ProbTerm::Prior(agent, body)
            } else {
                ProbTerm::Current(agent, body)
            };
            Ctl::Compare(Comparison::single(term, random_op(r), random_constant(r)))
        }
    }
}

/// Comparisons with several terms and a random polynomial over them.
pub fn random_poly_comparison<T: Ord + Clone>(r: &mut impl Rng, terms: Vec<T>) -> Comparison<T> {
    let k = terms.len();
    loop {
        let mut poly = Polynomial::zero();
        for _ in 0..r.gen_range(1..=3) {
            let mut powers: Vec<(usize, u32)> = Vec::new();
            for v in 0..k {
                if r.gen_bool(0.5) {
                    powers.push((v, r.gen_range(1..=2)));
                }
            }
            let c = rat(r.gen_range(-3..=3), r.gen_range(1..=3));
            poly = &poly + &Polynomial::term(c, Monomial::from_powers(powers));
        }
        poly = &poly + &Polynomial::var(r.gen_range(0..k));
        if let Ok(c) = Comparison::new(terms.clone(), poly, random_op(r), random_constant(r)) {
            return c;
        }
    }
}

/// Any formula of the syntax, unbounded and multi-term comparisons included.
pub fn random_ctl_any(r: &mut impl Rng, size: usize) -> Ctl {
    if size == 0 || r.gen_bool(0.15) {
        return match r.gen_range(0..6) {
            0 => Ctl::True,
            1 => Ctl::prop("r_1"),
            k => Ctl::prop(["p", "q", "r2", "@state_s0"][k - 2]),
        };
    }
    let sub = size - 1;
    let agents = [Agent::named("i"), Agent::named("j"), Agent::Top, Agent::Bottom];
    let agent = agents[r.gen_range(0..agents.len())].clone();
    match r.gen_range(0..11) {
        0 => random_ctl_any(r, sub).not(),
        1 => random_ctl_any(r, sub / 2).and(random_ctl_any(r, sub / 2)),
        2 => random_ctl_any(r, sub / 2).or(random_ctl_any(r, sub / 2)),
        3 => random_ctl_any(r, sub).next(),
        4 => random_ctl_any(r, sub / 2).until_within(random_ctl_any(r, sub / 2), r.gen_range(0..4)),
        5 => random_ctl_any(r, sub / 2).until(random_ctl_any(r, sub / 2)),
        6 => random_ctl_any(r, sub).all(),
        7 => random_ctl_any(r, sub).exists(),
        8 => Ctl::know(agent, random_ctl_any(r, sub)),
        _ => {
            let k = r.gen_range(1..=3);
            let terms: Vec<ProbTerm> = (0..k)
                .map(|_| {
                    let a = agents[r.gen_range(0..agents.len())].clone();
                    let body = Box::new(random_ctl_any(r, sub / k));
                    if r.gen_bool(0.3) {
                        ProbTerm::Prior(a, body)
                    } else {
                        ProbTerm::Current(a, body)
                    }
                })
                .collect();
            Ctl::Compare(random_poly_comparison(r, terms))
        }
    }
}

/// Any first-order formula over the variables in scope plus fresh ones.
/// `X` is used only under a set quantifier when `sets` is false.
pub fn random_wmlo_any(r: &mut impl Rng, size: usize, scope: &mut Vec<String>, sets: bool) -> Wmlo {
    let var = |r: &mut dyn rand::RngCore, scope: &[String]| scope[r.gen_range(0..scope.len())].clone();
    if size == 0 || r.gen_bool(0.15) {
        return match r.gen_range(0..4) {
            0 => Wmlo::True,
            1 if scope.len() >= 2 => Wmlo::less(&var(r, scope), &var(r, scope)),
            2 if sets => Wmlo::SetAt("X".into(), var(r, scope)),
            _ => Wmlo::prop_at(PROPS[r.gen_range(0..2)], &var(r, scope)),
        };
    }
    let sub = size - 1;
    let agents = [Agent::named("i"), Agent::Top, Agent::Bottom];
    let agent = agents[r.gen_range(0..agents.len())].clone();
    match r.gen_range(0..9) {
        0 => random_wmlo_any(r, sub, scope, sets).not(),
        1 => random_wmlo_any(r, sub / 2, scope, sets).and(random_wmlo_any(r, sub / 2, scope, sets)),
        2 => random_wmlo_any(r, sub / 2, scope, sets).or(random_wmlo_any(r, sub / 2, scope, sets)),
        3 | 4 => {
            let v = format!("u{}", scope.len());
            scope.push(v.clone());
            let body = random_wmlo_any(r, sub, scope, sets);
            scope.pop();
            if r.gen_bool(0.5) {
                Wmlo::forall(&v, body)
            } else {
                Wmlo::exists(&v, body)
            }
        }
        5 => {
            let t = var(r, scope);
            Wmlo::know_at(agent, &t, random_wmlo_any(r, sub, scope, sets))
        }
        6 => Wmlo::ForallSet("X".into(), Box::new(random_wmlo_any(r, sub, scope, true))),
        _ => {
            let k = r.gen_range(1..=2);
            let terms: Vec<WmloTerm> = (0..k)
                .map(|_| {
                    let body = random_wmlo_any(r, sub / 2, scope, sets);
                    if r.gen_bool(0.5) {
                        Wmlo::global(body)
                    } else {
                        let t = var(r, scope);
                        Wmlo::agent_at(agents[r.gen_range(0..agents.len())].clone(), &t, body)
                    }
                })
                .collect();
            Wmlo::Compare(random_poly_comparison(r, terms))
        }
    }
}

/// Every positive path of length `t + 1` with its probability, by direct
/// multiplication along the path.
pub fn all_paths(model: &Model, t: usize) -> Vec<(Vec<usize>, Rational)> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<usize>, Rational)> = (0..model.num_states())
        .filter(|&s| !model.init().get(s).is_zero())
        .map(|s| (vec![s], model.init().get(s).clone()))
        .collect();
    while let Some((path, p)) = stack.pop() {
        if path.len() == t + 1 {
            out.push((path, p));
            continue;
        }
        let last = *path.last().unwrap();
        for s in 0..model.num_states() {
            let q = model.prob(last, s);
            if !q.is_zero() {
                let mut next = path.clone();
                next.push(s);
                stack.push((next, &p * q));
            }
        }
    }
    out
}

pub fn prefix(path: &[usize]) -> PathPrefix {
    PathPrefix::new(path.to_vec()).unwrap()
}

pub fn sum<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> Rational {
    xs.into_iter().fold(Rational::zero(), |a, x| a + x)
}

/// A row-stochastic matrix with small-denominator entries.
pub fn random_stochastic(r: &mut impl Rng, n: usize, max_succ: usize) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(n, n);
    for i in 0..n {
        let k = r.gen_range(1..=max_succ.min(n));
        let succ = pick(r, n, k);
        for (j, p) in succ.iter().zip(random_distribution(r, succ.len())) {
            m[(i, *j)] = p;
        }
    }
    m
}

pub fn random_pfa(r: &mut impl Rng) -> Pfa {
    let nq = r.gen_range(1..=3);
    let na = r.gen_range(1..=2);
    let states: Vec<String> = (0..nq).map(|i| format!("q{i}")).collect();
    let alphabet: Vec<String> = (0..na).map(|i| SYMBOLS[i].to_string()).collect();
    let k0 = r.gen_range(1..=nq);
    let init_support = pick(r, nq, k0);
    let mut init = vec![Rational::zero(); nq];
    for (s, p) in init_support.iter().zip(random_distribution(r, init_support.len())) {
        init[*s] = p;
    }
    let letters = (0..na).map(|_| random_stochastic(r, nq, 3)).collect();
    let mut accepting: Vec<bool> = (0..nq).map(|_| r.gen_bool(0.5)).collect();
    if !accepting.contains(&true) {
        accepting[r.gen_range(0..nq)] = true;
    }
    let (n, d) = [(1, 4), (1, 3), (1, 2), (2, 3), (3, 4)][r.gen_range(0..5)];
    Pfa::new(states, alphabet, init, letters, accepting, rat(n, d)).expect("generated automaton is valid")
}

pub fn random_lrs(r: &mut impl Rng) -> Lrs {
    let k = r.gen_range(1..=4);
    let mut coeffs: Vec<Rational> = (0..k).map(|_| int(r.gen_range(-3..=3))).collect();
    if coeffs[k - 1].is_zero() {
        coeffs[k - 1] = Rational::one();
    }
    if r.gen_bool(0.3) {
        coeffs[0] = rat([-3, -1, 1, 3][r.gen_range(0..4)], 2);
    }
    let init = (0..k).map(|_| int(r.gen_range(-3..=3))).collect();
    Lrs::new(coeffs, init).unwrap()
}

pub fn random_int_matrix(r: &mut impl Rng) -> RationalMatrix {
    let k = r.gen_range(1..=3);
    let rows: Vec<Vec<Rational>> = (0..k)
        .map(|_| (0..k).map(|_| int(r.gen_range(-3..=3))).collect())
        .collect();
    RationalMatrix::from_rows(rows).unwrap()
}

/// Product by the textbook triple loop.
pub fn naive_mul(a: &RationalMatrix, b: &RationalMatrix) -> RationalMatrix {
    let mut c = RationalMatrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            for k in 0..a.cols() {
                let x = &a[(i, k)] * &b[(k, j)];
                c[(i, j)] += x;
            }
        }
    }
    c
}

pub fn naive_power(a: &RationalMatrix, n: u64) -> RationalMatrix {
    let mut p = RationalMatrix::identity(a.rows());
    for _ in 0..n {
        p = naive_mul(&p, a);
    }
    p
}

/// Unnormalized posterior over final states for every observation history
/// of length `t + 1`, by grouping all paths on what the agent sees.
pub fn brute_force_histories(
    model: &Model,
    agent: &Agent,
    t: usize,
) -> std::collections::BTreeMap<Vec<String>, Vec<Rational>> {
    let mut out = std::collections::BTreeMap::new();
    for (path, p) in all_paths(model, t) {
        let seen: Vec<String> = path
            .iter()
            .map(|&s| model.observation_name(agent, s).unwrap())
            .collect();
        let entry = out
            .entry(seen)
            .or_insert_with(|| vec![Rational::zero(); model.num_states()]);
        entry[*path.last().unwrap()] += p;
    }
    out
}

pub fn normalize(v: &[Rational]) -> Vec<Rational> {
    let total = sum(v);
    v.iter().map(|x| x / &total).collect()
}
