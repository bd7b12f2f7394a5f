//! Evaluation of first-order sentences with time variables ranging over
//! `[0, T]`.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Zero};

use super::runs::{Classes, RunTable};
use super::{Assignment, Verdict};
use crate::error::{Error, Result};
use crate::logic::{Comparison, Wmlo, WmloTerm};
use crate::markov::{Distribution, Model, Rational, StateId};
use crate::semantics::Semantics;
use std::rc::Rc;

/// Joint enumeration is used for global probabilities up to this many
/// state tuples; beyond it the run table is used.
const JOINT_LIMIT: usize = 200_000;

enum Truth {
    Const(bool),
    Runs(Vec<bool>),
}

enum Value {
    Scalar(Rational),
    ByClass(Rc<Classes>, Vec<Rational>),
}

pub struct WmloEvaluator<'m> {
    model: &'m Model,
    semantics: Semantics,
    bound: u64,
    table: Option<RunTable>,
    dists: Option<Vec<Distribution>>,
    steps: HashMap<(StateId, usize), Vec<Rational>>,
}

impl<'m> WmloEvaluator<'m> {
    /// Time variables range over `0..=bound`.
    pub fn new(model: &'m Model, semantics: Semantics, bound: u64) -> Self {
        WmloEvaluator {
            model,
            semantics,
            bound,
            table: None,
            dists: None,
            steps: HashMap::new(),
        }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// The run table to the bound, built on first use.
    pub fn runs(&mut self) -> Result<&mut RunTable> {
        if self.table.is_none() {
            self.table = Some(RunTable::new(self.model, self.bound as usize)?);
        }
        Ok(self.table.as_mut().expect("just built"))
    }

    /// Truth of `phi` on every run of [`Self::runs`] under `assignment`.
    pub fn truth(&mut self, phi: &Wmlo, assignment: &Assignment) -> Result<Vec<bool>> {
        check(self.model, phi)?;
        let mut env = assignment.0.clone();
        match self.eval(phi, &mut env)? {
            Truth::Const(b) => Ok(vec![b; self.runs()?.len()]),
            Truth::Runs(v) => Ok(v),
        }
    }

    /// Whether `phi` holds on all runs under `assignment`.
    pub fn holds(&mut self, phi: &Wmlo, assignment: &Assignment) -> Result<bool> {
        check(self.model, phi)?;
        let mut env = assignment.0.clone();
        Ok(match self.eval(phi, &mut env)? {
            Truth::Const(b) => b,
            Truth::Runs(v) => v.into_iter().all(|b| b),
        })
    }

    fn lookup(&self, env: &[(String, u64)], var: &str) -> Result<u64> {
        env.iter()
            .rev()
            .find(|(v, _)| v == var)
            .map(|(_, n)| *n)
            .ok_or_else(|| Error::Unsupported(format!("free time variable `{var}`")))
    }

    fn eval(&mut self, phi: &Wmlo, env: &mut Vec<(String, u64)>) -> Result<Truth> {
        Ok(match phi {
            Wmlo::True => Truth::Const(true),
            Wmlo::PropAt(p, t) => {
                let m = self.lookup(env, t)? as usize;
                let model = self.model;
                let table = self.runs()?;
                Truth::Runs((0..table.len()).map(|r| model.holds(table.state(r, m), p)).collect())
            }
            Wmlo::SetAt(..) | Wmlo::ForallSet(..) => return Err(Error::UnsupportedSecondOrder),
            Wmlo::Less(a, b) => Truth::Const(self.lookup(env, a)? < self.lookup(env, b)?),
            Wmlo::Not(a) => match self.eval(a, env)? {
                Truth::Const(b) => Truth::Const(!b),
                Truth::Runs(v) => Truth::Runs(v.into_iter().map(|b| !b).collect()),
            },
            Wmlo::And(a, b) => match self.eval(a, env)? {
                Truth::Const(false) => Truth::Const(false),
                Truth::Const(true) => self.eval(b, env)?,
                Truth::Runs(x) => match self.eval(b, env)? {
                    Truth::Const(true) => Truth::Runs(x),
                    Truth::Const(false) => Truth::Const(false),
                    Truth::Runs(y) => Truth::Runs(x.iter().zip(&y).map(|(p, q)| *p && *q).collect()),
                },
            },
            Wmlo::KnowAt(agent, t, body) => {
                let m = self.lookup(env, t)? as usize;
                match self.eval(body, env)? {
                    Truth::Const(b) => Truth::Const(b),
                    Truth::Runs(v) => {
                        let (model, semantics) = (self.model, self.semantics);
                        let classes = self.runs()?.local_classes(model, agent, semantics, m)?;
                        Truth::Runs(classes.all_within(&v))
                    }
                }
            }
            Wmlo::ForallT(v, body) => self.quantify(v, body, env, true)?,
            Wmlo::ExistsT(v, body) => self.quantify(v, body, env, false)?,
            Wmlo::Compare(c) => self.compare(c, env)?,
        })
    }

    fn quantify(
        &mut self,
        var: &str,
        body: &Wmlo,
        env: &mut Vec<(String, u64)>,
        universal: bool,
    ) -> Result<Truth> {
        let mut acc: Option<Vec<bool>> = None;
        for n in 0..=self.bound {
            env.push((var.to_string(), n));
            let t = self.eval(body, env);
            env.pop();
            match t? {
                Truth::Const(b) if b != universal => return Ok(Truth::Const(b)),
                Truth::Const(_) => {}
                Truth::Runs(v) => {
                    acc = Some(match acc {
                        None => v,
                        Some(a) if universal => a.iter().zip(&v).map(|(p, q)| *p && *q).collect(),
                        Some(a) => a.iter().zip(&v).map(|(p, q)| *p || *q).collect(),
                    });
                }
            }
        }
        Ok(match acc {
            None => Truth::Const(universal),
            Some(v) => Truth::Runs(v),
        })
    }

    fn compare(&mut self, c: &Comparison<WmloTerm>, env: &mut Vec<(String, u64)>) -> Result<Truth> {
        let mut parts = Vec::with_capacity(c.terms().len());
        for term in c.terms() {
            parts.push(self.term(term, env)?);
        }
        if parts.iter().all(|p| matches!(p, Value::Scalar(_))) {
            let values: Vec<Rational> = parts
                .into_iter()
                .map(|p| match p {
                    Value::Scalar(v) => v,
                    Value::ByClass(..) => unreachable!(),
                })
                .collect();
            return Ok(Truth::Const(c.holds(&values)?));
        }
        let n = self.runs()?.len();
        let mut cache: HashMap<Vec<u32>, bool> = HashMap::new();
        let mut out = Vec::with_capacity(n);
        for r in 0..n {
            let key: Vec<u32> = parts
                .iter()
                .map(|p| match p {
                    Value::Scalar(_) => 0,
                    Value::ByClass(cl, _) => cl.ids[r],
                })
                .collect();
            if let Some(v) = cache.get(&key) {
                out.push(*v);
                continue;
            }
            let values: Vec<Rational> = parts
                .iter()
                .zip(&key)
                .map(|(p, &k)| match p {
                    Value::Scalar(v) => v.clone(),
                    Value::ByClass(_, vals) => vals[k as usize].clone(),
                })
                .collect();
            let v = c.holds(&values)?;
            cache.insert(key, v);
            out.push(v);
        }
        Ok(Truth::Runs(out))
    }

    fn term(&mut self, term: &WmloTerm, env: &mut Vec<(String, u64)>) -> Result<Value> {
        match term {
            WmloTerm::Global(body) => {
                if is_local(body) {
                    if let Some(p) = self.joint_probability(body, env)? {
                        return Ok(Value::Scalar(p));
                    }
                }
                Ok(Value::Scalar(match self.eval(body, env)? {
                    Truth::Const(b) => indicator(b),
                    Truth::Runs(mask) => self.runs()?.measure(&mask),
                }))
            }
            WmloTerm::AgentAt(agent, t, body) => {
                let m = self.lookup(env, t)? as usize;
                match self.eval(body, env)? {
                    Truth::Const(b) => Ok(Value::Scalar(indicator(b))),
                    Truth::Runs(mask) => {
                        let (model, semantics) = (self.model, self.semantics);
                        let table = self.runs()?;
                        let classes = table.local_classes(model, agent, semantics, m)?;
                        let values = table.conditional_by_class(&classes, &mask);
                        Ok(Value::ByClass(classes, values))
                    }
                }
            }
        }
    }

    /// Probability of a quantifier-free, operator-free body by summing over
    /// the states at the times it mentions.
    fn joint_probability(&mut self, body: &Wmlo, env: &[(String, u64)]) -> Result<Option<Rational>> {
        let mut vars = BTreeSet::new();
        prop_times(body, &mut vars);
        let mut times = BTreeSet::new();
        for v in &vars {
            times.insert(self.lookup(env, v)? as usize);
        }
        let times: Vec<usize> = times.into_iter().collect();
        let n = self.model.num_states();
        let tuples = (n as f64).powi(times.len() as i32);
        if tuples > JOINT_LIMIT as f64 {
            return Ok(None);
        }
        if self.dists.is_none() {
            self.dists = Some(self.model.distributions_up_to(self.bound as usize));
        }
        let mut assigned: Vec<StateId> = Vec::with_capacity(times.len());
        let mut total = Rational::zero();
        self.joint_walk(body, env, &times, &mut assigned, Rational::one(), &mut total)?;
        Ok(Some(total))
    }

    fn joint_walk(
        &mut self,
        body: &Wmlo,
        env: &[(String, u64)],
        times: &[usize],
        assigned: &mut Vec<StateId>,
        weight: Rational,
        total: &mut Rational,
    ) -> Result<()> {
        let j = assigned.len();
        if j == times.len() {
            let at = |t: usize| assigned[times.iter().position(|&x| x == t).expect("time collected")];
            if local_truth(self.model, body, env, &at)? {
                *total += weight;
            }
            return Ok(());
        }
        let row: Vec<Rational> = if j == 0 {
            self.dists.as_ref().expect("computed")[times[0]].weights().to_vec()
        } else {
            self.transient(assigned[j - 1], times[j] - times[j - 1])
        };
        for (s, p) in row.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            assigned.push(s);
            self.joint_walk(body, env, times, assigned, &weight * p, total)?;
            assigned.pop();
        }
        Ok(())
    }

    /// Row `from` of `PT^d`.
    fn transient(&mut self, from: StateId, d: usize) -> Vec<Rational> {
        if let Some(v) = self.steps.get(&(from, d)) {
            return v.clone();
        }
        let v = if d == 0 {
            Distribution::point(self.model.num_states(), from).into_weights()
        } else {
            let prev = self.transient(from, d - 1);
            self.model.step(&prev)
        };
        self.steps.insert((from, d), v.clone());
        v
    }
}

fn indicator(b: bool) -> Rational {
    if b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

fn is_local(phi: &Wmlo) -> bool {
    match phi {
        Wmlo::True | Wmlo::PropAt(..) | Wmlo::Less(..) => true,
        Wmlo::Not(a) => is_local(a),
        Wmlo::And(a, b) => is_local(a) && is_local(b),
        _ => false,
    }
}

fn prop_times(phi: &Wmlo, out: &mut BTreeSet<String>) {
    match phi {
        Wmlo::PropAt(_, t) => {
            out.insert(t.clone());
        }
        Wmlo::Not(a) => prop_times(a, out),
        Wmlo::And(a, b) => {
            prop_times(a, out);
            prop_times(b, out);
        }
        _ => {}
    }
}

fn local_truth(
    model: &Model,
    phi: &Wmlo,
    env: &[(String, u64)],
    at: &dyn Fn(usize) -> StateId,
) -> Result<bool> {
    let lookup = |v: &str| -> Result<u64> {
        env.iter()
            .rev()
            .find(|(x, _)| x == v)
            .map(|(_, n)| *n)
            .ok_or_else(|| Error::Unsupported(format!("free time variable `{v}`")))
    };
    Ok(match phi {
        Wmlo::True => true,
        Wmlo::PropAt(p, t) => model.holds(at(lookup(t)? as usize), p),
        Wmlo::Less(a, b) => lookup(a)? < lookup(b)?,
        Wmlo::Not(a) => !local_truth(model, a, env, at)?,
        Wmlo::And(a, b) => local_truth(model, a, env, at)? && local_truth(model, b, env, at)?,
        _ => unreachable!("checked by is_local"),
    })
}

fn check(model: &Model, phi: &Wmlo) -> Result<()> {
    if phi.has_second_order() {
        return Err(Error::UnsupportedSecondOrder);
    }
    let mut bad = None;
    visit(phi, &mut |f| match f {
        Wmlo::PropAt(p, _) if bad.is_none() && !model.knows_proposition(p) => {
            bad = Some(Error::UnknownProposition(p.clone()));
        }
        Wmlo::KnowAt(a, ..) if bad.is_none() => {
            if let Err(e) = model.check_agent(a) {
                bad = Some(e);
            }
        }
        Wmlo::Compare(c) if bad.is_none() => {
            for t in c.terms() {
                if let WmloTerm::AgentAt(a, ..) = t {
                    if let Err(e) = model.check_agent(a) {
                        bad = Some(e);
                    }
                }
            }
        }
        _ => {}
    });
    match bad {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn visit(phi: &Wmlo, f: &mut dyn FnMut(&Wmlo)) {
    f(phi);
    match phi {
        Wmlo::Not(a)
        | Wmlo::KnowAt(_, _, a)
        | Wmlo::ForallT(_, a)
        | Wmlo::ExistsT(_, a)
        | Wmlo::ForallSet(_, a) => visit(a, f),
        Wmlo::And(a, b) => {
            visit(a, f);
            visit(b, f);
        }
        Wmlo::Compare(c) => {
            for t in c.terms() {
                visit(t.body(), f);
            }
        }
        _ => {}
    }
}

/// Checks a sentence with time variables ranging over `0..=bound`.
///
/// A leading existential block is answered with the least witness, or
/// [`Verdict::NoWitnessUpTo`] when none exists within the bound. A leading
/// universal block fails with the least counterexample.
pub fn eval_wmlo(model: &Model, semantics: Semantics, phi: &Wmlo, bound: Option<u64>) -> Result<Verdict> {
    if let Some(v) = phi.free_time_vars().into_iter().next() {
        return Err(Error::Unsupported(format!("free time variable `{v}`")));
    }
    if phi.has_second_order() {
        return Err(Error::UnsupportedSecondOrder);
    }
    let bound = match bound {
        Some(b) => b,
        None if phi.has_quantifier() => return Err(Error::UnboundedQuantifier),
        None => 0,
    };
    check(model, phi)?;
    let mut ev = WmloEvaluator::new(model, semantics, bound);

    let (vars, body, existential) = prefix(phi);
    if vars.is_empty() {
        return Ok(if ev.holds(phi, &Assignment::default())? {
            Verdict::Holds
        } else {
            Verdict::Fails(None)
        });
    }
    let mut point = vec![0u64; vars.len()];
    let mut run_dependent = false;
    loop {
        let mut env: Vec<(String, u64)> = vars.iter().cloned().zip(point.iter().copied()).collect();
        let truth = ev.eval(body, &mut env)?;
        let assignment = Assignment(env);
        match (existential, truth) {
            (true, Truth::Const(true)) => return Ok(Verdict::Witness(assignment)),
            (false, Truth::Const(false)) => return Ok(Verdict::Fails(Some(assignment))),
            (true, Truth::Runs(v)) => {
                if v.iter().all(|&b| b) {
                    return Ok(Verdict::Witness(assignment));
                }
                run_dependent = true;
            }
            (false, Truth::Runs(v)) if !v.iter().all(|&b| b) => {
                return Ok(Verdict::Fails(Some(assignment)));
            }
            _ => {}
        }
        if !advance(&mut point, bound) {
            break;
        }
    }
    if !existential {
        return Ok(Verdict::Holds);
    }
    // No single assignment works on every run; runs may still each have
    // their own witness.
    if run_dependent && ev.holds(phi, &Assignment::default())? {
        return Ok(Verdict::Holds);
    }
    Ok(Verdict::NoWitnessUpTo(bound))
}

/// The leading block of like quantifiers.
fn prefix(phi: &Wmlo) -> (Vec<String>, &Wmlo, bool) {
    let existential = matches!(phi, Wmlo::ExistsT(..));
    let mut vars = Vec::new();
    let mut cur = phi;
    loop {
        match (cur, existential) {
            (Wmlo::ExistsT(v, b), true) | (Wmlo::ForallT(v, b), false) => {
                vars.push(v.clone());
                cur = b;
            }
            _ => return (vars, cur, existential),
        }
    }
}

/// Next point of `[0, bound]^k` in lexicographic order.
fn advance(point: &mut [u64], bound: u64) -> bool {
    for i in (0..point.len()).rev() {
        if point[i] < bound {
            point[i] += 1;
            for x in &mut point[i + 1..] {
                *x = 0;
            }
            return true;
        }
    }
    false
}
