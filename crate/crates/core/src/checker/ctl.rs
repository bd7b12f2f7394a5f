//! Exact evaluation of branching-time formulas with knowledge and
//! probability over enumerated run prefixes.

use std::collections::HashMap;
use std::rc::Rc;

use num_traits::{One, Zero};

use super::runs::{Classes, RunTable};
use super::Verdict;
use crate::error::{Error, Result};
use crate::logic::{qualitative_path, temporal_depth, CmpOp, Comparison, Ctl, Depth, ProbTerm};
use crate::markov::{Agent, Model, PathPrefix, Rational, StateId};
use crate::semantics::{can_reach, infinite_path_states, largest_closed_subset, reachable_within, Semantics};

/// Evaluates formulas at every run of a [`RunTable`] at a chosen time.
pub struct CtlEvaluator<'m> {
    model: &'m Model,
    semantics: Semantics,
    table: RunTable,
    memo: HashMap<(usize, usize), Rc<Vec<bool>>>,
}

impl<'m> CtlEvaluator<'m> {
    pub fn new(model: &'m Model, semantics: Semantics, horizon: usize) -> Result<Self> {
        Ok(CtlEvaluator {
            model,
            semantics,
            table: RunTable::new(model, horizon)?,
            memo: HashMap::new(),
        })
    }

    pub fn table(&self) -> &RunTable {
        &self.table
    }

    /// Truth of `phi` at time `m` on every run of the table.
    pub fn satisfaction(&mut self, phi: &Ctl, m: usize) -> Result<Vec<bool>> {
        let needed = m + required_depth(phi)?;
        self.require(needed)?;
        check_names(self.model, phi)?;
        self.memo.clear();
        let out = self.sat(phi, m)?;
        self.memo.clear();
        Ok(out.to_vec())
    }

    /// Values of `term` at time `m`, one per run.
    pub fn term_values(&mut self, term: &ProbTerm, m: usize) -> Result<Vec<Rational>> {
        let body = term.body();
        if qualitative_path(body).is_some() {
            return Err(Error::UnsupportedUnbounded(body.to_string()));
        }
        let at = match term {
            ProbTerm::Current(..) => m,
            ProbTerm::Prior(..) => 0,
        };
        self.require(at + required_depth(body)?)?;
        check_names(self.model, body)?;
        self.memo.clear();
        let (classes, values) = self.term(term, m)?;
        self.memo.clear();
        Ok(classes.ids.iter().map(|&c| values[c as usize].clone()).collect())
    }

    fn require(&self, time: usize) -> Result<()> {
        if time > self.table.horizon() {
            return Err(Error::HorizonTooSmall {
                needed: time,
                given: self.table.horizon(),
            });
        }
        Ok(())
    }

    fn sat(&mut self, phi: &Ctl, m: usize) -> Result<Rc<Vec<bool>>> {
        let key = (phi as *const Ctl as usize, m);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        self.require(m)?;
        let n = self.table.len();
        let v: Vec<bool> = match phi {
            Ctl::True => vec![true; n],
            Ctl::Prop(p) => (0..n)
                .map(|r| self.model.holds(self.table.state(r, m), p))
                .collect(),
            Ctl::Not(a) => self.sat(a, m)?.iter().map(|b| !b).collect(),
            Ctl::And(a, b) => {
                let x = self.sat(a, m)?;
                let y = self.sat(b, m)?;
                x.iter().zip(y.iter()).map(|(p, q)| *p && *q).collect()
            }
            Ctl::Next(a) => self.sat(a, m + 1)?.to_vec(),
            Ctl::BoundedUntil(a, b, k) => {
                let k = *k as usize;
                let mut acc = self.sat(b, m + k)?.to_vec();
                for j in (0..k).rev() {
                    let x = self.sat(a, m + j)?;
                    let y = self.sat(b, m + j)?;
                    for r in 0..n {
                        acc[r] = y[r] || (x[r] && acc[r]);
                    }
                }
                acc
            }
            Ctl::Until(..) => return Err(Error::UnsupportedUnbounded(phi.to_string())),
            Ctl::All(body) => {
                let classes = self.table.prefix_classes(m);
                let mask = match qualitative_path(body) {
                    Some((eventually, p)) => {
                        let per_state = self.all_paths(eventually, &p);
                        self.by_state(&per_state, m)
                    }
                    None => self.sat(body, m)?.to_vec(),
                };
                classes.all_within(&mask)
            }
            Ctl::Know(agent, body) => {
                let classes = self.table.local_classes(self.model, agent, self.semantics, m)?;
                let mask = match qualitative_path(body) {
                    Some((eventually, p)) => {
                        let per_state = self.all_paths(eventually, &p);
                        self.by_state(&per_state, m)
                    }
                    None => self.sat(body, m)?.to_vec(),
                };
                classes.all_within(&mask)
            }
            Ctl::Compare(c) => self.compare(c, m)?,
        };
        let v = Rc::new(v);
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    fn by_state(&self, per_state: &[bool], m: usize) -> Vec<bool> {
        (0..self.table.len())
            .map(|r| per_state[self.table.state(r, m)])
            .collect()
    }

    fn prop_states(&self, p: &Ctl) -> Vec<bool> {
        (0..self.model.num_states())
            .map(|s| state_holds(self.model, p, s))
            .collect()
    }

    /// Per state: every infinite path from it satisfies `F p` (resp. `G p`).
    fn all_paths(&self, eventually: bool, p: &Ctl) -> Vec<bool> {
        let good = self.prop_states(p);
        let bad: Vec<bool> = good.iter().map(|b| !b).collect();
        if eventually {
            let trapped = infinite_path_states(self.model, &bad);
            trapped.iter().map(|b| !b).collect()
        } else {
            (0..self.model.num_states())
                .map(|s| !can_reach(self.model, &[s], &bad))
                .collect()
        }
    }

    /// Per state: the probability of `F p` (resp. `G p`) is 1, and is 0.
    fn prob_extremes(&self, eventually: bool, p: &Ctl) -> (Vec<bool>, Vec<bool>) {
        let good = self.prop_states(p);
        let bad: Vec<bool> = good.iter().map(|b| !b).collect();
        let n = self.model.num_states();
        let stays = |region: &[bool]| -> Vec<bool> {
            let closed = largest_closed_subset(self.model, region);
            (0..n)
                .map(|s| {
                    let reach = reachable_within(self.model, &[s], region);
                    (0..n).any(|t| reach[t] && closed[t])
                })
                .collect()
        };
        let reaches = |target: &[bool]| -> Vec<bool> {
            (0..n).map(|s| can_reach(self.model, &[s], target)).collect()
        };
        let not = |v: Vec<bool>| -> Vec<bool> { v.into_iter().map(|b| !b).collect() };
        if eventually {
            (not(stays(&bad)), not(reaches(&good)))
        } else {
            (not(reaches(&bad)), not(stays(&good)))
        }
    }

    fn term_classes(&mut self, term: &ProbTerm, m: usize) -> Result<(Rc<Classes>, usize)> {
        let at = match term {
            ProbTerm::Current(..) => m,
            ProbTerm::Prior(..) => 0,
        };
        let classes = self
            .table
            .local_classes(self.model, term.agent(), self.semantics, at)?;
        Ok((classes, at))
    }

    fn term(&mut self, term: &ProbTerm, m: usize) -> Result<(Rc<Classes>, Vec<Rational>)> {
        let (classes, at) = self.term_classes(term, m)?;
        let mask = self.sat(term.body(), at)?;
        let values = self.table.conditional_by_class(&classes, &mask);
        Ok((classes, values))
    }

    fn compare(&mut self, c: &Comparison<ProbTerm>, m: usize) -> Result<Vec<bool>> {
        if let Some((term, op, bound)) = c.as_single() {
            if let Some((eventually, p)) = qualitative_path(term.body()) {
                return self.qualitative_compare(term, eventually, &p, op, bound, m);
            }
        }
        let mut parts = Vec::with_capacity(c.terms().len());
        for t in c.terms() {
            parts.push(self.term(t, m)?);
        }
        let mut cache: HashMap<Vec<u32>, bool> = HashMap::new();
        let mut out = Vec::with_capacity(self.table.len());
        for r in 0..self.table.len() {
            let key: Vec<u32> = parts.iter().map(|(cl, _)| cl.ids[r]).collect();
            let v = match cache.get(&key) {
                Some(v) => *v,
                None => {
                    let values: Vec<Rational> = parts
                        .iter()
                        .zip(&key)
                        .map(|((_, vals), &k)| vals[k as usize].clone())
                        .collect();
                    let v = c.holds(&values)?;
                    cache.insert(key, v);
                    v
                }
            };
            out.push(v);
        }
        Ok(out)
    }

    fn qualitative_compare(
        &mut self,
        term: &ProbTerm,
        eventually: bool,
        p: &Ctl,
        op: CmpOp,
        bound: &Rational,
        m: usize,
    ) -> Result<Vec<bool>> {
        let (classes, at) = self.term_classes(term, m)?;
        let (one, zero) = self.prob_extremes(eventually, p);
        let is_one = classes.all_within(&self.by_state(&one, at));
        let is_zero = classes.all_within(&self.by_state(&zero, at));
        let n = self.table.len();
        let decide = |r: usize| -> bool {
            if bound.is_zero() {
                match op {
                    CmpOp::Eq | CmpOp::Le => is_zero[r],
                    CmpOp::Gt => !is_zero[r],
                    CmpOp::Lt => false,
                    CmpOp::Ge => true,
                }
            } else {
                match op {
                    CmpOp::Eq | CmpOp::Ge => is_one[r],
                    CmpOp::Lt => !is_one[r],
                    CmpOp::Gt => false,
                    CmpOp::Le => true,
                }
            }
        };
        debug_assert!(bound.is_zero() || bound.is_one());
        Ok((0..n).map(decide).collect())
    }
}

/// Truth of a propositional formula at a state.
pub fn state_holds(model: &Model, p: &Ctl, s: StateId) -> bool {
    match p {
        Ctl::True => true,
        Ctl::Prop(name) => model.holds(s, name),
        Ctl::Not(a) => !state_holds(model, a, s),
        Ctl::And(a, b) => state_holds(model, a, s) && state_holds(model, b, s),
        _ => false,
    }
}

fn required_depth(phi: &Ctl) -> Result<usize> {
    match temporal_depth(phi) {
        Depth::Bounded(d) => Ok(d),
        Depth::Unbounded => {
            let culprit = crate::logic::unsupported_until(phi).unwrap_or(phi);
            Err(Error::UnsupportedUnbounded(culprit.to_string()))
        }
    }
}

fn check_names(model: &Model, phi: &Ctl) -> Result<()> {
    for p in phi.propositions() {
        if !model.knows_proposition(&p) {
            return Err(Error::UnknownProposition(p));
        }
    }
    for a in phi.agents() {
        model.check_agent(&a)?;
    }
    Ok(())
}

fn prefix_runs(ev: &CtlEvaluator<'_>, model: &Model, point: &PathPrefix) -> Result<Vec<usize>> {
    model.cylinder_probability(point)?;
    Ok(ev.table().runs_extending(point.states()))
}

/// Truth of `phi` at the point `(r, m)` given by `point`, `m = |point| - 1`.
/// Formulas whose truth depends on how the run continues hold when they
/// hold on every continuation.
pub fn eval_point(
    model: &Model,
    semantics: Semantics,
    phi: &Ctl,
    point: &PathPrefix,
    horizon: usize,
) -> Result<bool> {
    let m = point.time();
    let needed = m + required_depth(phi)?;
    if horizon < needed {
        return Err(Error::HorizonTooSmall { needed, given: horizon });
    }
    let mut ev = CtlEvaluator::new(model, semantics, needed)?;
    let runs = prefix_runs(&ev, model, point)?;
    let sat = ev.satisfaction(phi, m)?;
    Ok(runs.iter().all(|&r| sat[r]))
}

/// Value of a probability term at the point given by `point`.
pub fn eval_prob_term(
    model: &Model,
    semantics: Semantics,
    term: &ProbTerm,
    point: &PathPrefix,
    horizon: usize,
) -> Result<Rational> {
    let m = point.time();
    let depth = required_depth(term.body())?;
    let needed = match term {
        ProbTerm::Current(..) => m + depth,
        ProbTerm::Prior(..) => m.max(depth),
    };
    if horizon < needed {
        return Err(Error::HorizonTooSmall { needed, given: horizon });
    }
    let mut ev = CtlEvaluator::new(model, semantics, needed)?;
    let runs = prefix_runs(&ev, model, point)?;
    let values = ev.term_values(term, m)?;
    Ok(values[runs[0]].clone())
}

/// A run on which the checked formula fails at time 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub run: Vec<StateId>,
    /// Probability terms of the top-level comparisons, rendered, with their
    /// values on this run.
    pub values: Vec<(String, Rational)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub horizon: usize,
    pub failures: Vec<Failure>,
}

/// `M ⊨ phi`: truth at time 0 on every run. The horizon defaults to the
/// temporal depth of `phi`.
pub fn model_check(
    model: &Model,
    semantics: Semantics,
    phi: &Ctl,
    horizon: Option<usize>,
) -> Result<CheckReport> {
    let depth = required_depth(phi)?;
    let horizon = horizon.unwrap_or(depth);
    if horizon < depth {
        return Err(Error::HorizonTooSmall { needed: depth, given: horizon });
    }
    let mut ev = CtlEvaluator::new(model, semantics, depth)?;
    let sat = ev.satisfaction(phi, 0)?;
    let mut comparisons = Vec::new();
    top_level_comparisons(phi, &mut comparisons);
    let mut failures = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for r in (0..sat.len()).filter(|&r| !sat[r]) {
        let run = ev.table().path(r);
        if !seen.insert(run.clone()) {
            continue;
        }
        let mut values = Vec::new();
        for c in &comparisons {
            for t in c.terms() {
                if qualitative_path(t.body()).is_some() {
                    continue;
                }
                let v = ev.term_values(t, 0)?;
                values.push((t.to_string(), v[r].clone()));
            }
        }
        failures.push(Failure { run, values });
    }
    let verdict = if failures.is_empty() {
        Verdict::Holds
    } else {
        Verdict::Fails(None)
    };
    Ok(CheckReport {
        verdict,
        horizon: depth,
        failures,
    })
}

fn top_level_comparisons<'a>(phi: &'a Ctl, out: &mut Vec<&'a Comparison<ProbTerm>>) {
    match phi {
        Ctl::Not(a) => top_level_comparisons(a, out),
        Ctl::And(a, b) => {
            top_level_comparisons(a, out);
            top_level_comparisons(b, out);
        }
        Ctl::Compare(c) => out.push(c),
        _ => {}
    }
}

/// Whether `K_i phi` and `Pr_i(phi) = 1` agree at every point up to
/// `horizon`, for every agent of the model including the full observer
/// and the blind agent.
pub fn prop5_equivalence(
    model: &Model,
    semantics: Semantics,
    phi: &Ctl,
    horizon: usize,
) -> Result<bool> {
    let mut agents: Vec<Agent> = model.agent_names().map(Agent::named).collect();
    agents.push(Agent::Top);
    agents.push(Agent::Bottom);
    let pairs: Vec<(Ctl, Ctl)> = agents
        .into_iter()
        .map(|a| {
            let know = Ctl::know(a.clone(), phi.clone());
            let sure = Ctl::Compare(Comparison::single(
                ProbTerm::Current(a, Box::new(phi.clone())),
                CmpOp::Eq,
                Rational::one(),
            ));
            (know, sure)
        })
        .collect();
    let mut depth = 0;
    for (k, p) in &pairs {
        depth = depth.max(required_depth(k)?).max(required_depth(p)?);
    }
    let mut ev = CtlEvaluator::new(model, semantics, horizon + depth)?;
    for m in 0..=horizon {
        for (k, p) in &pairs {
            if ev.satisfaction(k, m)? != ev.satisfaction(p, m)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_ctl;
    use crate::markov::{int, rat, ModelBuilder};
    use crate::semantics::fixtures::knowledge_gap_chain;

    fn coin() -> Model {
        // Hidden fair coin `h`/`t`, revealed at time 1 through `shown`.
        ModelBuilder::new(&["start", "h", "t", "shown_h", "shown_t"])
            .init("start", int(1))
            .trans("start", "h", rat(1, 2))
            .trans("start", "t", rat(1, 2))
            .trans("h", "shown_h", int(1))
            .trans("t", "shown_t", int(1))
            .trans("shown_h", "shown_h", int(1))
            .trans("shown_t", "shown_t", int(1))
            .agent(
                "i",
                &[("start", "x"), ("h", "x"), ("t", "x"), ("shown_h", "h"), ("shown_t", "t")],
            )
            .label("h", &["heads"])
            .label("shown_h", &["heads"])
            .build()
            .unwrap()
    }

    #[test]
    fn belief_before_and_after_the_reveal() {
        let m = coin();
        let at1 = PathPrefix::from_names(&m, &["start", "h"]).unwrap();
        let at2 = PathPrefix::from_names(&m, &["start", "h", "shown_h"]).unwrap();
        let term = Ctl::current(Agent::named("i"), Ctl::prop("heads"));
        for sem in [Semantics::Clock, Semantics::PerfectRecall] {
            assert_eq!(eval_prob_term(&m, sem, &term, &at1, 2).unwrap(), rat(1, 2));
            assert_eq!(eval_prob_term(&m, sem, &term, &at2, 2).unwrap(), int(1));
        }
    }

    #[test]
    fn knowledge_after_the_reveal() {
        let m = coin();
        let phi = parse_ctl("AX AX (K[i] heads | K[i] !heads)").unwrap();
        let report = model_check(&m, Semantics::Clock, &phi, None).unwrap();
        assert_eq!(report.verdict, Verdict::Holds);
        let early = parse_ctl("AX (K[i] heads | K[i] !heads)").unwrap();
        let report = model_check(&m, Semantics::PerfectRecall, &early, None).unwrap();
        assert_eq!(report.verdict, Verdict::Fails(None));
        assert_eq!(report.failures.len(), 2);
    }

    #[test]
    fn prior_looks_at_time_zero() {
        let m = coin();
        let phi = parse_ctl("AX AX Prior[i](X heads) = 1/2").unwrap();
        assert_eq!(model_check(&m, Semantics::PerfectRecall, &phi, None).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn failing_comparisons_report_values() {
        let m = coin();
        let phi = parse_ctl("Pr[i](X heads) > 1/2").unwrap();
        let report = model_check(&m, Semantics::Clock, &phi, None).unwrap();
        assert_eq!(report.failures.len(), 2);
        assert_eq!(report.failures[0].values[0].1, rat(1, 2));
    }

    #[test]
    fn next_at_a_point() {
        let m = ModelBuilder::new(&["s", "u"])
            .init("s", int(1))
            .trans("s", "u", int(1))
            .trans("u", "u", int(1))
            .label("u", &["p"])
            .build()
            .unwrap();
        let point = PathPrefix::from_names(&m, &["s"]).unwrap();
        let phi = Ctl::prop("p").next();
        assert!(eval_point(&m, Semantics::Clock, &phi, &point, 1).unwrap());
        assert!(matches!(
            eval_point(&m, Semantics::Clock, &phi, &point, 0),
            Err(Error::HorizonTooSmall { needed: 1, given: 0 })
        ));
    }

    #[test]
    fn knowledge_and_certainty_differ_on_a_null_run() {
        let m = knowledge_gap_chain();
        let i = Agent::named("i");
        let eventually = Ctl::prop("not_q").eventually();
        let know = Ctl::know(i.clone(), eventually.clone());
        let sure = Ctl::Compare(Comparison::single(
            ProbTerm::Current(i, Box::new(eventually.clone())),
            CmpOp::Eq,
            int(1),
        ));
        let point = PathPrefix::from_names(&m, &["s"]).unwrap();
        for sem in [Semantics::Clock, Semantics::PerfectRecall] {
            assert!(!eval_point(&m, sem, &know, &point, 0).unwrap());
            assert!(eval_point(&m, sem, &sure, &point, 0).unwrap());
            assert!(!prop5_equivalence(&m, sem, &eventually, 3).unwrap());
        }
    }

    #[test]
    fn unbounded_until_is_rejected() {
        let m = knowledge_gap_chain();
        let phi = parse_ctl("q U not_q").unwrap();
        assert!(matches!(
            model_check(&m, Semantics::Clock, &phi, None),
            Err(Error::UnsupportedUnbounded(_))
        ));
    }

    #[test]
    fn unknown_names() {
        let m = knowledge_gap_chain();
        assert!(matches!(
            model_check(&m, Semantics::Clock, &Ctl::prop("zz"), None),
            Err(Error::UnknownProposition(_))
        ));
        let phi = Ctl::know(Agent::named("j"), Ctl::True);
        assert!(matches!(
            model_check(&m, Semantics::Clock, &phi, None),
            Err(Error::UnknownAgent(_))
        ));
    }
}
