//! Syntactic translations: branching-time formulas into the first-order
//! fragment, and elimination of clock-semantics agent operators.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::ast::{Comparison, Ctl, ProbTerm, Wmlo, WmloTerm};
use super::polynomial::{Monomial, Polynomial};
use crate::error::{Error, Result};
use crate::markov::{obs_prop, state_prop, Agent, Model, Rational};
use crate::semantics::Semantics;

/// The free time variable of every translated formula.
pub const ROOT_TIME: &str = "t";

struct Fresh(usize);

impl Fresh {
    fn next(&mut self, stem: &str) -> String {
        self.0 += 1;
        format!("{stem}{}", self.0)
    }
}

/// `u = t + 1`, spelled `t < u ∧ ∀v(t < v ⇒ u ≤ v)`.
fn successor(t: &str, u: &str, fresh: &mut Fresh) -> Wmlo {
    let v = fresh.next("v");
    Wmlo::less(t, u).and(Wmlo::forall(
        &v,
        Wmlo::less(t, &v).implies(Wmlo::less(&v, u).not()),
    ))
}

/// `u = 0`, spelled `¬∃w(u = w + 1)`.
fn is_zero(u: &str, fresh: &mut Fresh) -> Wmlo {
    let w = fresh.next("w");
    let succ = successor(&w, u, fresh);
    Wmlo::exists(&w, succ).not()
}

/// Translates `phi` into a first-order formula whose only free variable is
/// [`ROOT_TIME`], such that `phi` holds at `(r, n)` iff the result holds on
/// `r` with `t ↦ n`. The model supplies the state names for the clock
/// translation of `A`.
pub fn translate_prop2(phi: &Ctl, semantics: Semantics, model: &Model) -> Wmlo {
    let mut tr = Prop2 {
        semantics,
        states: model.state_names().to_vec(),
        fresh: Fresh(0),
    };
    tr.go(phi, ROOT_TIME)
}

struct Prop2 {
    semantics: Semantics,
    states: Vec<String>,
    fresh: Fresh,
}

impl Prop2 {
    fn go(&mut self, phi: &Ctl, t: &str) -> Wmlo {
        match phi {
            Ctl::True => Wmlo::True,
            Ctl::Prop(p) => Wmlo::prop_at(p, t),
            Ctl::Not(a) => self.go(a, t).not(),
            Ctl::And(a, b) => self.go(a, t).and(self.go(b, t)),
            Ctl::Next(a) => {
                let u = self.fresh.next("u");
                let succ = successor(t, &u, &mut self.fresh);
                let body = self.go(a, &u);
                Wmlo::exists(&u, succ.and(body))
            }
            Ctl::BoundedUntil(a, b, k) => {
                let now = self.go(b, t);
                if *k == 0 {
                    return now;
                }
                let hold = self.go(a, t);
                let rest = Ctl::BoundedUntil(a.clone(), b.clone(), k - 1).next();
                let later = self.go(&rest, t);
                now.or(hold.and(later))
            }
            Ctl::Until(a, b) => {
                let u = self.fresh.next("u");
                let v = self.fresh.next("v");
                let reach = self.go(b, &u);
                let hold = self.go(a, &v);
                let between = Wmlo::less(&v, t).not().and(Wmlo::less(&v, &u));
                Wmlo::exists(
                    &u,
                    Wmlo::less(&u, t)
                        .not()
                        .and(reach)
                        .and(Wmlo::forall(&v, between.implies(hold))),
                )
            }
            Ctl::Know(i, a) => Wmlo::know_at(i.clone(), t, self.go(a, t)),
            Ctl::All(a) => match self.semantics {
                Semantics::PerfectRecall => Wmlo::know_at(Agent::Top, t, self.go(a, t)),
                Semantics::Clock => {
                    let z = self.fresh.next("z");
                    let zero = is_zero(&z, &mut self.fresh);
                    let body = self.go(a, t);
                    let states = self.states.clone();
                    let cases = states.iter().map(|s| {
                        let ps = Wmlo::prop_at(&state_prop(s), &z);
                        ps.clone()
                            .implies(Wmlo::know_at(Agent::Top, t, ps.implies(body.clone())))
                    });
                    Wmlo::exists(&z, zero.and(Wmlo::conjunction(cases.collect::<Vec<_>>())))
                }
            },
            Ctl::Compare(c) => {
                let has_prior = c.terms().iter().any(|x| matches!(x, ProbTerm::Prior(..)));
                let z = if has_prior {
                    Some(self.fresh.next("z"))
                } else {
                    None
                };
                let cmp = c
                    .map_terms(|term| match term {
                        ProbTerm::Current(i, b) => Wmlo::agent_at(i.clone(), t, self.go(b, t)),
                        ProbTerm::Prior(i, b) => {
                            let z = z.as_deref().expect("fresh zero variable");
                            Wmlo::agent_at(i.clone(), z, self.go(b, z))
                        }
                    })
                    .expect("translation preserves the comparison shape");
                match z {
                    None => Wmlo::Compare(cmp),
                    Some(z) => {
                        let zero = is_zero(&z, &mut self.fresh);
                        Wmlo::exists(&z, zero.and(Wmlo::Compare(cmp)))
                    }
                }
            }
        }
    }
}

/// Rewrites agent knowledge and agent probability under the clock
/// semantics into the universal modality and global probabilities over
/// observation propositions. The blind agent's knowledge is kept as the
/// universal modality itself.
pub fn eliminate_clock(phi: &Wmlo, model: &Model) -> Result<Wmlo> {
    Ok(match phi {
        Wmlo::True | Wmlo::PropAt(..) | Wmlo::SetAt(..) | Wmlo::Less(..) => phi.clone(),
        Wmlo::Not(a) => eliminate_clock(a, model)?.not(),
        Wmlo::And(a, b) => eliminate_clock(a, model)?.and(eliminate_clock(b, model)?),
        Wmlo::ForallT(v, a) => Wmlo::forall(v, eliminate_clock(a, model)?),
        Wmlo::ExistsT(v, a) => Wmlo::exists(v, eliminate_clock(a, model)?),
        Wmlo::ForallSet(v, a) => Wmlo::ForallSet(v.clone(), Box::new(eliminate_clock(a, model)?)),
        Wmlo::KnowAt(Agent::Bottom, t, a) => Wmlo::necessarily(t, eliminate_clock(a, model)?),
        Wmlo::KnowAt(i, t, a) => {
            model.check_agent(i)?;
            let body = eliminate_clock(a, model)?;
            let cases = model.observation_symbols(i)?.into_iter().map(|o| {
                let obs = Wmlo::prop_at(&obs_prop(i, &o), t);
                obs.clone()
                    .implies(Wmlo::necessarily(t, obs.implies(body.clone())))
            });
            Wmlo::conjunction(cases.collect::<Vec<_>>())
        }
        Wmlo::Compare(c) => eliminate_comparison(c, model)?,
    })
}

fn eliminate_comparison(c: &Comparison<WmloTerm>, model: &Model) -> Result<Wmlo> {
    // Bodies first, then the blind agent's probability is the global one.
    let terms: Vec<WmloTerm> = c
        .terms()
        .iter()
        .map(|term| {
            Ok(match term {
                WmloTerm::Global(b) => Wmlo::global(eliminate_clock(b, model)?),
                WmloTerm::AgentAt(Agent::Bottom, _, b) => Wmlo::global(eliminate_clock(b, model)?),
                WmloTerm::AgentAt(i, t, b) => {
                    model.check_agent(i)?;
                    Wmlo::agent_at(i.clone(), t, eliminate_clock(b, model)?)
                }
            })
        })
        .collect::<Result<_>>()?;

    let mut groups: BTreeMap<(Agent, String), Vec<usize>> = BTreeMap::new();
    for (k, term) in terms.iter().enumerate() {
        if let WmloTerm::AgentAt(i, t, _) = term {
            groups.entry((i.clone(), t.clone())).or_default().push(k);
        }
    }
    if groups.is_empty() {
        return Ok(Wmlo::Compare(Comparison::new(
            terms,
            c.poly().clone(),
            c.op(),
            c.bound().clone(),
        )?));
    }

    let groups: Vec<((Agent, String), Vec<usize>)> = groups.into_iter().collect();
    let symbols: Vec<Vec<String>> = groups
        .iter()
        .map(|((i, _), _)| model.observation_symbols(i))
        .collect::<Result<_>>()?;
    // Degree of each group: the largest combined exponent of its terms.
    let group_of: BTreeMap<usize, usize> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, (_, ks))| ks.iter().map(move |&k| (k, g)))
        .collect();
    let shifted = &c.poly().without_constant()
        - &Polynomial::constant(c.bound() - c.poly().constant_term());
    let degrees: Vec<u32> = (0..groups.len())
        .map(|g| {
            shifted
                .terms()
                .map(|(m, _)| group_degree(m, g, &group_of))
                .max()
                .unwrap_or(0)
        })
        .collect();

    let mut cases = Vec::new();
    let mut choice = vec![0usize; groups.len()];
    loop {
        let guards: Vec<Wmlo> = groups
            .iter()
            .zip(&choice)
            .zip(&symbols)
            .map(|((((i, t), _), &j), syms)| Wmlo::prop_at(&obs_prop(i, &syms[j]), t))
            .collect();

        let mut new_terms: Vec<WmloTerm> = Vec::new();
        let mut index = |term: WmloTerm| match new_terms.iter().position(|x| *x == term) {
            Some(k) => k,
            None => {
                new_terms.push(term);
                new_terms.len() - 1
            }
        };
        let denominators: Vec<usize> = guards
            .iter()
            .map(|g| index(Wmlo::global(g.clone())))
            .collect();
        let images: Vec<Polynomial> = terms
            .iter()
            .enumerate()
            .map(|(k, term)| match term {
                WmloTerm::AgentAt(_, _, body) => {
                    let g = group_of[&k];
                    let joint = guards[g].clone().and((**body).clone());
                    Polynomial::var(index(Wmlo::global(joint)))
                }
                other => Polynomial::var(index(other.clone())),
            })
            .collect();

        let mut cleared = Polynomial::zero();
        for (m, coeff) in shifted.terms() {
            let mut prod = Polynomial::constant(coeff.clone());
            for &(v, e) in m.powers() {
                prod = &prod * &images[v].pow(e);
            }
            for (g, &d) in degrees.iter().enumerate() {
                let e = group_degree(m, g, &group_of);
                prod = &prod * &Polynomial::var(denominators[g]).pow(d - e);
            }
            cleared = &cleared + &prod;
        }
        let atom = match Comparison::new(new_terms, cleared.clone(), c.op(), Rational::zero()) {
            Ok(cmp) => Wmlo::Compare(cmp),
            // The cleared polynomial is a constant: decide it now.
            Err(_) => {
                if c.op().holds(&cleared.constant_term(), &Rational::zero()) {
                    Wmlo::True
                } else {
                    Wmlo::True.not()
                }
            }
        };
        cases.push(Wmlo::conjunction(guards).implies(atom));

        if !advance(&mut choice, &symbols) {
            break;
        }
    }
    Ok(Wmlo::conjunction(cases))
}

fn group_degree(m: &Monomial, g: usize, group_of: &BTreeMap<usize, usize>) -> u32 {
    m.powers()
        .iter()
        .filter(|(v, _)| group_of.get(v) == Some(&g))
        .map(|&(_, e)| e)
        .sum()
}

fn advance(choice: &mut [usize], symbols: &[Vec<String>]) -> bool {
    for k in (0..choice.len()).rev() {
        choice[k] += 1;
        if choice[k] < symbols[k].len() {
            return true;
        }
        choice[k] = 0;
    }
    false
}

/// A denominator-free comparison `lhs ⋈ rhs` over global probability terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedComparison {
    pub terms: Vec<WmloTerm>,
    pub lhs: Polynomial,
    pub op: super::CmpOp,
    pub rhs: Polynomial,
    /// Summands of `lhs` as coefficient and term factors, in input order.
    summands: Vec<(Rational, Vec<usize>)>,
    bound: Rational,
    bound_factors: Vec<usize>,
}

impl NormalizedComparison {
    pub fn into_compare(self) -> Result<Comparison<WmloTerm>> {
        Comparison::new(self.terms, &self.lhs - &self.rhs, self.op, Rational::zero())
    }

    /// The two-sided form with products in input order, e.g.
    /// `P(a & b)*P(d) + P(c & d)*P(b) <= 1/2*P(b)*P(d)`.
    pub fn render(&self) -> String {
        let product = |coeff: &Rational, factors: &[usize], first: bool| {
            let mut parts = Vec::new();
            let negative = *coeff < Rational::zero();
            let abs = if negative { -coeff.clone() } else { coeff.clone() };
            if !abs.is_one() || factors.is_empty() {
                parts.push(abs.to_string());
            }
            parts.extend(factors.iter().map(|&v| self.terms[v].to_string()));
            let sign = match (first, negative) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            format!("{sign}{}", parts.join("*"))
        };
        let lhs: String = self
            .summands
            .iter()
            .enumerate()
            .map(|(k, (c, fs))| product(c, fs, k == 0))
            .collect();
        let rhs = product(&self.bound, &self.bound_factors, true);
        format!("{lhs} {} {rhs}", self.op)
    }
}

/// Clears the denominators of `Σ a_k·Pr(φ_k | ψ_k) ⋈ c` by multiplying
/// through by every `Pr(ψ_k)`. Conditioning on `true` contributes no factor.
pub fn normalize_conditional(
    terms: &[(Rational, super::Conditional)],
    op: super::CmpOp,
    bound: &Rational,
) -> Result<NormalizedComparison> {
    if terms.is_empty() {
        return Err(Error::Unsupported("no conditional terms".into()));
    }
    let mut atoms: Vec<WmloTerm> = Vec::new();
    let mut index = |body: Wmlo| {
        let term = Wmlo::global(body);
        match atoms.iter().position(|x| *x == term) {
            Some(k) => k,
            None => {
                atoms.push(term);
                atoms.len() - 1
            }
        }
    };
    let mut joints = Vec::new();
    let mut denominators: Vec<Option<usize>> = Vec::new();
    for (_, c) in terms {
        if c.given == Wmlo::True {
            joints.push(index(c.event.clone()));
            denominators.push(None);
        } else {
            joints.push(index(c.event.clone().and(c.given.clone())));
            denominators.push(Some(index(c.given.clone())));
        }
    }
    let summands: Vec<(Rational, Vec<usize>)> = terms
        .iter()
        .enumerate()
        .map(|(k, (a, _))| {
            let mut factors = vec![joints[k]];
            factors.extend(
                denominators
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != k)
                    .filter_map(|(_, d)| *d),
            );
            (a.clone(), factors)
        })
        .collect();
    let bound_factors: Vec<usize> = denominators.iter().filter_map(|d| *d).collect();
    let product = |c: &Rational, factors: &[usize]| {
        factors
            .iter()
            .fold(Polynomial::constant(c.clone()), |acc, &v| &acc * &Polynomial::var(v))
    };
    let lhs = summands
        .iter()
        .fold(Polynomial::zero(), |acc, (c, fs)| &acc + &product(c, fs));
    let rhs = product(bound, &bound_factors);
    Ok(NormalizedComparison {
        terms: atoms,
        lhs,
        op,
        rhs,
        summands,
        bound: bound.clone(),
        bound_factors,
    })
}
