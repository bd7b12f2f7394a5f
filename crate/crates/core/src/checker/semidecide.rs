//! Bounded searches for `∃t` questions about state marginals.

use std::collections::{BTreeMap, HashSet};

use num_traits::Zero;

use super::{Assignment, Verdict};
use crate::error::Result;
use crate::logic::{CmpOp, MixedTimeFormula};
use crate::markov::{Model, Rational};
use crate::semantics::{can_reach, states_satisfying, support_step};

/// `∃t Pr(p(t)) ⋈ c`.
///
/// With `c = 0` the answer depends only on which states carry mass, so it
/// is decided exactly by graph search and reported as `Holds`/`Fails`.
/// Otherwise `t = 0..=bound` is scanned with exact marginals.
pub fn check_skolem_form(model: &Model, p: &str, op: CmpOp, c: &Rational, bound: u64) -> Result<Verdict> {
    let good = states_satisfying(model, p)?;
    if c.is_zero() {
        return Ok(decide(match op {
            CmpOp::Ge => true,
            CmpOp::Lt => false,
            CmpOp::Gt => {
                let init = model.init().support();
                can_reach(model, &init, &good)
            }
            CmpOp::Eq | CmpOp::Le => some_support_avoids(model, &good),
        }));
    }
    let mut dist = model.init().weights().to_vec();
    for t in 0..=bound {
        if t > 0 {
            dist = model.step(&dist);
        }
        let mass = mass_on(&dist, &good);
        if op.holds(&mass, c) {
            return Ok(Verdict::Witness(Assignment(vec![("t".into(), t)])));
        }
    }
    Ok(Verdict::NoWitnessUpTo(bound))
}

fn decide(b: bool) -> Verdict {
    if b {
        Verdict::Holds
    } else {
        Verdict::Fails(None)
    }
}

fn mass_on(dist: &[Rational], good: &[bool]) -> Rational {
    dist.iter()
        .zip(good)
        .filter(|(_, &g)| g)
        .fold(Rational::zero(), |acc, (w, _)| acc + w)
}

/// Whether some time-`t` support misses every `good` state. Supports are
/// iterated until one repeats.
fn some_support_avoids(model: &Model, good: &[bool]) -> bool {
    let mut cur: Vec<bool> = model.init().weights().iter().map(|w| !w.is_zero()).collect();
    let mut seen = HashSet::new();
    loop {
        if !cur.iter().zip(good).any(|(&s, &g)| s && g) {
            return true;
        }
        if !seen.insert(cur.clone()) {
            return false;
        }
        cur = support_step(model, &cur);
    }
}

/// Lexicographic grid search over `[0, bound]^n` for a zero of the
/// formula's polynomial.
pub fn check_mixed_time(model: &Model, psi: &MixedTimeFormula, bound: u64) -> Result<Verdict> {
    let dists = model.distributions_up_to(bound as usize);
    let mut marginals: BTreeMap<&str, Vec<Rational>> = BTreeMap::new();
    for (p, _) in psi.atoms() {
        if marginals.contains_key(p.as_str()) {
            continue;
        }
        let good = states_satisfying(model, p)?;
        let series = dists.iter().map(|d| mass_on(d.weights(), &good)).collect();
        marginals.insert(p, series);
    }
    let n = psi.vars().len();
    let mut point = vec![0u64; n];
    loop {
        let value = psi.value(|p, t| marginals[p][t].clone(), &point)?;
        if value.is_zero() {
            let assignment = psi.vars().iter().cloned().zip(point.iter().copied()).collect();
            return Ok(Verdict::Witness(Assignment(assignment)));
        }
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(Verdict::NoWitnessUpTo(bound));
            }
            i -= 1;
            if point[i] < bound {
                point[i] += 1;
                point[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}
