//! Zero/nonzero analyses on the transition graph.

use std::collections::VecDeque;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::markov::{Distribution, Model, StateId};

/// States where `prop` holds, after checking the name is known.
pub fn states_satisfying(model: &Model, prop: &str) -> Result<Vec<bool>> {
    if !model.knows_proposition(prop) {
        return Err(Error::UnknownProposition(prop.to_string()));
    }
    Ok((0..model.num_states()).map(|s| model.holds(s, prop)).collect())
}

/// States reachable from `start` through positive transitions, staying
/// inside `allowed` (start states outside `allowed` are dropped).
pub fn reachable_within(model: &Model, start: &[StateId], allowed: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; model.num_states()];
    let mut queue: VecDeque<StateId> = VecDeque::new();
    for &s in start {
        if allowed[s] && !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        for (t, _) in model.successors(s) {
            if allowed[t] && !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    seen
}

/// Greatest subset of `good` in which every state has some successor in
/// the subset: the states that start an infinite path inside `good`.
pub fn infinite_path_states(model: &Model, good: &[bool]) -> Vec<bool> {
    let mut x = good.to_vec();
    loop {
        let mut changed = false;
        for s in 0..model.num_states() {
            if x[s] && !model.successors(s).any(|(t, _)| x[t]) {
                x[s] = false;
                changed = true;
            }
        }
        if !changed {
            return x;
        }
    }
}

/// Greatest subset of `good` closed under positive transitions.
pub fn largest_closed_subset(model: &Model, good: &[bool]) -> Vec<bool> {
    let mut y = good.to_vec();
    loop {
        let mut changed = false;
        for s in 0..model.num_states() {
            if y[s] && model.successors(s).any(|(t, _)| !y[t]) {
                y[s] = false;
                changed = true;
            }
        }
        if !changed {
            return y;
        }
    }
}

/// Some positive-transition path from `start` stays in `good` forever.
pub fn exists_path_within(model: &Model, start: &[StateId], good: &[bool]) -> bool {
    let x = infinite_path_states(model, good);
    start.iter().any(|&s| x[s])
}

/// The probability of staying in `good` forever from `start` is positive:
/// a closed subset of `good` is reachable through `good`.
pub fn stay_forever_positive(model: &Model, start: &[StateId], good: &[bool]) -> bool {
    let closed = largest_closed_subset(model, good);
    let reach = reachable_within(model, start, good);
    (0..model.num_states()).any(|s| reach[s] && closed[s])
}

pub fn exists_path_globally(model: &Model, start: &[StateId], prop: &str) -> Result<bool> {
    let good = states_satisfying(model, prop)?;
    Ok(exists_path_within(model, start, &good))
}

pub fn prob_globally_positive(model: &Model, start: &Distribution, prop: &str) -> Result<bool> {
    let good = states_satisfying(model, prop)?;
    Ok(stay_forever_positive(model, &start.support(), &good))
}

/// Whether some state of `target` is reachable from `start` in zero or more
/// steps.
pub fn can_reach(model: &Model, start: &[StateId], target: &[bool]) -> bool {
    let all = vec![true; model.num_states()];
    let reach = reachable_within(model, start, &all);
    (0..model.num_states()).any(|s| reach[s] && target[s])
}

/// Support of the time-`t` distribution, computed without arithmetic.
pub fn support_at(model: &Model, t: usize) -> Vec<bool> {
    let mut cur: Vec<bool> = model.init().weights().iter().map(|w| !w.is_zero()).collect();
    for _ in 0..t {
        cur = support_step(model, &cur);
    }
    cur
}

pub fn support_step(model: &Model, cur: &[bool]) -> Vec<bool> {
    let mut next = vec![false; model.num_states()];
    for s in (0..model.num_states()).filter(|&s| cur[s]) {
        for (t, _) in model.successors(s) {
            next[t] = true;
        }
    }
    next
}
