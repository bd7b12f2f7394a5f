//! Exhaustive enumeration of positive-probability run prefixes.

use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::markov::{Agent, Model, Rational, StateId};
use crate::semantics::Semantics;

/// Enumeration stops with [`Error::TooManyRuns`] beyond this many prefixes.
pub const DEFAULT_RUN_LIMIT: usize = 1_000_000;

/// Run masses scaled to integers over a common denominator.
#[derive(Debug, Clone)]
enum Weights {
    Small { num: Vec<u128>, den: u128 },
    Big { num: Vec<BigInt>, den: BigInt },
}

/// A partition of the runs, e.g. by an agent's local state at some time.
#[derive(Debug, Clone)]
pub struct Classes {
    pub ids: Vec<u32>,
    pub count: usize,
}

impl Classes {
    /// Per run: whether every run of its class is in `mask`.
    pub fn all_within(&self, mask: &[bool]) -> Vec<bool> {
        let mut ok = vec![true; self.count];
        for (r, &b) in mask.iter().enumerate() {
            if !b {
                ok[self.ids[r] as usize] = false;
            }
        }
        self.ids.iter().map(|&c| ok[c as usize]).collect()
    }

    fn from_keys<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = K>) -> Classes {
        let mut index: HashMap<K, u32> = HashMap::new();
        let ids: Vec<u32> = keys
            .map(|k| {
                let next = index.len() as u32;
                *index.entry(k).or_insert(next)
            })
            .collect();
        Classes {
            ids,
            count: index.len(),
        }
    }
}

/// Every positive-probability path of length `horizon + 1`, with its mass.
/// The prefixes partition the run space, so sums of masses over a set of
/// prefixes are exact run measures.
#[derive(Debug)]
pub struct RunTable {
    horizon: usize,
    runs: usize,
    states: Vec<u32>,
    mu: Vec<Rational>,
    weights: Weights,
    prefix_classes: Vec<Rc<Classes>>,
    local: HashMap<(Agent, Semantics, usize), Rc<Classes>>,
}

impl RunTable {
    pub fn new(model: &Model, horizon: usize) -> Result<RunTable> {
        Self::with_limit(model, horizon, DEFAULT_RUN_LIMIT)
    }

    pub fn with_limit(model: &Model, horizon: usize, limit: usize) -> Result<RunTable> {
        let mut states: Vec<u32> = Vec::new();
        let mut mu: Vec<Rational> = Vec::new();
        let mut path: Vec<StateId> = Vec::with_capacity(horizon + 1);
        for (s, p) in model.init().weights().iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            path.push(s);
            extend(model, horizon, limit, &mut path, p.clone(), &mut states, &mut mu)?;
            path.pop();
        }
        let runs = mu.len();
        let weights = scale(&mu);
        let mut table = RunTable {
            horizon,
            runs,
            states,
            mu,
            weights,
            prefix_classes: Vec::new(),
            local: HashMap::new(),
        };
        let mut prev: Option<Rc<Classes>> = None;
        for m in 0..=horizon {
            let c = Rc::new(match &prev {
                None => Classes::from_keys((0..runs).map(|r| table.state(r, 0))),
                Some(p) => {
                    Classes::from_keys((0..runs).map(|r| (p.ids[r], table.state(r, m))))
                }
            });
            table.prefix_classes.push(c.clone());
            prev = Some(c);
        }
        Ok(table)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs == 0
    }

    pub fn state(&self, run: usize, m: usize) -> StateId {
        self.states[run * (self.horizon + 1) + m] as StateId
    }

    pub fn path(&self, run: usize) -> Vec<StateId> {
        (0..=self.horizon).map(|m| self.state(run, m)).collect()
    }

    pub fn mass(&self, run: usize) -> &Rational {
        &self.mu[run]
    }

    /// Partition by the prefix `r[0..=m]`.
    pub fn prefix_classes(&self, m: usize) -> Rc<Classes> {
        self.prefix_classes[m].clone()
    }

    /// Partition by the local state of `agent` at time `m`.
    pub fn local_classes(
        &mut self,
        model: &Model,
        agent: &Agent,
        semantics: Semantics,
        m: usize,
    ) -> Result<Rc<Classes>> {
        let key = (agent.clone(), semantics, m);
        if let Some(c) = self.local.get(&key) {
            return Ok(c.clone());
        }
        let obs: Vec<usize> = (0..self.runs)
            .map(|r| model.observation(agent, self.state(r, m)))
            .collect::<Result<_>>()?;
        let classes = match (semantics, m) {
            (Semantics::Clock, _) | (Semantics::PerfectRecall, 0) => {
                Classes::from_keys(obs.into_iter())
            }
            (Semantics::PerfectRecall, _) => {
                let prev = self.local_classes(model, agent, semantics, m - 1)?;
                Classes::from_keys((0..self.runs).map(|r| (prev.ids[r], obs[r])))
            }
        };
        let c = Rc::new(classes);
        self.local.insert(key, c.clone());
        Ok(c)
    }

    /// Total mass of the runs selected by `mask`.
    pub fn measure(&self, mask: &[bool]) -> Rational {
        match &self.weights {
            Weights::Small { num, den } => {
                let total: u128 = num.iter().zip(mask).filter(|(_, &b)| b).map(|(w, _)| *w).sum();
                Rational::new(BigInt::from(total), BigInt::from(*den))
            }
            Weights::Big { num, den } => {
                let total = num
                    .iter()
                    .zip(mask)
                    .filter(|(_, &b)| b)
                    .fold(BigInt::zero(), |acc, (w, _)| acc + w);
                Rational::new(total, den.clone())
            }
        }
    }

    /// For each class, the conditional mass of `mask` within the class.
    pub fn conditional_by_class(&self, classes: &Classes, mask: &[bool]) -> Vec<Rational> {
        match &self.weights {
            Weights::Small { num, .. } => {
                let mut hit = vec![0u128; classes.count];
                let mut all = vec![0u128; classes.count];
                for r in 0..self.runs {
                    let c = classes.ids[r] as usize;
                    all[c] += num[r];
                    if mask[r] {
                        hit[c] += num[r];
                    }
                }
                hit.into_iter()
                    .zip(all)
                    .map(|(h, a)| Rational::new(BigInt::from(h), BigInt::from(a)))
                    .collect()
            }
            Weights::Big { num, .. } => {
                let mut hit = vec![BigInt::zero(); classes.count];
                let mut all = vec![BigInt::zero(); classes.count];
                for r in 0..self.runs {
                    let c = classes.ids[r] as usize;
                    all[c] += &num[r];
                    if mask[r] {
                        hit[c] += &num[r];
                    }
                }
                hit.into_iter()
                    .zip(all)
                    .map(|(h, a)| Rational::new(h, a))
                    .collect()
            }
        }
    }

    /// Runs whose first states are exactly `prefix`.
    pub fn runs_extending(&self, prefix: &[StateId]) -> Vec<usize> {
        (0..self.runs)
            .filter(|&r| prefix.iter().enumerate().all(|(m, &s)| self.state(r, m) == s))
            .collect()
    }
}

fn extend(
    model: &Model,
    horizon: usize,
    limit: usize,
    path: &mut Vec<StateId>,
    mass: Rational,
    states: &mut Vec<u32>,
    mu: &mut Vec<Rational>,
) -> Result<()> {
    if path.len() == horizon + 1 {
        if mu.len() >= limit {
            return Err(Error::TooManyRuns(limit));
        }
        states.extend(path.iter().map(|&s| s as u32));
        mu.push(mass);
        return Ok(());
    }
    let last = *path.last().expect("paths are nonempty");
    for (t, p) in model.successors(last) {
        path.push(t);
        extend(model, horizon, limit, path, &mass * p, states, mu)?;
        path.pop();
    }
    Ok(())
}

fn scale(mu: &[Rational]) -> Weights {
    let den = mu
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let num: Vec<BigInt> = mu.iter().map(|x| x.numer() * (&den / x.denom())).collect();
    // Class sums never exceed the denominator, so it bounds every partial sum.
    if let Some(d) = den.to_u128() {
        if let Some(small) = num.iter().map(ToPrimitive::to_u128).collect::<Option<Vec<_>>>() {
            return Weights::Small { num: small, den: d };
        }
    }
    Weights::Big { num, den }
}
