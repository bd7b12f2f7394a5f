use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::markov::{Agent, Distribution, Model, Rational, StateId};

/// What an agent observed at times `0..=m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObservationSequence {
    agent: Agent,
    symbols: Vec<String>,
}

impl ObservationSequence {
    pub fn new(agent: Agent, symbols: Vec<String>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Unsupported(
                "an observation history needs at least the time-0 observation".into(),
            ));
        }
        Ok(ObservationSequence { agent, symbols })
    }

    pub fn from_strs(agent: Agent, symbols: &[&str]) -> Result<Self> {
        Self::new(agent, symbols.iter().map(|s| s.to_string()).collect())
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    /// The time of the last observation.
    pub fn time(&self) -> usize {
        self.symbols.len() - 1
    }

    pub fn extended(&self, symbol: &str) -> Self {
        let mut symbols = self.symbols.clone();
        symbols.push(symbol.to_string());
        ObservationSequence {
            agent: self.agent.clone(),
            symbols,
        }
    }
}

impl fmt::Display for ObservationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbols.join(","))
    }
}

/// The local state an agent conditions on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Conditioning {
    /// Time and current observation.
    Clock { time: usize, symbol: String },
    /// The observation history.
    History(ObservationSequence),
}

impl Conditioning {
    pub fn time(&self) -> usize {
        match self {
            Conditioning::Clock { time, .. } => *time,
            Conditioning::History(h) => h.time(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefState {
    pub agent: Agent,
    pub time: usize,
    pub conditioning: Conditioning,
    pub posterior: Distribution,
}

impl BeliefState {
    /// States with positive posterior mass.
    pub fn support(&self) -> BTreeSet<StateId> {
        self.posterior.support().into_iter().collect()
    }
}

/// Zeroes the entries of `weights` at states where `agent` does not see
/// the observation with index `obs`.
pub fn mask_observation(model: &Model, agent: &Agent, weights: &mut [Rational], obs: usize) -> Result<()> {
    for (s, w) in weights.iter_mut().enumerate() {
        if !w.is_zero() && model.observation(agent, s)? != obs {
            *w = Rational::zero();
        }
    }
    Ok(())
}

/// One step of the unnormalised forward filter:
/// `α'(s') = (Σ_s α(s)·PT(s, s'))·[O_i(s') = obs]`.
pub fn filter_step(model: &Model, agent: &Agent, alpha: &[Rational], obs: usize) -> Result<Vec<Rational>> {
    let mut next = model.step(alpha);
    mask_observation(model, agent, &mut next, obs)?;
    Ok(next)
}

/// Unnormalised filter vector after the whole history.
pub fn forward_filter(model: &Model, history: &ObservationSequence) -> Result<Vec<Rational>> {
    let agent = history.agent();
    model.check_agent(agent)?;
    let idx: Vec<usize> = history
        .symbols()
        .iter()
        .map(|o| model.symbol_index(agent, o))
        .collect::<Result<_>>()?;
    let mut alpha = model.init().weights().to_vec();
    mask_observation(model, agent, &mut alpha, idx[0])?;
    for &o in &idx[1..] {
        alpha = filter_step(model, agent, &alpha, o)?;
    }
    Ok(alpha)
}

/// Posterior over time-`t` states given that `agent` observes `symbol` at
/// time `t`.
pub fn clock_belief(model: &Model, agent: &Agent, t: usize, symbol: &str) -> Result<BeliefState> {
    model.check_agent(agent)?;
    let obs = model.symbol_index(agent, symbol)?;
    let mut weights = model.distribution_at(t).into_weights();
    mask_observation(model, agent, &mut weights, obs)?;
    let posterior = Distribution::new(weights)
        .normalized()
        .ok_or_else(|| Error::ZeroMassObservation {
            agent: agent.to_string(),
            time: t,
            symbol: symbol.to_string(),
        })?;
    Ok(BeliefState {
        agent: agent.clone(),
        time: t,
        conditioning: Conditioning::Clock {
            time: t,
            symbol: symbol.to_string(),
        },
        posterior,
    })
}

/// Posterior over current states given the full observation history.
pub fn spr_belief(model: &Model, history: &ObservationSequence) -> Result<BeliefState> {
    let alpha = forward_filter(model, history)?;
    let posterior = Distribution::new(alpha)
        .normalized()
        .ok_or_else(|| Error::ZeroMassHistory(history.agent().to_string()))?;
    Ok(BeliefState {
        agent: history.agent().clone(),
        time: history.time(),
        conditioning: Conditioning::History(history.clone()),
        posterior,
    })
}

/// Prior probability that the agent makes exactly these observations.
pub fn history_probability(model: &Model, history: &ObservationSequence) -> Result<Rational> {
    Ok(forward_filter(model, history)?
        .iter()
        .fold(Rational::zero(), |acc, x| acc + x))
}

/// Every positive-probability history of length `horizon + 1` with its
/// probability, in lexicographic order of symbols.
pub fn enumerate_histories(
    model: &Model,
    agent: &Agent,
    horizon: usize,
) -> Result<Vec<(ObservationSequence, Rational)>> {
    model.check_agent(agent)?;
    let mut symbols: Vec<(String, usize)> = model
        .observation_symbols(agent)?
        .into_iter()
        .enumerate()
        .map(|(k, s)| (s, k))
        .collect();
    symbols.sort();
    let mut out = Vec::new();
    for (sym, k) in &symbols {
        let mut alpha = model.init().weights().to_vec();
        mask_observation(model, agent, &mut alpha, *k)?;
        extend_histories(model, agent, &symbols, vec![sym.clone()], alpha, horizon, &mut out)?;
    }
    Ok(out)
}

fn extend_histories(
    model: &Model,
    agent: &Agent,
    symbols: &[(String, usize)],
    prefix: Vec<String>,
    alpha: Vec<Rational>,
    horizon: usize,
    out: &mut Vec<(ObservationSequence, Rational)>,
) -> Result<()> {
    let mass = alpha.iter().fold(Rational::zero(), |acc, x| acc + x);
    if mass.is_zero() {
        return Ok(());
    }
    if prefix.len() == horizon + 1 {
        out.push((ObservationSequence::new(agent.clone(), prefix)?, mass));
        return Ok(());
    }
    let predicted = model.step(&alpha);
    for (sym, k) in symbols {
        let mut next = predicted.clone();
        mask_observation(model, agent, &mut next, *k)?;
        let mut p = prefix.clone();
        p.push(sym.clone());
        extend_histories(model, agent, symbols, p, next, horizon, out)?;
    }
    Ok(())
}

/// States the agent considers possible.
pub fn knowledge_support(
    model: &Model,
    agent: &Agent,
    conditioning: &Conditioning,
) -> Result<BTreeSet<StateId>> {
    let belief = match conditioning {
        Conditioning::Clock { time, symbol } => clock_belief(model, agent, *time, symbol)?,
        Conditioning::History(h) => {
            if h.agent() != agent {
                return Err(Error::Unsupported(format!(
                    "history belongs to `{}`, not `{agent}`",
                    h.agent()
                )));
            }
            spr_belief(model, h)?
        }
    };
    Ok(belief.support())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{int, rat, ModelBuilder, PathPrefix};

    fn clock_example() -> Model {
        ModelBuilder::new(&["u", "v", "w"])
            .init("u", rat(1, 3))
            .init("v", rat(1, 3))
            .init("w", rat(1, 3))
            .trans("u", "u", int(1))
            .trans("v", "v", int(1))
            .trans("w", "w", int(1))
            .agent("i", &[("u", "a"), ("v", "a"), ("w", "b")])
            .build()
            .unwrap()
    }

    fn g_h_model() -> Model {
        ModelBuilder::new(&["g", "h"])
            .init("g", rat(1, 2))
            .init("h", rat(1, 2))
            .trans("g", "g", int(1))
            .trans("h", "g", rat(1, 2))
            .trans("h", "h", rat(1, 2))
            .agent("i", &[("g", "o"), ("h", "o")])
            .build()
            .unwrap()
    }

    // Brute force: normalise the cylinder masses of every consistent prefix.
    fn brute_force(model: &Model, agent: &Agent, history: &[&str]) -> Option<Vec<Rational>> {
        let n = model.num_states();
        let mut out = vec![Rational::zero(); n];
        let mut stack: Vec<Vec<StateId>> = (0..n).map(|s| vec![s]).collect();
        while let Some(path) = stack.pop() {
            let t = path.len() - 1;
            if model.observation_name(agent, path[t]).unwrap() != history[t] {
                continue;
            }
            let Ok(mass) = PathPrefix::new(path.clone()).and_then(|p| model.cylinder_probability(&p)) else {
                continue;
            };
            if path.len() == history.len() {
                out[path[t]] += mass;
            } else {
                for s in 0..n {
                    let mut q = path.clone();
                    q.push(s);
                    stack.push(q);
                }
            }
        }
        Distribution::new(out).normalized().map(Distribution::into_weights)
    }

    #[test]
    fn clock_posterior_conditions_on_the_observation() {
        let m = clock_example();
        let i = Agent::named("i");
        let b = clock_belief(&m, &i, 0, "a").unwrap();
        assert_eq!(b.posterior.weights(), &[rat(1, 2), rat(1, 2), int(0)]);
        assert_eq!(
            b.posterior.weights().to_vec(),
            brute_force(&m, &i, &["a"]).unwrap()
        );
        let cond = Conditioning::Clock {
            time: 0,
            symbol: "a".into(),
        };
        assert_eq!(knowledge_support(&m, &i, &cond).unwrap(), BTreeSet::from([0, 1]));
    }

    #[test]
    fn full_and_blind_observers() {
        let m = clock_example();
        let top = clock_belief(&m, &Agent::Top, 2, "v").unwrap();
        assert_eq!(top.posterior, Distribution::point(3, 1));
        let bot = clock_belief(&m, &Agent::Bottom, 2, "*").unwrap();
        assert_eq!(bot.posterior, m.distribution_at(2));
    }

    #[test]
    fn zero_mass_observation_is_an_error() {
        let m = ModelBuilder::new(&["x", "y"])
            .init("x", int(1))
            .trans("x", "x", int(1))
            .trans("y", "y", int(1))
            .agent("i", &[("x", "a"), ("y", "b")])
            .build()
            .unwrap();
        let e = clock_belief(&m, &Agent::named("i"), 1, "b").unwrap_err();
        assert!(matches!(e, Error::ZeroMassObservation { time: 1, .. }));
    }

    #[test]
    fn filter_example_two_steps() {
        let m = g_h_model();
        let i = Agent::named("i");
        let h = ObservationSequence::from_strs(i.clone(), &["o", "o"]).unwrap();
        let b = spr_belief(&m, &h).unwrap();
        assert_eq!(b.posterior.weights(), &[rat(3, 4), rat(1, 4)]);
        assert_eq!(
            b.posterior.weights().to_vec(),
            brute_force(&m, &i, &["o", "o"]).unwrap()
        );
        assert_eq!(history_probability(&m, &h).unwrap(), int(1));
        let g = ObservationSequence::from_strs(Agent::Top, &["g"]).unwrap();
        assert_eq!(history_probability(&m, &g).unwrap(), rat(1, 2));
    }

    #[test]
    fn length_one_history_matches_clock() {
        let m = clock_example();
        let i = Agent::named("i");
        let h = ObservationSequence::from_strs(i.clone(), &["b"]).unwrap();
        assert_eq!(
            spr_belief(&m, &h).unwrap().posterior,
            clock_belief(&m, &i, 0, "b").unwrap().posterior
        );
    }

    #[test]
    fn full_observer_history_is_a_point_mass() {
        let m = g_h_model();
        let h = ObservationSequence::from_strs(Agent::Top, &["h", "h", "g"]).unwrap();
        assert_eq!(spr_belief(&m, &h).unwrap().posterior, Distribution::point(2, 0));
        let bad = ObservationSequence::from_strs(Agent::Top, &["g", "h"]).unwrap();
        assert!(matches!(spr_belief(&m, &bad), Err(Error::ZeroMassHistory(_))));
    }

    #[test]
    fn histories_enumerate_positive_paths() {
        let m = g_h_model();
        let blind = enumerate_histories(&m, &Agent::named("i"), 3).unwrap();
        assert_eq!(blind.len(), 1);
        assert_eq!(blind[0].1, int(1));
        let full = enumerate_histories(&m, &Agent::Top, 1).unwrap();
        let names: Vec<String> = full.iter().map(|(h, _)| h.to_string()).collect();
        assert_eq!(names, ["g,g", "h,g", "h,h"]);
        let probs: Vec<Rational> = full.iter().map(|(_, p)| p.clone()).collect();
        assert_eq!(probs, [rat(1, 2), rat(1, 4), rat(1, 4)]);
    }

    #[test]
    fn empty_history_is_rejected() {
        assert!(ObservationSequence::new(Agent::Top, vec![]).is_err());
    }
}
