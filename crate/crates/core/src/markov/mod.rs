//! Partially observed discrete-time Markov chains with exact rational
//! probabilities.
//!
//! A [`Model`] is a finite Markov chain together with one observation map per
//! agent and a proposition labeling. Two agents exist implicitly in every
//! model: [`Agent::Top`] observes the state itself and [`Agent::Bottom`]
//! observes nothing.

pub(crate) mod format;
mod matrix;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use format::{parse_model, parse_rational, write_model};
pub use matrix::{bilinear_form, dot, matrix_power, RationalMatrix};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Index of a state within its model.
pub type StateId = usize;

/// Shorthand for `Rational::new(n, d)`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Prefix reserved for derived proposition names.
pub const RESERVED_PREFIX: char = '@';

/// Observation symbol of the blind agent.
pub const BLIND_SYMBOL: &str = "*";

/// Proposition true exactly at the named state.
pub fn state_prop(state: &str) -> String {
    format!("@state_{state}")
}

/// Proposition true exactly where `agent` observes `symbol`.
pub fn obs_prop(agent: &Agent, symbol: &str) -> String {
    format!("@obs:{agent}:{symbol}")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Agent {
    Named(String),
    /// Observes the full state.
    Top,
    /// Observes nothing; knowledge for this agent is the universal modality.
    Bottom,
}

impl Agent {
    pub fn named(name: impl Into<String>) -> Self {
        Agent::Named(name.into())
    }

    pub fn parse(name: &str) -> Self {
        match name {
            "@top" => Agent::Top,
            "@bot" => Agent::Bottom,
            other => Agent::Named(other.to_string()),
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Agent::Named(n) => f.write_str(n),
            Agent::Top => f.write_str("@top"),
            Agent::Bottom => f.write_str("@bot"),
        }
    }
}

/// A distribution over the states of a model, stored densely.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Distribution {
    weights: Vec<Rational>,
}

impl Distribution {
    pub fn new(weights: Vec<Rational>) -> Self {
        Distribution { weights }
    }

    pub fn point(n: usize, state: StateId) -> Self {
        let mut weights = vec![Rational::zero(); n];
        weights[state] = Rational::one();
        Distribution { weights }
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<Rational> {
        self.weights
    }

    pub fn get(&self, state: StateId) -> &Rational {
        &self.weights[state]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.weights.iter().fold(Rational::zero(), |a, x| a + x)
    }

    pub fn support(&self) -> Vec<StateId> {
        (0..self.weights.len())
            .filter(|&s| !self.weights[s].is_zero())
            .collect()
    }

    /// Weights in `[0, 1]` summing to exactly one.
    pub fn is_valid(&self) -> bool {
        self.weights
            .iter()
            .all(|w| *w >= Rational::zero() && *w <= Rational::one())
            && self.total().is_one()
    }

    /// Rescales so that the weights sum to one. `None` when the total is zero.
    pub fn normalized(&self) -> Option<Distribution> {
        let total = self.total();
        if total.is_zero() {
            return None;
        }
        Some(Distribution::new(
            self.weights.iter().map(|w| w / &total).collect(),
        ))
    }
}

/// A finite path `s0 s1 … sm`, `m ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathPrefix {
    states: Vec<StateId>,
}

impl PathPrefix {
    pub fn new(states: Vec<StateId>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidPrefix("empty prefix".into()));
        }
        Ok(PathPrefix { states })
    }

    pub fn from_names(model: &Model, names: &[&str]) -> Result<Self> {
        let states = names
            .iter()
            .map(|n| model.state_index(n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(states)
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    /// The time `m` of the last state.
    pub fn time(&self) -> usize {
        self.states.len() - 1
    }

    pub fn last(&self) -> StateId {
        *self.states.last().expect("prefix is nonempty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct AgentObservation {
    name: String,
    /// Sorted, deduplicated observation range.
    symbols: Vec<String>,
    /// Index into `symbols` for every state.
    obs: Vec<usize>,
}

/// One violated model invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    states: Vec<String>,
    index: HashMap<String, StateId>,
    init: Distribution,
    trans: RationalMatrix,
    agents: Vec<AgentObservation>,
    labels: Vec<BTreeSet<String>>,
}

impl Model {
    /// Assembles a model, checking names and dimensions. Stochasticity is
    /// reported separately by [`Model::validate`].
    ///
    /// `agents` pairs an agent name with its observation symbol for every
    /// state, in state order.
    pub fn new(
        states: Vec<String>,
        init: Vec<Rational>,
        trans: RationalMatrix,
        agents: Vec<(String, Vec<String>)>,
        labels: Vec<BTreeSet<String>>,
    ) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::InvalidModel(vec!["model has no states".into()]));
        }
        let mut index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidModel(vec![format!(
                    "duplicate state name `{s}`"
                )]));
            }
        }
        if init.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "init has {} entries for {n} states",
                init.len()
            )));
        }
        if trans.rows() != n || trans.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "transition matrix is {}x{} for {n} states",
                trans.rows(),
                trans.cols()
            )));
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "labels given for {} of {n} states",
                labels.len()
            )));
        }
        for set in &labels {
            if let Some(p) = set.iter().find(|p| p.starts_with(RESERVED_PREFIX)) {
                return Err(Error::InvalidModel(vec![format!(
                    "proposition `{p}` uses the reserved prefix `@`"
                )]));
            }
        }
        let mut seen = BTreeSet::new();
        let mut agent_obs = Vec::with_capacity(agents.len());
        for (name, obs) in agents {
            if name.starts_with(RESERVED_PREFIX) || !seen.insert(name.clone()) {
                return Err(Error::InvalidModel(vec![format!(
                    "duplicate or reserved agent name `{name}`"
                )]));
            }
            if obs.len() != n {
                return Err(Error::InvalidModel(vec![format!(
                    "agent `{name}` observes {} of {n} states",
                    obs.len()
                )]));
            }
            let symbols: Vec<String> = obs
                .iter()
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let obs = obs
                .iter()
                .map(|o| symbols.binary_search(o).expect("symbol collected above"))
                .collect();
            agent_obs.push(AgentObservation { name, symbols, obs });
        }
        Ok(Model {
            states,
            index,
            init: Distribution::new(init),
            trans,
            agents: agent_obs,
            labels,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn state_index(&self, name: &str) -> Result<StateId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn init(&self) -> &Distribution {
        &self.init
    }

    pub fn trans(&self) -> &RationalMatrix {
        &self.trans
    }

    pub fn prob(&self, from: StateId, to: StateId) -> &Rational {
        &self.trans[(from, to)]
    }

    /// Positive-probability successors of `s`.
    pub fn successors(&self, s: StateId) -> impl Iterator<Item = (StateId, &Rational)> + '_ {
        self.trans
            .row(s)
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
    }

    pub fn agent_names(&self) -> impl Iterator<Item = &str> {
        self.agents.iter().map(|a| a.name.as_str())
    }

    pub fn has_agent(&self, agent: &Agent) -> bool {
        match agent {
            Agent::Named(n) => self.agents.iter().any(|a| &a.name == n),
            Agent::Top | Agent::Bottom => true,
        }
    }

    fn agent_obs(&self, name: &str) -> Result<&AgentObservation> {
        self.agents
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAgent(name.to_string()))
    }

    pub fn check_agent(&self, agent: &Agent) -> Result<()> {
        match agent {
            Agent::Named(n) => self.agent_obs(n).map(|_| ()),
            Agent::Top | Agent::Bottom => Ok(()),
        }
    }

    /// Dense index of the observation `agent` makes in state `s`.
    pub fn observation(&self, agent: &Agent, s: StateId) -> Result<usize> {
        Ok(match agent {
            Agent::Named(n) => self.agent_obs(n)?.obs[s],
            Agent::Top => s,
            Agent::Bottom => 0,
        })
    }

    /// The observation range of `agent`, indexed consistently with
    /// [`Model::observation`].
    pub fn observation_symbols(&self, agent: &Agent) -> Result<Vec<String>> {
        Ok(match agent {
            Agent::Named(n) => self.agent_obs(n)?.symbols.clone(),
            Agent::Top => self.states.clone(),
            Agent::Bottom => vec![BLIND_SYMBOL.to_string()],
        })
    }

    pub fn observation_name(&self, agent: &Agent, s: StateId) -> Result<String> {
        let idx = self.observation(agent, s)?;
        Ok(match agent {
            Agent::Named(n) => self.agent_obs(n)?.symbols[idx].clone(),
            Agent::Top => self.states[s].clone(),
            Agent::Bottom => BLIND_SYMBOL.to_string(),
        })
    }

    pub fn symbol_index(&self, agent: &Agent, symbol: &str) -> Result<usize> {
        let symbols = self.observation_symbols(agent)?;
        symbols
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| Error::Unsupported(format!("agent `{agent}` never observes `{symbol}`")))
    }

    /// User-declared labels of `s` (derived names excluded).
    pub fn labels(&self, s: StateId) -> &BTreeSet<String> {
        &self.labels[s]
    }

    pub fn propositions(&self) -> BTreeSet<String> {
        self.labels.iter().flatten().cloned().collect()
    }

    /// Whether `prop` is a user proposition or a well-formed derived one.
    pub fn knows_proposition(&self, prop: &str) -> bool {
        if let Some(state) = prop.strip_prefix("@state_") {
            return self.index.contains_key(state);
        }
        if let Some((agent, symbol)) = parse_obs_prop(prop) {
            return self
                .observation_symbols(&agent)
                .map(|syms| syms.iter().any(|s| s == symbol))
                .unwrap_or(false);
        }
        self.labels.iter().any(|l| l.contains(prop))
    }

    /// Truth of `prop` at `s`, resolving derived `@state_*` and `@obs:*`
    /// names on demand.
    pub fn holds(&self, s: StateId, prop: &str) -> bool {
        if prop.starts_with(RESERVED_PREFIX) {
            if let Some(state) = prop.strip_prefix("@state_") {
                return self.states[s] == state;
            }
            if let Some((agent, symbol)) = parse_obs_prop(prop) {
                return self
                    .observation_name(&agent, s)
                    .map(|o| o == symbol)
                    .unwrap_or(false);
            }
            return false;
        }
        self.labels[s].contains(prop)
    }

    /// A copy whose labeling lists the observation propositions of every
    /// named agent explicitly.
    pub fn with_observation_labels(&self) -> Model {
        let mut out = self.clone();
        for a in &self.agents {
            let agent = Agent::Named(a.name.clone());
            for s in 0..self.num_states() {
                out.labels[s].insert(obs_prop(&agent, &a.symbols[a.obs[s]]));
            }
        }
        out
    }

    /// Every stochasticity violation, with the offending row or entry.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let zero = Rational::zero();
        let one = Rational::one();
        for (s, w) in self.init.weights().iter().enumerate() {
            if *w < zero || *w > one {
                out.push(Violation(format!(
                    "init entry {} is {w}, outside [0, 1]",
                    self.states[s]
                )));
            }
        }
        let total = self.init.total();
        if !total.is_one() {
            out.push(Violation(format!("init sums to {total}")));
        }
        for i in 0..self.num_states() {
            for (j, p) in self.trans.row(i).iter().enumerate() {
                if *p < zero || *p > one {
                    out.push(Violation(format!(
                        "entry ({i}, {j}) is {p}, outside [0, 1]"
                    )));
                }
            }
            let sum = self.trans.row_sum(i);
            if !sum.is_one() {
                out.push(Violation(format!("row {i} sums to {sum}")));
            }
        }
        out
    }

    /// `PI(s0)·PT(s0,s1)·…·PT(s_{m-1},s_m)`.
    pub fn cylinder_probability(&self, prefix: &PathPrefix) -> Result<Rational> {
        let states = prefix.states();
        if let Some(&bad) = states.iter().find(|&&s| s >= self.num_states()) {
            return Err(Error::InvalidPrefix(format!("state index {bad} out of range")));
        }
        let mut p = self.init.get(states[0]).clone();
        if p.is_zero() {
            return Err(Error::InvalidPrefix(format!(
                "initial state {} has probability zero",
                self.states[states[0]]
            )));
        }
        for w in states.windows(2) {
            let step = self.prob(w[0], w[1]);
            if step.is_zero() {
                return Err(Error::InvalidPrefix(format!(
                    "transition {} -> {} has probability zero",
                    self.states[w[0]], self.states[w[1]]
                )));
            }
            p *= step;
        }
        Ok(p)
    }

    /// One step of the chain applied to a (not necessarily normalized)
    /// state vector.
    pub fn step(&self, dist: &[Rational]) -> Vec<Rational> {
        self.trans
            .left_mul(dist)
            .expect("distribution length matches the model")
    }

    /// State distribution at time `t`, i.e. `PI · PT^t`.
    pub fn distribution_at(&self, t: usize) -> Distribution {
        let mut v = self.init.weights().to_vec();
        for _ in 0..t {
            v = self.step(&v);
        }
        Distribution::new(v)
    }

    /// Distributions at times `0..=horizon`.
    pub fn distributions_up_to(&self, horizon: usize) -> Vec<Distribution> {
        let mut out = Vec::with_capacity(horizon + 1);
        let mut v = self.init.weights().to_vec();
        out.push(Distribution::new(v.clone()));
        for _ in 0..horizon {
            v = self.step(&v);
            out.push(Distribution::new(v.clone()));
        }
        out
    }

    /// `Pr(p(t))`, the mass of states labelled `prop` at time `t`.
    pub fn marginal(&self, prop: &str, t: usize) -> Rational {
        let d = self.distribution_at(t);
        (0..self.num_states())
            .filter(|&s| self.holds(s, prop))
            .fold(Rational::zero(), |acc, s| acc + d.get(s))
    }
}

fn parse_obs_prop(prop: &str) -> Option<(Agent, &str)> {
    let rest = prop.strip_prefix("@obs:")?;
    let (agent, symbol) = rest.rsplit_once(':')?;
    Some((Agent::parse(agent), symbol))
}

/// Incremental construction of models by state name; mostly for fixtures.
#[derive(Debug, Clone, Default)]
pub struct ModelBuilder {
    states: Vec<String>,
    init: Vec<(String, Rational)>,
    trans: Vec<(String, String, Rational)>,
    agents: Vec<(String, Vec<(String, String)>)>,
    labels: Vec<(String, String)>,
}

impl ModelBuilder {
    pub fn new<S: AsRef<str>>(states: &[S]) -> Self {
        ModelBuilder {
            states: states.iter().map(|s| s.as_ref().to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn init(mut self, state: &str, p: Rational) -> Self {
        self.init.push((state.into(), p));
        self
    }

    pub fn trans(mut self, from: &str, to: &str, p: Rational) -> Self {
        self.trans.push((from.into(), to.into(), p));
        self
    }

    pub fn agent(mut self, name: &str, obs: &[(&str, &str)]) -> Self {
        self.agents.push((
            name.into(),
            obs.iter().map(|(s, o)| (s.to_string(), o.to_string())).collect(),
        ));
        self
    }

    pub fn label(mut self, state: &str, props: &[&str]) -> Self {
        for p in props {
            self.labels.push((state.into(), p.to_string()));
        }
        self
    }

    pub fn build(self) -> Result<Model> {
        let n = self.states.len();
        let idx = |name: &str| {
            self.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::UnknownState(name.to_string()))
        };
        let mut init = vec![Rational::zero(); n];
        for (s, p) in &self.init {
            init[idx(s)?] = p.clone();
        }
        let mut trans = RationalMatrix::zeros(n, n);
        for (a, b, p) in &self.trans {
            trans[(idx(a)?, idx(b)?)] = p.clone();
        }
        let mut agents = Vec::new();
        for (name, obs) in &self.agents {
            let mut per_state: Vec<Option<String>> = vec![None; n];
            for (s, o) in obs {
                per_state[idx(s)?] = Some(o.clone());
            }
            let per_state = per_state
                .into_iter()
                .enumerate()
                .map(|(i, o)| {
                    o.ok_or_else(|| {
                        Error::InvalidModel(vec![format!(
                            "agent `{name}` has no observation for state `{}`",
                            self.states[i]
                        )])
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            agents.push((name.clone(), per_state));
        }
        let mut labels = vec![BTreeSet::new(); n];
        for (s, p) in &self.labels {
            labels[idx(s)?].insert(p.clone());
        }
        Model::new(self.states, init, trans, agents, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_step_chain() -> Model {
        ModelBuilder::new(&["a", "b"])
            .init("a", int(1))
            .trans("a", "a", rat(1, 2))
            .trans("a", "b", rat(1, 2))
            .trans("b", "b", int(1))
            .build()
            .unwrap()
    }

    #[test]
    fn identity_chain_is_valid() {
        let m = ModelBuilder::new(&["s"])
            .init("s", int(1))
            .trans("s", "s", int(1))
            .build()
            .unwrap();
        assert!(m.validate().is_empty());
    }

    #[test]
    fn short_row_is_reported() {
        let m = ModelBuilder::new(&["a", "b"])
            .init("a", int(1))
            .trans("a", "a", rat(1, 4))
            .trans("a", "b", rat(1, 2))
            .trans("b", "b", int(1))
            .build()
            .unwrap();
        let v = m.validate();
        assert_eq!(v, vec![Violation("row 0 sums to 3/4".into())]);
    }

    #[test]
    fn negative_and_large_entries_are_reported() {
        let m = ModelBuilder::new(&["a", "b"])
            .init("a", int(2))
            .init("b", int(-1))
            .trans("a", "a", int(2))
            .trans("a", "b", int(-1))
            .trans("b", "b", int(1))
            .build()
            .unwrap();
        let msgs: Vec<String> = m.validate().into_iter().map(|v| v.0).collect();
        assert!(msgs.iter().any(|m| m.contains("init entry a")));
        assert!(msgs.iter().any(|m| m.contains("entry (0, 1)")));
        assert!(!msgs.iter().any(|m| m.contains("row 0 sums")));
    }

    #[test]
    fn cylinder_examples() {
        let m = two_step_chain();
        let p = PathPrefix::from_names(&m, &["a", "a", "b"]).unwrap();
        assert_eq!(m.cylinder_probability(&p).unwrap(), rat(1, 4));
        let single = PathPrefix::from_names(&m, &["a"]).unwrap();
        assert_eq!(m.cylinder_probability(&single).unwrap(), int(1));
        let bad = PathPrefix::from_names(&m, &["b", "a"]).unwrap();
        assert!(matches!(m.cylinder_probability(&bad), Err(Error::InvalidPrefix(_))));
        let back = PathPrefix::from_names(&m, &["a", "b", "a"]).unwrap();
        assert!(matches!(m.cylinder_probability(&back), Err(Error::InvalidPrefix(_))));
        assert!(PathPrefix::new(vec![]).is_err());
    }

    #[test]
    fn distribution_at_zero_is_init() {
        let m = two_step_chain();
        assert_eq!(&m.distribution_at(0), m.init());
        assert_eq!(m.distribution_at(2).weights(), &[rat(1, 4), rat(3, 4)]);
    }

    #[test]
    fn derived_propositions() {
        let m = ModelBuilder::new(&["u", "v", "w"])
            .init("u", int(1))
            .trans("u", "u", int(1))
            .trans("v", "v", int(1))
            .trans("w", "w", int(1))
            .agent("i", &[("u", "a"), ("v", "a"), ("w", "b")])
            .label("u", &["p"])
            .build()
            .unwrap();
        let i = Agent::named("i");
        assert!(m.holds(0, "@obs:i:a"));
        assert!(m.holds(1, "@obs:i:a"));
        assert!(!m.holds(2, "@obs:i:a"));
        assert!(m.holds(2, "@state_w"));
        assert!(m.holds(2, "@obs:@top:w"));
        assert!(m.holds(2, "@obs:@bot:*"));
        assert!(m.knows_proposition("@obs:i:b"));
        assert!(!m.knows_proposition("@obs:i:c"));
        assert_eq!(m.observation_symbols(&i).unwrap(), vec!["a", "b"]);
        let explicit = m.with_observation_labels();
        assert!(explicit.labels(2).contains("@obs:i:b"));
        for s in 0..3 {
            for p in ["@obs:i:a", "@obs:i:b"] {
                assert_eq!(explicit.holds(s, p), m.holds(s, p));
            }
        }
    }

    #[test]
    fn reserved_labels_are_rejected() {
        let err = ModelBuilder::new(&["s"])
            .init("s", int(1))
            .trans("s", "s", int(1))
            .label("s", &["@state_s"])
            .build();
        assert!(matches!(err, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn duplicate_state_is_rejected() {
        let err = ModelBuilder::new(&["s", "s"]).build();
        assert!(matches!(err, Err(Error::InvalidModel(msg)) if msg[0].contains("`s`")));
    }
}
