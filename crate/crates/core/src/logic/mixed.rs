use std::fmt;

use num_traits::Zero;

use super::ast::{CmpOp, Comparison, Wmlo, WmloTerm};
use super::polynomial::Polynomial;
use crate::error::{Error, Result};
use crate::markov::Rational;

/// `∃t1…tn f(Pr(p1(t_{i1})), …, Pr(pm(t_{im}))) = 0`.
///
/// Variable `k` of `poly` stands for `Pr(atoms[k].0 @ vars[atoms[k].1])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedTimeFormula {
    vars: Vec<String>,
    atoms: Vec<(String, usize)>,
    poly: Polynomial,
}

impl MixedTimeFormula {
    pub fn new(vars: Vec<String>, atoms: Vec<(String, usize)>, poly: Polynomial) -> Result<Self> {
        if let Some((p, v)) = atoms.iter().find(|(_, v)| *v >= vars.len()) {
            return Err(Error::DimensionMismatch(format!(
                "atom `{p}` refers to time variable {v} of {}",
                vars.len()
            )));
        }
        if let Some(&v) = poly.variables().iter().next_back() {
            if v >= atoms.len() {
                return Err(Error::DimensionMismatch(format!(
                    "polynomial variable {v} has no atom"
                )));
            }
        }
        Ok(MixedTimeFormula { vars, atoms, poly })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn atoms(&self) -> &[(String, usize)] {
        &self.atoms
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    /// The value of `f` when atom `k` has probability `marginal(k)`.
    pub fn value(&self, mut marginal: impl FnMut(&str, usize) -> Rational, times: &[u64]) -> Result<Rational> {
        let values: Vec<Rational> = self
            .atoms
            .iter()
            .map(|(p, v)| marginal(p, times[*v] as usize))
            .collect();
        self.poly.eval(&values)
    }

    /// Reads `exists t1 … tn . <polynomial in P(p@ti)> = c`.
    pub fn from_wmlo(phi: &Wmlo) -> Result<Self> {
        let unsupported = || {
            Error::Unsupported(
                "expected `exists t… . <polynomial in P(p@t)> = c` with propositional atoms".into(),
            )
        };
        let mut vars = Vec::new();
        let mut cur = phi;
        while let Wmlo::ExistsT(v, body) = cur {
            vars.push(v.clone());
            cur = body;
        }
        let Wmlo::Compare(c) = cur else {
            return Err(unsupported());
        };
        if c.op() != CmpOp::Eq || vars.is_empty() {
            return Err(unsupported());
        }
        let mut atoms = Vec::new();
        for term in c.terms() {
            match term {
                WmloTerm::Global(body) => match &**body {
                    Wmlo::PropAt(p, t) => {
                        let v = vars.iter().position(|x| x == t).ok_or_else(unsupported)?;
                        atoms.push((p.clone(), v));
                    }
                    _ => return Err(unsupported()),
                },
                WmloTerm::AgentAt(..) => return Err(unsupported()),
            }
        }
        let poly = c.poly() - &Polynomial::constant(c.bound().clone());
        MixedTimeFormula::new(vars, atoms, poly)
    }

    /// The same question as a first-order sentence. Fails when identical
    /// atoms cancel the polynomial to a constant, which no comparison atom
    /// can express.
    pub fn to_wmlo(&self) -> Result<Wmlo> {
        let terms = self
            .atoms
            .iter()
            .map(|(p, v)| Wmlo::global(Wmlo::prop_at(p, &self.vars[*v])))
            .collect();
        let cmp = Comparison::new(terms, self.poly.clone(), CmpOp::Eq, Rational::zero())?;
        Ok(self
            .vars
            .iter()
            .rev()
            .fold(Wmlo::Compare(cmp), |acc, v| Wmlo::exists(v, acc)))
    }
}

impl fmt::Display for MixedTimeFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exists {} . ", self.vars.join(" "))?;
        let body = self
            .poly
            .render(|k| format!("P({}@{})", self.atoms[k].0, self.vars[self.atoms[k].1]));
        write!(f, "{body} = 0")
    }
}
