//! Integer polynomials and their encoding as mixed-time marginal
//! questions on a fixed four-state chain.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, ParseError, Result};
use crate::logic::{Monomial, MixedTimeFormula, Polynomial};
use crate::markov::{int, rat, Model, ModelBuilder, Rational};

pub const P_EXP: &str = "p_exp";
pub const P_LIN: &str = "p_lin";

/// `Pr(p_exp(t)) = (1/2)^t` and `Pr(p_lin(t)) = t·(1/2)^t`. `s_pad` is
/// unreachable.
pub fn diophantine_chain() -> Model {
    ModelBuilder::new(&["s_exp", "s_lin", "s_sink", "s_pad"])
        .init("s_exp", int(1))
        .trans("s_exp", "s_exp", rat(1, 2))
        .trans("s_exp", "s_lin", rat(1, 2))
        .trans("s_lin", "s_lin", rat(1, 2))
        .trans("s_lin", "s_sink", rat(1, 2))
        .trans("s_sink", "s_sink", int(1))
        .trans("s_pad", "s_pad", int(1))
        .label("s_exp", &[P_EXP])
        .label("s_lin", &[P_LIN])
        .build()
        .expect("fixed chain is valid")
}

/// A polynomial with integer coefficients over named variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPolynomial {
    vars: Vec<String>,
    poly: Polynomial,
}

impl IntPolynomial {
    pub fn new(vars: Vec<String>, poly: Polynomial) -> Result<Self> {
        if poly.terms().any(|(_, c)| !c.is_integer()) {
            return Err(Error::Unsupported("coefficients must be integers".into()));
        }
        if poly.variables().iter().any(|&v| v >= vars.len()) {
            return Err(Error::DimensionMismatch("polynomial variable without a name".into()));
        }
        Ok(IntPolynomial { vars, poly })
    }

    /// Parses `x^2*y - 3*x + 1`. Variables are ordered alphabetically.
    pub fn parse(text: &str) -> Result<Self> {
        let mut names = BTreeSet::new();
        let terms = parse_terms(text, &mut names)?;
        let vars: Vec<String> = names.into_iter().collect();
        let mut poly = Polynomial::zero();
        for (coeff, factors) in terms {
            let powers = factors.into_iter().map(|(name, e)| {
                (vars.iter().position(|v| *v == name).expect("collected"), e)
            });
            poly = &poly + &Polynomial::term(Rational::from_integer(coeff), Monomial::from_powers(powers));
        }
        IntPolynomial::new(vars, poly)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn eval(&self, point: &[u64]) -> Result<Rational> {
        let values: Vec<Rational> = point.iter().map(|&x| Rational::from_integer(x.into())).collect();
        self.poly.eval(&values)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.poly.render(|v| self.vars[v].clone()))
    }
}

type Term = (BigInt, Vec<(String, u32)>);

fn parse_terms(text: &str, names: &mut BTreeSet<String>) -> Result<Vec<Term>> {
    let err = |col: usize, msg: String| Error::Parse(ParseError::new(1, col + 1, msg));
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let skip = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    let number = |i: &mut usize| -> Option<String> {
        let start = *i;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
        (start < *i).then(|| chars[start..*i].iter().collect())
    };
    let mut terms = Vec::new();
    let mut first = true;
    loop {
        skip(&mut i);
        let mut negative = false;
        match chars.get(i) {
            Some('+') if !first => i += 1,
            Some('-') => {
                negative = true;
                i += 1;
            }
            None if first => return Err(err(i, "empty polynomial".into())),
            Some(c) if !first => return Err(err(i, format!("expected `+` or `-`, found `{c}`"))),
            _ => {}
        }
        first = false;
        let mut coeff = BigInt::one();
        let mut factors = Vec::new();
        loop {
            skip(&mut i);
            match chars.get(i) {
                Some(c) if c.is_ascii_digit() => {
                    let digits = number(&mut i).expect("digit seen");
                    coeff *= digits.parse::<BigInt>().expect("digits");
                }
                Some(c) if c.is_ascii_alphabetic() || *c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    let name: String = chars[start..i].iter().collect();
                    skip(&mut i);
                    let mut exp = 1;
                    if chars.get(i) == Some(&'^') {
                        i += 1;
                        skip(&mut i);
                        let at = i;
                        exp = number(&mut i)
                            .and_then(|d| d.parse::<u32>().ok())
                            .ok_or_else(|| err(at, "expected an exponent".into()))?;
                    }
                    names.insert(name.clone());
                    factors.push((name, exp));
                }
                Some(c) => return Err(err(i, format!("unexpected `{c}`"))),
                None => return Err(err(i, "expected a factor".into())),
            }
            skip(&mut i);
            if chars.get(i) == Some(&'*') {
                i += 1;
            } else {
                break;
            }
        }
        if negative {
            coeff = -coeff;
        }
        terms.push((coeff, factors));
        skip(&mut i);
        if i >= chars.len() {
            return Ok(terms);
        }
    }
}

/// Time variable names: `t` for one variable, `t1 … tk` otherwise.
fn time_vars(k: usize) -> Vec<String> {
    if k == 1 {
        vec!["t".into()]
    } else {
        (1..=k).map(|i| format!("t{i}")).collect()
    }
}

/// Replaces `n_i^e` by `X_i^e·Y_i^{d_i-e}` with `X_i = Pr(p_lin(t_i))`,
/// `Y_i = Pr(p_exp(t_i))` and `d_i` the degree of `n_i`. On the chain of
/// [`diophantine_chain`] the result equals `(1/2)^{Σ d_i t_i}·p(t)`.
pub fn diophantine_to_formula(p: &IntPolynomial) -> Result<MixedTimeFormula> {
    if p.poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let k = p.vars.len();
    let vars = time_vars(k.max(1));
    let mut atoms = Vec::with_capacity(2 * k);
    for i in 0..k {
        atoms.push((P_LIN.to_string(), i));
        atoms.push((P_EXP.to_string(), i));
    }
    let degrees: Vec<u32> = (0..k).map(|i| p.poly.degree_in(i)).collect();
    let mut out = Polynomial::zero();
    for (m, c) in p.poly.terms() {
        let mut powers = Vec::new();
        for i in 0..k {
            let e = m.exponent(i);
            powers.push((2 * i, e));
            powers.push((2 * i + 1, degrees[i] - e));
        }
        let powers = powers.into_iter().filter(|&(_, e)| e > 0);
        out = &out + &Polynomial::term(c.clone(), Monomial::from_powers(powers));
    }
    MixedTimeFormula::new(vars, atoms, out)
}

/// Lexicographically least root in `[0, bound]^k` by direct evaluation.
pub fn least_root(p: &IntPolynomial, bound: u64) -> Result<Option<Vec<u64>>> {
    let k = p.vars.len();
    let mut point = vec![0u64; k];
    loop {
        if p.eval(&point)?.is_zero() {
            return Ok(Some(point));
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(None);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{check_mixed_time, Verdict};

    #[test]
    fn chain_closed_forms() {
        let m = diophantine_chain();
        let d = m.distribution_at(3);
        assert_eq!(d.get(0), &rat(1, 8));
        assert_eq!(d.get(1), &rat(3, 8));
        assert_eq!(m.distribution_at(0).get(1), &int(0));
    }

    #[test]
    fn parse_and_render() {
        let p = IntPolynomial::parse("x^2*y - 3*x + 1").unwrap();
        assert_eq!(p.vars(), &["x".to_string(), "y".to_string()]);
        assert_eq!(p.eval(&[2, 5]).unwrap(), int(15));
        assert_eq!(IntPolynomial::parse(&p.to_string()).unwrap(), p);
        assert!(matches!(IntPolynomial::parse("x + "), Err(Error::Parse(_))));
        assert!(matches!(IntPolynomial::parse("x / 2"), Err(Error::Parse(_))));
    }

    #[test]
    fn encodings() {
        let f = diophantine_to_formula(&IntPolynomial::parse("x - 2").unwrap()).unwrap();
        assert_eq!(f.to_string(), "exists t . P(p_lin@t) - 2*P(p_exp@t) = 0");
        let v = check_mixed_time(&diophantine_chain(), &f, 10).unwrap();
        assert_eq!(v.to_string(), "witness t=2");

        let f = diophantine_to_formula(&IntPolynomial::parse("x^2 + 1").unwrap()).unwrap();
        assert_eq!(check_mixed_time(&diophantine_chain(), &f, 10).unwrap(), Verdict::NoWitnessUpTo(10));

        let f = diophantine_to_formula(&IntPolynomial::parse("x - y").unwrap()).unwrap();
        let v = check_mixed_time(&diophantine_chain(), &f, 10).unwrap();
        assert_eq!(v.to_string(), "witness t1=0 t2=0");
    }

    #[test]
    fn constants() {
        let zero = IntPolynomial::parse("0").unwrap();
        assert_eq!(diophantine_to_formula(&zero), Err(Error::ZeroPolynomial));
        let one = IntPolynomial::parse("1").unwrap();
        let f = diophantine_to_formula(&one).unwrap();
        assert_eq!(check_mixed_time(&diophantine_chain(), &f, 3).unwrap(), Verdict::NoWitnessUpTo(3));
        assert_eq!(least_root(&IntPolynomial::parse("x^2 - y").unwrap(), 10).unwrap(), Some(vec![0, 0]));
    }
}
