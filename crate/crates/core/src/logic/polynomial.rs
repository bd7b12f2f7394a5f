//! Multivariate polynomials with rational coefficients in canonical form.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::markov::Rational;

/// A product of variables with positive exponents, sorted by variable index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(usize, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: usize) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_powers(powers: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut map: BTreeMap<usize, u32> = BTreeMap::new();
        for (v, e) in powers {
            *map.entry(v).or_default() += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn powers(&self) -> &[(usize, u32)] {
        &self.0
    }

    pub fn exponent(&self, v: usize) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| *w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::from_powers(self.0.iter().chain(&other.0).copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn var(v: usize) -> Self {
        Self::term(Rational::one(), Monomial::var(v))
    }

    pub fn term(coeff: Rational, monomial: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(monomial, coeff);
        }
        Polynomial { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// No variable occurs.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn without_constant(&self) -> Polynomial {
        let mut p = self.clone();
        p.terms.remove(&Monomial::one());
        p
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|&(v, _)| v))
            .collect()
    }

    /// Highest exponent of `v` in any monomial.
    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, x)| (m.clone(), x * c)))
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        (0..n).fold(Polynomial::constant(Rational::one()), |acc, _| &acc * self)
    }

    /// Renames variables; distinct variables may be merged.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| {
            (
                Monomial::from_powers(m.0.iter().map(|&(v, e)| (f(v), e))),
                c.clone(),
            )
        }))
    }

    /// Replaces variable `v` by `images[v]`.
    pub fn substitute(&self, images: &[Polynomial]) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut prod = Polynomial::constant(c.clone());
            for &(v, e) in &m.0 {
                prod = &prod * &images[v].pow(e);
            }
            out = &out + &prod;
        }
        out
    }

    pub fn eval(&self, values: &[Rational]) -> Result<Rational> {
        if let Some(&v) = self.variables().iter().next_back() {
            if v >= values.len() {
                return Err(Error::DimensionMismatch(format!(
                    "polynomial uses variable {v} but {} values were given",
                    values.len()
                )));
            }
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in &m.0 {
                t *= num_traits::pow(values[v].clone(), e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Renders with `name(v)` for each variable, e.g. `1/2 + 3*x^2*y - z`.
    pub fn render(&self, name: impl Fn(usize) -> String) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = *c < Rational::zero();
            let abs = if negative { -c.clone() } else { c.clone() };
            match (i, negative) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let mut factors = Vec::new();
            if m.is_one() || !abs.is_one() {
                factors.push(abs.to_string());
            }
            for &(v, e) in &m.0 {
                if e == 1 {
                    factors.push(name(v));
                } else {
                    factors.push(format!("{}^{e}", name(v)));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{int, rat};
    use proptest::prelude::*;

    fn x() -> Polynomial {
        Polynomial::var(0)
    }

    fn y() -> Polynomial {
        Polynomial::var(1)
    }

    #[test]
    fn example_polynomial_at_ones() {
        // 4x^5y^3 + (7/15)x
        let f = &Polynomial::term(int(4), Monomial::from_powers([(0, 5), (1, 3)]))
            + &x().scale(&rat(7, 15));
        assert_eq!(f.eval(&[int(1), int(1)]).unwrap(), rat(67, 15));
    }

    #[test]
    fn zero_polynomial_evaluates_to_zero() {
        assert_eq!(Polynomial::zero().eval(&[]).unwrap(), int(0));
    }

    #[test]
    fn linear_example() {
        let f = &x() - &y().scale(&int(2));
        assert_eq!(f.eval(&[rat(3, 8), rat(1, 8)]).unwrap(), rat(1, 8));
    }

    #[test]
    fn eval_checks_arity() {
        assert!(y().eval(&[int(1)]).is_err());
    }

    #[test]
    fn cancellation_removes_terms() {
        let f = &(&x() + &y()) - &x();
        assert_eq!(f, y());
        assert!((&x() - &x()).is_zero());
    }

    #[test]
    fn render_is_readable() {
        let f = &(&(&x() * &x()).scale(&int(3)) - &y()) + &Polynomial::constant(rat(1, 2));
        assert_eq!(f.render(|v| ["x", "y"][v].to_string()), "1/2 + 3*x^2 - y");
        assert_eq!(
            (-&x()).render(|_| "x".into()),
            "-x"
        );
    }

    #[test]
    fn substitute_composes() {
        // (x + y)^2 with x := 2y
        let f = (&x() + &y()).pow(2);
        let g = f.substitute(&[y().scale(&int(2)), y()]);
        assert_eq!(g, (&y() * &y()).scale(&int(9)));
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(((-3i64..=3), (0u32..3), (0u32..3), (0u32..2)), 0..5).prop_map(
            |terms| {
                Polynomial::from_terms(terms.into_iter().map(|(c, a, b, d)| {
                    (Monomial::from_powers([(0, a), (1, b), (2, d)]), int(c))
                }))
            },
        )
    }

    proptest! {
        #[test]
        fn ring_laws_hold_structurally(p in arb_poly(), q in arb_poly(), r in arb_poly()) {
            prop_assert_eq!(&p + &q, &q + &p);
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
            prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
            prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        }

        #[test]
        fn eval_is_a_homomorphism(p in arb_poly(), q in arb_poly(), a in -4i64..4, b in -4i64..4, c in 1i64..4) {
            let vals = [int(a), int(b), rat(1, c)];
            let pv = p.eval(&vals).unwrap();
            let qv = q.eval(&vals).unwrap();
            prop_assert_eq!((&p * &q).eval(&vals).unwrap(), &pv * &qv);
            prop_assert_eq!((&p - &q).eval(&vals).unwrap(), pv - qv);
        }
    }
}
