//! Linear recurrence sequences, their matrix forms and bounded Skolem
//! searches.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};

use crate::checker::{Assignment, Verdict};
use crate::error::{Error, Result};
use crate::markov::{parse_rational, Rational, RationalMatrix};

/// `u_{n+k} = a_1 u_{n+k-1} + … + a_k u_n` with seeds `u_0 … u_{k-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lrs {
    coeffs: Vec<Rational>,
    init: Vec<Rational>,
}

impl Lrs {
    pub fn new(coeffs: Vec<Rational>, init: Vec<Rational>) -> Result<Lrs> {
        if coeffs.is_empty() {
            return Err(Error::InvalidLrs("order must be at least 1".into()));
        }
        if coeffs.len() != init.len() {
            return Err(Error::InvalidLrs(format!(
                "{} coefficients but {} initial values",
                coeffs.len(),
                init.len()
            )));
        }
        if coeffs.last().is_some_and(Zero::is_zero) {
            return Err(Error::InvalidLrs("last coefficient must be nonzero".into()));
        }
        Ok(Lrs { coeffs, init })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn init(&self) -> &[Rational] {
        &self.init
    }

    /// `u_0 … u_n`.
    pub fn terms(&self, n: usize) -> Vec<Rational> {
        let mut u = self.init.clone();
        while u.len() <= n {
            let next = self
                .coeffs
                .iter()
                .enumerate()
                .fold(Rational::zero(), |acc, (i, a)| acc + a * &u[u.len() - 1 - i]);
            u.push(next);
        }
        u.truncate(n + 1);
        u
    }
}

impl fmt::Display for Lrs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Rational]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        write!(
            f,
            "order={} coeffs={} init={}",
            self.order(),
            join(&self.coeffs),
            join(&self.init)
        )
    }
}

impl FromStr for Lrs {
    type Err = Error;

    /// `order=2 coeffs=1,1 init=0,1`.
    fn from_str(s: &str) -> Result<Lrs> {
        let mut order = None;
        let mut coeffs = None;
        let mut init = None;
        let list = |v: &str| -> Result<Vec<Rational>> {
            v.split(',')
                .map(|x| {
                    parse_rational(x.trim())
                        .ok_or_else(|| Error::InvalidLrs(format!("non-rational entry `{x}`")))
                })
                .collect()
        };
        for field in s.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::InvalidLrs(format!("expected key=value, found `{field}`")))?;
            match key {
                "order" => {
                    order = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| Error::InvalidLrs(format!("bad order `{value}`")))?,
                    )
                }
                "coeffs" => coeffs = Some(list(value)?),
                "init" => init = Some(list(value)?),
                other => return Err(Error::InvalidLrs(format!("unknown field `{other}`"))),
            }
        }
        let coeffs = coeffs.ok_or_else(|| Error::InvalidLrs("missing coeffs".into()))?;
        let init = init.ok_or_else(|| Error::InvalidLrs("missing init".into()))?;
        if let Some(k) = order {
            if k != coeffs.len() {
                return Err(Error::InvalidLrs(format!("order {k} but {} coefficients", coeffs.len())));
            }
        }
        Lrs::new(coeffs, init)
    }
}

pub fn lrs_eval(lrs: &Lrs, n: usize) -> Rational {
    lrs.terms(n).pop().expect("n + 1 terms")
}

/// A square matrix `A` of size `k + 2` with `u_n = (A^n)_{1,k+2}` for every
/// `n ≥ 1`.
///
/// With `C` the companion matrix and `s = (u_{k-1}, …, u_0)`, `u_n` is the
/// last entry of `Cⁿs`. The first row of `A` holds `sᵀCᵀ`, the middle block
/// is `Cᵀ` and the last column holds `Cᵀe_k`, so `(Aⁿ)_{1,k+2} = sᵀ(Cᵀ)ⁿe_k`
/// for `n ≥ 2`. The corner entry is `u_1`.
pub fn lrs_to_companion(lrs: &Lrs) -> RationalMatrix {
    let k = lrs.order();
    let mut c = RationalMatrix::zeros(k, k);
    for (j, a) in lrs.coeffs.iter().enumerate() {
        c[(0, j)] = a.clone();
    }
    for i in 1..k {
        c[(i, i - 1)] = Rational::from_integer(1.into());
    }
    let b = c.transpose();
    let seeds: Vec<Rational> = lrs.init.iter().rev().cloned().collect();
    let x = b.left_mul(&seeds).expect("square");
    let mut e_k = vec![Rational::zero(); k];
    e_k[k - 1] = Rational::from_integer(1.into());
    let y = b.right_mul(&e_k).expect("square");

    let dim = k + 2;
    let mut a = RationalMatrix::zeros(dim, dim);
    for j in 0..k {
        a[(0, j + 1)] = x[j].clone();
        a[(j + 1, dim - 1)] = y[j].clone();
        for i in 0..k {
            a[(i + 1, j + 1)] = b[(i, j)].clone();
        }
    }
    a[(0, dim - 1)] = lrs_eval(lrs, 1);
    a
}

/// `(v, A, w)` with 0/1 vectors and `u_n = vᵀAⁿw` for `n ≥ 1`, read off
/// [`lrs_to_companion`] with `v = e_1`, `w = e_last`.
pub fn lrs_to_bilinear(lrs: &Lrs) -> (Vec<Rational>, RationalMatrix, Vec<Rational>) {
    let a = lrs_to_companion(lrs);
    let dim = a.rows();
    let unit = |i: usize| -> Vec<Rational> {
        (0..dim)
            .map(|j| Rational::from_integer(i64::from(i == j).into()))
            .collect()
    };
    (unit(0), a, unit(dim - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkolemMode {
    /// Is some `u_n` zero?
    Zero,
    /// Is every `u_n` nonnegative?
    Positivity,
    /// Is every `u_n` from some index on nonnegative?
    UltimatePositivity,
}

impl FromStr for SkolemMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<SkolemMode> {
        match s {
            "zero" => Ok(SkolemMode::Zero),
            "positivity" => Ok(SkolemMode::Positivity),
            "ultimate-positivity" | "ultimate_positivity" => Ok(SkolemMode::UltimatePositivity),
            other => Err(Error::Unsupported(format!("unknown search mode `{other}`"))),
        }
    }
}

/// Scans `n = start..=bound`, `start` being 0 or 1.
///
/// * zero: the least `n` with `u_n = 0` as a witness.
/// * positivity: the least `n` with `u_n < 0` as a failure.
/// * ultimate positivity: the largest `n` with `u_n < 0` as a failure, so
///   any eventual threshold must exceed it.
///
/// Otherwise [`Verdict::NoWitnessUpTo`]: nothing was found below the bound.
pub fn skolem_search(lrs: &Lrs, mode: SkolemMode, bound: u64, from_one: bool) -> Verdict {
    let start = u64::from(from_one);
    let terms = lrs.terms(bound as usize);
    let at = |n: u64| Assignment(vec![("n".to_string(), n)]);
    let range = (start..=bound).map(|n| (n, &terms[n as usize]));
    let found = match mode {
        SkolemMode::Zero => {
            return match range.clone().find(|(_, u)| u.is_zero()) {
                Some((n, _)) => Verdict::Witness(at(n)),
                None => Verdict::NoWitnessUpTo(bound),
            }
        }
        SkolemMode::Positivity => range.clone().find(|(_, u)| u.is_negative()),
        SkolemMode::UltimatePositivity => range.clone().rev().find(|(_, u)| u.is_negative()),
    };
    match found {
        Some((n, _)) => Verdict::Fails(Some(at(n))),
        None => Verdict::NoWitnessUpTo(bound),
    }
}
