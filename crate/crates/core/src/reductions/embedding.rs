//! Sign-preserving embedding of a matrix entry sequence into a stochastic
//! bilinear form.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::markov::{bilinear_form, Rational, RationalMatrix};

/// `B`, `v`, `w`, `c` with `vᵀBⁿw = c + εⁿ·(Aⁿ)_{1k}` for all `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticEmbedding {
    pub b: RationalMatrix,
    pub v: Vec<Rational>,
    pub w: Vec<Rational>,
    pub c: Rational,
    pub epsilon: Rational,
}

impl StochasticEmbedding {
    pub fn value(&self, n: u64) -> Result<Rational> {
        bilinear_form(&self.v, &self.b, n, &self.w)
    }

    /// `(Aⁿ)_{1k}` recovered from `vᵀBⁿw`.
    pub fn recover(&self, n: u64) -> Result<Rational> {
        let scale = (0..n).fold(Rational::one(), |acc, _| acc * &self.epsilon);
        Ok((self.value(n)? - &self.c) / scale)
    }
}

/// Builds the embedding for a square matrix `A` of size `k`.
///
/// `M` extends `A` by a row `q` and a column `p`: the column takes minus
/// each row sum of `A`, the row takes minus each column sum, and their
/// crossing takes the total. Every row and column of `M` then sums to zero
/// and no path leaves `p` or enters `q`, so the `A` block of `Mⁿ` is `Aⁿ`.
/// With `J` the all-ones matrix, `B = J/k' + εM` satisfies
/// `Bⁿ = J/k' + εⁿMⁿ`, and `ε` is small enough to keep `B` nonnegative.
/// The order is `q, p, A`, so `v` picks the first row of `A` and `w` is the
/// last unit vector.
pub fn stochastic_embedding(a: &RationalMatrix) -> Result<StochasticEmbedding> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "expected a nonempty square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let k = a.rows();
    let dim = k + 2;
    let (q, p, off) = (0, 1, 2);
    let mut m = RationalMatrix::zeros(dim, dim);
    let mut total = Rational::zero();
    for i in 0..k {
        let mut row = Rational::zero();
        for j in 0..k {
            m[(off + i, off + j)] = a[(i, j)].clone();
            row += &a[(i, j)];
            m[(q, off + j)] -= &a[(i, j)];
        }
        m[(off + i, p)] = -row.clone();
        total += row;
    }
    m[(q, p)] = total;

    let largest = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|ix| m[ix].abs())
        .fold(Rational::zero(), |acc, x| if x > acc { x } else { acc });
    let size = Rational::from_integer((dim as i64).into());
    let epsilon = if largest.is_zero() {
        Rational::one()
    } else {
        Rational::one() / (&size * largest)
    };
    let uniform = Rational::one() / &size;
    let mut b = RationalMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            b[(i, j)] = &uniform + &epsilon * &m[(i, j)];
        }
    }
    let unit = |i: usize| -> Vec<Rational> {
        (0..dim)
            .map(|j| if i == j { Rational::one() } else { Rational::zero() })
            .collect()
    };
    Ok(StochasticEmbedding {
        b,
        v: unit(off),
        w: unit(dim - 1),
        c: uniform,
        epsilon,
    })
}
