//! Dense exact-rational matrices.

use std::fmt;
use std::ops::Mul;

use num_traits::{One, Zero};

use super::Rational;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(RationalMatrix {
            rows: n,
            cols: m,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds a matrix from integer entries; convenient for fixtures.
    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sum(&self, i: usize) -> Rational {
        self.row(i).iter().fold(Rational::zero(), |acc, x| acc + x)
    }

    /// Every row sums to exactly one and every entry lies in `[0, 1]`.
    pub fn is_stochastic(&self) -> bool {
        let zero = Rational::zero();
        let one = Rational::one();
        self.entries.iter().all(|x| *x >= zero && *x <= one)
            && (0..self.rows).all(|i| self.row_sum(i) == one)
    }

    pub fn checked_mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = RationalMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![Rational::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, a) in self.row(i).iter().enumerate() {
                if !a.is_zero() {
                    out[j] += vi * a;
                }
            }
        }
        Ok(out)
    }

    /// Matrix times column vector.
    pub fn right_mul(&self, w: &[Rational]) -> Result<Vec<Rational>> {
        if w.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                w.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| dot(self.row(i), w))
            .collect())
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut out = RationalMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn scale(&self, factor: &Rational) -> RationalMatrix {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.entries[i * self.cols + j]
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;

    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        self.checked_mul(rhs).expect("matrix dimensions must agree")
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// `a^n` by repeated squaring; `a^0` is the identity.
pub fn matrix_power(a: &RationalMatrix, n: u64) -> Result<RationalMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "power of a {}x{} matrix",
            a.rows, a.cols
        )));
    }
    let mut result = RationalMatrix::identity(a.rows);
    let mut base = a.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    Ok(result)
}

/// `v · a^n · w` for a row vector `v` and column vector `w`.
pub fn bilinear_form(v: &[Rational], a: &RationalMatrix, n: u64, w: &[Rational]) -> Result<Rational> {
    if !a.is_square() || v.len() != a.rows || w.len() != a.cols {
        return Err(Error::DimensionMismatch(format!(
            "v[{}] · A[{}x{}] · w[{}]",
            v.len(),
            a.rows,
            a.cols,
            w.len()
        )));
    }
    // Iterating the row vector avoids forming the matrix power.
    let mut row = v.to_vec();
    for _ in 0..n {
        row = a.left_mul(&row)?;
    }
    Ok(dot(&row, w))
}
