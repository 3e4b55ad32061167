//! Dense rational vectors and matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type RVector = Vec<Rational>;

pub fn zeros(n: usize) -> RVector {
    vec![Rational::zero(); n]
}

pub fn unit(n: usize, i: usize) -> RVector {
    let mut v = zeros(n);
    v[i] = Rational::one();
    v
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn add(a: &[Rational], b: &[Rational]) -> RVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> RVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rational], s: &Rational) -> RVector {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[Rational], s: &Rational, b: &[Rational]) -> RVector {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn neg(a: &[Rational]) -> RVector {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero_vec(a: &[Rational]) -> bool {
    a.iter().all(Rational::is_zero)
}

pub fn norm_l1(a: &[Rational]) -> Rational {
    a.iter().map(Rational::abs).sum()
}

pub fn norm_linf(a: &[Rational]) -> Rational {
    a.iter().map(Rational::abs).max().unwrap_or_else(Rational::zero)
}

pub fn norm_l2_squared(a: &[Rational]) -> Rational {
    dot(a, a)
}

pub fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Row-major dense matrix with immutable shape.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Rational>>", into = "Vec<Vec<Rational>>")]
pub struct RMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows; all rows must share a length. An empty row
    /// list yields a `0 x cols` matrix, so the column count is passed as well.
    pub fn from_rows(rows: Vec<RVector>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            check_dim(cols, r.len())?;
            data.extend(r);
        }
        Ok(RMatrix { rows: n, cols, data })
    }

    pub fn from_cols(cols: &[RVector], rows: usize) -> Result<Self> {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            check_dim(rows, c.len())?;
            for (i, v) in c.iter().enumerate() {
                m.data[i * cols.len() + j] = v.clone();
            }
        }
        Ok(m)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn col(&self, j: usize) -> RVector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<RVector> {
        self.rows().map(<[Rational]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Rational]) -> RVector {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        self.rows().map(|r| dot(r, x)).collect()
    }

    /// `xᵀ M`
    pub fn vec_mul(&self, y: &[Rational]) -> RVector {
        assert_eq!(y.len(), self.rows, "dimension mismatch");
        let mut out = zeros(self.cols);
        for (i, yi) in y.iter().enumerate() {
            if yi.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                if !a.is_zero() {
                    *o += yi * a;
                }
            }
        }
        out
    }

    pub fn push_row(&mut self, row: RVector) -> Result<()> {
        check_dim(self.cols, row.len())?;
        self.data.extend(row);
        self.rows += 1;
        Ok(())
    }
}

impl TryFrom<Vec<Vec<Rational>>> for RMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        RMatrix::from_rows(rows, cols)
    }
}

impl From<RMatrix> for Vec<Vec<Rational>> {
    fn from(m: RMatrix) -> Self {
        m.to_rows()
    }
}

/// Scales a rational row to a primitive integer row with the same direction.
pub fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(&x.denom()));
    row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
}

/// Exact rank by fraction-free (Bareiss) elimination on integer-scaled rows.
pub fn matrix_rank(m: &RMatrix) -> usize {
    let mut a: Vec<Vec<BigInt>> = m.rows().map(integer_row).collect();
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for j in c + 1..cols {
                let v = (&a[rank][c] * &a[r][j] - &a[r][c] * &a[rank][j]) / &prev;
                a[r][j] = v;
            }
            a[r][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
    }
    rank
}

/// Solves the square system `m x = rhs` exactly; `None` if singular.
pub fn solve(m: &RMatrix, rhs: &[Rational]) -> Option<RVector> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    assert_eq!(n, rhs.len());
    let mut a: Vec<RVector> = m.to_rows();
    let mut b = rhs.to_vec();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        b.swap(c, p);
        let inv = a[c][c].recip();
        for r in 0..n {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] * &inv;
            for j in c..n {
                let v = &a[c][j] * &f;
                a[r][j] -= v;
            }
            let v = &b[c] * &f;
            b[r] -= v;
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn mat(rows: &[&[i64]]) -> RMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        RMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| qi(v)).collect()).collect(), cols)
            .unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(matrix_rank(&RMatrix::identity(3)), 3);
        assert_eq!(matrix_rank(&RMatrix::zeros(3, 4)), 0);
        assert_eq!(matrix_rank(&mat(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(matrix_rank(&mat(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]])), 2);
        assert_eq!(matrix_rank(&mat(&[&[0, 1], &[1, 0], &[1, 1]])), 2);
        assert_eq!(matrix_rank(&RMatrix::zeros(0, 3)), 0);
    }

    #[test]
    fn rank_with_fractions() {
        let m = RMatrix::from_rows(vec![vec![q(1, 2), q(1, 3)], vec![q(3, 2), qi(1)]], 2).unwrap();
        assert_eq!(matrix_rank(&m), 1);
    }

    #[test]
    fn solve_small_system() {
        let m = mat(&[&[2, 1], &[1, 3]]);
        let x = solve(&m, &[qi(3), qi(5)]).unwrap();
        assert_eq!(x, vec![q(4, 5), q(7, 5)]);
        assert!(solve(&mat(&[&[1, 2], &[2, 4]]), &[qi(1), qi(2)]).is_none());
    }

    #[test]
    fn ragged_rows_rejected() {
        let r: std::result::Result<RMatrix, _> = serde_json::from_str(r#"[["1","2"],["3"]]"#);
        assert!(r.is_err());
    }
}
