use std::fmt;

use num_traits::{One, Zero};

use super::Rational;
use crate::error::{Error, Result};

/// Dense row-major matrix over Q.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

#[derive(Clone, Debug)]
pub struct Rref {
    pub rank: usize,
    pub reduced: RationalMatrix,
    pub pivots: Vec<usize>,
    pub nullspace: Vec<Vec<Rational>>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        Ok(Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<Rational>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().cloned().collect(),
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        let rows: Vec<Vec<Rational>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| super::int(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    pub fn rref(&self) -> Rref {
        let (rows, cols) = (self.rows, self.cols);
        let mut m = self.to_rows();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for col in 0..cols {
            if lead == rows {
                break;
            }
            let Some(p) = (lead..rows).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(lead, p);
            let inv = m[lead][col].recip();
            for x in m[lead].iter_mut() {
                *x = &*x * &inv;
            }
            let pivot_row = m[lead].clone();
            for (r, row) in m.iter_mut().enumerate() {
                if r == lead || row[col].is_zero() {
                    continue;
                }
                let factor = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x = &*x - &factor * y;
                    }
                }
            }
            pivots.push(col);
            lead += 1;
        }
        let rank = pivots.len();
        let nullspace = (0..cols)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![Rational::zero(); cols];
                v[free] = Rational::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -m[r][free].clone();
                }
                v
            })
            .collect();
        Rref {
            rank,
            reduced: RationalMatrix {
                rows,
                cols,
                data: m.into_iter().flatten().collect(),
            },
            pivots,
            nullspace,
        }
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(super::fmt_rational).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn is_rref(m: &RationalMatrix, pivots: &[usize]) -> bool {
        for (r, &pc) in pivots.iter().enumerate() {
            if !m.get(r, pc).is_one() {
                return false;
            }
            if (0..pc).any(|c| !m.get(r, c).is_zero()) {
                return false;
            }
            if (0..m.rows()).any(|o| o != r && !m.get(o, pc).is_zero()) {
                return false;
            }
        }
        (pivots.len()..m.rows()).all(|r| m.row(r).iter().all(Zero::is_zero))
            && pivots.windows(2).all(|w| w[0] < w[1])
    }

    #[test]
    fn identity_has_full_rank() {
        let r = RationalMatrix::identity(2).unwrap().rref();
        assert_eq!(r.rank, 2);
        assert!(r.nullspace.is_empty());
    }

    #[test]
    fn three_lines_rank_two() {
        let m = RationalMatrix::from_i64(&[&[1, 0], &[1, 1], &[1, -1]]).unwrap();
        let r = m.rref();
        assert_eq!(r.rank, 2);
        assert!(is_rref(&r.reduced, &r.pivots));
    }

    #[test]
    fn zero_matrix_nullspace_is_standard_basis() {
        let r = RationalMatrix::zeros(3, 3).unwrap().rref();
        assert_eq!(r.rank, 0);
        let expected: Vec<Vec<Rational>> = (0..3)
            .map(|i| (0..3).map(|j| int((i == j) as i64)).collect())
            .collect();
        assert_eq!(r.nullspace, expected);
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(
            RationalMatrix::zeros(0, 2),
            Err(Error::EmptyMatrix)
        ));
        assert!(RationalMatrix::from_rows(&[]).is_err());
    }

    #[test]
    fn nullspace_is_annihilated() {
        let m = RationalMatrix::from_i64(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, -1, 2]]).unwrap();
        let r = m.rref();
        assert_eq!(r.rank + r.nullspace.len(), 4);
        for v in &r.nullspace {
            assert!(m.mul_vec(v).iter().all(Zero::is_zero));
        }
    }
}
