//! Minimal exact linear algebra over `Q`: Gaussian elimination for solving
//! square systems, rank computation, and matrix inversion. Sizes here are
//! tiny (basis-squared at most), so asymptotics are irrelevant; exactness is
//! everything.

use crate::rational::Q;
use num_traits::{One, Zero};

/// Dense matrix as rows of equal length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<Q>>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![vec![Q::zero(); cols]; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::new(n, n);
        for i in 0..n {
            m.data[i][i] = Q::one();
        }
        m
    }

    pub fn from_rows(data: Vec<Vec<Q>>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, Vec::len);
        assert!(data.iter().all(|r| r.len() == cols), "ragged matrix");
        Mat { rows, cols, data }
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Mat::new(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.data[i][k].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = &self.data[i][k] * &other.data[k][j];
                    out.data[i][j] += prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        self.data
            .iter()
            .map(|row| {
                let mut acc = Q::zero();
                for (a, b) in row.iter().zip(v) {
                    acc += a * b;
                }
                acc
            })
            .collect()
    }

    /// Row-echelon rank (exact).
    pub fn rank(&self) -> usize {
        let mut m = self.data.clone();
        let mut rank = 0;
        let mut col = 0;
        while rank < self.rows && col < self.cols {
            let pivot = (rank..self.rows).find(|&r| !m[r][col].is_zero());
            let Some(p) = pivot else {
                col += 1;
                continue;
            };
            m.swap(rank, p);
            let inv = m[rank][col].recip();
            for j in col..self.cols {
                m[rank][j] = &m[rank][j] * &inv;
            }
            for r in 0..self.rows {
                if r != rank && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for j in col..self.cols {
                        let sub = &f * &m[rank][j];
                        m[r][j] -= sub;
                    }
                }
            }
            rank += 1;
            col += 1;
        }
        rank
    }

    /// Solve `self * x = b` for square nonsingular `self`; `None` if singular.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(self.rows, self.cols, "solve requires a square matrix");
        assert_eq!(self.rows, b.len(), "dimension mismatch");
        let n = self.rows;
        let mut m = self.data.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
            m.swap(col, pivot);
            rhs.swap(col, pivot);
            let inv = m[col][col].recip();
            for j in col..n {
                m[col][j] = &m[col][j] * &inv;
            }
            rhs[col] = &rhs[col] * &inv;
            for r in 0..n {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for j in col..n {
                        let sub = &f * &m[col][j];
                        m[r][j] -= sub;
                    }
                    let sub = &f * &rhs[col];
                    rhs[r] -= sub;
                }
            }
        }
        Some(rhs)
    }

    /// Exact inverse; `None` if singular.
    pub fn inverse(&self) -> Option<Mat> {
        assert_eq!(self.rows, self.cols, "inverse requires a square matrix");
        let n = self.rows;
        let mut m = self.data.clone();
        let mut inv = Mat::identity(n).data;
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
            m.swap(col, pivot);
            inv.swap(col, pivot);
            let d = m[col][col].recip();
            for j in 0..n {
                m[col][j] = &m[col][j] * &d;
                inv[col][j] = &inv[col][j] * &d;
            }
            for r in 0..n {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for j in 0..n {
                        let s1 = &f * &m[col][j];
                        m[r][j] -= s1;
                        let s2 = &f * &inv[col][j];
                        inv[r][j] -= s2;
                    }
                }
            }
        }
        Some(Mat::from_rows(inv))
    }
}
