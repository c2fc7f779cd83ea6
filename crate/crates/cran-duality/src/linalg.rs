//! Small dense linear algebra: a square real matrix type plus Gaussian
//! elimination solvers for the real and complex systems that appear in the
//! duality transform and the MMSE receiver computation.
//!
//! Everything here targets desk-scale problems (dimensions up to a few
//! hundred); all solves are direct with partial pivoting.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense square matrix of `f64`, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Build from nested rows; every row must have the same length as the
    /// number of rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "SquareMatrix::from_rows",
                    expected: n,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn transposed(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .map(|x| x.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_nonnegative_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite() && *x >= 0.0)
    }
}

/// Solve `a * x = rhs` by Gaussian elimination with partial pivoting.
pub(crate) fn solve_real(a: &SquareMatrix, rhs: &[f64], context: &'static str) -> Result<Vec<f64>> {
    let n = a.n();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            context,
            expected: n,
            actual: rhs.len(),
        });
    }
    let mut m = a.data.clone();
    let mut b = rhs.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1.0);

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = m[col * n + col].abs();
        for row in col + 1..n {
            let mag = m[row * n + col].abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = row;
            }
        }
        if pivot_mag <= scale * 1e-300 {
            return Err(Error::SingularSystem { context });
        }
        if pivot_row != col {
            for j in 0..n {
                m.swap(col * n + j, pivot_row * n + j);
            }
            b.swap(col, pivot_row);
        }
        let pivot = m[col * n + col];
        for row in col + 1..n {
            let factor = m[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            m[row * n + col] = 0.0;
            for j in col + 1..n {
                m[row * n + j] -= factor * m[col * n + j];
            }
            b[row] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in row + 1..n {
            acc -= m[row * n + j] * x[j];
        }
        x[row] = acc / m[row * n + row];
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { context: "solve_real" });
    }
    Ok(x)
}

/// Solve a dense complex system `a * x = rhs` (row-major `n x n`) by Gaussian
/// elimination with partial pivoting on entry magnitudes.
pub(crate) fn solve_complex(
    n: usize,
    a: &[Complex64],
    rhs: &[Complex64],
    context: &'static str,
) -> Result<Vec<Complex64>> {
    debug_assert_eq!(a.len(), n * n);
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            context,
            expected: n,
            actual: rhs.len(),
        });
    }
    let mut m = a.to_vec();
    let mut b = rhs.to_vec();
    let scale = m
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.norm_sqr()))
        .max(1.0);

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = m[col * n + col].norm_sqr();
        for row in col + 1..n {
            let mag = m[row * n + col].norm_sqr();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = row;
            }
        }
        if pivot_mag <= scale * 1e-300 {
            return Err(Error::SingularSystem { context });
        }
        if pivot_row != col {
            for j in 0..n {
                m.swap(col * n + j, pivot_row * n + j);
            }
            b.swap(col, pivot_row);
        }
        let pivot = m[col * n + col];
        for row in col + 1..n {
            let factor = m[row * n + col] / pivot;
            if factor == Complex64::ZERO {
                continue;
            }
            m[row * n + col] = Complex64::ZERO;
            for j in col + 1..n {
                let sub = factor * m[col * n + j];
                m[row * n + j] -= sub;
            }
            let sub = factor * b[col];
            b[row] -= sub;
        }
    }

    let mut x = vec![Complex64::ZERO; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in row + 1..n {
            acc -= m[row * n + j] * x[j];
        }
        x[row] = acc / m[row * n + row];
    }
    if !x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::NonFinite { context: "solve_complex" });
    }
    Ok(x)
}

/// Hermitian inner product `a^H b`.
#[inline]
pub(crate) fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Squared Euclidean norm of a complex vector.
#[inline]
pub(crate) fn cnorm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}
