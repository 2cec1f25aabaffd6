//! Small dense least squares through a thin Householder QR factorization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative threshold on `|R_jj| / |a_j|` below which column `j` is taken
/// to lie in the span of the preceding columns.
const RANK_TOL: f64 = 1e-10;

pub(crate) struct ThinQr {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl ThinQr {
    pub(crate) fn new(design: DMatrix<f64>) -> Result<Self> {
        let (n, k) = design.shape();
        if n < k {
            return Err(Error::RankDeficient(format!(
                "{k} columns but only {n} rows"
            )));
        }
        let norms: Vec<f64> = design.column_iter().map(|c| c.norm()).collect();
        let qr = design.qr();
        let r = qr.r();
        for (j, &norm) in norms.iter().enumerate() {
            if norm == 0.0 || r[(j, j)].abs() <= RANK_TOL * norm {
                return Err(Error::RankDeficient(format!(
                    "column {j} is (numerically) a combination of the preceding columns"
                )));
            }
        }
        Ok(Self { q: qr.q(), r })
    }

    /// Orthogonal projection of `v` onto the column space.
    pub(crate) fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.q * (self.q.transpose() * v)
    }

    pub(crate) fn solve(&self, y: &DVector<f64>) -> DVector<f64> {
        let rhs = self.q.transpose() * y;
        self.r
            .solve_upper_triangular(&rhs)
            .expect("R has a nonzero diagonal after the rank check")
    }
}

/// `[1 | columns...]` as an `n x (1 + p)` matrix.
pub(crate) fn with_intercept(n: usize, columns: &[&[f64]]) -> DMatrix<f64> {
    let mut m = DMatrix::from_element(n, columns.len() + 1, 1.0);
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            m[(i, j + 1)] = v;
        }
    }
    m
}
