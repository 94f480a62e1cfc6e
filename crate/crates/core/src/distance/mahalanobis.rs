//! Covariance estimation over gallery histograms and the pre-factored
//! Mahalanobis form.

use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::DistanceError;
use crate::histogram::Histogram;

/// Sample covariance of the bin vectors, regularized to S + eps*I with
/// eps = 1e-6 * trace(S) / n (1e-9 when the trace is zero) so the result is
/// symmetric positive-definite.
pub fn estimate_covariance(histograms: &[Histogram]) -> Result<DMatrix<f64>, DistanceError> {
    let m = histograms.len();
    if m < 2 {
        return Err(DistanceError::InsufficientData(m));
    }
    let n = histograms[0].bin_count();
    for h in histograms {
        if h.bin_count() != n {
            return Err(DistanceError::DimensionMismatch {
                left: n,
                right: h.bin_count(),
            });
        }
    }

    let data = DMatrix::from_fn(m, n, |r, c| histograms[r].bins()[c]);
    let mean = data.row_mean();
    let mut centered = data;
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let mut cov = centered.transpose() * &centered / (m - 1) as f64;

    let trace = cov.trace();
    let eps = if trace > 0.0 {
        1e-6 * trace / n as f64
    } else {
        1e-9
    };
    for i in 0..n {
        cov[(i, i)] += eps;
    }
    Ok(cov)
}

/// Cholesky-factored covariance; applies S^-1 by triangular solves instead
/// of forming an inverse.
#[derive(Clone)]
pub struct MahalanobisFactor {
    chol: Cholesky<f64, Dyn>,
    dim: usize,
}

impl MahalanobisFactor {
    pub fn from_covariance(cov: DMatrix<f64>) -> Result<Self, DistanceError> {
        let (rows, cols) = cov.shape();
        if rows != cols {
            return Err(DistanceError::DimensionMismatch {
                left: rows,
                right: cols,
            });
        }
        let max_asym = (0..rows)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| (cov[(i, j)] - cov[(j, i)]).abs())
            .fold(0.0f64, f64::max);
        if max_asym > 1e-9 {
            return Err(DistanceError::NotSymmetric);
        }
        let dim = rows;
        let chol = Cholesky::new(cov).ok_or(DistanceError::NotPositiveDefinite)?;
        Ok(Self { chol, dim })
    }

    /// Estimates the covariance from gallery histograms and factors it.
    pub fn estimate(histograms: &[Histogram]) -> Result<Self, DistanceError> {
        Self::from_covariance(estimate_covariance(histograms)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// sqrt((x - y)^T S^-1 (x - y)).
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let diff = DVector::from_iterator(self.dim, x.iter().zip(y).map(|(a, b)| a - b));
        let solved = self.chol.solve(&diff);
        diff.dot(&solved).max(0.0).sqrt()
    }
}

impl fmt::Debug for MahalanobisFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MahalanobisFactor")
            .field("dim", &self.dim)
            .finish()
    }
}
