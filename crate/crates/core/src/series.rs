//! Multivariate series container and moment estimators.
//!
//! All estimators divide by `n`, including the lagged autocovariances, so the
//! autocovariance sequence is positive semi-definite and `Γ̂(0)` coincides with
//! the sample covariance.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// `n` observations of a `p`-variate series, one row per time point.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries {
    data: Matrix,
}

impl MultivariateSeries {
    /// Wraps an `n×p` matrix after checking `n ≥ 2`, `p ≥ 1` and finiteness.
    pub fn new(data: Matrix) -> Result<Self> {
        if data.rows() < 2 || data.cols() < 1 {
            return Err(Error::TooShort {
                rows: data.rows(),
                cols: data.cols(),
            });
        }
        if let Some(pos) = data.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / data.cols(),
                col: pos % data.cols(),
            });
        }
        Ok(Self { data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.rows()
    }

    /// Always false; kept for API symmetry with `len`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.cols()
    }

    #[inline]
    pub fn observation(&self, t: usize) -> &[f64] {
        self.data.row(t)
    }

    #[inline]
    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn into_matrix(self) -> Matrix {
        self.data
    }

    /// The series with its time order reversed.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        Self {
            data: Matrix::from_fn(n, self.dim(), |t, j| self.data[(n - 1 - t, j)]),
        }
    }

    /// Observations minus the sample mean, row-major `n×p`.
    pub fn centered(&self) -> Matrix {
        let mean = sample_mean(self);
        let mut out = self.data.clone();
        for t in 0..out.rows() {
            for (v, m) in out.row_mut(t).iter_mut().zip(&mean) {
                *v -= m;
            }
        }
        out
    }
}

/// Lagged sample autocovariances `Γ̂(0..=max_lag)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovarianceSequence {
    matrices: Vec<Matrix>,
}

impl AutocovarianceSequence {
    pub fn compute(series: &MultivariateSeries, max_lag: usize) -> Result<Self> {
        let n = series.len();
        if max_lag > n - 1 {
            return Err(Error::LagOutOfRange {
                lag: max_lag,
                max: n - 1,
            });
        }
        let centered = series.centered();
        let matrices = (0..=max_lag).map(|s| lagged_cross_product(&centered, s)).collect();
        Ok(Self { matrices })
    }

    pub fn max_lag(&self) -> usize {
        self.matrices.len() - 1
    }

    /// `Γ̂(s)`; negative lags go through `Γ̂(-s) = Γ̂(s)ᵀ`.
    pub fn at(&self, lag: isize) -> Option<Matrix> {
        let s = lag.unsigned_abs();
        let m = self.matrices.get(s)?;
        Some(if lag < 0 { m.transpose() } else { m.clone() })
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }
}

pub fn sample_mean(series: &MultivariateSeries) -> Vec<f64> {
    let n = series.len();
    let mut mean = vec![0.0; series.dim()];
    for t in 0..n {
        for (m, v) in mean.iter_mut().zip(series.observation(t)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    mean
}

/// `C_n = (1/n) Σ (X(t) − X̄)(X(t) − X̄)ᵀ`.
pub fn sample_covariance(series: &MultivariateSeries) -> Matrix {
    lagged_cross_product(&series.centered(), 0)
}

/// `Γ̂(s) = (1/n) Σ_{t=1}^{n−s} (X(t+s) − X̄)(X(t) − X̄)ᵀ`.
pub fn sample_autocovariance(series: &MultivariateSeries, lag: usize) -> Result<Matrix> {
    let n = series.len();
    if lag > n - 1 {
        return Err(Error::LagOutOfRange { lag, max: n - 1 });
    }
    Ok(lagged_cross_product(&series.centered(), lag))
}

fn lagged_cross_product(centered: &Matrix, lag: usize) -> Matrix {
    let n = centered.rows();
    let p = centered.cols();
    let mut acc = Matrix::zeros(p, p);
    for t in 0..(n - lag) {
        let lead = centered.row(t + lag);
        let base = centered.row(t);
        for (i, &a) in lead.iter().enumerate() {
            let row = acc.row_mut(i);
            for (r, &b) in row.iter_mut().zip(base) {
                *r += a * b;
            }
        }
    }
    let mut out = acc.scale(1.0 / n as f64);
    if lag == 0 {
        // Exact symmetry for Γ̂(0); roundoff can otherwise differ in the last bit.
        out = out.symmetrized();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{draw_standard_normals, stream_rng};
    use crate::eigen::eigendecompose;

    fn three_rows() -> MultivariateSeries {
        MultivariateSeries::from_rows(&[[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]).unwrap()
    }

    fn white_noise(n: usize, p: usize, seed: u64) -> MultivariateSeries {
        let mut rng = stream_rng(seed, 0);
        MultivariateSeries::new(draw_standard_normals(&mut rng, n, p)).unwrap()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(sample_mean(&three_rows()), vec![0.0, 0.0]);
        let c = MultivariateSeries::from_rows(&[[2.5, -1.0]; 4]).unwrap();
        assert_eq!(sample_mean(&c), vec![2.5, -1.0]);
        let two = MultivariateSeries::from_rows(&[[2.0, 4.0], [4.0, 8.0]]).unwrap();
        assert_eq!(sample_mean(&two), vec![3.0, 6.0]);
    }

    #[test]
    fn covariance_hand_computation() {
        let c = sample_covariance(&three_rows());
        let expected = [2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0];
        for (a, b) in c.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_series_has_zero_covariance() {
        let c = MultivariateSeries::from_rows(&[[3.0, 1.0, -2.0]; 10]).unwrap();
        assert_eq!(sample_covariance(&c).max_abs(), 0.0);
    }

    #[test]
    fn rejects_non_finite_and_short_input() {
        let nan = Matrix::from_rows(&[[1.0, 2.0], [f64::NAN, 0.0]]).unwrap();
        assert_eq!(
            MultivariateSeries::new(nan),
            Err(Error::NonFinite { row: 1, col: 0 })
        );
        let one = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(matches!(
            MultivariateSeries::new(one),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn white_noise_covariance_near_identity() {
        let x = white_noise(5000, 5, 11);
        let c = sample_covariance(&x);
        let id = Matrix::identity(5);
        assert!(c.sub(&id).unwrap().max_abs() < 0.1);
        let g1 = sample_autocovariance(&x, 1).unwrap();
        assert!(g1.max_abs() < 0.1);
    }

    #[test]
    fn lag_zero_is_covariance_and_last_lag_is_single_term() {
        let x = white_noise(50, 3, 3);
        assert_eq!(sample_autocovariance(&x, 0).unwrap(), sample_covariance(&x));

        let n = x.len();
        let centered = x.centered();
        let last = sample_autocovariance(&x, n - 1).unwrap();
        let expected = Matrix::from_fn(3, 3, |i, j| {
            centered[(n - 1, i)] * centered[(0, j)] / n as f64
        });
        assert!(last.sub(&expected).unwrap().max_abs() < 1e-15);
        assert!(matches!(
            sample_autocovariance(&x, n),
            Err(Error::LagOutOfRange { .. })
        ));
    }

    #[test]
    fn time_reversal_transposes_autocovariance() {
        let x = white_noise(200, 4, 5);
        let rev = x.reversed();
        for s in [1, 2, 7, 199] {
            let fwd = sample_autocovariance(&x, s).unwrap();
            let bwd = sample_autocovariance(&rev, s).unwrap();
            assert!(bwd.sub(&fwd.transpose()).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn covariance_is_psd_and_shift_invariant() {
        for seed in 0..20 {
            let x = white_noise(30, 6, seed);
            let c = sample_covariance(&x);
            let d = eigendecompose(&c).unwrap();
            assert!(*d.values().last().unwrap() >= -1e-10 * c.trace());

            let shifted = Matrix::from_fn(30, 6, |t, j| x.data()[(t, j)] + 100.0 * (j as f64 + 1.0));
            let cs = sample_covariance(&MultivariateSeries::new(shifted).unwrap());
            assert!(cs.sub(&c).unwrap().max_abs() <= 1e-10 * c.max_abs().max(1.0));
        }
    }

    #[test]
    fn autocovariance_sequence_negative_lags() {
        let x = white_noise(40, 2, 9);
        let seq = AutocovarianceSequence::compute(&x, 5).unwrap();
        assert_eq!(seq.max_lag(), 5);
        assert_eq!(seq.at(-3).unwrap(), seq.at(3).unwrap().transpose());
        assert!(seq.at(6).is_none());
        assert!(AutocovarianceSequence::compute(&x, 40).is_err());
    }
}
