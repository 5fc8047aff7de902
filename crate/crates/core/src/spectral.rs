//! Spectral density matrices on a periodic grid of Fourier frequencies.
//!
//! A grid of length `len` holds the frequencies `ω_j = 2πj/len` for
//! `j = −⌊(len−1)/2⌋ ..= ⌊len/2⌋` in ascending order: exactly one period, with
//! `−π` and `π` identified. The trapezoidal rule on `[−π, π]` with that
//! identification reduces to `(2π/len)·Σ_j`, which is what [`SpectralDensityEstimate::integrate`]
//! computes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul};

use num_complex::Complex64;

use crate::dgp::{DgpSpec, ModelKind};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Matrix};
use crate::series::{AutocovarianceSequence, MultivariateSeries};

/// Grid length used for model-implied spectra.
pub const MODEL_GRID_SIZE: usize = 4096;
/// Tolerance on `‖BᵀB − I‖` accepted by [`rotate_spectrum`].
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Raw,
    Smoothed,
    Rotated,
    Model,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensityEstimate {
    kind: SpectrumKind,
    dim: usize,
    matrices: Vec<CMatrix>,
}

/// `h(ω)` or `q(ω) = Φᵀh(ω)` at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferEvaluation {
    pub frequency: f64,
    pub matrix: CMatrix,
}

/// Lowest Fourier index stored on a grid of `len` points.
#[inline]
fn lowest_index(len: usize) -> isize {
    -(((len - 1) / 2) as isize)
}

/// Frequencies `2πj/len` of the periodic grid, ascending.
pub fn fourier_grid(len: usize) -> Vec<f64> {
    let lo = lowest_index(len);
    (0..len)
        .map(|i| 2.0 * PI * (lo + i as isize) as f64 / len as f64)
        .collect()
}

impl SpectralDensityEstimate {
    /// Wraps per-frequency matrices laid out on the periodic Fourier grid.
    pub fn from_matrices(kind: SpectrumKind, matrices: Vec<CMatrix>) -> Result<Self> {
        let dim = matrices.first().map(|m| m.rows()).unwrap_or(0);
        if matrices.is_empty() || dim == 0 {
            return Err(Error::InvalidParameter("empty spectrum"));
        }
        if matrices.iter().any(|m| m.rows() != dim || m.cols() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrices.iter().map(|m| m.cols()).find(|&c| c != dim).unwrap_or(0),
            });
        }
        Ok(Self { kind, dim, matrices })
    }

    /// Constant spectrum `value` on a grid of `len` points.
    pub fn constant(kind: SpectrumKind, value: &CMatrix, len: usize) -> Self {
        Self {
            kind,
            dim: value.rows(),
            matrices: vec![value.clone(); len],
        }
    }

    #[inline]
    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn grid_len(&self) -> usize {
        self.matrices.len()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        fourier_grid(self.grid_len())
    }

    /// Fourier index `j` of storage slot `i`.
    pub fn fourier_index(&self, i: usize) -> isize {
        lowest_index(self.grid_len()) + i as isize
    }

    /// Storage slot holding Fourier index `j` (taken modulo the grid length).
    pub fn slot_of(&self, j: isize) -> usize {
        let len = self.grid_len() as isize;
        (j - lowest_index(self.grid_len())).rem_euclid(len) as usize
    }

    #[inline]
    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    #[inline]
    pub fn at(&self, i: usize) -> &CMatrix {
        &self.matrices[i]
    }

    /// One entry across the grid.
    pub fn entry_series(&self, a: usize, b: usize) -> Vec<Complex64> {
        self.matrices.iter().map(|m| m[(a, b)]).collect()
    }

    /// `∫_{−π}^{π} f(ω) dω` by the periodic trapezoidal rule.
    pub fn integrate(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for m in &self.matrices {
            acc.add_assign(m);
        }
        acc.scale(2.0 * PI / self.grid_len() as f64)
    }

    /// Largest violation of the three structural invariants: Hermitian
    /// matrices, `f(−ω) = conj f(ω)`, and nonnegative real diagonals.
    pub fn invariant_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, m) in self.matrices.iter().enumerate() {
            worst = worst.max(m.hermitian_error());
            let mirror = self.slot_of(-self.fourier_index(i));
            worst = worst.max(m.max_abs_diff(&self.matrices[mirror].conj()));
            for a in 0..self.dim {
                worst = worst.max(m[(a, a)].im.abs());
                worst = worst.max(-m[(a, a)].re);
            }
        }
        worst
    }
}

/// Quadrature weights for a uniform grid over `[−π, π]`.
///
/// Two layouts are accepted: a closed grid whose first and last points are
/// `−π` and `π` (trapezoid with half end weights), or a periodic grid of the
/// form `2πj/len` covering one period (all weights `2π/len`).
pub fn quadrature_weights(frequencies: &[f64]) -> Result<Vec<f64>> {
    let len = frequencies.len();
    if len < 2 {
        return Err(Error::NonUniformGrid);
    }
    let h = frequencies[1] - frequencies[0];
    if !(h > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    let tol = 1e-9 * h.max(1e-3);
    for w in frequencies.windows(2) {
        if ((w[1] - w[0]) - h).abs() > tol {
            return Err(Error::NonUniformGrid);
        }
    }
    let first = frequencies[0];
    let last = frequencies[len - 1];
    if (first + PI).abs() <= 1e-9 && (last - PI).abs() <= 1e-9 {
        let h = 2.0 * PI / (len - 1) as f64;
        let mut w = vec![h; len];
        w[0] = 0.5 * h;
        w[len - 1] = 0.5 * h;
        return Ok(w);
    }
    let period = 2.0 * PI / len as f64;
    let on_lattice = frequencies.iter().all(|&f| {
        let j = f / period;
        (j - libm::round(j)).abs() < 1e-7
    });
    if (h - period).abs() <= 1e-9 * period && on_lattice && first >= -PI - 1e-9 && last <= PI + 1e-9 {
        return Ok(vec![period; len]);
    }
    Err(Error::NonUniformGrid)
}

/// Trapezoidal `∫_{−π}^{π}` of values sampled on a uniform grid.
pub fn integrate_over_frequency<T>(frequencies: &[f64], values: &[T]) -> Result<T>
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
{
    if frequencies.len() != values.len() {
        return Err(Error::GridMismatch {
            expected: frequencies.len(),
            found: values.len(),
        });
    }
    let weights = quadrature_weights(frequencies)?;
    Ok(values
        .iter()
        .zip(&weights)
        .fold(T::default(), |acc, (&v, &w)| acc + v * w))
}

/// Raw periodogram `f̃(ω) = (2π)⁻¹ Σ_{|s|≤L} e^{−isω} Γ̂(s)` on the `n`-point
/// Fourier grid, with lags beyond `max_lag` set to zero.
///
/// The full-lag case (`max_lag = n − 1`) is evaluated through the discrete
/// Fourier transform `f̃(ω_j) = d(ω_j) d(ω_j)* / (2πn)`, which equals the lag
/// sum exactly at Fourier frequencies.
pub fn raw_periodogram(series: &MultivariateSeries, max_lag: usize) -> Result<SpectralDensityEstimate> {
    let n = series.len();
    if max_lag < 1 || max_lag > n - 1 {
        return Err(Error::LagOutOfRange { lag: max_lag, max: n - 1 });
    }
    if max_lag == n - 1 {
        Ok(periodogram_by_dft(series))
    } else {
        periodogram_by_lags(series, max_lag)
    }
}

/// Lag-sum evaluation of the raw periodogram for any `max_lag`.
pub fn periodogram_by_lags(series: &MultivariateSeries, max_lag: usize) -> Result<SpectralDensityEstimate> {
    let n = series.len();
    let p = series.dim();
    let acv = AutocovarianceSequence::compute(series, max_lag)?;
    let lags = acv.matrices();
    let lo = lowest_index(n);
    let matrices = (0..n)
        .map(|i| {
            let omega = 2.0 * PI * (lo + i as isize) as f64 / n as f64;
            let mut f = lags[0].to_complex();
            for (s, gamma) in lags.iter().enumerate().skip(1) {
                let phase = Complex64::new(libm::cos(s as f64 * omega), -libm::sin(s as f64 * omega));
                for a in 0..p {
                    for b in 0..p {
                        f[(a, b)] += phase * gamma[(a, b)] + phase.conj() * gamma[(b, a)];
                    }
                }
            }
            let mut f = f.scale(1.0 / (2.0 * PI));
            f.make_hermitian();
            f
        })
        .collect();
    Ok(SpectralDensityEstimate {
        kind: SpectrumKind::Raw,
        dim: p,
        matrices,
    })
}

fn periodogram_by_dft(series: &MultivariateSeries) -> SpectralDensityEstimate {
    let n = series.len();
    let p = series.dim();
    let x = series.centered();
    let twiddle: Vec<Complex64> = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            Complex64::new(libm::cos(a), -libm::sin(a))
        })
        .collect();
    let norm = 1.0 / (2.0 * PI * n as f64);
    let half = n / 2;
    let mut positive: Vec<CMatrix> = Vec::with_capacity(half + 1);
    let mut d = vec![Complex64::new(0.0, 0.0); p];
    for j in 0..=half {
        d.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let mut idx = 0usize;
        for t in 0..n {
            let w = twiddle[idx];
            for (acc, &xv) in d.iter_mut().zip(x.row(t)) {
                *acc += w * xv;
            }
            idx += j;
            if idx >= n {
                idx -= n;
            }
        }
        let mut f = CMatrix::from_fn(p, p, |a, b| d[a] * d[b].conj() * norm);
        f.make_hermitian();
        positive.push(f);
    }
    let lo = lowest_index(n);
    let matrices = (0..n)
        .map(|i| {
            let j = lo + i as isize;
            if j >= 0 {
                positive[j as usize].clone()
            } else {
                positive[(-j) as usize].conj()
            }
        })
        .collect();
    SpectralDensityEstimate {
        kind: SpectrumKind::Raw,
        dim: p,
        matrices,
    }
}

/// Daniell-smoothed periodogram: each ordinate is the flat average of the
/// `2M+1` neighbouring Fourier ordinates, wrapping around at `±π`.
pub fn daniell_smooth(raw: &SpectralDensityEstimate, bandwidth: usize) -> Result<SpectralDensityEstimate> {
    let len = raw.grid_len();
    let max = (len - 1) / 2;
    if bandwidth < 1 || bandwidth > max {
        return Err(Error::BandwidthOutOfRange { bandwidth, max });
    }
    let p = raw.dim;
    let weight = 1.0 / (2 * bandwidth + 1) as f64;
    let width = 2 * bandwidth + 1;

    // Circular running sum over the window.
    let mut window = CMatrix::zeros(p, p);
    for m in 0..width {
        let slot = (len + m - bandwidth) % len;
        window.add_assign(&raw.matrices[slot]);
    }
    let mut matrices = Vec::with_capacity(len);
    for i in 0..len {
        let mut f = window.scale(weight);
        f.make_hermitian();
        matrices.push(f);
        let leaving = (i + len - bandwidth) % len;
        let entering = (i + bandwidth + 1) % len;
        let (out_slice, in_slice) = (raw.matrices[leaving].as_slice(), raw.matrices[entering].as_slice());
        for ((acc, o), n) in window.as_mut_slice().iter_mut().zip(out_slice).zip(in_slice) {
            *acc += n - o;
        }
    }
    Ok(SpectralDensityEstimate {
        kind: SpectrumKind::Smoothed,
        dim: p,
        matrices,
    })
}

/// `g(ω) = Bᵀ f(ω) B` for an orthonormal real basis `B`.
pub fn rotate_spectrum(f: &SpectralDensityEstimate, basis: &Matrix) -> Result<SpectralDensityEstimate> {
    let p = f.dim;
    if basis.rows() != p || basis.cols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: basis.cols(),
        });
    }
    let err = basis.orthonormality_error();
    if err > ORTHONORMAL_TOLERANCE {
        return Err(Error::NotOrthonormal { error: err });
    }
    let matrices = f
        .matrices
        .iter()
        .map(|m| {
            // tmp = f·B
            let tmp = CMatrix::from_fn(p, p, |a, c| (0..p).map(|b| m[(a, b)] * basis[(b, c)]).sum());
            let mut g = CMatrix::from_fn(p, p, |c, d| (0..p).map(|a| tmp[(a, d)] * basis[(a, c)]).sum());
            g.make_hermitian();
            g
        })
        .collect();
    Ok(SpectralDensityEstimate {
        kind: SpectrumKind::Rotated,
        dim: p,
        matrices,
    })
}

/// Transfer function of the model at `ω`: `I + Σ G(j)e^{−ijω}` for moving
/// averages, `(I − Σ F(j)e^{−ijω})⁻¹` for autoregressions.
pub fn transfer_function(model: &DgpSpec, omega: f64) -> Result<TransferEvaluation> {
    let p = model.dim();
    let mut poly = CMatrix::identity(p);
    let sign = match model.kind() {
        ModelKind::Vma => 1.0,
        ModelKind::Var => -1.0,
    };
    for (j, coef) in model.coefficients().iter().enumerate() {
        let lag = (j + 1) as f64;
        let phase = Complex64::new(libm::cos(lag * omega), -libm::sin(lag * omega)) * sign;
        for a in 0..p {
            for b in 0..p {
                poly[(a, b)] += phase * coef[(a, b)];
            }
        }
    }
    let matrix = match model.kind() {
        ModelKind::Vma => poly,
        ModelKind::Var => poly.inverse()?,
    };
    Ok(TransferEvaluation {
        frequency: omega,
        matrix,
    })
}

/// Model-implied spectrum `f(ω) = (2π)⁻¹ h(ω) K h(ω)*` on a grid of
/// `grid_size` points.
pub fn model_spectral_density(model: &DgpSpec, grid_size: usize) -> Result<SpectralDensityEstimate> {
    if grid_size < 2 {
        return Err(Error::InvalidParameter("grid_size must be at least 2"));
    }
    model.check_stationary()?;
    let k = model.noise().covariance()?.to_complex();
    let matrices = fourier_grid(grid_size)
        .into_iter()
        .map(|omega| {
            let h = transfer_function(model, omega)?.matrix;
            let mut f = h.matmul(&k).matmul(&h.adjoint()).scale(1.0 / (2.0 * PI));
            f.make_hermitian();
            Ok(f)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralDensityEstimate {
        kind: SpectrumKind::Model,
        dim: model.dim(),
        matrices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{draw_standard_normals, fixture, stream_rng, NoiseSpec};
    use crate::series::sample_covariance;

    fn white_noise(n: usize, p: usize, seed: u64) -> MultivariateSeries {
        let mut rng = stream_rng(seed, 0);
        MultivariateSeries::new(draw_standard_normals(&mut rng, n, p)).unwrap()
    }

    #[test]
    fn grid_layout() {
        assert_eq!(fourier_grid(4).len(), 4);
        let g = fourier_grid(4);
        assert!((g[0] + PI / 2.0).abs() < 1e-15 && (g[3] - PI).abs() < 1e-15);
        let g = fourier_grid(5);
        assert!((g[0] + 4.0 * PI / 5.0).abs() < 1e-15 && (g[4] - 4.0 * PI / 5.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_constant_and_cos_squared() {
        let g = fourier_grid(4096);
        let c = integrate_over_frequency(&g, &vec![3.0; 4096]).unwrap();
        assert!((c - 6.0 * PI).abs() < 1e-10);
        let cos2: Vec<f64> = g.iter().map(|w| libm::cos(*w) * libm::cos(*w)).collect();
        assert!((integrate_over_frequency(&g, &cos2).unwrap() - PI).abs() < 1e-6);

        let closed: Vec<f64> = (0..=4096).map(|i| -PI + 2.0 * PI * i as f64 / 4096.0).collect();
        let cos2: Vec<f64> = closed.iter().map(|w| libm::cos(*w) * libm::cos(*w)).collect();
        assert!((integrate_over_frequency(&closed, &cos2).unwrap() - PI).abs() < 1e-6);
    }

    #[test]
    fn quadrature_rejects_bad_grids() {
        let mut g = fourier_grid(64);
        g[10] += 1e-3;
        assert_eq!(integrate_over_frequency(&g, &vec![1.0; 64]), Err(Error::NonUniformGrid));
        let half: Vec<f64> = (0..64).map(|i| i as f64 * 0.01).collect();
        assert_eq!(integrate_over_frequency(&half, &vec![1.0; 64]), Err(Error::NonUniformGrid));
    }

    #[test]
    fn integral_of_squared_constant_rotated_spectrum() {
        let lambda = [5.0, 2.0, 0.5];
        let g = SpectralDensityEstimate::constant(
            SpectrumKind::Rotated,
            &Matrix::from_diagonal(&lambda).scale(1.0 / (2.0 * PI)).to_complex(),
            512,
        );
        let freqs = g.frequencies();
        for (i, l) in lambda.iter().enumerate() {
            let sq: Vec<f64> = g.entry_series(i, i).iter().map(|z| z.norm_sqr()).collect();
            let v = integrate_over_frequency(&freqs, &sq).unwrap();
            assert!((v - l * l / (2.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn dft_route_matches_lag_sum() {
        for (n, p) in [(9, 2), (16, 3), (31, 1)] {
            let x = white_noise(n, p, n as u64);
            let a = raw_periodogram(&x, n - 1).unwrap();
            let b = periodogram_by_lags(&x, n - 1).unwrap();
            for (ma, mb) in a.matrices().iter().zip(b.matrices()) {
                assert!(ma.max_abs_diff(mb) < 1e-12);
            }
        }
    }

    #[test]
    fn periodogram_structure_and_parseval() {
        let x = white_noise(257, 4, 2);
        for lag in [256, 10] {
            let f = raw_periodogram(&x, lag).unwrap();
            assert!(f.invariant_violation() < 1e-8);
            if lag == 256 {
                let total = f.integrate();
                let c = sample_covariance(&x);
                assert!(total.real_part().sub(&c).unwrap().max_abs() <= 1e-6 * c.max_abs());
                assert!(total.as_slice().iter().all(|z| z.im.abs() < 1e-10));
            }
        }
        let even = white_noise(128, 3, 4);
        let f = raw_periodogram(&even, 127).unwrap();
        assert!(f.invariant_violation() < 1e-8);
        let total = f.integrate().real_part();
        let c = sample_covariance(&even);
        assert!(total.sub(&c).unwrap().max_abs() <= 1e-6 * c.max_abs());
    }

    #[test]
    fn periodogram_at_zero_frequency_is_cosine_sum() {
        let x = white_noise(40, 3, 8);
        let f = raw_periodogram(&x, 39).unwrap();
        let zero = f.at(f.slot_of(0));
        let acv = AutocovarianceSequence::compute(&x, 39).unwrap();
        let mut expected = acv.matrices()[0].clone();
        for g in &acv.matrices()[1..] {
            expected = expected.add(&g.add(&g.transpose()).unwrap()).unwrap();
        }
        let expected = expected.scale(1.0 / (2.0 * PI));
        assert!(zero.real_part().sub(&expected).unwrap().max_abs() < 1e-12);
        assert!(zero.as_slice().iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn zero_series_gives_zero_spectrum() {
        let x = MultivariateSeries::from_rows(&[[0.0]; 12]).unwrap();
        let f = raw_periodogram(&x, 11).unwrap();
        assert!(f.matrices().iter().all(|m| m[(0, 0)].norm() == 0.0));
        assert!(raw_periodogram(&x, 0).is_err());
        assert!(raw_periodogram(&x, 12).is_err());
    }

    #[test]
    fn daniell_weights_and_full_window() {
        // A spectrum that is an impulse at one frequency spreads to 1/5 over 5 slots.
        let len = 21;
        let mut mats = vec![CMatrix::zeros(1, 1); len];
        mats[10][(0, 0)] = Complex64::new(1.0, 0.0);
        let f = SpectralDensityEstimate::from_matrices(SpectrumKind::Raw, mats).unwrap();
        let s = daniell_smooth(&f, 2).unwrap();
        for i in 0..len {
            let expected = if (8..=12).contains(&i) { 0.2 } else { 0.0 };
            assert!((s.at(i)[(0, 0)].re - expected).abs() < 1e-15);
        }
        // Window covering the whole grid averages everything.
        let vals: Vec<CMatrix> = (0..len)
            .map(|i| CMatrix::from_fn(1, 1, |_, _| Complex64::new(i as f64, 0.0)))
            .collect();
        let f = SpectralDensityEstimate::from_matrices(SpectrumKind::Raw, vals).unwrap();
        let s = daniell_smooth(&f, 10).unwrap();
        for m in s.matrices() {
            assert!((m[(0, 0)].re - 10.0).abs() < 1e-12);
        }
        assert!(daniell_smooth(&f, 0).is_err());
        assert!(daniell_smooth(&f, 11).is_err());
    }

    #[test]
    fn smoothed_white_noise_is_flat() {
        // A window of 2M+1 ordinates holds about M+1 independent exponential
        // ordinates (f(−ω) = conj f(ω)), so the relative sd is near 1/√(M+1).
        let x = white_noise(5000, 3, 21);
        let raw = raw_periodogram(&x, 4999).unwrap();
        let target = 1.0 / (2.0 * PI);
        let share_within = |s: &SpectralDensityEstimate, a: usize, rel: f64| {
            s.matrices()
                .iter()
                .filter(|m| (m[(a, a)].re - target).abs() <= rel * target)
                .count() as f64
                / 5000.0
        };
        let s30 = daniell_smooth(&raw, 30).unwrap();
        assert!(s30.invariant_violation() < 1e-8);
        let s200 = daniell_smooth(&raw, 200).unwrap();
        for a in 0..3 {
            assert!(share_within(&s30, a, 0.40) >= 0.95);
            assert!(share_within(&s200, a, 0.15) >= 0.95);
            let mean: f64 = s30.matrices().iter().map(|m| m[(a, a)].re).sum::<f64>() / 5000.0;
            assert!((mean / target - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn rotation_cases() {
        let x = white_noise(64, 3, 1);
        let f = raw_periodogram(&x, 63).unwrap();
        let same = rotate_spectrum(&f, &Matrix::identity(3)).unwrap();
        for (a, b) in f.matrices().iter().zip(same.matrices()) {
            assert!(a.max_abs_diff(b) < 1e-14);
        }
        let c = sample_covariance(&x);
        let d = crate::eigen::eigendecompose(&c).unwrap();
        let g = rotate_spectrum(&f, d.vectors()).unwrap();
        assert!(g.invariant_violation() < 1e-8);
        for (a, b) in f.matrices().iter().zip(g.matrices()) {
            assert!((a.trace() - b.trace()).norm() < 1e-12);
        }
        // ∫g = Aᵀ C_n A = L.
        let total = g.integrate().real_part();
        assert!(total.sub(&Matrix::from_diagonal(d.values())).unwrap().max_abs() < 1e-10);

        let skew = Matrix::from_rows(&[[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(rotate_spectrum(&f, &skew), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn white_noise_rotation_gives_eigenvalues() {
        let gamma = Matrix::from_rows(&[[3.0, 1.0], [1.0, 2.0]]).unwrap();
        let d = crate::eigen::eigendecompose(&gamma).unwrap();
        let f = SpectralDensityEstimate::constant(SpectrumKind::Model, &gamma.scale(0.5 / PI).to_complex(), 32);
        let g = rotate_spectrum(&f, d.vectors()).unwrap();
        let expected = Matrix::from_diagonal(d.values()).scale(0.5 / PI).to_complex();
        for m in g.matrices() {
            assert!(m.max_abs_diff(&expected) < 1e-12);
        }
    }

    #[test]
    fn pure_noise_model_is_flat() {
        let model = DgpSpec::vma(Vec::new(), NoiseSpec::gaussian_iid(5, 10.0)).unwrap();
        let f = model_spectral_density(&model, 64).unwrap();
        let expected = Matrix::identity(5).scale(10.0 / (2.0 * PI)).to_complex();
        for m in f.matrices() {
            assert!(m.max_abs_diff(&expected) < 1e-12);
        }
    }

    #[test]
    fn vma_spectrum_integrates_to_covariance() {
        let model = fixture(2).unwrap();
        let f = model_spectral_density(&model, MODEL_GRID_SIZE).unwrap();
        assert!(f.invariant_violation() < 1e-8);
        let g1 = &model.coefficients()[0];
        let k = Matrix::identity(5).scale(10.0);
        let gamma = k.add(&g1.matmul(&k).unwrap().matmul(&g1.transpose()).unwrap()).unwrap();
        let total = f.integrate();
        assert!(total.real_part().sub(&gamma).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn var_spectrum_integrates_to_lyapunov_solution() {
        let model = fixture(1).unwrap();
        let f = model_spectral_density(&model, MODEL_GRID_SIZE).unwrap();
        // Oracle: Γ = FΓFᵀ + K by plain fixed-point iteration.
        let fm = &model.coefficients()[0];
        let k = Matrix::identity(5).scale(10.0);
        let mut gamma = k.clone();
        for _ in 0..5000 {
            gamma = fm.matmul(&gamma).unwrap().matmul(&fm.transpose()).unwrap().add(&k).unwrap();
        }
        let total = f.integrate().real_part();
        assert!(total.sub(&gamma).unwrap().max_abs() < 1e-6 * gamma.max_abs());
    }
}
