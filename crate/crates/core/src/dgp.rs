//! Data-generating processes for the simulation study.
//!
//! Eight fixtures cover a VAR(1), three Gaussian VMA models of order one to
//! three, and the shared VMA(1) driven by contaminated, skew-normal and
//! Student-t noise. Every random draw flows from a ChaCha stream keyed by a
//! `(seed, stream)` pair so that replicates are reproducible and independent.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::eigen::{eigendecompose, EigenDecomposition, DEFAULT_GAP_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::series::MultivariateSeries;

/// Steps discarded at the start of an autoregressive path.
pub const VAR_BURN_IN: usize = 500;
/// Bumped whenever a fixture constant changes.
pub const FIXTURE_VERSION: u32 = 1;

/// Counter-style random stream: the same `(seed, stream)` always yields the
/// same sequence, and distinct streams do not overlap.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for a labelled sub-task of `seed`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

pub fn draw_standard_normals<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    Matrix::from_row_major(rows, cols, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Var,
    Vma,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    Gaussian {
        mean: Vec<f64>,
        covariance: Matrix,
    },
    /// Gaussian noise in which a fraction `outlier_rate` of the time points is
    /// replaced by draws centred at `+outlier_mean` (first half) and
    /// `−outlier_mean` (second half).
    Contaminated {
        mean: Vec<f64>,
        covariance: Matrix,
        outlier_rate: f64,
        outlier_mean: Vec<f64>,
        outlier_covariance: Matrix,
    },
    /// Azzalini's `SN(ξ, Ω, α)`. With `centered` the theoretical mean is
    /// subtracted so the noise has mean zero.
    SkewNormal {
        xi: Vec<f64>,
        omega: Matrix,
        alpha: Vec<f64>,
        centered: bool,
    },
    StudentT {
        mu: Vec<f64>,
        sigma: Matrix,
        dof: f64,
    },
}

impl NoiseSpec {
    pub fn gaussian_iid(p: usize, variance: f64) -> Self {
        NoiseSpec::Gaussian {
            mean: vec![0.0; p],
            covariance: Matrix::identity(p).scale(variance),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            NoiseSpec::Gaussian { mean, .. } | NoiseSpec::Contaminated { mean, .. } => mean.len(),
            NoiseSpec::SkewNormal { xi, .. } => xi.len(),
            NoiseSpec::StudentT { mu, .. } => mu.len(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            NoiseSpec::Gaussian { .. } => "gaussian",
            NoiseSpec::Contaminated { .. } => "contaminated",
            NoiseSpec::SkewNormal { .. } => "skew_normal",
            NoiseSpec::StudentT { .. } => "student_t",
        }
    }

    fn check_shapes(&self) -> Result<()> {
        let p = self.dim();
        let square = |m: &Matrix| -> Result<()> {
            if m.rows() != p || m.cols() != p {
                Err(Error::DimensionMismatch {
                    expected: p,
                    found: m.cols(),
                })
            } else {
                Ok(())
            }
        };
        match self {
            NoiseSpec::Gaussian { covariance, .. } => square(covariance),
            NoiseSpec::Contaminated {
                covariance,
                outlier_rate,
                outlier_mean,
                outlier_covariance,
                ..
            } => {
                square(covariance)?;
                square(outlier_covariance)?;
                if outlier_mean.len() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        found: outlier_mean.len(),
                    });
                }
                if !(0.0..=1.0).contains(outlier_rate) {
                    return Err(Error::InvalidParameter("outlier_rate must lie in [0, 1]"));
                }
                Ok(())
            }
            NoiseSpec::SkewNormal { omega, alpha, .. } => {
                square(omega)?;
                if alpha.len() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        found: alpha.len(),
                    });
                }
                if omega.diagonal().iter().any(|&d| !(d > 0.0)) {
                    return Err(Error::NotPositiveSemiDefinite);
                }
                Ok(())
            }
            NoiseSpec::StudentT { sigma, dof, .. } => {
                square(sigma)?;
                if !(*dof > 2.0) {
                    return Err(Error::InvalidParameter("Student-t degrees of freedom must exceed 2"));
                }
                Ok(())
            }
        }
    }

    /// Skew-normal building blocks: scales `ω`, correlation `Ω̄` and `δ`.
    fn skew_parts(omega: &Matrix, alpha: &[f64]) -> (Vec<f64>, Matrix, Vec<f64>) {
        let p = alpha.len();
        let scales: Vec<f64> = omega.diagonal().iter().map(|d| libm::sqrt(*d)).collect();
        let corr = Matrix::from_fn(p, p, |i, j| omega[(i, j)] / (scales[i] * scales[j]));
        let corr_alpha = corr.mat_vec(alpha);
        let quad: f64 = alpha.iter().zip(&corr_alpha).map(|(a, b)| a * b).sum();
        let denom = libm::sqrt(1.0 + quad);
        let delta = corr_alpha.iter().map(|v| v / denom).collect();
        (scales, corr, delta)
    }

    /// Mean of the drawn noise.
    pub fn mean(&self) -> Vec<f64> {
        match self {
            NoiseSpec::Gaussian { mean, .. } | NoiseSpec::Contaminated { mean, .. } => mean.clone(),
            NoiseSpec::SkewNormal {
                xi,
                omega,
                alpha,
                centered,
            } => {
                if *centered {
                    xi.clone()
                } else {
                    let (scales, _, delta) = Self::skew_parts(omega, alpha);
                    let c = libm::sqrt(2.0 / PI);
                    (0..xi.len()).map(|i| xi[i] + scales[i] * delta[i] * c).collect()
                }
            }
            NoiseSpec::StudentT { mu, .. } => mu.clone(),
        }
    }

    /// Covariance `K` of the drawn noise.
    pub fn covariance(&self) -> Result<Matrix> {
        self.check_shapes()?;
        Ok(match self {
            NoiseSpec::Gaussian { covariance, .. } => covariance.clone(),
            NoiseSpec::Contaminated {
                covariance,
                outlier_rate,
                outlier_mean,
                outlier_covariance,
                ..
            } => {
                let p = outlier_mean.len();
                let spread = Matrix::from_fn(p, p, |i, j| outlier_mean[i] * outlier_mean[j]);
                covariance
                    .scale(1.0 - outlier_rate)
                    .add(&outlier_covariance.scale(*outlier_rate))?
                    .add(&spread.scale(*outlier_rate))?
            }
            NoiseSpec::SkewNormal { omega, alpha, .. } => {
                let p = alpha.len();
                let (scales, corr, delta) = Self::skew_parts(omega, alpha);
                Matrix::from_fn(p, p, |i, j| {
                    scales[i] * scales[j] * (corr[(i, j)] - 2.0 / PI * delta[i] * delta[j])
                })
            }
            NoiseSpec::StudentT { sigma, dof, .. } => sigma.scale(dof / (dof - 2.0)),
        })
    }

    /// Canonical byte encoding, used for checksums.
    fn encode(&self, out: &mut Vec<u8>) {
        let put_vec = |out: &mut Vec<u8>, v: &[f64]| {
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        };
        out.extend_from_slice(self.family().as_bytes());
        match self {
            NoiseSpec::Gaussian { mean, covariance } => {
                put_vec(out, mean);
                put_vec(out, covariance.as_slice());
            }
            NoiseSpec::Contaminated {
                mean,
                covariance,
                outlier_rate,
                outlier_mean,
                outlier_covariance,
            } => {
                put_vec(out, mean);
                put_vec(out, covariance.as_slice());
                put_vec(out, &[*outlier_rate]);
                put_vec(out, outlier_mean);
                put_vec(out, outlier_covariance.as_slice());
            }
            NoiseSpec::SkewNormal {
                xi,
                omega,
                alpha,
                centered,
            } => {
                put_vec(out, xi);
                put_vec(out, omega.as_slice());
                put_vec(out, alpha);
                out.push(*centered as u8);
            }
            NoiseSpec::StudentT { mu, sigma, dof } => {
                put_vec(out, mu);
                put_vec(out, sigma.as_slice());
                put_vec(out, &[*dof]);
            }
        }
    }
}

/// `count×p` noise draws.
pub fn draw_noise<R: Rng + ?Sized>(spec: &NoiseSpec, count: usize, rng: &mut R) -> Result<Matrix> {
    spec.check_shapes()?;
    let p = spec.dim();
    match spec {
        NoiseSpec::Gaussian { mean, covariance } => gaussian_rows(rng, count, mean, covariance),
        NoiseSpec::Contaminated {
            mean,
            covariance,
            outlier_rate,
            outlier_mean,
            outlier_covariance,
        } => {
            let mut out = gaussian_rows(rng, count, mean, covariance)?;
            let outliers = libm::round(outlier_rate * count as f64) as usize;
            let outliers = outliers.min(count);
            if outliers == 0 {
                return Ok(out);
            }
            let positions = index::sample(rng, count, outliers).into_vec();
            let high: Vec<f64> = mean.iter().zip(outlier_mean).map(|(m, o)| m + o).collect();
            let low: Vec<f64> = mean.iter().zip(outlier_mean).map(|(m, o)| m - o).collect();
            let factor = outlier_covariance.cholesky_psd()?;
            for (rank, &t) in positions.iter().enumerate() {
                let centre = if rank < outliers / 2 { &high } else { &low };
                let row = correlated_row(rng, &factor, centre);
                out.row_mut(t).copy_from_slice(&row);
            }
            Ok(out)
        }
        NoiseSpec::SkewNormal {
            xi,
            omega,
            alpha,
            centered,
        } => {
            let (scales, corr, delta) = NoiseSpec::skew_parts(omega, alpha);
            // Joint correlation of (Z₀, Z) with Cov(Z₀, Z) = δ.
            let joint = Matrix::from_fn(p + 1, p + 1, |i, j| match (i, j) {
                (0, 0) => 1.0,
                (0, j) => delta[j - 1],
                (i, 0) => delta[i - 1],
                (i, j) => corr[(i - 1, j - 1)],
            });
            let factor = joint.cholesky_psd()?;
            let shift: Vec<f64> = if *centered {
                let c = libm::sqrt(2.0 / PI);
                (0..p).map(|i| xi[i] - scales[i] * delta[i] * c).collect()
            } else {
                xi.clone()
            };
            let zero = vec![0.0; p + 1];
            let mut out = Matrix::zeros(count, p);
            for t in 0..count {
                let z = correlated_row(rng, &factor, &zero);
                let sign = if z[0] < 0.0 { -1.0 } else { 1.0 };
                for (i, v) in out.row_mut(t).iter_mut().enumerate() {
                    *v = shift[i] + scales[i] * sign * z[i + 1];
                }
            }
            Ok(out)
        }
        NoiseSpec::StudentT { mu, sigma, dof } => {
            let factor = sigma.cholesky_psd()?;
            let chi = ChiSquared::new(*dof).map_err(|_| Error::InvalidParameter("degrees of freedom"))?;
            let zero = vec![0.0; p];
            let mut out = Matrix::zeros(count, p);
            for t in 0..count {
                let z = correlated_row(rng, &factor, &zero);
                let w: f64 = chi.sample(rng);
                let scale = libm::sqrt(dof / w);
                for (i, v) in out.row_mut(t).iter_mut().enumerate() {
                    *v = mu[i] + z[i] * scale;
                }
            }
            Ok(out)
        }
    }
}

fn correlated_row<R: Rng + ?Sized>(rng: &mut R, factor: &Matrix, centre: &[f64]) -> Vec<f64> {
    let p = centre.len();
    let u: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    (0..p)
        .map(|i| centre[i] + (0..=i).map(|k| factor[(i, k)] * u[k]).sum::<f64>())
        .collect()
}

fn gaussian_rows<R: Rng + ?Sized>(rng: &mut R, count: usize, mean: &[f64], cov: &Matrix) -> Result<Matrix> {
    let factor = cov.cholesky_psd()?;
    let mut out = Matrix::zeros(count, mean.len());
    for t in 0..count {
        let row = correlated_row(rng, &factor, mean);
        out.row_mut(t).copy_from_slice(&row);
    }
    Ok(out)
}

/// A VAR or VMA model with its noise law.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpSpec {
    kind: ModelKind,
    coefficients: Vec<Matrix>,
    noise: NoiseSpec,
}

impl DgpSpec {
    /// `X(t) = e(t) + Σ F(j) X(t−j)`; rejects non-stationary coefficients.
    pub fn var(coefficients: Vec<Matrix>, noise: NoiseSpec) -> Result<Self> {
        let spec = Self::build(ModelKind::Var, coefficients, noise)?;
        spec.check_stationary()?;
        Ok(spec)
    }

    /// `X(t) = e(t) + Σ G(j) e(t−j)`; an empty coefficient list is pure noise.
    pub fn vma(coefficients: Vec<Matrix>, noise: NoiseSpec) -> Result<Self> {
        Self::build(ModelKind::Vma, coefficients, noise)
    }

    fn build(kind: ModelKind, coefficients: Vec<Matrix>, noise: NoiseSpec) -> Result<Self> {
        let p = noise.dim();
        if p == 0 {
            return Err(Error::InvalidParameter("noise dimension must be positive"));
        }
        for c in &coefficients {
            if c.rows() != p || c.cols() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: c.cols(),
                });
            }
            if !c.is_finite() {
                return Err(Error::InvalidParameter("non-finite coefficient"));
            }
        }
        noise.covariance()?;
        Ok(Self {
            kind,
            coefficients,
            noise,
        })
    }

    #[inline]
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.noise.dim()
    }

    /// `F(1..=J)` or `G(1..=J)`.
    #[inline]
    pub fn coefficients(&self) -> &[Matrix] {
        &self.coefficients
    }

    #[inline]
    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn with_noise(&self, noise: NoiseSpec) -> Result<Self> {
        Self::build(self.kind, self.coefficients.clone(), noise)
    }

    fn companion(&self) -> Matrix {
        let p = self.dim();
        let order = self.order();
        let size = p * order;
        Matrix::from_fn(size, size, |i, j| {
            if i < p {
                self.coefficients[j / p][(i, j % p)]
            } else if i - p == j {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Spectral radius of the autoregressive companion matrix (zero for
    /// moving averages), via `‖C^{2^k}‖^{1/2^k}`.
    pub fn companion_spectral_radius(&self) -> f64 {
        if self.kind == ModelKind::Vma || self.order() == 0 {
            return 0.0;
        }
        let mut m = self.companion();
        let mut log_scale = 0.0;
        let mut estimate = m.frobenius_norm();
        for k in 0..40 {
            let s = m.frobenius_norm();
            if s == 0.0 {
                return 0.0;
            }
            let log_norm = log_scale + libm::log(s);
            estimate = libm::exp(log_norm / (1u64 << k) as f64);
            let unit = m.scale(1.0 / s);
            m = unit.matmul(&unit).expect("square");
            log_scale = 2.0 * log_norm;
        }
        estimate
    }

    pub fn check_stationary(&self) -> Result<()> {
        let rho = self.companion_spectral_radius();
        if rho >= 1.0 {
            Err(Error::NonStationary { spectral_radius: rho })
        } else {
            Ok(())
        }
    }

    /// SHA-256 over the canonical encoding of the model, lowercase hex.
    pub fn checksum(&self) -> String {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&FIXTURE_VERSION.to_le_bytes());
        bytes.push(match self.kind {
            ModelKind::Var => b'R',
            ModelKind::Vma => b'M',
        });
        bytes.extend_from_slice(&(self.dim() as u64).to_le_bytes());
        for c in &self.coefficients {
            for x in c.as_slice() {
                bytes.extend_from_slice(&x.to_le_bytes());
            }
        }
        self.noise.encode(&mut bytes);
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[rustfmt::skip]
const DGP1_F1: [f64; 25] = [
     0.21, -0.49,  0.16,  -0.14, -0.36,
    -0.25,  0.074, 0.38,  -0.14,  0.047,
    -0.11,  0.26,  0.39,   0.091, 0.18,
    -0.41,  0.37,  0.066,  0.37,  0.028,
     0.46, -0.46,  0.094,  0.18, -0.41,
];

#[rustfmt::skip]
const VMA1_G1: [f64; 25] = [
    -0.46,  0.17,  0.23,  0.40, -0.22,
     0.15, -0.59,  0.05, -0.26, -0.24,
     0.13, -0.32, -0.26, -0.28, -0.41,
     0.15,  0.20,  0.51, -0.38, -0.55,
     0.43,  0.02, -0.25, -0.32, -0.34,
];

#[rustfmt::skip]
const VMA2_G1: [f64; 25] = [
     0.62, -0.73, -0.02,  0.52, -0.52,
     0.71, -0.11, -0.19,  0.43, -0.75,
     0.09, -0.56,  0.79, -0.51, -0.08,
     0.14,  0.90,  0.07, -0.53, -0.27,
    -0.23, -0.01,  0.59,  0.81,  0.10,
];

#[rustfmt::skip]
const VMA2_G2: [f64; 25] = [
     0.26, -0.16, -0.16, -0.38,  0.27,
     0.34, -0.27, -0.33, -0.44,  0.06,
    -0.22, -0.18,  0.62, -0.08,  0.19,
     0.26, -0.30,  0.15, -0.24,  0.02,
     0.11,  0.21,  0.21, -0.14,  0.45,
];

#[rustfmt::skip]
const VMA3_G1: [f64; 25] = [
    0.94, -0.35, -0.49,  0.17, -0.18,
    0.58,  0.35, -0.43, -0.29, -0.36,
    0.42, -0.16,  1.07, -0.28,  0.39,
    0.59,  0.41, -0.38,  0.27, -0.03,
    0.18,  0.66, -0.28,  0.42,  0.91,
];

#[rustfmt::skip]
const VMA3_G2: [f64; 25] = [
    -0.14, -0.04, -0.33,  0.40,  0.02,
     0.27, -0.32, -0.27,  0.02, -0.16,
     0.45, -0.18,  0.03, -0.31,  0.16,
     0.41,  0.39, -0.33, -0.36,  0.10,
     0.31,  0.47, -0.08,  0.14, -0.26,
];

#[rustfmt::skip]
const VMA3_G3: [f64; 25] = [
    -0.16,  0.24,  0.10,  0.22,  0.17,
    -0.22,  0.17,  0.10,  0.26,  0.14,
     0.06, -0.03, -0.11, -0.05, -0.17,
    -0.11,  0.02,  0.01,  0.19,  0.11,
     0.14, -0.11,  0.16, -0.21, -0.24,
];

/// Expected [`DgpSpec::checksum`] of each fixture, indexed by id − 1.
pub const FIXTURE_CHECKSUMS: [&str; 8] = [
    "32388acf2904ae1a96216d5ee530b62e19419393749333f65e41b9843a67e4ed",
    "57a07dc453b2ceffef8cbb338a6501af50a7dfd4fa0dc73bee2ff923759b6e29",
    "32f678cc383c3b1c1bf239239cce11b79817e6450632d5f1315823d504a42ddf",
    "c6eda7b12b2909a3c6695f355bfb034c24ba5bcc639b54055cc1518864062dbf",
    "d6c774402c42042192c261c1702186d428be1fbc683494d9e4a35a66e1fd9814",
    "4a4614875180b63f957c8f5441b1cb0dc49c86fb615e8c1bd9ca7cd5585ec020",
    "314c583b9cd2a8e486487f5bb6fc837bd311b9571ca5f4e71fd8de258cd4b8dc",
    "3b1bfde2b27489bde502bd15996accaa669adacae7165050f8c7cea7a4e47a86",
];

fn m5(data: &[f64; 25]) -> Matrix {
    Matrix::from_row_major(5, 5, data.to_vec())
}

/// The eight simulation models, `dgp_id ∈ 1..=8`.
pub fn fixture(dgp_id: u32) -> Result<DgpSpec> {
    let gaussian = NoiseSpec::gaussian_iid(5, 10.0);
    let zero = vec![0.0; 5];
    let ten_i = Matrix::identity(5).scale(10.0);
    match dgp_id {
        1 => DgpSpec::var(vec![m5(&DGP1_F1)], gaussian),
        2 => DgpSpec::vma(vec![m5(&VMA1_G1)], gaussian),
        3 => DgpSpec::vma(vec![m5(&VMA2_G1), m5(&VMA2_G2)], gaussian),
        4 => DgpSpec::vma(vec![m5(&VMA3_G1), m5(&VMA3_G2), m5(&VMA3_G3)], gaussian),
        5 => DgpSpec::vma(
            vec![m5(&VMA1_G1)],
            NoiseSpec::Contaminated {
                mean: zero,
                covariance: ten_i.clone(),
                outlier_rate: 0.01,
                outlier_mean: vec![10.0; 5],
                outlier_covariance: ten_i,
            },
        ),
        6 => DgpSpec::vma(
            vec![m5(&VMA1_G1)],
            NoiseSpec::SkewNormal {
                xi: zero,
                omega: ten_i,
                alpha: vec![1.0, 2.0, 3.0, 4.0, 5.0],
                centered: true,
            },
        ),
        7 | 8 => DgpSpec::vma(
            vec![m5(&VMA1_G1)],
            NoiseSpec::StudentT {
                mu: zero,
                sigma: ten_i,
                dof: if dgp_id == 7 { 5.0 } else { 8.0 },
            },
        ),
        other => Err(Error::InvalidDgpId(other)),
    }
}

/// Simulates `n` observations. Moving averages are exact (the `J` pre-sample
/// noise terms are drawn too); autoregressions start from zero and discard
/// [`VAR_BURN_IN`] steps.
pub fn simulate_with_rng<R: Rng + ?Sized>(spec: &DgpSpec, n: usize, rng: &mut R) -> Result<MultivariateSeries> {
    let p = spec.dim();
    let order = spec.order();
    match spec.kind {
        ModelKind::Vma => {
            let e = draw_noise(&spec.noise, n + order, rng)?;
            let mut out = Matrix::zeros(n, p);
            for t in 0..n {
                let now = t + order;
                out.row_mut(t).copy_from_slice(e.row(now));
                for (j, g) in spec.coefficients.iter().enumerate() {
                    let past = e.row(now - j - 1);
                    let row = out.row_mut(t);
                    for a in 0..p {
                        row[a] += g.row(a).iter().zip(past).map(|(x, y)| x * y).sum::<f64>();
                    }
                }
            }
            MultivariateSeries::new(out)
        }
        ModelKind::Var => {
            spec.check_stationary()?;
            let total = n + VAR_BURN_IN;
            let e = draw_noise(&spec.noise, total, rng)?;
            let mut path = Matrix::zeros(total, p);
            for t in 0..total {
                let mut row = e.row(t).to_vec();
                for (j, f) in spec.coefficients.iter().enumerate() {
                    if t < j + 1 {
                        break;
                    }
                    let past = path.row(t - j - 1);
                    for a in 0..p {
                        row[a] += f.row(a).iter().zip(past).map(|(x, y)| x * y).sum::<f64>();
                    }
                }
                path.row_mut(t).copy_from_slice(&row);
            }
            let kept = path.as_slice()[VAR_BURN_IN * p..].to_vec();
            MultivariateSeries::new(Matrix::from_row_major(n, p, kept))
        }
    }
}

pub fn simulate(spec: &DgpSpec, n: usize, seed: u64) -> Result<MultivariateSeries> {
    simulate_with_rng(spec, n, &mut stream_rng(seed, 0))
}

/// Population covariance and its eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTruth {
    pub gamma: Matrix,
    pub decomp: EigenDecomposition,
    /// Set when adjacent population eigenvalues are nearly tied.
    pub near_tie: Option<(usize, f64)>,
}

pub fn population_truth(spec: &DgpSpec) -> Result<PopulationTruth> {
    let k = spec.noise.covariance()?;
    let gamma = match spec.kind {
        ModelKind::Vma => {
            let mut gamma = k.clone();
            for g in &spec.coefficients {
                gamma = gamma.add(&g.matmul(&k)?.matmul(&g.transpose())?)?;
            }
            gamma
        }
        ModelKind::Var => {
            spec.check_stationary()?;
            lyapunov_fixed_point(spec, &k)?
        }
    };
    let gamma = gamma.symmetrized();
    let decomp = eigendecompose(&gamma)?;
    let near_tie = decomp.near_tie(DEFAULT_GAP_TOLERANCE);
    Ok(PopulationTruth {
        gamma,
        decomp,
        near_tie,
    })
}

/// Solves `Γ_c = C Γ_c Cᵀ + K_c` for the companion state by iteration and
/// returns the leading `p×p` block.
fn lyapunov_fixed_point(spec: &DgpSpec, k: &Matrix) -> Result<Matrix> {
    let p = spec.dim();
    if spec.order() == 0 {
        return Ok(k.clone());
    }
    let c = spec.companion();
    let ct = c.transpose();
    let size = c.rows();
    let kc = Matrix::from_fn(size, size, |i, j| if i < p && j < p { k[(i, j)] } else { 0.0 });
    let mut gamma = kc.clone();
    for _ in 0..1_000_000 {
        let next = c.matmul(&gamma)?.matmul(&ct)?.add(&kc)?;
        let change = next.sub(&gamma)?.max_abs();
        gamma = next;
        if change <= 1e-12 * gamma.max_abs() {
            return Ok(Matrix::from_fn(p, p, |i, j| gamma[(i, j)]));
        }
    }
    Err(Error::NoConvergence {
        sweeps: 1_000_000,
        off_diagonal: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{sample_autocovariance, sample_covariance, sample_mean};

    #[test]
    fn fixture_spot_values() {
        assert_eq!(fixture(1).unwrap().coefficients()[0][(0, 0)], 0.21);
        assert_eq!(fixture(2).unwrap().coefficients()[0][(0, 0)], -0.46);
        assert_eq!(fixture(1).unwrap().kind(), ModelKind::Var);
        assert_eq!(fixture(3).unwrap().order(), 2);
        assert_eq!(fixture(4).unwrap().order(), 3);
        assert_eq!(
            fixture(7).unwrap().noise(),
            &NoiseSpec::StudentT {
                mu: vec![0.0; 5],
                sigma: Matrix::identity(5).scale(10.0),
                dof: 5.0
            }
        );
        assert_eq!(fixture(0), Err(Error::InvalidDgpId(0)));
        assert_eq!(fixture(9), Err(Error::InvalidDgpId(9)));
    }

    #[test]
    fn fixture_checksums_are_frozen() {
        for id in 1..=8 {
            let sum = fixture(id).unwrap().checksum();
            assert_eq!(sum, FIXTURE_CHECKSUMS[id as usize - 1], "fixture {id}");
        }
    }

    #[test]
    fn fixtures_have_distinct_population_eigenvalues() {
        for id in 1..=8 {
            let truth = population_truth(&fixture(id).unwrap()).unwrap();
            assert!(truth.near_tie.is_none(), "fixture {id}");
            assert!(truth.decomp.check_nondegenerate(DEFAULT_GAP_TOLERANCE).is_ok());
        }
    }

    #[test]
    fn var_fixture_is_stationary_and_solves_lyapunov() {
        let spec = fixture(1).unwrap();
        let rho = spec.companion_spectral_radius();
        assert!(rho > 0.1 && rho < 1.0, "rho = {rho}");
        let truth = population_truth(&spec).unwrap();
        let f = &spec.coefficients()[0];
        let k = Matrix::identity(5).scale(10.0);
        let residual = truth
            .gamma
            .sub(&f.matmul(&truth.gamma).unwrap().matmul(&f.transpose()).unwrap())
            .unwrap()
            .sub(&k)
            .unwrap()
            .max_abs();
        assert!(residual < 1e-10, "residual {residual}");
    }

    #[test]
    fn spectral_radius_of_known_matrices() {
        let diag = DgpSpec::vma(Vec::new(), NoiseSpec::gaussian_iid(2, 1.0)).unwrap();
        assert_eq!(diag.companion_spectral_radius(), 0.0);
        let f = Matrix::from_rows(&[[0.5, 1.0], [0.0, 0.3]]).unwrap();
        let var = DgpSpec::var(vec![f], NoiseSpec::gaussian_iid(2, 1.0)).unwrap();
        assert!((var.companion_spectral_radius() - 0.5).abs() < 1e-3);
        let explosive = Matrix::from_rows(&[[1.1, 0.0], [0.0, 0.2]]).unwrap();
        assert!(matches!(
            DgpSpec::var(vec![explosive], NoiseSpec::gaussian_iid(2, 1.0)),
            Err(Error::NonStationary { .. })
        ));
    }

    #[test]
    fn pure_noise_vma_returns_noise() {
        let spec = DgpSpec::vma(Vec::new(), NoiseSpec::gaussian_iid(3, 2.0)).unwrap();
        let x = simulate(&spec, 50, 4).unwrap();
        let e = draw_noise(spec.noise(), 50, &mut stream_rng(4, 0)).unwrap();
        assert_eq!(x.data(), &e);
        let truth = population_truth(&spec).unwrap();
        assert!(truth.near_tie.is_some());
    }

    #[test]
    fn zero_var_is_white() {
        let spec = DgpSpec::var(vec![Matrix::zeros(3, 3)], NoiseSpec::gaussian_iid(3, 1.0)).unwrap();
        let x = simulate(&spec, 5000, 6).unwrap();
        assert!(sample_autocovariance(&x, 1).unwrap().max_abs() < 0.1);
    }

    #[test]
    fn simulate_is_deterministic_per_seed() {
        let spec = fixture(3).unwrap();
        assert_eq!(simulate(&spec, 100, 1).unwrap(), simulate(&spec, 100, 1).unwrap());
        let a = simulate(&spec, 4000, 1).unwrap();
        let b = simulate(&spec, 4000, 2).unwrap();
        assert_ne!(a, b);
        // Independent seeds: cross-correlation of first coordinates near zero.
        let (ma, mb) = (sample_mean(&a)[0], sample_mean(&b)[0]);
        let mut sab = 0.0;
        let mut saa = 0.0;
        let mut sbb = 0.0;
        for t in 0..4000 {
            let x = a.observation(t)[0] - ma;
            let y = b.observation(t)[0] - mb;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        assert!((sab / libm::sqrt(saa * sbb)).abs() < 0.06);
    }

    fn relative_error(a: &Matrix, b: &Matrix) -> f64 {
        a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm()
    }

    #[test]
    fn gaussian_and_student_t_moments() {
        let g = draw_noise(&NoiseSpec::gaussian_iid(5, 10.0), 100_000, &mut stream_rng(1, 0)).unwrap();
        let c = sample_covariance(&MultivariateSeries::new(g).unwrap());
        assert!(c.sub(&Matrix::identity(5).scale(10.0)).unwrap().max_abs() < 0.2);

        let spec = fixture(7).unwrap();
        let t = draw_noise(spec.noise(), 100_000, &mut stream_rng(2, 0)).unwrap();
        let c = sample_covariance(&MultivariateSeries::new(t).unwrap());
        let expected = Matrix::identity(5).scale(50.0 / 3.0);
        assert!(relative_error(&c, &expected) < 0.05, "{c:?}");
        assert_eq!(spec.noise().covariance().unwrap(), expected);
    }

    #[test]
    fn skew_normal_moments_and_zero_skew_limit() {
        let spec = fixture(6).unwrap();
        let draws = draw_noise(spec.noise(), 100_000, &mut stream_rng(3, 0)).unwrap();
        let x = MultivariateSeries::new(draws).unwrap();
        let mean = sample_mean(&x);
        assert!(mean.iter().all(|m| m.abs() < 0.05), "{mean:?}");
        let k = spec.noise().covariance().unwrap();
        assert!(relative_error(&sample_covariance(&x), &k) < 0.02);

        let plain = NoiseSpec::SkewNormal {
            xi: vec![1.0, -1.0],
            omega: Matrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap(),
            alpha: vec![0.0, 0.0],
            centered: false,
        };
        let gauss = NoiseSpec::Gaussian {
            mean: vec![1.0, -1.0],
            covariance: Matrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap(),
        };
        let a = MultivariateSeries::new(draw_noise(&plain, 50_000, &mut stream_rng(4, 0)).unwrap()).unwrap();
        let b = MultivariateSeries::new(draw_noise(&gauss, 50_000, &mut stream_rng(5, 0)).unwrap()).unwrap();
        for (u, v) in sample_mean(&a).iter().zip(sample_mean(&b)) {
            assert!((u - v).abs() < 0.05);
        }
        assert!(relative_error(&sample_covariance(&a), &sample_covariance(&b)) < 0.03);
    }

    #[test]
    fn contamination_places_half_high_half_low() {
        // Tight base noise so outliers are unambiguous.
        let noise = NoiseSpec::Contaminated {
            mean: vec![0.0; 5],
            covariance: Matrix::identity(5).scale(0.01),
            outlier_rate: 0.01,
            outlier_mean: vec![10.0; 5],
            outlier_covariance: Matrix::identity(5).scale(0.01),
        };
        let e = draw_noise(&noise, 2000, &mut stream_rng(9, 0)).unwrap();
        let high = (0..2000).filter(|&t| e.row(t).iter().sum::<f64>() > 25.0).count();
        let low = (0..2000).filter(|&t| e.row(t).iter().sum::<f64>() < -25.0).count();
        assert_eq!((high, low), (10, 10));
        let k = fixture(5).unwrap().noise().covariance().unwrap();
        assert_eq!(k[(0, 0)], 11.0);
        assert_eq!(k[(0, 1)], 1.0);
    }

    /// Coefficients typed out again as text, row by row.
    const TRANSCRIPTION: &str = "
        1 F1  0.21 -0.49 0.16 -0.14 -0.36 | -0.25 0.074 0.38 -0.14 0.047 | -0.11 0.26 0.39 0.091 0.18 | -0.41 0.37 0.066 0.37 0.028 | 0.46 -0.46 0.094 0.18 -0.41
        2 G1  -0.46 0.17 0.23 0.40 -0.22 | 0.15 -0.59 0.05 -0.26 -0.24 | 0.13 -0.32 -0.26 -0.28 -0.41 | 0.15 0.20 0.51 -0.38 -0.55 | 0.43 0.02 -0.25 -0.32 -0.34
        3 G1  0.62 -0.73 -0.02 0.52 -0.52 | 0.71 -0.11 -0.19 0.43 -0.75 | 0.09 -0.56 0.79 -0.51 -0.08 | 0.14 0.90 0.07 -0.53 -0.27 | -0.23 -0.01 0.59 0.81 0.10
        3 G2  0.26 -0.16 -0.16 -0.38 0.27 | 0.34 -0.27 -0.33 -0.44 0.06 | -0.22 -0.18 0.62 -0.08 0.19 | 0.26 -0.30 0.15 -0.24 0.02 | 0.11 0.21 0.21 -0.14 0.45
        4 G1  0.94 -0.35 -0.49 0.17 -0.18 | 0.58 0.35 -0.43 -0.29 -0.36 | 0.42 -0.16 1.07 -0.28 0.39 | 0.59 0.41 -0.38 0.27 -0.03 | 0.18 0.66 -0.28 0.42 0.91
        4 G2  -0.14 -0.04 -0.33 0.40 0.02 | 0.27 -0.32 -0.27 0.02 -0.16 | 0.45 -0.18 0.03 -0.31 0.16 | 0.41 0.39 -0.33 -0.36 0.10 | 0.31 0.47 -0.08 0.14 -0.26
        4 G3  -0.16 0.24 0.10 0.22 0.17 | -0.22 0.17 0.10 0.26 0.14 | 0.06 -0.03 -0.11 -0.05 -0.17 | -0.11 0.02 0.01 0.19 0.11 | 0.14 -0.11 0.16 -0.21 -0.24
    ";

    #[test]
    fn fixtures_match_text_transcription() {
        for line in TRANSCRIPTION.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let mut parts = line.split_whitespace();
            let id: u32 = parts.next().unwrap().parse().unwrap();
            let lag: usize = parts.next().unwrap()[1..].parse().unwrap();
            let values: Vec<f64> = parts.filter(|t| *t != "|").map(|t| t.parse().unwrap()).collect();
            assert_eq!(values.len(), 25);
            let ids: &[u32] = if id == 2 { &[2, 5, 6, 7, 8] } else { core::slice::from_ref(&id) };
            for &fid in ids {
                let spec = fixture(fid).unwrap();
                assert_eq!(spec.coefficients()[lag - 1].as_slice(), values.as_slice(), "fixture {fid}");
            }
        }
    }

    #[test]
    fn long_run_covariance_matches_population() {
        for id in 1..=8 {
            let spec = fixture(id).unwrap();
            let truth = population_truth(&spec).unwrap();
            let x = simulate(&spec, 100_000, 100 + id as u64).unwrap();
            let err = relative_error(&sample_covariance(&x), &truth.gamma);
            assert!(err < 0.02, "fixture {id}: relative error {err}");
        }
    }
}
