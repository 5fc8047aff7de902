//! Asymptotic covariances of sample eigenvalues, eigenvectors and
//! proportions of variation for a Gaussian stationary series.
//!
//! Three dependence assumptions are supported. `Ad` uses the whole rotated
//! spectrum `g(ω) = Φᵀf(ω)Φ`, `Dag` keeps only its diagonal, and `Ind`
//! treats the observations as independent (closed form, no spectrum). The
//! same engines serve model-implied spectra and smoothed-periodogram
//! plug-in estimates.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::eigen::{eigendecompose, EigenDecomposition, DEFAULT_GAP_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::series::{sample_covariance, MultivariateSeries};
use crate::spectral::{daniell_smooth, quadrature_weights, raw_periodogram, rotate_spectrum, SpectralDensityEstimate};
use crate::stats::ceil_cbrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assumption {
    /// Arbitrary temporal and cross-sectional dependence.
    Ad,
    /// Principal-component series uncorrelated at every lag.
    Dag,
    /// Independent observations.
    Ind,
}

impl Assumption {
    pub const ALL: [Assumption; 3] = [Assumption::Ad, Assumption::Dag, Assumption::Ind];

    pub fn name(self) -> &'static str {
        match self {
            Assumption::Ad => "AD",
            Assumption::Dag => "DAG",
            Assumption::Ind => "IND",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ad" => Some(Assumption::Ad),
            "dag" => Some(Assumption::Dag),
            "ind" => Some(Assumption::Ind),
            _ => None,
        }
    }
}

/// Limiting covariances of `√n(l − λ)`, `√n(a_k − φ_k)` and `√n(r_k − γ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenAsymptotics {
    pub assumption: Assumption,
    /// The decomposition the formulas were evaluated at.
    pub decomposition: EigenDecomposition,
    /// Covariance of `√n(l − λ)`.
    pub b: Matrix,
    /// `Σ_k`, covariance of `√n(a_k − φ_k)`, one per component.
    pub sigma: Vec<Matrix>,
    /// `η_k²`, variance of `√n(r_k − γ_k)`; the last entry is exactly zero.
    pub eta_sq: Vec<f64>,
    /// Sample size used to turn the limits into standard errors.
    pub scale_n: Option<usize>,
}

/// Per-sample standard deviations. `sd_loadings[(k, k′)]` is the sd of the
/// `k′`-th entry of eigenvector `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardErrors {
    pub sd_values: Vec<f64>,
    pub sd_loadings: Matrix,
    pub sd_r: Vec<f64>,
}

impl EigenAsymptotics {
    pub fn with_scale(mut self, n: usize) -> Self {
        self.scale_n = Some(n);
        self
    }

    pub fn dim(&self) -> usize {
        self.eta_sq.len()
    }

    pub fn eta(&self) -> Vec<f64> {
        self.eta_sq.iter().map(|v| libm::sqrt(v.max(0.0))).collect()
    }

    pub fn standard_errors(&self) -> Result<StandardErrors> {
        let n = self.scale_n.ok_or(Error::MissingScale)? as f64;
        Ok(standard_errors_at(self, n))
    }
}

fn standard_errors_at(asym: &EigenAsymptotics, n: f64) -> StandardErrors {
    let p = asym.dim();
    let root = |v: f64| libm::sqrt(v.max(0.0) / n);
    StandardErrors {
        sd_values: (0..p).map(|i| root(asym.b[(i, i)])).collect(),
        sd_loadings: Matrix::from_fn(p, p, |k, kk| root(asym.sigma[k][(kk, kk)])),
        sd_r: asym.eta_sq.iter().map(|&v| root(v)).collect(),
    }
}

pub fn standard_errors(asym: &EigenAsymptotics) -> Result<StandardErrors> {
    asym.standard_errors()
}

/// `β_i(k) = (1(i ≤ k) − γ_k)/tr`, zero-based `i`, `k`.
fn beta(values: &[f64]) -> Matrix {
    let p = values.len();
    let total: f64 = values.iter().sum();
    let mut gamma = Vec::with_capacity(p);
    let mut acc = 0.0;
    for v in values {
        acc += v;
        gamma.push(acc / total);
    }
    // Rows are k, columns are i.
    Matrix::from_fn(p, p, |k, i| {
        let ind = if i <= k { 1.0 } else { 0.0 };
        (ind - gamma[k]) / total
    })
}

/// `η_k² = Σ_ij B_ij β_i(k) β_j(k)`, with `η_p = 0` set directly.
fn eta_squared(b: &Matrix, values: &[f64]) -> Vec<f64> {
    let p = values.len();
    let beta = beta(values);
    (0..p)
        .map(|k| {
            if k == p - 1 {
                return 0.0;
            }
            let row = beta.row(k);
            let mut s = 0.0;
            for i in 0..p {
                for j in 0..p {
                    s += b[(i, j)] * row[i] * row[j];
                }
            }
            s.max(0.0)
        })
        .collect()
}

/// `Σ_k = Σ_{i,j≠k} c_ij φ_i φ_jᵀ` from a coefficient matrix `c`.
fn assemble_sigma(vectors: &Matrix, coef: &Matrix) -> Matrix {
    let p = vectors.rows();
    let mut tmp = Matrix::zeros(p, p);
    // tmp = Φ c
    for a in 0..p {
        for j in 0..p {
            tmp.row_mut(a)[j] = (0..p).map(|i| vectors[(a, i)] * coef[(i, j)]).sum();
        }
    }
    let out = Matrix::from_fn(p, p, |a, b| (0..p).map(|j| tmp[(a, j)] * vectors[(b, j)]).sum());
    out.symmetrized()
}

/// Quadrature weights and per-entry series of a spectrum.
struct SpectrumTable {
    weights: Vec<f64>,
    entries: Vec<Vec<Complex64>>,
    p: usize,
}

impl SpectrumTable {
    fn new(g: &SpectralDensityEstimate) -> Result<Self> {
        let weights = quadrature_weights(&g.frequencies())?;
        let p = g.dim();
        let mut entries = vec![Vec::with_capacity(g.grid_len()); p * p];
        for m in g.matrices() {
            for (slot, v) in entries.iter_mut().zip(m.as_slice()) {
                slot.push(*v);
            }
        }
        Ok(Self { weights, entries, p })
    }

    #[inline]
    fn entry(&self, a: usize, b: usize) -> &[Complex64] {
        &self.entries[a * self.p + b]
    }

    /// `Re ∫ g_ab conj(g_cd) dω`.
    fn product(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let x = self.entry(a, b);
        let y = self.entry(c, d);
        let mut acc = 0.0;
        for ((u, v), w) in x.iter().zip(y).zip(&self.weights) {
            // Re(u · conj v)
            acc += w * (u.re * v.re + u.im * v.im);
        }
        acc
    }
}

/// `𝒞(u_ij, u_kl) = 2π ∫ {g_ik conj(g_jl) + g_il conj(g_jk)} dω` for
/// Gaussian innovations. Zero-based indices.
pub fn cov_u_gaussian(g: &SpectralDensityEstimate, i: usize, j: usize, k: usize, l: usize) -> Result<f64> {
    let p = g.dim();
    if [i, j, k, l].iter().any(|&x| x >= p) {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: [i, j, k, l].into_iter().max().unwrap_or(0) + 1,
        });
    }
    let table = SpectrumTable::new(g)?;
    Ok(2.0 * PI * (table.product(i, k, j, l) + table.product(i, l, j, k)))
}

fn check_inputs(g: &SpectralDensityEstimate, decomp: &EigenDecomposition, gap_tolerance: f64) -> Result<()> {
    if g.dim() != decomp.dim() {
        return Err(Error::DimensionMismatch {
            expected: decomp.dim(),
            found: g.dim(),
        });
    }
    decomp.check_nondegenerate(gap_tolerance)
}

pub fn asymptotics_ad(g: &SpectralDensityEstimate, decomp: &EigenDecomposition) -> Result<EigenAsymptotics> {
    asymptotics_ad_with_tolerance(g, decomp, DEFAULT_GAP_TOLERANCE)
}

pub fn asymptotics_ad_with_tolerance(
    g: &SpectralDensityEstimate,
    decomp: &EigenDecomposition,
    gap_tolerance: f64,
) -> Result<EigenAsymptotics> {
    check_inputs(g, decomp, gap_tolerance)?;
    let table = SpectrumTable::new(g)?;
    let p = decomp.dim();
    let lambda = decomp.values();

    let mut b = Matrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let v = 4.0 * PI * table.product(i, j, i, j);
            b.row_mut(i)[j] = v;
            b.row_mut(j)[i] = v;
        }
    }

    let sigma = (0..p)
        .map(|k| {
            let mut coef = Matrix::zeros(p, p);
            for i in (0..p).filter(|&i| i != k) {
                for j in (0..p).filter(|&j| j != k) {
                    let c = 2.0 * PI * (table.product(i, j, k, k) + table.product(i, k, k, j));
                    coef.row_mut(i)[j] = c / ((lambda[k] - lambda[i]) * (lambda[k] - lambda[j]));
                }
            }
            assemble_sigma(decomp.vectors(), &coef.symmetrized())
        })
        .collect();

    let eta_sq = eta_squared(&b, lambda);
    Ok(EigenAsymptotics {
        assumption: Assumption::Ad,
        decomposition: decomp.clone(),
        b,
        sigma,
        eta_sq,
        scale_n: None,
    })
}

pub fn asymptotics_dag(g: &SpectralDensityEstimate, decomp: &EigenDecomposition) -> Result<EigenAsymptotics> {
    asymptotics_dag_with_tolerance(g, decomp, DEFAULT_GAP_TOLERANCE)
}

pub fn asymptotics_dag_with_tolerance(
    g: &SpectralDensityEstimate,
    decomp: &EigenDecomposition,
    gap_tolerance: f64,
) -> Result<EigenAsymptotics> {
    check_inputs(g, decomp, gap_tolerance)?;
    let table = SpectrumTable::new(g)?;
    let p = decomp.dim();
    let lambda = decomp.values();

    let b = Matrix::from_diagonal(&(0..p).map(|i| 4.0 * PI * table.product(i, i, i, i)).collect::<Vec<_>>());
    let sigma = (0..p)
        .map(|k| {
            let diag: Vec<f64> = (0..p)
                .map(|i| {
                    if i == k {
                        0.0
                    } else {
                        let d = lambda[k] - lambda[i];
                        2.0 * PI * table.product(k, k, i, i) / (d * d)
                    }
                })
                .collect();
            assemble_sigma(decomp.vectors(), &Matrix::from_diagonal(&diag))
        })
        .collect();
    let eta_sq = eta_squared(&b, lambda);
    Ok(EigenAsymptotics {
        assumption: Assumption::Dag,
        decomposition: decomp.clone(),
        b,
        sigma,
        eta_sq,
        scale_n: None,
    })
}

pub fn asymptotics_ind(decomp: &EigenDecomposition) -> Result<EigenAsymptotics> {
    asymptotics_ind_with_tolerance(decomp, DEFAULT_GAP_TOLERANCE)
}

pub fn asymptotics_ind_with_tolerance(decomp: &EigenDecomposition, gap_tolerance: f64) -> Result<EigenAsymptotics> {
    decomp.check_nondegenerate(gap_tolerance)?;
    let p = decomp.dim();
    let lambda = decomp.values();
    let b = Matrix::from_diagonal(&lambda.iter().map(|l| 2.0 * l * l).collect::<Vec<_>>());
    let sigma = (0..p)
        .map(|k| {
            let diag: Vec<f64> = (0..p)
                .map(|i| {
                    if i == k {
                        0.0
                    } else {
                        let d = lambda[k] - lambda[i];
                        lambda[k] * lambda[i] / (d * d)
                    }
                })
                .collect();
            assemble_sigma(decomp.vectors(), &Matrix::from_diagonal(&diag))
        })
        .collect();
    let eta_sq = eta_squared(&b, lambda);
    Ok(EigenAsymptotics {
        assumption: Assumption::Ind,
        decomposition: decomp.clone(),
        b,
        sigma,
        eta_sq,
        scale_n: None,
    })
}

/// Dispatches on `assumption`; `g` is ignored under `Ind`.
pub fn asymptotics(
    assumption: Assumption,
    g: &SpectralDensityEstimate,
    decomp: &EigenDecomposition,
) -> Result<EigenAsymptotics> {
    match assumption {
        Assumption::Ad => asymptotics_ad(g, decomp),
        Assumption::Dag => asymptotics_dag(g, decomp),
        Assumption::Ind => asymptotics_ind(decomp),
    }
}

/// Default smoothing bandwidth `⌈n^{1/3}⌉`.
pub fn default_bandwidth(n: usize) -> usize {
    ceil_cbrt(n).max(1)
}

/// Largest bandwidth accepted for a series of length `n`.
pub fn max_bandwidth(n: usize) -> usize {
    n / 4
}

/// Smoothed periodogram of `series` rotated into the basis of `decomp`.
pub fn estimated_rotated_spectrum(
    series: &MultivariateSeries,
    decomp: &EigenDecomposition,
    bandwidth: usize,
) -> Result<SpectralDensityEstimate> {
    let n = series.len();
    let max = max_bandwidth(n);
    if bandwidth < 1 || bandwidth > max {
        return Err(Error::BandwidthOutOfRange { bandwidth, max });
    }
    let raw = raw_periodogram(series, n - 1)?;
    let smooth = daniell_smooth(&raw, bandwidth)?;
    rotate_spectrum(&smooth, decomp.vectors())
}

/// Plug-in estimate: sample eigendecomposition, smoothed periodogram
/// (bandwidth defaults to `⌈n^{1/3}⌉`), rotation, then the chosen engine.
/// The result carries `scale_n = n`.
pub fn direct_estimate(
    series: &MultivariateSeries,
    assumption: Assumption,
    bandwidth: Option<usize>,
) -> Result<EigenAsymptotics> {
    let decomp = eigendecompose(&sample_covariance(series))?;
    direct_estimate_at(series, &decomp, assumption, bandwidth)
}

/// As [`direct_estimate`] with a precomputed sample decomposition (for
/// example one whose signs were aligned to a reference).
pub fn direct_estimate_at(
    series: &MultivariateSeries,
    decomp: &EigenDecomposition,
    assumption: Assumption,
    bandwidth: Option<usize>,
) -> Result<EigenAsymptotics> {
    let n = series.len();
    decomp.check_nondegenerate(DEFAULT_GAP_TOLERANCE)?;
    let asym = match assumption {
        Assumption::Ind => asymptotics_ind(decomp)?,
        _ => {
            let m = bandwidth.unwrap_or_else(|| default_bandwidth(n));
            let g = estimated_rotated_spectrum(series, decomp, m)?;
            asymptotics(assumption, &g, decomp)?
        }
    };
    Ok(asym.with_scale(n))
}
