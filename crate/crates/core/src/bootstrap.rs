//! Moving block bootstrap standard errors for loadings, eigenvalues and
//! proportions of variation.
//!
//! Each replicate concatenates `τ = ⌈n/ρ⌉` blocks of `ρ` consecutive
//! observations with starts drawn uniformly from the fully contained
//! positions, truncates to length `n`, and recomputes the decomposition.
//! Replicate `r` draws from the ChaCha stream `(seed, r)`, so results do not
//! depend on scheduling.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::Rng;

use crate::dgp::stream_rng;
use crate::eigen::{align_signs, eigendecompose, EigenDecomposition, DEFAULT_GAP_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::series::{sample_covariance, MultivariateSeries};
use crate::stats::{ceil_cbrt, mean_and_sd, ordered_map};

/// Replicate failures tolerated before the whole run is aborted.
pub const MAX_FAILURE_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MbbConfig {
    pub block_size: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl MbbConfig {
    pub fn new(block_size: usize, replicates: usize, seed: u64) -> Self {
        Self {
            block_size,
            replicates,
            seed,
        }
    }

    /// Block size `⌈n^{1/3}⌉`.
    pub fn with_default_block(n: usize, replicates: usize, seed: u64) -> Self {
        Self::new(default_block_size(n), replicates, seed)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.block_size < 1 || self.block_size > n {
            return Err(Error::InvalidBlockSize {
                block_size: self.block_size,
                n,
            });
        }
        if self.replicates < 2 {
            return Err(Error::TooFewReplicates {
                replicates: self.replicates,
                min: 2,
            });
        }
        Ok(())
    }

    /// Number of blocks per replicate, `τ = ⌈n/ρ⌉`.
    pub fn blocks(&self, n: usize) -> usize {
        n.div_ceil(self.block_size)
    }
}

pub fn default_block_size(n: usize) -> usize {
    ceil_cbrt(n).max(1)
}

/// How replicate eigenvectors are signed before taking standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    /// Match the original-sample eigenvectors (the estimator).
    Reference,
    /// Keep each replicate's own sign convention. Only useful to show why
    /// alignment is needed.
    SignConventionOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    /// `sd_loadings[(k, k′)]`: sd of entry `k′` of eigenvector `k`.
    pub sd_loadings: Matrix,
    pub sd_values: Vec<f64>,
    pub sd_r: Vec<f64>,
    pub replicate_count: usize,
    pub failed_replicates: usize,
    /// Original-sample decomposition used as the alignment reference.
    pub point: EigenDecomposition,
}

/// Block start positions (zero-based) for one replicate.
pub fn block_starts(n: usize, config: &MbbConfig, replicate_index: u64) -> Result<Vec<usize>> {
    if config.block_size < 1 || config.block_size > n {
        return Err(Error::InvalidBlockSize {
            block_size: config.block_size,
            n,
        });
    }
    let mut rng = stream_rng(config.seed, replicate_index);
    let last_start = n - config.block_size;
    Ok((0..config.blocks(n)).map(|_| rng.gen_range(0..=last_start)).collect())
}

pub fn mbb_resample(series: &MultivariateSeries, config: &MbbConfig, replicate_index: u64) -> Result<MultivariateSeries> {
    let n = series.len();
    let p = series.dim();
    let starts = block_starts(n, config, replicate_index)?;
    let src = series.data().as_slice();
    let mut out = Vec::with_capacity(n * p);
    'outer: for s in starts {
        for t in s..s + config.block_size {
            if out.len() == n * p {
                break 'outer;
            }
            out.extend_from_slice(&src[t * p..(t + 1) * p]);
        }
    }
    MultivariateSeries::new(Matrix::from_row_major(n, p, out))
}

struct Replicate {
    values: Vec<f64>,
    vectors: Matrix,
    r: Vec<f64>,
}

fn run_replicate(
    series: &MultivariateSeries,
    config: &MbbConfig,
    index: u64,
    reference: &EigenDecomposition,
    alignment: Alignment,
) -> Result<Replicate> {
    let x = mbb_resample(series, config, index)?;
    let d = eigendecompose(&sample_covariance(&x))?;
    let d = match alignment {
        Alignment::Reference => align_signs(&d, reference.vectors())?,
        Alignment::SignConventionOnly => d,
    };
    let values = d.values().to_vec();
    let total: f64 = values.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NonPositiveEigenvalue {
            index: 0,
            value: total,
        });
    }
    let mut acc = 0.0;
    let r = values
        .iter()
        .map(|v| {
            acc += v;
            acc / total
        })
        .collect();
    Ok(Replicate {
        values,
        vectors: d.vectors().clone(),
        r,
    })
}

pub fn bootstrap_sd(series: &MultivariateSeries, config: &MbbConfig) -> Result<BootstrapResult> {
    bootstrap_sd_with(series, config, Alignment::Reference)
}

pub fn bootstrap_sd_with(
    series: &MultivariateSeries,
    config: &MbbConfig,
    alignment: Alignment,
) -> Result<BootstrapResult> {
    let n = series.len();
    let p = series.dim();
    config.validate(n)?;
    let point = eigendecompose(&sample_covariance(series))?;
    point.check_nondegenerate(DEFAULT_GAP_TOLERANCE)?;

    let outcomes = ordered_map(config.replicates, |r| run_replicate(series, config, r as u64, &point, alignment));
    let total = outcomes.len();
    let mut first_error = None;
    let mut reps = Vec::with_capacity(total);
    for o in outcomes {
        match o {
            Ok(rep) => reps.push(rep),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let failed = total - reps.len();
    if failed > 0 && (failed as f64 > MAX_FAILURE_RATE * total as f64 || reps.len() < 2) {
        return Err(Error::ReplicateFailures {
            failed,
            total,
            first: Box::new(first_error.unwrap_or(Error::InvalidParameter("replicate failure"))),
        });
    }

    let sd_of = |f: &dyn Fn(&Replicate) -> f64| {
        let column: Vec<f64> = reps.iter().map(f).collect();
        mean_and_sd(&column).1
    };
    // Eigenvector k is column k of `vectors`; entry k′ is row k′.
    let sd_loadings = Matrix::from_fn(p, p, |k, kk| sd_of(&|rep| rep.vectors[(kk, k)]));
    let sd_values = (0..p).map(|i| sd_of(&|rep| rep.values[i])).collect();
    let mut sd_r: Vec<f64> = (0..p).map(|k| sd_of(&|rep| rep.r[k])).collect();
    // r_p is one in every replicate.
    sd_r[p - 1] = 0.0;
    Ok(BootstrapResult {
        sd_loadings,
        sd_values,
        sd_r,
        replicate_count: reps.len(),
        failed_replicates: failed,
        point,
    })
}
