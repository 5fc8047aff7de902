//! Monte Carlo harness comparing standard-error methods against the
//! empirical distribution (ED) of the estimates.
//!
//! Methods are the three theoretical engines evaluated at the population
//! model (`AD`, `DAG`, `IND`), plug-in direct estimation under `AD` averaged
//! over replicates (`DE`), and the moving block bootstrap averaged over
//! replicates (`BE`). `DE` and `BE` run on the same simulated series that
//! feed the ED.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::asymcov::{asymptotics, direct_estimate_at, Assumption, EigenAsymptotics, StandardErrors};
use crate::bootstrap::{bootstrap_sd, default_block_size, MbbConfig};
use crate::dgp::{derive_seed, fixture, population_truth, simulate_with_rng, stream_rng, DgpSpec, PopulationTruth};
use crate::eigen::{align_signs, eigendecompose};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::series::sample_covariance;
use crate::spectral::{model_spectral_density, rotate_spectrum, MODEL_GRID_SIZE};
use crate::stats::{mean_and_sd, ordered_map};

/// Replicate failures tolerated before a run is aborted.
pub const MAX_FAILURE_RATE: f64 = 0.01;

/// Tag mixed into the seed for per-replicate bootstrap streams.
const BOOTSTRAP_TAG: u64 = 0xb007;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ad,
    Dag,
    Ind,
    /// Direct (plug-in) estimation under `AD`, averaged over replicates.
    De,
    /// Moving block bootstrap, averaged over replicates.
    Be,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Ad, Method::Dag, Method::Ind, Method::De, Method::Be];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ad => "AD",
            Method::Dag => "DAG",
            Method::Ind => "IND",
            Method::De => "DE",
            Method::Be => "BE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s))
    }

    fn assumption(self) -> Option<Assumption> {
        match self {
            Method::Ad => Some(Assumption::Ad),
            Method::Dag => Some(Assumption::Dag),
            Method::Ind => Some(Assumption::Ind),
            Method::De | Method::Be => None,
        }
    }
}

/// Sizes for a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonConfig {
    pub n: usize,
    pub mc_replicates: usize,
    pub boot_replicates: usize,
    /// Bootstrap block length; `None` means `⌈n^{1/3}⌉`.
    pub block_size: Option<usize>,
    /// Daniell bandwidth for `DE`; `None` means `⌈n^{1/3}⌉`.
    pub bandwidth: Option<usize>,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub grid_size: usize,
}

impl ComparisonConfig {
    /// Laptop-sized run: `n = 2000`, `N = 500`, `R = 500`, block length 10.
    pub fn desk(seed: u64) -> Self {
        Self {
            n: 2000,
            mc_replicates: 500,
            boot_replicates: 500,
            block_size: Some(10),
            bandwidth: None,
            seed,
            methods: Method::ALL.to_vec(),
            grid_size: MODEL_GRID_SIZE,
        }
    }

    /// Full-size run: `n = 5000`, `N = 2000`, `R = 500`.
    pub fn full(seed: u64) -> Self {
        Self {
            n: 5000,
            mc_replicates: 2000,
            boot_replicates: 500,
            block_size: None,
            bandwidth: None,
            seed,
            methods: Method::ALL.to_vec(),
            grid_size: MODEL_GRID_SIZE,
        }
    }

    pub fn with_methods(mut self, methods: &[Method]) -> Self {
        self.methods = methods.to_vec();
        self
    }

    fn wants(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }
}

/// Standard deviations produced by one method, all on the per-sample scale.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSds {
    pub method: Method,
    pub sd_values: Vec<f64>,
    /// `[(pc, variable)]`.
    pub sd_loadings: Matrix,
    pub sd_r: Vec<f64>,
}

impl MethodSds {
    fn from_errors(method: Method, se: &StandardErrors) -> Self {
        Self {
            method,
            sd_values: se.sd_values.clone(),
            sd_loadings: se.sd_loadings.clone(),
            sd_r: se.sd_r.clone(),
        }
    }
}

/// Empirical distribution of the estimates over `N` simulated samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub n: usize,
    pub replicates: usize,
    pub failed: usize,
    /// `n·Cov(l)` across replicates, the covariance of `√n(l − λ)`.
    pub empirical_cov_values: Matrix,
    pub empirical_sd_values: Vec<f64>,
    /// `[(pc, variable)]`, loadings aligned to the population eigenvectors.
    pub empirical_sd_loadings: Matrix,
    pub empirical_sd_r: Vec<f64>,
    pub mean_values: Vec<f64>,
    pub mean_loadings: Matrix,
    pub mean_r: Vec<f64>,
}

impl MonteCarloSummary {
    pub fn as_method_sds(&self) -> MethodSds {
        MethodSds {
            method: Method::Ad,
            sd_values: self.empirical_sd_values.clone(),
            sd_loadings: self.empirical_sd_loadings.clone(),
            sd_r: self.empirical_sd_r.clone(),
        }
    }
}

/// Metrics of one method against the ED.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodMetrics {
    pub method: Method,
    pub sds: MethodSds,
    /// `(σ_method(r_k) − σ_ED(r_k))·100` for `k < p`.
    pub delta_r: Vec<f64>,
    /// `(σ_method(a_kk′)/σ_ED(a_kk′) − 1)·100`; NaN where the ED sd is zero.
    pub delta_star: Matrix,
    /// Row means of `|Δ*|`.
    pub delta_tilde: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub label: String,
    pub rows: Vec<MethodMetrics>,
}

impl MetricTable {
    pub fn get(&self, method: Method) -> Option<&MethodMetrics> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// Largest `|Δ̃ − mean|Δ*||` over all rows; zero up to roundoff.
    pub fn consistency_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for row in &self.rows {
            for (a, b) in row.delta_tilde.iter().zip(delta_tilde(&row.delta_star)) {
                if a.is_finite() && b.is_finite() {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        worst
    }
}

/// One plot-data point: `series` names the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpComparison {
    pub label: String,
    pub truth: PopulationTruth,
    pub summary: MonteCarloSummary,
    /// Theoretical covariances scaled to the run's `n`.
    pub theoretical: Vec<EigenAsymptotics>,
    pub table: MetricTable,
    pub plot: Vec<PlotPoint>,
}

pub fn delta_r(method_sd: &[f64], empirical_sd: &[f64]) -> Result<Vec<f64>> {
    if method_sd.len() != empirical_sd.len() {
        return Err(Error::DimensionMismatch {
            expected: empirical_sd.len(),
            found: method_sd.len(),
        });
    }
    let p = method_sd.len();
    Ok((0..p.saturating_sub(1)).map(|k| (method_sd[k] - empirical_sd[k]) * 100.0).collect())
}

pub fn delta_star(method_sd: &Matrix, empirical_sd: &Matrix) -> Result<Matrix> {
    if method_sd.rows() != empirical_sd.rows() || method_sd.cols() != empirical_sd.cols() {
        return Err(Error::DimensionMismatch {
            expected: empirical_sd.cols(),
            found: method_sd.cols(),
        });
    }
    Ok(Matrix::from_fn(method_sd.rows(), method_sd.cols(), |i, j| {
        let e = empirical_sd[(i, j)];
        if e > 0.0 {
            (method_sd[(i, j)] / e - 1.0) * 100.0
        } else {
            f64::NAN
        }
    }))
}

pub fn delta_tilde(delta_star: &Matrix) -> Vec<f64> {
    (0..delta_star.rows())
        .map(|k| {
            let row = delta_star.row(k);
            row.iter().map(|v| v.abs()).sum::<f64>() / row.len() as f64
        })
        .collect()
}

pub fn method_metrics(sds: MethodSds, ed: &MonteCarloSummary) -> Result<MethodMetrics> {
    let delta_r = delta_r(&sds.sd_r, &ed.empirical_sd_r)?;
    let delta_star = delta_star(&sds.sd_loadings, &ed.empirical_sd_loadings)?;
    let delta_tilde = delta_tilde(&delta_star);
    Ok(MethodMetrics {
        method: sds.method,
        sds,
        delta_r,
        delta_star,
        delta_tilde,
    })
}

/// Per-replicate record.
struct ReplicateRecord {
    values: Vec<f64>,
    /// `[(pc, variable)]`.
    loadings: Matrix,
    r: Vec<f64>,
    de: Option<Result<StandardErrors>>,
    be: Option<Result<MethodSds>>,
}

struct ReplicatePlan<'a> {
    spec: &'a DgpSpec,
    truth: &'a PopulationTruth,
    n: usize,
    seed: u64,
    direct: bool,
    bandwidth: Option<usize>,
    bootstrap: Option<(usize, usize)>,
}

fn cumulative_share(values: &[f64]) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    let mut acc = 0.0;
    values
        .iter()
        .map(|v| {
            acc += v;
            acc / total
        })
        .collect()
}

fn run_replicate(plan: &ReplicatePlan<'_>, index: usize) -> Result<ReplicateRecord> {
    let mut rng = stream_rng(plan.seed, index as u64);
    let x = simulate_with_rng(plan.spec, plan.n, &mut rng)?;
    let d = eigendecompose(&sample_covariance(&x))?;
    let d = align_signs(&d, plan.truth.decomp.vectors())?;
    let values = d.values().to_vec();
    let r = cumulative_share(&values);
    let de = plan.direct.then(|| {
        direct_estimate_at(&x, &d, Assumption::Ad, plan.bandwidth).and_then(|a| a.standard_errors())
    });
    let be = plan.bootstrap.map(|(block, reps)| {
        let cfg = MbbConfig::new(block, reps, derive_seed(plan.seed, BOOTSTRAP_TAG ^ ((index as u64) << 16)));
        bootstrap_sd(&x, &cfg).map(|res| MethodSds {
            method: Method::Be,
            sd_values: res.sd_values,
            sd_loadings: res.sd_loadings,
            sd_r: res.sd_r,
        })
    });
    Ok(ReplicateRecord {
        values,
        loadings: d.loadings(),
        r,
        de,
        be,
    })
}

fn check_failures<T>(outcomes: &[Result<T>], total: usize) -> Result<usize> {
    let failed = outcomes.iter().filter(|o| o.is_err()).count();
    let ok = total - failed;
    if failed > 0 && (failed as f64 > MAX_FAILURE_RATE * total as f64 || ok < 2) {
        let first = outcomes.iter().find_map(|o| o.as_ref().err()).cloned().unwrap_or(Error::InvalidParameter("replicate failure"));
        return Err(Error::ReplicateFailures {
            failed,
            total,
            first: Box::new(first),
        });
    }
    Ok(failed)
}

fn summarize(records: &[&ReplicateRecord], n: usize, failed: usize) -> MonteCarloSummary {
    let p = records[0].values.len();
    let stats_of = |f: &dyn Fn(&ReplicateRecord) -> f64| {
        let column: Vec<f64> = records.iter().map(|r| f(r)).collect();
        mean_and_sd(&column)
    };
    let value_stats: Vec<(f64, f64)> = (0..p).map(|i| stats_of(&|r| r.values[i])).collect();
    let loading_stats: Vec<(f64, f64)> = (0..p * p).map(|e| stats_of(&|r| r.loadings.as_slice()[e])).collect();
    let r_stats: Vec<(f64, f64)> = (0..p).map(|k| stats_of(&|r| r.r[k])).collect();

    let count = records.len() as f64;
    let means: Vec<f64> = value_stats.iter().map(|s| s.0).collect();
    let mut cov = Matrix::zeros(p, p);
    for rec in records {
        for i in 0..p {
            for j in 0..p {
                cov.row_mut(i)[j] += (rec.values[i] - means[i]) * (rec.values[j] - means[j]);
            }
        }
    }
    let cov = cov.scale(n as f64 / (count - 1.0)).symmetrized();
    let mut sd_r: Vec<f64> = r_stats.iter().map(|s| s.1).collect();
    sd_r[p - 1] = 0.0;
    MonteCarloSummary {
        n,
        replicates: records.len(),
        failed,
        empirical_cov_values: cov,
        empirical_sd_values: value_stats.iter().map(|s| s.1).collect(),
        empirical_sd_loadings: Matrix::from_row_major(p, p, loading_stats.iter().map(|s| s.1).collect()),
        empirical_sd_r: sd_r,
        mean_values: means,
        mean_loadings: Matrix::from_row_major(p, p, loading_stats.iter().map(|s| s.0).collect()),
        mean_r: r_stats.iter().map(|s| s.0).collect(),
    }
}

fn average_sds(method: Method, items: &[MethodSds]) -> MethodSds {
    let p = items[0].sd_values.len();
    let count = items.len() as f64;
    let mut sd_values = vec![0.0; p];
    let mut sd_r = vec![0.0; p];
    let mut sd_loadings = Matrix::zeros(p, p);
    for it in items {
        for i in 0..p {
            sd_values[i] += it.sd_values[i] / count;
            sd_r[i] += it.sd_r[i] / count;
        }
        for (acc, v) in sd_loadings.as_mut_slice().iter_mut().zip(it.sd_loadings.as_slice()) {
            *acc += v / count;
        }
    }
    MethodSds {
        method,
        sd_values,
        sd_loadings,
        sd_r,
    }
}

/// Empirical distribution only.
pub fn run_monte_carlo(spec: &DgpSpec, n: usize, replicates: usize, seed: u64) -> Result<MonteCarloSummary> {
    if replicates < 2 {
        return Err(Error::TooFewReplicates { replicates, min: 2 });
    }
    let truth = population_truth(spec)?;
    let plan = ReplicatePlan {
        spec,
        truth: &truth,
        n,
        seed,
        direct: false,
        bandwidth: None,
        bootstrap: None,
    };
    let outcomes = ordered_map(replicates, |r| run_replicate(&plan, r));
    let failed = check_failures(&outcomes, replicates)?;
    let records: Vec<&ReplicateRecord> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    Ok(summarize(&records, n, failed))
}

/// Theoretical covariances at the population model, scaled to `n`.
pub fn theoretical_asymptotics(
    spec: &DgpSpec,
    truth: &PopulationTruth,
    n: usize,
    grid_size: usize,
) -> Result<Vec<EigenAsymptotics>> {
    let f = model_spectral_density(spec, grid_size)?;
    let g = rotate_spectrum(&f, truth.decomp.vectors())?;
    Assumption::ALL
        .iter()
        .map(|&a| asymptotics(a, &g, &truth.decomp).map(|x| x.with_scale(n)))
        .collect()
}

/// Full comparison for one model.
pub fn compare_spec(label: &str, spec: &DgpSpec, config: &ComparisonConfig) -> Result<DgpComparison> {
    if config.mc_replicates < 2 {
        return Err(Error::TooFewReplicates {
            replicates: config.mc_replicates,
            min: 2,
        });
    }
    let n = config.n;
    let truth = population_truth(spec)?;
    let theoretical = theoretical_asymptotics(spec, &truth, n, config.grid_size)?;
    let block = config.block_size.unwrap_or_else(|| default_block_size(n));
    let plan = ReplicatePlan {
        spec,
        truth: &truth,
        n,
        seed: config.seed,
        direct: config.wants(Method::De),
        bandwidth: config.bandwidth,
        bootstrap: config.wants(Method::Be).then_some((block, config.boot_replicates)),
    };
    let outcomes = ordered_map(config.mc_replicates, |r| run_replicate(&plan, r));
    let failed = check_failures(&outcomes, config.mc_replicates)?;
    let records: Vec<&ReplicateRecord> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let summary = summarize(&records, n, failed);

    let mut rows = Vec::new();
    for &method in &config.methods {
        let sds = match method.assumption() {
            Some(a) => {
                let asym = theoretical.iter().find(|t| t.assumption == a).expect("all assumptions computed");
                MethodSds::from_errors(method, &asym.standard_errors()?)
            }
            None => {
                let results: Vec<Result<MethodSds>> = records
                    .iter()
                    .map(|rec| match method {
                        Method::De => match rec.de.as_ref().expect("planned") {
                            Ok(se) => Ok(MethodSds::from_errors(Method::De, se)),
                            Err(e) => Err(e.clone()),
                        },
                        _ => rec.be.as_ref().expect("planned").clone(),
                    })
                    .collect();
                check_failures(&results, results.len())?;
                let ok: Vec<MethodSds> = results.into_iter().filter_map(|r| r.ok()).collect();
                average_sds(method, &ok)
            }
        };
        rows.push(method_metrics(sds, &summary)?);
    }
    let table = MetricTable {
        label: String::from(label),
        rows,
    };
    let plot = plot_data(&summary, &theoretical, &table);
    Ok(DgpComparison {
        label: String::from(label),
        truth,
        summary,
        theoretical,
        table,
        plot,
    })
}

/// Comparisons for fixture ids; an empty list gives an empty result.
pub fn run_comparison(dgp_ids: &[u32], config: &ComparisonConfig) -> Result<Vec<DgpComparison>> {
    dgp_ids
        .iter()
        .map(|&id| {
            let spec = fixture(id)?;
            let mut cfg = config.clone();
            cfg.seed = derive_seed(config.seed, id as u64);
            compare_spec(&format!("DGP{id}"), &spec, &cfg)
        })
        .collect()
}

/// Vectorized `Cov(√n l_k, √n l_k′)` curves for ED and each engine, and the
/// vectorized `Δ*` of every method. `x` is the one-based position `k·p + k′ + 1`.
pub fn plot_data(summary: &MonteCarloSummary, theoretical: &[EigenAsymptotics], table: &MetricTable) -> Vec<PlotPoint> {
    let mut out = Vec::new();
    let mut push_matrix = |name: String, m: &Matrix| {
        for (i, v) in m.as_slice().iter().enumerate() {
            out.push(PlotPoint {
                series: name.clone(),
                x: (i + 1) as f64,
                y: *v,
            });
        }
    };
    push_matrix(String::from("cov_values/ED"), &summary.empirical_cov_values);
    for t in theoretical {
        push_matrix(format!("cov_values/{}", t.assumption.name()), &t.b);
    }
    for row in &table.rows {
        push_matrix(format!("delta_star/{}", row.method.name()), &row.delta_star);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::NoiseSpec;

    fn iid_spec(variances: &[f64]) -> DgpSpec {
        DgpSpec::vma(
            Vec::new(),
            NoiseSpec::Gaussian {
                mean: vec![0.0; variances.len()],
                covariance: Matrix::from_diagonal(variances),
            },
        )
        .unwrap()
    }

    #[test]
    fn metric_examples() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(delta_star(&a, &a).unwrap().max_abs(), 0.0);
        assert_eq!(delta_r(&[0.1, 0.2, 0.0], &[0.1, 0.2, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(delta_tilde(&Matrix::zeros(3, 3)), vec![0.0; 3]);

        let m = Matrix::from_rows(&[[1.1, 1.8], [3.0, 0.0]]).unwrap();
        let ds = delta_star(&m, &a).unwrap();
        assert!((ds[(0, 0)] - 10.0).abs() < 1e-12);
        assert!((ds[(0, 1)] + 10.0).abs() < 1e-12);
        assert_eq!(ds[(1, 1)], -100.0);
        assert!((delta_tilde(&ds)[0] - 10.0).abs() < 1e-12);

        let zero = Matrix::from_rows(&[[0.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(delta_star(&a, &zero).unwrap()[(0, 0)].is_nan());

        let dr = delta_r(&[0.0125, 0.5], &[0.0130, 0.5]).unwrap();
        assert_eq!(dr.len(), 1);
        assert!((dr[0] + 0.05).abs() < 1e-12);
    }

    #[test]
    fn minimum_replicates_and_determinism() {
        let spec = iid_spec(&[3.0, 2.0, 1.0]);
        assert!(run_monte_carlo(&spec, 100, 2, 0).is_ok());
        assert!(matches!(run_monte_carlo(&spec, 100, 1, 0), Err(Error::TooFewReplicates { .. })));
        let a = run_monte_carlo(&spec, 200, 20, 5).unwrap();
        let b = run_monte_carlo(&spec, 200, 20, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.empirical_cov_values.asymmetry(), 0.0);
        assert_eq!(a.empirical_sd_r[2], 0.0);
    }

    #[test]
    fn iid_eigenvalue_variance_matches_closed_form() {
        let lam = [10.0, 8.0, 6.0, 4.0, 2.0];
        let summary = run_monte_carlo(&iid_spec(&lam), 2000, 400, 11).unwrap();
        for (i, l) in lam.iter().enumerate() {
            let v = summary.empirical_cov_values[(i, i)];
            assert!((v / (2.0 * l * l) - 1.0).abs() < 0.15, "λ_{i}: {v}");
        }
    }

    #[test]
    fn variance_scales_with_n() {
        let spec = iid_spec(&[3.0, 2.0, 1.0]);
        let small = run_monte_carlo(&spec, 500, 1000, 1).unwrap();
        let large = run_monte_carlo(&spec, 1000, 1000, 2).unwrap();
        for i in 0..3 {
            let ratio = (small.empirical_sd_values[i] / large.empirical_sd_values[i]).powi(2);
            assert!((1.6..=2.4).contains(&ratio), "ratio {ratio} at {i}: {:?} {:?}", small.empirical_sd_values, large.empirical_sd_values);
        }
    }

    #[test]
    fn comparison_tables_are_consistent_and_reproducible() {
        let cfg = ComparisonConfig {
            n: 300,
            mc_replicates: 20,
            boot_replicates: 20,
            block_size: Some(5),
            bandwidth: None,
            seed: 3,
            methods: Method::ALL.to_vec(),
            grid_size: 512,
        };
        let a = run_comparison(&[2], &cfg).unwrap();
        let b = run_comparison(&[2], &cfg).unwrap();
        assert_eq!(a, b);
        let t = &a[0].table;
        assert_eq!(t.rows.len(), 5);
        assert!(t.consistency_error() < 1e-12);
        for row in &t.rows {
            assert_eq!(row.delta_r.len(), 4);
            assert_eq!(row.delta_tilde, delta_tilde(&row.delta_star));
        }
        // 25 cov entries for ED + three engines, 25 Δ* entries per method.
        assert_eq!(a[0].plot.len(), 25 * 4 + 25 * 5);
        assert!(run_comparison(&[], &cfg).unwrap().is_empty());
        assert!(run_comparison(&[9], &cfg).is_err());
    }

    #[test]
    fn dgp2_ed_has_correlated_eigenvalues() {
        let summary = run_monte_carlo(&fixture(2).unwrap(), 1000, 200, 4).unwrap();
        let c = &summary.empirical_cov_values;
        let mut off = 0.0f64;
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    off = off.max(c[(i, j)].abs() / libm::sqrt(c[(i, i)] * c[(j, j)]));
                }
            }
        }
        assert!(off > 0.2, "largest eigenvalue correlation {off}");
    }
}
