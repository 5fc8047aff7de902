use serde_json::{json, Value};
use tspca_core::dgp::{fixture, population_truth, DgpSpec, ModelKind, NoiseSpec};

use crate::error::CliResult;
use crate::io::matrix_rows;

fn noise_json(noise: &NoiseSpec) -> Value {
    match noise {
        NoiseSpec::Gaussian { mean, covariance } => json!({
            "family": noise.family(),
            "mean": mean,
            "covariance": matrix_rows(covariance),
        }),
        NoiseSpec::Contaminated {
            mean,
            covariance,
            outlier_rate,
            outlier_mean,
            outlier_covariance,
        } => json!({
            "family": noise.family(),
            "mean": mean,
            "covariance": matrix_rows(covariance),
            "outlier_rate": outlier_rate,
            "outlier_mean": outlier_mean,
            "outlier_covariance": matrix_rows(outlier_covariance),
        }),
        NoiseSpec::SkewNormal { xi, omega, alpha, centered } => json!({
            "family": noise.family(),
            "xi": xi,
            "omega": matrix_rows(omega),
            "alpha": alpha,
            "centered": centered,
        }),
        NoiseSpec::StudentT { mu, sigma, dof } => json!({
            "family": noise.family(),
            "mu": mu,
            "sigma": matrix_rows(sigma),
            "dof": dof,
        }),
    }
}

pub fn spec_json(id: u32, spec: &DgpSpec) -> CliResult<Value> {
    let truth = population_truth(spec)?;
    Ok(json!({
        "dgp": id,
        "kind": match spec.kind() { ModelKind::Var => "var", ModelKind::Vma => "vma" },
        "order": spec.order(),
        "dim": spec.dim(),
        "coefficients": spec.coefficients().iter().map(matrix_rows).collect::<Vec<_>>(),
        "noise": noise_json(spec.noise()),
        "checksum": spec.checksum(),
        "population_covariance": matrix_rows(&truth.gamma),
        "population_eigenvalues": truth.decomp.values(),
    }))
}

pub fn dump() -> CliResult<Value> {
    let all = (1..=8)
        .map(|id| spec_json(id, &fixture(id)?))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Value::Array(all))
}
