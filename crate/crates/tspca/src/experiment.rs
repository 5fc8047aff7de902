//! `tspca experiment`: simulation comparisons written as tables and plot data.

use std::path::Path;

use serde_json::{json, Value};
use tspca_core::dgp::fixture;
use tspca_core::experiments::{run_comparison, DgpComparison, MetricTable};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, fmt_f64, matrix_rows, write_csv, write_json};

pub struct ExperimentOutcome {
    pub comparisons: Vec<(u32, DgpComparison)>,
    pub failures: Vec<(u32, CliError)>,
}

/// Runs each model independently so one failure does not stop the others.
pub fn run(cfg: &ExperimentConfig, mut progress: impl FnMut(&str)) -> CliResult<ExperimentOutcome> {
    ensure_dir(&cfg.out)?;
    write_json(&cfg.out.join("effective_config.json"), cfg)?;
    let comparison = cfg.comparison();
    let mut comparisons = Vec::new();
    let mut failures = Vec::new();
    for &id in &cfg.dgp {
        progress(&format!("DGP{id}: running"));
        match run_comparison(&[id], &comparison) {
            Ok(mut v) => {
                let c = v.pop().expect("one id");
                write_comparison(&cfg.out, id, &c)?;
                progress(&format_delta_tilde(&c.table));
                comparisons.push((id, c));
            }
            Err(e) => {
                progress(&format!("DGP{id}: failed: {e}"));
                failures.push((id, CliError::from(e)));
            }
        }
    }
    write_summary(&cfg.out, &comparisons, &failures)?;
    Ok(ExperimentOutcome { comparisons, failures })
}

fn write_comparison(out: &Path, id: u32, c: &DgpComparison) -> CliResult<()> {
    let p = c.truth.decomp.dim();
    let pcs: Vec<String> = (1..=p).map(|k| format!("PC{k}")).collect();

    let mut header = vec!["method".to_string()];
    header.extend(pcs.iter().cloned());
    write_csv(
        &out.join(format!("delta_tilde_dgp{id}.csv")),
        &header,
        c.table.rows.iter().map(|row| {
            let mut r = vec![row.method.name().to_string()];
            r.extend(row.delta_tilde.iter().map(|v| fmt_f64(*v)));
            r
        }),
    )?;

    let mut header = vec!["method".to_string()];
    header.extend((1..p).map(|k| format!("r{k}")));
    write_csv(
        &out.join(format!("delta_r_dgp{id}.csv")),
        &header,
        c.table.rows.iter().map(|row| {
            let mut r = vec![row.method.name().to_string()];
            r.extend(row.delta_r.iter().map(|v| fmt_f64(*v)));
            r
        }),
    )?;

    let mut header = vec!["method".to_string(), "pc".to_string()];
    header.extend((1..=p).map(|j| format!("x{j}")));
    let mut rows = Vec::new();
    for row in &c.table.rows {
        for k in 0..p {
            let mut r = vec![row.method.name().to_string(), format!("PC{}", k + 1)];
            r.extend(row.delta_star.row(k).iter().map(|v| fmt_f64(*v)));
            rows.push(r);
        }
    }
    write_csv(&out.join(format!("delta_star_dgp{id}.csv")), &header, rows)?;

    // Standard deviations in long form: ED first, then each method.
    let mut rows = Vec::new();
    let mut push = |source: &str, values: &[f64], loadings: &tspca_core::Matrix, r: &[f64]| {
        for k in 0..p {
            rows.push(vec![source.into(), "eigenvalue".into(), (k + 1).to_string(), String::new(), fmt_f64(values[k])]);
        }
        for k in 0..p {
            for j in 0..p {
                rows.push(vec![
                    source.into(),
                    "loading".into(),
                    (k + 1).to_string(),
                    (j + 1).to_string(),
                    fmt_f64(loadings[(k, j)]),
                ]);
            }
        }
        for k in 0..p {
            rows.push(vec![source.into(), "proportion".into(), (k + 1).to_string(), String::new(), fmt_f64(r[k])]);
        }
    };
    let s = &c.summary;
    push("ED", &s.empirical_sd_values, &s.empirical_sd_loadings, &s.empirical_sd_r);
    for row in &c.table.rows {
        push(row.method.name(), &row.sds.sd_values, &row.sds.sd_loadings, &row.sds.sd_r);
    }
    write_csv(
        &out.join(format!("sds_dgp{id}.csv")),
        &["source", "quantity", "pc", "variable", "sd"],
        rows,
    )?;

    write_csv(
        &out.join(format!("plot_dgp{id}.csv")),
        &["series", "x", "y"],
        c.plot.iter().map(|pt| vec![pt.series.clone(), fmt_f64(pt.x), fmt_f64(pt.y)]),
    )
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn table_json(t: &MetricTable) -> Value {
    Value::Array(
        t.rows
            .iter()
            .map(|row| {
                json!({
                    "method": row.method.name(),
                    "delta_r": row.delta_r.iter().map(|v| finite_or_null(*v)).collect::<Vec<_>>(),
                    "delta_tilde": row.delta_tilde.iter().map(|v| finite_or_null(*v)).collect::<Vec<_>>(),
                    "delta_star": (0..row.delta_star.rows())
                        .map(|k| row.delta_star.row(k).iter().map(|v| finite_or_null(*v)).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                    "sd_loadings": matrix_rows(&row.sds.sd_loadings),
                    "sd_r": row.sds.sd_r,
                })
            })
            .collect(),
    )
}

fn write_summary(out: &Path, comparisons: &[(u32, DgpComparison)], failures: &[(u32, CliError)]) -> CliResult<()> {
    let models: Vec<Value> = comparisons
        .iter()
        .map(|(id, c)| {
            json!({
                "dgp": id,
                "label": c.label,
                "checksum": fixture(*id).map(|s| s.checksum()).unwrap_or_default(),
                "n": c.summary.n,
                "mc_replicates": c.summary.replicates,
                "failed_replicates": c.summary.failed,
                "population_eigenvalues": c.truth.decomp.values(),
                "empirical_sd_loadings": matrix_rows(&c.summary.empirical_sd_loadings),
                "empirical_sd_r": c.summary.empirical_sd_r,
                "metrics": table_json(&c.table),
            })
        })
        .collect();
    let failed: Vec<Value> = failures
        .iter()
        .map(|(id, e)| json!({ "dgp": id, "kind": e.kind(), "message": e.to_string() }))
        .collect();
    write_json(&out.join("metrics.json"), &json!({ "models": models, "failures": failed }))
}

pub fn format_delta_tilde(t: &MetricTable) -> String {
    let mut s = format!("{}: mean |ratio - 1| (%) per component\n", t.label);
    for row in &t.rows {
        s.push_str(&format!("  {:<4}", row.method.name()));
        for v in &row.delta_tilde {
            s.push_str(&format!("{v:>8.2}"));
        }
        s.push('\n');
    }
    s.pop();
    s
}
