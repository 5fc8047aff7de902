//! The data-analysis pipeline behind `tspca analyze`.

use serde_json::{json, Value};
use tspca_core::asymcov::{direct_estimate, Assumption};
use tspca_core::bootstrap::{bootstrap_sd, default_block_size, MbbConfig};
use tspca_core::eigen::{proportion_of_variation, EigenDecomposition, ProportionOfVariation};
use tspca_core::inference::{
    loading_table, proportion_ci, test_loading_matrix, truncation_map, LoadingTestResult, ProportionCI, RenderedTable,
    Selection, TRUNCATION_THRESHOLD,
};
use tspca_core::Matrix;

use crate::config::{AnalysisConfig, MethodChoice};
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, fmt_f64, matrix_rows, read_series_csv, write_csv, write_json, write_text, SeriesTable};

#[derive(Debug, Clone)]
pub struct Analysis {
    pub names: Vec<String>,
    pub n: usize,
    pub decomposition: EigenDecomposition,
    pub sd_values: Vec<f64>,
    /// `[(pc, variable)]`.
    pub sd_loadings: Matrix,
    pub sd_r: Vec<f64>,
    pub proportion: ProportionOfVariation,
    pub ci: ProportionCI,
    pub tests: LoadingTestResult,
    pub table: RenderedTable,
    pub truncation: Option<(LoadingTestResult, RenderedTable)>,
    /// Block length actually used by the bootstrap.
    pub block_size: Option<usize>,
    pub bandwidth: Option<usize>,
    pub skipped_column: Option<String>,
}

pub fn analyze_table(table: SeriesTable, cfg: &AnalysisConfig) -> CliResult<Analysis> {
    let series = &table.series;
    let n = series.len();
    let p = series.dim();
    if let Some(s) = &cfg.sectors {
        if s.len() != p {
            return Err(CliError::Usage(format!("{} sector labels for {p} columns", s.len())));
        }
    }
    let (decomposition, sd_values, sd_loadings, sd_r, block_size, bandwidth) = match cfg.method {
        MethodChoice::Bootstrap => {
            let block = cfg.block_size.unwrap_or_else(|| default_block_size(n));
            let res = bootstrap_sd(series, &MbbConfig::new(block, cfg.replicates, cfg.seed))?;
            (res.point, res.sd_values, res.sd_loadings, res.sd_r, Some(block), None)
        }
        method => {
            let assumption = match method {
                MethodChoice::Ad => Assumption::Ad,
                MethodChoice::Dag => Assumption::Dag,
                _ => Assumption::Ind,
            };
            let asym = direct_estimate(series, assumption, cfg.bandwidth)?;
            let se = asym.standard_errors()?;
            let bandwidth = (assumption != Assumption::Ind)
                .then(|| cfg.bandwidth.unwrap_or_else(|| tspca_core::asymcov::default_bandwidth(n)));
            (asym.decomposition, se.sd_values, se.sd_loadings, se.sd_r, None, bandwidth)
        }
    };
    let proportion = proportion_of_variation(decomposition.values())?;
    let ci = proportion_ci(&proportion, &sd_r, cfg.alpha)?;
    let tests = test_loading_matrix(
        &decomposition.loadings(),
        &sd_loadings,
        Selection::ZTest {
            alpha: cfg.alpha,
            bonferroni: cfg.bonferroni,
        },
    )?;
    let sectors = cfg.sectors.as_deref();
    let rendered = loading_table(&tests, &table.names, sectors, cfg.pcs)?;
    let truncation = if cfg.truncation {
        let t = truncation_map(&decomposition, TRUNCATION_THRESHOLD)?;
        let r = loading_table(&t, &table.names, sectors, cfg.pcs)?;
        Some((t, r))
    } else {
        None
    };
    Ok(Analysis {
        names: table.names,
        n,
        decomposition,
        sd_values,
        sd_loadings,
        sd_r,
        proportion,
        ci,
        tests,
        table: rendered,
        truncation,
        block_size,
        bandwidth,
        skipped_column: table.skipped_column,
    })
}

pub fn run(cfg: &AnalysisConfig) -> CliResult<Analysis> {
    let table = read_series_csv(&cfg.input, cfg.columns.as_deref())?;
    let analysis = analyze_table(table, cfg)?;
    write_outputs(&analysis, cfg)?;
    Ok(analysis)
}

fn pc_labels(p: usize) -> Vec<String> {
    (1..=p).map(|k| format!("PC{k}")).collect()
}

fn matrix_csv(path: &std::path::Path, names: &[String], m: &Matrix) -> CliResult<()> {
    let mut header = vec!["pc".to_string()];
    header.extend(names.iter().cloned());
    let rows = (0..m.rows()).map(|k| {
        let mut row = vec![format!("PC{}", k + 1)];
        row.extend(m.row(k).iter().map(|v| fmt_f64(*v)));
        row
    });
    write_csv(path, &header, rows)
}

pub fn write_outputs(a: &Analysis, cfg: &AnalysisConfig) -> CliResult<()> {
    let out = &cfg.out;
    ensure_dir(out)?;
    write_json(&out.join("effective_config.json"), cfg)?;
    let p = a.names.len();
    let values = a.decomposition.values();

    write_csv(
        &out.join("eigenvalues.csv"),
        &["component", "eigenvalue", "sd"],
        (0..p).map(|k| vec![format!("PC{}", k + 1), fmt_f64(values[k]), fmt_f64(a.sd_values[k])]),
    )?;
    let loadings = a.decomposition.loadings();
    matrix_csv(&out.join("loadings.csv"), &a.names, &loadings)?;
    matrix_csv(&out.join("loadings_sd.csv"), &a.names, &a.sd_loadings)?;
    write_csv(
        &out.join("proportion.csv"),
        &["k", "r", "sd", "lower", "upper"],
        (0..p).map(|k| {
            vec![
                (k + 1).to_string(),
                fmt_f64(a.ci.r[k]),
                fmt_f64(a.ci.sd[k]),
                fmt_f64(a.ci.lower[k]),
                fmt_f64(a.ci.upper[k]),
            ]
        }),
    )?;
    write_text(&out.join("significance.csv"), &a.table.csv)?;
    write_text(&out.join("significance.txt"), &a.table.text)?;
    if let Some((_, t)) = &a.truncation {
        write_text(&out.join("truncation.csv"), &t.csv)?;
        write_text(&out.join("truncation.txt"), &t.text)?;
    }
    write_json(&out.join("results.json"), &results_json(a, cfg))?;
    Ok(())
}

fn cells_json(t: &LoadingTestResult, names: &[String]) -> Value {
    let mut cells = Vec::new();
    for k in 0..t.pcs() {
        for (j, name) in names.iter().enumerate() {
            let num = |v: f64| if v.is_finite() { json!(v) } else { json!(fmt_f64(v)) };
            cells.push(json!({
                "pc": k + 1,
                "variable": name,
                "estimate": t.estimate[(k, j)],
                "sd": t.sd[(k, j)],
                "z": num(t.z[(k, j)]),
                "p_value": num(t.p_values[(k, j)]),
                "significant": t.is_significant(k, j),
                "sign": t.cell(k, j).symbol(),
            }));
        }
    }
    Value::Array(cells)
}

fn results_json(a: &Analysis, cfg: &AnalysisConfig) -> Value {
    let p = a.names.len();
    let selection = match a.tests.selection {
        Selection::ZTest { alpha, bonferroni } => json!({
            "alpha": alpha,
            "bonferroni": bonferroni,
            "critical_value": a.tests.critical,
        }),
        Selection::Truncation { threshold } => json!({ "threshold": threshold }),
    };
    let mut v = json!({
        "n": a.n,
        "p": p,
        "variables": a.names,
        "skipped_column": a.skipped_column,
        "method": cfg.method,
        "block_size": a.block_size,
        "bandwidth": a.bandwidth,
        "replicates": (cfg.method == MethodChoice::Bootstrap).then_some(cfg.replicates),
        "seed": cfg.seed,
        "components": pc_labels(p),
        "eigenvalues": a.decomposition.values(),
        "sd_eigenvalues": a.sd_values,
        "loadings": matrix_rows(&a.decomposition.loadings()),
        "sd_loadings": matrix_rows(&a.sd_loadings),
        "proportion": {
            "r": a.ci.r,
            "sd": a.ci.sd,
            "lower": a.ci.lower,
            "upper": a.ci.upper,
            "alpha": a.ci.alpha,
        },
        "tests": {
            "selection": selection,
            "cells": cells_json(&a.tests, &a.names),
        },
    });
    if let Some((t, _)) = &a.truncation {
        v["truncation"] = json!({
            "inferential": false,
            "threshold": TRUNCATION_THRESHOLD,
            "cells": cells_json(t, &a.names),
        });
    }
    v
}

/// Human-readable summary for stdout.
pub fn summary(a: &Analysis, cfg: &AnalysisConfig) -> String {
    let mut s = String::new();
    let method = match cfg.method {
        MethodChoice::Ad => "ad",
        MethodChoice::Dag => "dag",
        MethodChoice::Ind => "ind",
        MethodChoice::Bootstrap => "bootstrap",
    };
    s.push_str(&format!("n = {}, p = {}, method = {method}", a.n, a.names.len()));
    if let Some(b) = a.block_size {
        s.push_str(&format!(", block size = {b}, replicates = {}", cfg.replicates));
    }
    if let Some(m) = a.bandwidth {
        s.push_str(&format!(", bandwidth = {m}"));
    }
    s.push('\n');
    let level = (1.0 - cfg.alpha) * 100.0;
    s.push_str(&format!("{:<5}{:>12}{:>10}{:>9}{:>9}  {level}% CI\n", "", "eigenvalue", "sd", "r_k", "sd"));
    for k in 0..a.names.len() {
        s.push_str(&format!(
            "{:<5}{:>12.4}{:>10.4}{:>9.4}{:>9.4}  [{:.4}, {:.4}]\n",
            format!("PC{}", k + 1),
            a.decomposition.values()[k],
            a.sd_values[k],
            a.ci.r[k],
            a.ci.sd[k],
            a.ci.lower[k],
            a.ci.upper[k],
        ));
    }
    s.push('\n');
    s.push_str(&a.table.text);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_series_csv;

    fn config(method: MethodChoice) -> AnalysisConfig {
        AnalysisConfig {
            input: "unused".into(),
            columns: None,
            method,
            bandwidth: None,
            block_size: None,
            replicates: 50,
            alpha: 0.05,
            seed: 3,
            out: "unused".into(),
            sectors: None,
            bonferroni: false,
            truncation: true,
            pcs: None,
        }
    }

    #[test]
    fn single_column_is_trivial_for_every_method() {
        let mut text = String::from("x\n");
        for t in 0..60 {
            text.push_str(&format!("{}\n", ((t * 37) % 11) as f64 - 5.0));
        }
        for method in [MethodChoice::Ad, MethodChoice::Dag, MethodChoice::Ind, MethodChoice::Bootstrap] {
            let table = parse_series_csv(&text, None).unwrap();
            let a = analyze_table(table, &config(method)).unwrap();
            assert_eq!(a.decomposition.loadings()[(0, 0)], 1.0);
            assert_eq!(a.proportion.values(), [1.0]);
            assert_eq!(a.sd_loadings[(0, 0)], 0.0, "{method:?}");
            assert_eq!(a.sd_r, [0.0]);
        }
    }

    #[test]
    fn sector_count_must_match() {
        let table = parse_series_csv("a,b\n1,2\n3,1\n0,5\n2,2\n", None).unwrap();
        let mut cfg = config(MethodChoice::Ind);
        cfg.sectors = Some(vec!["x".into()]);
        assert_eq!(analyze_table(table, &cfg).unwrap_err().exit_code(), 2);
    }
}
