use serde_json::json;
use tspca_core::dgp::{fixture, simulate, FIXTURE_VERSION};
use tspca_core::MultivariateSeries;

use crate::config::SimulateConfig;
use crate::error::CliResult;
use crate::io::{ensure_dir, fmt_f64, write_csv, write_json};

pub fn run(cfg: &SimulateConfig) -> CliResult<MultivariateSeries> {
    let spec = fixture(cfg.dgp)?;
    let series = simulate(&spec, cfg.n, cfg.seed)?;
    ensure_dir(&cfg.out)?;
    write_json(&cfg.out.join("effective_config.json"), cfg)?;
    let p = series.dim();
    let header: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
    write_csv(
        &cfg.out.join("series.csv"),
        &header,
        (0..series.len()).map(|t| series.observation(t).iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>()),
    )?;
    write_json(
        &cfg.out.join("series.json"),
        &json!({
            "dgp": cfg.dgp,
            "n": cfg.n,
            "p": p,
            "seed": cfg.seed,
            "checksum": spec.checksum(),
            "fixture_version": FIXTURE_VERSION,
            "noise": spec.noise().family(),
        }),
    )?;
    Ok(series)
}
