//! Command options. Every option may come from a flag or from a JSON config
//! file; flags win, then the file, then built-in defaults.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use tspca_core::experiments::{ComparisonConfig, Method};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Ad,
    Dag,
    Ind,
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Desk,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Ad,
    Dag,
    Ind,
    De,
    Be,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Ad => Method::Ad,
            MethodName::Dag => Method::Dag,
            MethodName::Ind => Method::Ind,
            MethodName::De => Method::De,
            MethodName::Be => Method::Be,
        }
    }
}

/// Fills unset fields of `self` from `other`.
macro_rules! merge_fields {
    ($a:expr, $b:expr, $($f:ident),+) => {
        $( if $a.$f.is_none() { $a.$f = $b.$f; } )+
    };
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeOptions {
    /// CSV file: header row, one row per time point.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Columns to use, by header name or 1-based position.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// Daniell half-width M for ad/dag.
    #[arg(long)]
    pub bandwidth: Option<usize>,
    /// Bootstrap block length.
    #[arg(long)]
    pub block_size: Option<usize>,
    /// Bootstrap replicates.
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sector label per selected column, used to group the sign table.
    #[arg(long, value_delimiter = ',')]
    pub sectors: Option<Vec<String>>,
    /// Bonferroni-correct the loading tests.
    #[arg(long, num_args = 0, default_missing_value = "true")]
    pub bonferroni: Option<bool>,
    /// Also write the |loading| < 0.1 screening table.
    #[arg(long, num_args = 0, default_missing_value = "true")]
    pub truncation: Option<bool>,
    /// Components shown in the sign tables.
    #[arg(long)]
    pub pcs: Option<usize>,
}

impl AnalyzeOptions {
    pub fn merge(mut self, file: AnalyzeOptions) -> Self {
        merge_fields!(
            self, file, input, columns, method, bandwidth, block_size, replicates, alpha, seed, out, sectors,
            bonferroni, truncation, pcs
        );
        self
    }

    pub fn resolve(self) -> CliResult<AnalysisConfig> {
        let input = self.input.ok_or_else(|| CliError::Usage("--input is required".into()))?;
        let out = self.out.ok_or_else(|| CliError::Usage("--out is required".into()))?;
        Ok(AnalysisConfig {
            input,
            columns: self.columns,
            method: self.method.unwrap_or(MethodChoice::Bootstrap),
            bandwidth: self.bandwidth,
            block_size: self.block_size,
            replicates: self.replicates.unwrap_or(DEFAULT_REPLICATES),
            alpha: self.alpha.unwrap_or(DEFAULT_ALPHA),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            out,
            sectors: self.sectors,
            bonferroni: self.bonferroni.unwrap_or(false),
            truncation: self.truncation.unwrap_or(false),
            pcs: self.pcs,
        })
    }
}

pub const DEFAULT_REPLICATES: usize = 500;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub input: PathBuf,
    pub columns: Option<Vec<String>>,
    pub method: MethodChoice,
    pub bandwidth: Option<usize>,
    pub block_size: Option<usize>,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub sectors: Option<Vec<String>>,
    pub bonferroni: bool,
    pub truncation: bool,
    pub pcs: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateOptions {
    /// Model id, 1..=8.
    #[arg(long)]
    pub dgp: Option<u32>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateConfig {
    pub dgp: u32,
    pub n: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl SimulateOptions {
    pub fn merge(mut self, file: SimulateOptions) -> Self {
        merge_fields!(self, file, dgp, n, seed, out);
        self
    }

    pub fn resolve(self) -> CliResult<SimulateConfig> {
        Ok(SimulateConfig {
            dgp: self.dgp.ok_or_else(|| CliError::Usage("--dgp is required".into()))?,
            n: self.n.unwrap_or(2000),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            out: self.out.ok_or_else(|| CliError::Usage("--out is required".into()))?,
        })
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentOptions {
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    /// Model ids; all eight when omitted.
    #[arg(long, value_delimiter = ',')]
    pub dgp: Option<Vec<u32>>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Monte Carlo replicates N.
    #[arg(long)]
    pub mc_replicates: Option<usize>,
    /// Bootstrap replicates R.
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub block_size: Option<usize>,
    #[arg(long)]
    pub bandwidth: Option<usize>,
    #[arg(long, value_delimiter = ',', value_enum)]
    pub methods: Option<Vec<MethodName>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub profile: Profile,
    pub dgp: Vec<u32>,
    pub n: usize,
    pub mc_replicates: usize,
    pub replicates: usize,
    pub block_size: Option<usize>,
    pub bandwidth: Option<usize>,
    pub methods: Vec<MethodName>,
    pub seed: u64,
    pub out: PathBuf,
}

impl ExperimentOptions {
    pub fn merge(mut self, file: ExperimentOptions) -> Self {
        merge_fields!(
            self, file, profile, dgp, n, mc_replicates, replicates, block_size, bandwidth, methods, seed, out
        );
        self
    }

    pub fn resolve(self) -> CliResult<ExperimentConfig> {
        let profile = self.profile.unwrap_or(Profile::Desk);
        let seed = self.seed.unwrap_or(DEFAULT_SEED);
        let base = match profile {
            Profile::Desk => ComparisonConfig::desk(seed),
            Profile::Full => ComparisonConfig::full(seed),
        };
        Ok(ExperimentConfig {
            profile,
            dgp: self.dgp.unwrap_or_else(|| (1..=8).collect()),
            n: self.n.unwrap_or(base.n),
            mc_replicates: self.mc_replicates.unwrap_or(base.mc_replicates),
            replicates: self.replicates.unwrap_or(base.boot_replicates),
            block_size: self.block_size.or(base.block_size),
            bandwidth: self.bandwidth.or(base.bandwidth),
            methods: self.methods.unwrap_or_else(|| {
                vec![MethodName::Ad, MethodName::Dag, MethodName::Ind, MethodName::De, MethodName::Be]
            }),
            seed,
            out: self.out.ok_or_else(|| CliError::Usage("--out is required".into()))?,
        })
    }
}

impl ExperimentConfig {
    pub fn comparison(&self) -> ComparisonConfig {
        let mut c = match self.profile {
            Profile::Desk => ComparisonConfig::desk(self.seed),
            Profile::Full => ComparisonConfig::full(self.seed),
        };
        c.n = self.n;
        c.mc_replicates = self.mc_replicates;
        c.boot_replicates = self.replicates;
        c.block_size = self.block_size;
        c.bandwidth = self.bandwidth;
        let methods: Vec<Method> = self.methods.iter().map(|&m| m.into()).collect();
        c.with_methods(&methods)
    }
}
