//! Significance of individual loadings, confidence intervals for the
//! proportion of variation, and sign tables.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::eigen::{EigenDecomposition, ProportionOfVariation};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::stats::{normal_quantile, two_sided_p_value};

/// Loadings below this magnitude are blanked in truncation mode.
pub const TRUNCATION_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Positive,
    Negative,
    Suppressed,
}

impl Cell {
    pub fn symbol(self) -> &'static str {
        match self {
            Cell::Positive => "+",
            Cell::Negative => "-",
            Cell::Suppressed => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// Two-sided z-test per entry at level `alpha`, optionally Bonferroni
    /// corrected over all tested entries.
    ZTest { alpha: f64, bonferroni: bool },
    /// Keep `|a| ≥ threshold`. A screening rule, not a test.
    Truncation { threshold: f64 },
}

impl Selection {
    pub fn is_inferential(&self) -> bool {
        matches!(self, Selection::ZTest { .. })
    }
}

/// All matrices are indexed `[(pc, variable)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingTestResult {
    pub estimate: Matrix,
    pub sd: Matrix,
    pub z: Matrix,
    pub p_values: Matrix,
    significant: Vec<bool>,
    pub selection: Selection,
    /// Critical value `z_{1−α/2}` actually used (after any correction).
    pub critical: f64,
}

impl LoadingTestResult {
    pub fn pcs(&self) -> usize {
        self.estimate.rows()
    }

    pub fn variables(&self) -> usize {
        self.estimate.cols()
    }

    pub fn is_significant(&self, pc: usize, var: usize) -> bool {
        self.significant[pc * self.variables() + var]
    }

    pub fn cell(&self, pc: usize, var: usize) -> Cell {
        if !self.is_significant(pc, var) {
            return Cell::Suppressed;
        }
        if self.estimate[(pc, var)] > 0.0 {
            Cell::Positive
        } else {
            Cell::Negative
        }
    }

    pub fn sign_map(&self) -> Vec<Vec<Cell>> {
        (0..self.pcs())
            .map(|k| (0..self.variables()).map(|j| self.cell(k, j)).collect())
            .collect()
    }

    pub fn significant_count(&self) -> usize {
        self.significant.iter().filter(|&&s| s).count()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// `z_{1−α/2}`.
pub fn critical_value(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(normal_quantile(1.0 - alpha / 2.0))
}

/// Per-entry two-sided z-tests of `H₀: a_kk′ = 0` at level `alpha`.
pub fn test_loadings(decomp: &EigenDecomposition, sd: &Matrix, alpha: f64) -> Result<LoadingTestResult> {
    test_loading_matrix(&decomp.loadings(), sd, Selection::ZTest { alpha, bonferroni: false })
}

/// Tests or screens an arbitrary `[(pc, variable)]` estimate matrix.
/// Significance is strict: `|z| > z_{1−α/2}`. A zero sd makes any nonzero
/// estimate significant and a zero estimate suppressed.
pub fn test_loading_matrix(estimate: &Matrix, sd: &Matrix, selection: Selection) -> Result<LoadingTestResult> {
    if estimate.rows() != sd.rows() || estimate.cols() != sd.cols() {
        return Err(Error::DimensionMismatch {
            expected: estimate.cols(),
            found: sd.cols(),
        });
    }
    if sd.as_slice().iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidParameter("standard deviations must be non-negative"));
    }
    let (rows, cols) = (estimate.rows(), estimate.cols());
    let z = Matrix::from_fn(rows, cols, |i, j| {
        let (a, s) = (estimate[(i, j)], sd[(i, j)]);
        if s > 0.0 {
            a / s
        } else if a == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(a)
        }
    });
    let p_values = Matrix::from_fn(rows, cols, |i, j| two_sided_p_value(z[(i, j)]));
    let (critical, significant) = match selection {
        Selection::ZTest { alpha, bonferroni } => {
            check_alpha(alpha)?;
            let level = if bonferroni { alpha / (rows * cols) as f64 } else { alpha };
            let critical = normal_quantile(1.0 - level / 2.0);
            let sig = z.as_slice().iter().map(|v| v.abs() > critical).collect();
            (critical, sig)
        }
        Selection::Truncation { threshold } => {
            if !(threshold >= 0.0) {
                return Err(Error::InvalidParameter("truncation threshold must be non-negative"));
            }
            let sig = estimate
                .as_slice()
                .iter()
                .map(|a| *a != 0.0 && a.abs() >= threshold)
                .collect();
            (f64::NAN, sig)
        }
    };
    Ok(LoadingTestResult {
        estimate: estimate.clone(),
        sd: sd.clone(),
        z,
        p_values,
        significant,
        selection,
        critical,
    })
}

/// Blanks loadings with `|a| < threshold`; no standard errors involved.
pub fn truncation_map(decomp: &EigenDecomposition, threshold: f64) -> Result<LoadingTestResult> {
    let est = decomp.loadings();
    let sd = Matrix::zeros(est.rows(), est.cols());
    let mut res = test_loading_matrix(&est, &sd, Selection::Truncation { threshold })?;
    res.z = Matrix::from_fn(est.rows(), est.cols(), |_, _| f64::NAN);
    res.p_values = res.z.clone();
    Ok(res)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProportionCI {
    pub r: Vec<f64>,
    pub sd: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub alpha: f64,
}

/// `r_k ± z_{1−α/2}·sd_k`, clamped to `[0, 1]`.
pub fn proportion_ci(r: &ProportionOfVariation, sd_r: &[f64], alpha: f64) -> Result<ProportionCI> {
    let values = r.values();
    if values.len() != sd_r.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            found: sd_r.len(),
        });
    }
    if sd_r.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidParameter("standard deviations must be non-negative"));
    }
    let z = critical_value(alpha)?;
    let lower = values.iter().zip(sd_r).map(|(r, s)| (r - z * s).clamp(0.0, 1.0)).collect();
    let upper = values.iter().zip(sd_r).map(|(r, s)| (r + z * s).clamp(0.0, 1.0)).collect();
    Ok(ProportionCI {
        r: values.to_vec(),
        sd: sd_r.to_vec(),
        lower,
        upper,
        alpha,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedTable {
    pub text: String,
    pub csv: String,
}

/// Sign table with one row per PC (up to `max_pcs`) and one column per
/// variable. With `sectors`, a `|` separates columns whose sector differs
/// and a second header line names the sectors.
pub fn loading_table(
    results: &LoadingTestResult,
    variable_names: &[String],
    sectors: Option<&[String]>,
    max_pcs: Option<usize>,
) -> Result<RenderedTable> {
    let p = results.variables();
    if variable_names.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: variable_names.len(),
        });
    }
    if let Some(s) = sectors {
        if s.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: s.len(),
            });
        }
    }
    let rows = max_pcs.unwrap_or(results.pcs()).min(results.pcs());
    let width = variable_names.iter().map(|s| s.chars().count()).max().unwrap_or(1).max(1);
    let boundary = |j: usize| -> bool {
        match sectors {
            Some(s) => j > 0 && s[j] != s[j - 1],
            None => false,
        }
    };
    let pad = |s: &str, w: usize| -> String {
        let len = s.chars().count();
        let left = (w.saturating_sub(len)) / 2;
        let right = w.saturating_sub(len) - left;
        format!("{}{}{}", " ".repeat(left), s, " ".repeat(right))
    };

    let mut text = String::new();
    if !results.selection.is_inferential() {
        text.push_str("# truncation screening (non-inferential)\n");
    }
    let label_width = 4;
    if let Some(s) = sectors {
        // Sector names centred over their column group.
        let mut line = " ".repeat(label_width);
        let mut j = 0;
        while j < p {
            let mut end = j + 1;
            while end < p && s[end] == s[j] {
                end += 1;
            }
            if boundary(j) {
                line.push_str(" |");
            }
            let span = (end - j) * (width + 1);
            line.push(' ');
            line.push_str(&pad(&s[j], span - 1));
            j = end;
        }
        text.push_str(line.trim_end());
        text.push('\n');
    }
    let mut header = " ".repeat(label_width);
    for (j, name) in variable_names.iter().enumerate() {
        if boundary(j) {
            header.push_str(" |");
        }
        header.push(' ');
        header.push_str(&pad(name, width));
    }
    text.push_str(header.trim_end());
    text.push('\n');
    for k in 0..rows {
        let mut line = format!("{:<label_width$}", format!("PC{}", k + 1));
        for j in 0..p {
            if boundary(j) {
                line.push_str(" |");
            }
            line.push(' ');
            line.push_str(&pad(results.cell(k, j).symbol(), width));
        }
        text.push_str(line.trim_end());
        text.push('\n');
    }

    let mut csv = String::from("pc");
    for name in variable_names {
        csv.push(',');
        csv.push_str(&csv_field(name));
    }
    csv.push('\n');
    for k in 0..rows {
        csv.push_str(&format!("PC{}", k + 1));
        for j in 0..p {
            csv.push(',');
            csv.push_str(results.cell(k, j).symbol());
        }
        csv.push('\n');
    }
    Ok(RenderedTable { text, csv })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
