use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DIVERGENCE_FREE_TOLERANCE, MIN_REFINEMENT_SLOPE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity: String,
    pub mapping: String,
    pub field: String,
    pub resolution: usize,
    pub h: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `residual / max(|lhs|, |rhs|, 1e-30)`.
    pub relative_residual: f64,
    pub mask_volume: f64,
    /// Slope against the previous (coarser) level of a sweep.
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentitySweep {
    pub reports: Vec<IdentityReport>,
    /// Consecutive-level slopes.
    pub slopes: Vec<f64>,
    pub min_slope: Option<f64>,
    /// Least-squares slope of `log relative_residual` against `log h` over all levels.
    pub fitted_slope: Option<f64>,
    /// Slope criterion, or `|LHS| <= DIVERGENCE_FREE_TOLERANCE` on the finest grid for a
    /// divergence-free field.
    pub pass: bool,
}

impl IdentitySweep {
    pub(crate) fn new(reports: Vec<IdentityReport>) -> Self {
        let slopes: Vec<f64> = reports.iter().filter_map(|r| r.slope).collect();
        let min_slope = slopes.iter().copied().reduce(f64::min);
        let fitted_slope = (reports.len() >= 2).then(|| {
            let pts: Vec<(f64, f64)> = reports
                .iter()
                .map(|r| (r.h.ln(), r.relative_residual.ln()))
                .collect();
            least_squares_slope(&pts)
        });
        let divergence_free = reports.iter().all(|r| r.identity == "divergence_free");
        let pass = if divergence_free {
            reports
                .last()
                .is_some_and(|r| r.rhs == 0.0 && r.lhs.abs() <= DIVERGENCE_FREE_TOLERANCE)
        } else {
            fitted_slope.is_some_and(|s| s >= MIN_REFINEMENT_SLOPE)
        };
        Self {
            reports,
            slopes,
            min_slope,
            fitted_slope,
            pass,
        }
    }
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// A report that can be appended as one row of a CSV summary table.
pub trait SummaryRow {
    fn csv_header() -> &'static str;
    fn csv_row(&self) -> String;
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl SummaryRow for IdentityReport {
    fn csv_header() -> &'static str {
        "identity,mapping,field,resolution,h,lhs,rhs,residual,relative_residual,mask_volume,slope"
    }
    fn csv_row(&self) -> String {
        format!(
            "{},\"{}\",\"{}\",{},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            self.identity,
            self.mapping,
            self.field,
            self.resolution,
            self.h,
            self.lhs,
            self.rhs,
            self.residual,
            self.relative_residual,
            self.mask_volume,
            opt(self.slope)
        )
    }
}

impl SummaryRow for super::EstimateReport {
    fn csv_header() -> &'static str {
        "estimate,lhs,rhs,constant,mask_volume"
    }
    fn csv_row(&self) -> String {
        format!(
            "{},{:e},{},{},{:e}",
            self.estimate,
            self.lhs,
            opt(self.rhs),
            opt(self.constant),
            self.mask_volume
        )
    }
}

/// Appends rows to a CSV file, writing the header first when the file is new or empty.
pub fn append_csv<R: SummaryRow>(path: &Path, rows: &[R]) -> io::Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(file, "{}", R::csv_header())?;
    }
    for r in rows {
        writeln!(file, "{}", r.csv_row())?;
    }
    Ok(())
}
