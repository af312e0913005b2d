//! Diagnostics of zero sets: point clouds, box-counting dimension, and
//! Sobolev-type norms of `log|F|` with the zero set excised.

use std::collections::{BTreeMap, HashSet};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identities::{least_squares_slope, EstimateReport};
use crate::mapping::{differential, Mapping};
use crate::tensorgrid::{mask_near_points, ExcisionTrend, GridDomain};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub tolerance: f64,
    /// Lower corner of the source box, the origin of the counting lattice.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<Vec<f64>>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self {
            dim,
            points,
            tolerance: 0.0,
            lower,
            upper,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Grid points with `|F(x) - target| <= tol`, each moved to the best of the
/// `3^n` points at offsets `{-h/2, 0, h/2}` per axis.
pub fn zero_set_of(f: &Mapping, grid: &GridDomain, tol: f64, target: &[f64]) -> Result<PointCloud> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let n = grid.dim();
    if target.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: target.len() });
    }
    let dist = |x: &[f64]| -> Result<f64> {
        let y = f.eval(x)?;
        Ok(norm(&y.iter().zip(target).map(|(a, b)| a - b).collect::<Vec<_>>()))
    };
    let half: Vec<f64> = grid.spacing().iter().map(|h| 0.5 * h).collect();
    let mut seen = HashSet::new();
    let mut points = Vec::new();
    let mut x = vec![0.0; n];
    for i in 0..grid.len() {
        grid.point_into(i, &mut x);
        let d0 = match dist(&x) {
            Ok(d) => d,
            Err(Error::ExceptionalPoint(_)) => continue,
            Err(e) => return Err(e),
        };
        if d0 > tol {
            continue;
        }
        let (mut best, mut best_d) = (x.clone(), d0);
        for code in 0..3usize.pow(n as u32) {
            let mut c = code;
            let cand: Vec<f64> = (0..n)
                .map(|a| {
                    let o = (c % 3) as f64 - 1.0;
                    c /= 3;
                    (x[a] + o * half[a]).clamp(grid.lower()[a], grid.upper()[a])
                })
                .collect();
            if let Ok(d) = dist(&cand) {
                if d < best_d {
                    best_d = d;
                    best = cand;
                }
            }
        }
        if seen.insert(grid.nearest_index(&best)) {
            points.push(best);
        }
    }
    Ok(PointCloud {
        dim: n,
        points,
        tolerance: tol,
        lower: grid.lower().to_vec(),
        upper: grid.upper().to_vec(),
    })
}

/// [`zero_set_of`] with target `0`.
pub fn zero_set(f: &Mapping, grid: &GridDomain, tol: f64) -> Result<PointCloud> {
    zero_set_of(f, grid, tol, &vec![0.0; grid.dim()])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub dimension: f64,
    /// RMS residual of the log-log fit.
    pub fit_residual: f64,
    pub empty: bool,
}

/// `extent / 2^k` for `k = first..first + count`.
pub fn dyadic_scales(extent: f64, first: u32, count: u32) -> Vec<f64> {
    (first..first + count).map(|k| extent / 2f64.powi(k as i32)).collect()
}

/// Four dyadic scales ending at twice the finest grid spacing.
pub fn grid_scales(grid: &GridDomain) -> Vec<f64> {
    let h = grid.max_spacing();
    (0..4).rev().map(|k| 2.0 * h * 2f64.powi(k)).collect()
}

/// Least-squares slope of `log N(δ)` against `log(1/δ)`.
pub fn box_counting_dimension(cloud: &PointCloud, scales: &[f64]) -> Result<DimensionEstimate> {
    if scales.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "box counting needs at least 3 scales, got {}",
            scales.len()
        )));
    }
    let distinct: HashSet<u64> = scales.iter().map(|s| s.to_bits()).collect();
    if scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) || distinct.len() != scales.len() {
        return Err(Error::InvalidParameter("scales must be distinct and positive".into()));
    }
    let mut order: Vec<f64> = scales.to_vec();
    order.sort_by(f64::total_cmp);
    if cloud.is_empty() {
        return Ok(DimensionEstimate {
            counts: vec![0; order.len()],
            scales: order,
            dimension: 0.0,
            fit_residual: 0.0,
            empty: true,
        });
    }
    let counts: Vec<usize> = order
        .iter()
        .map(|&d| {
            cloud
                .points
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(&cloud.lower)
                        .map(|(x, lo)| ((x - lo) / d).floor() as i64)
                        .collect::<Vec<_>>()
                })
                .collect::<HashSet<_>>()
                .len()
        })
        .collect();
    let pts: Vec<(f64, f64)> = order
        .iter()
        .zip(&counts)
        .map(|(d, c)| ((1.0 / d).ln(), (*c as f64).ln()))
        .collect();
    let slope = least_squares_slope(&pts);
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - (my + slope * (p.0 - mx))).powi(2))
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    Ok(DimensionEstimate {
        scales: order,
        counts,
        dimension: slope,
        fit_residual: rms,
        empty: false,
    })
}

/// `∫ |∇ log|F||^q` over the grid box minus the `delta`-neighbourhood of the zero set.
pub fn sobolev_log_norm(f: &Mapping, grid: &GridDomain, q: f64, delta: f64) -> Result<EstimateReport> {
    if !(q > 0.0) {
        return Err(Error::InvalidParameter(format!("q must be positive, got {q}")));
    }
    let centers = f.zero_points().ok_or_else(|| {
        Error::InvalidParameter(format!("zero set of {} is not a finite point set", f.spec_string()))
    })?;
    let mask = mask_near_points(grid, &centers, delta);
    if mask.iter().all(|&m| m) {
        return Err(Error::ExcisionSwallowsGrid);
    }
    let n = grid.dim();
    let (mut total, mut excised) = (0.0, 0.0);
    let mut x = vec![0.0; n];
    for (i, &masked) in mask.iter().enumerate() {
        grid.point_into(i, &mut x);
        let w = grid.weight(i);
        if masked || f.is_exceptional(&x) {
            excised += w;
            continue;
        }
        let y = f.eval(&x)?;
        let r2: f64 = y.iter().map(|v| v * v).sum();
        if r2 == 0.0 {
            excised += w;
            continue;
        }
        let s = differential(f, &x)?;
        let g = s.df.transpose() * nalgebra::DVector::from_column_slice(&y) / r2;
        total += w * g.norm().powf(q);
    }
    let mut inputs = BTreeMap::new();
    inputs.insert("mapping".into(), f.spec_string());
    inputs.insert("q".into(), format!("{q}"));
    inputs.insert("excision_radius".into(), format!("{delta}"));
    Ok(EstimateReport {
        estimate: "sobolev_log_norm".into(),
        lhs: total,
        rhs: None,
        constant: None,
        inputs,
        mask_volume: excised,
        diagnostics: BTreeMap::new(),
    })
}

/// [`sobolev_log_norm`] over a schedule of excision radii, with the trend.
pub fn sobolev_log_norm_sweep(
    f: &Mapping,
    grid: &GridDomain,
    q: f64,
    deltas: &[f64],
) -> Result<(Vec<EstimateReport>, ExcisionTrend)> {
    let reports = deltas
        .iter()
        .map(|&d| sobolev_log_norm(f, grid, q, d))
        .collect::<Result<Vec<_>>>()?;
    let trend = ExcisionTrend::from_values(deltas.to_vec(), reports.iter().map(|r| r.lhs).collect());
    Ok((reports, trend))
}
