use std::collections::BTreeMap;

use nalgebra::DVector;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::check_support;
use crate::bump::BumpProfile;
use crate::error::{Error, Result};
use crate::mapping::{differential, Dilatation, Mapping};
use crate::target_radius;
use crate::tensorgrid::{mask_near_points, Cutoff, ExcisionTrend, GridDomain};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: String,
    pub lhs: f64,
    pub rhs: Option<f64>,
    /// `lhs / rhs` when `rhs > 0`.
    pub constant: Option<f64>,
    pub inputs: BTreeMap<String, String>,
    pub mask_volume: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl EstimateReport {
    fn new(estimate: &str, lhs: f64, rhs: Option<f64>, inputs: BTreeMap<String, String>) -> Self {
        Self {
            estimate: estimate.into(),
            lhs,
            rhs,
            constant: rhs.filter(|&r| r > 0.0).map(|r| lhs / r),
            inputs,
            mask_volume: 0.0,
            diagnostics: BTreeMap::new(),
        }
    }
}

fn cutoff_spec(eta: &Cutoff) -> String {
    format!(
        "center={:?},r0={},r1={},amplitude={}",
        eta.center(),
        eta.inner_radius(),
        eta.outer_radius(),
        eta.amplitude()
    )
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn pullback(df: &nalgebra::DMatrix<f64>, g: &[f64]) -> Vec<f64> {
    (df.transpose() * DVector::from_column_slice(g)).iter().copied().collect()
}

/// Both sides of the Caccioppoli-type estimate with `w = log(Φ_a∘F)`:
///
/// ```text
/// ∫ |∇w|^n η^n / K   versus   ∫ |∇η|^n K^(n-1).
/// ```
///
/// The test function `φ = η^n Φ_a^(1-n)∘F` is sampled and its range reported.
pub fn caccioppoli_check(
    f: &Mapping,
    profile: &BumpProfile,
    eta: &Cutoff,
    grid: &GridDomain,
) -> Result<EstimateReport> {
    let n = grid.dim();
    if f.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.dim() });
    }
    check_support(eta, grid)?;
    let nf = n as f64;
    let (mut lhs, mut rhs, mut mask) = (0.0, 0.0, 0.0);
    let (mut phi_min, mut phi_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut k_max: f64 = 1.0;
    let mut x = vec![0.0; n];
    for i in 0..grid.len() {
        grid.point_into(i, &mut x);
        if !eta.supports(&x) {
            continue;
        }
        let w = grid.weight(i);
        if f.is_exceptional(&x) {
            mask += w;
            continue;
        }
        let y = f.eval(&x)?;
        if norm(&y) >= target_radius() {
            return Err(Error::ImageEscapes(x.clone()));
        }
        let s = differential(f, &x)?;
        let k = match s.dilatation {
            Dilatation::Infinite => return Err(Error::InfiniteDilatation(x.clone())),
            d => d.value(),
        };
        k_max = k_max.max(k);
        let phi = profile.eval_point(&y)?;
        let gw: Vec<f64> = pullback(&s.df, &profile.gradient(&y)?)
            .into_iter()
            .map(|g| g / phi)
            .collect();
        let e = eta.value(&x);
        lhs += w * norm(&gw).powf(nf) * e.powf(nf) / k;
        rhs += w * norm(&eta.gradient(&x)).powf(nf) * k.powf(nf - 1.0);
        let test = e.powf(nf) * phi.powf(1.0 - nf);
        phi_min = phi_min.min(test);
        phi_max = phi_max.max(test);
    }
    let mut inputs = BTreeMap::new();
    inputs.insert("mapping".into(), f.spec_string());
    inputs.insert("profile".into(), format!("a={},n={}", profile.a(), n));
    inputs.insert("cutoff".into(), cutoff_spec(eta));
    let mut rep = EstimateReport::new("caccioppoli", lhs, Some(rhs), inputs);
    rep.mask_volume = mask;
    rep.diagnostics.insert("test_function_min".into(), phi_min);
    rep.diagnostics.insert("test_function_max".into(), phi_max);
    rep.diagnostics.insert("max_dilatation".into(), k_max);
    Ok(rep)
}

/// `(n/(n-1))^n`, the constant the test-function argument yields with unit ellipticity bounds.
pub fn caccioppoli_constant(n: usize) -> f64 {
    let n = n as f64;
    (n / (n - 1.0)).powf(n)
}

fn excision_mask(f: &Mapping, grid: &GridDomain, delta: f64) -> Result<Vec<bool>> {
    let centers = f.zero_points().ok_or_else(|| {
        Error::InvalidParameter(format!("zero set of {} is not a finite point set", f.spec_string()))
    })?;
    Ok(mask_near_points(grid, &centers, delta))
}

enum LogKind<'a> {
    LogLog,
    LogPhi(&'a BumpProfile),
}

fn log_energy(
    f: &Mapping,
    eta: &Cutoff,
    grid: &GridDomain,
    q: f64,
    delta: f64,
    kind: LogKind,
) -> Result<EstimateReport> {
    let n = grid.dim();
    if f.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.dim() });
    }
    if !(q > 0.0) {
        return Err(Error::InvalidParameter(format!("exponent must be positive, got {q}")));
    }
    check_support(eta, grid)?;
    let mask = match kind {
        LogKind::LogLog => excision_mask(f, grid, delta)?,
        LogKind::LogPhi(_) => vec![false; grid.len()],
    };
    let (mut total, mut excised) = (0.0, 0.0);
    let mut x = vec![0.0; n];
    for i in 0..grid.len() {
        grid.point_into(i, &mut x);
        if !eta.supports(&x) {
            continue;
        }
        let w = grid.weight(i);
        if mask[i] || f.is_exceptional(&x) {
            excised += w;
            continue;
        }
        let y = f.eval(&x)?;
        let rho = norm(&y);
        if rho >= target_radius() {
            return Err(Error::ImageEscapes(x.clone()));
        }
        let grad_w: Vec<f64> = match kind {
            LogKind::LogLog => {
                if rho == 0.0 {
                    excised += w;
                    continue;
                }
                let s = differential(f, &x)?;
                let l = (1.0 / rho).ln();
                let inner: Vec<f64> = y.iter().map(|c| -c / (rho * rho * l)).collect();
                pullback(&s.df, &inner)
            }
            LogKind::LogPhi(p) => {
                let s = differential(f, &x)?;
                let phi = p.eval(rho)?;
                pullback(&s.df, &p.gradient(&y)?).into_iter().map(|g| g / phi).collect()
            }
        };
        total += w * (norm(&grad_w) * eta.value(&x)).powf(q);
    }
    let mut inputs = BTreeMap::new();
    inputs.insert("mapping".into(), f.spec_string());
    inputs.insert("cutoff".into(), cutoff_spec(eta));
    inputs.insert("exponent".into(), format!("{q}"));
    inputs.insert("excision_radius".into(), format!("{delta}"));
    let name = match kind {
        LogKind::LogLog => "log_log_energy",
        LogKind::LogPhi(p) => {
            inputs.insert("profile".into(), format!("a={}", p.a()));
            "log_phi_energy"
        }
    };
    let mut rep = EstimateReport::new(name, total, None, inputs);
    rep.mask_volume = excised;
    Ok(rep)
}

/// `∫ |∇ log log(1/|F|)|^q η^q` off the `delta`-neighbourhood of the zero set.
pub fn log_log_energy_with_exponent(
    f: &Mapping,
    eta: &Cutoff,
    grid: &GridDomain,
    q: f64,
    delta: f64,
) -> Result<EstimateReport> {
    log_energy(f, eta, grid, q, delta, LogKind::LogLog)
}

/// [`log_log_energy_with_exponent`] at exponent `n - 1 + eps`, `0 <= eps < 1`.
pub fn log_log_energy(
    f: &Mapping,
    eta: &Cutoff,
    grid: &GridDomain,
    eps: f64,
    delta: f64,
) -> Result<EstimateReport> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps must lie in [0, 1), got {eps}")));
    }
    let mut rep = log_log_energy_with_exponent(f, eta, grid, grid.dim() as f64 - 1.0 + eps, delta)?;
    rep.inputs.insert("eps".into(), format!("{eps}"));
    Ok(rep)
}

/// Runs [`log_log_energy`] for each excision radius and classifies the trend.
pub fn log_log_energy_sweep(
    f: &Mapping,
    eta: &Cutoff,
    grid: &GridDomain,
    eps: f64,
    deltas: &[f64],
) -> Result<(Vec<EstimateReport>, ExcisionTrend)> {
    let reports = deltas
        .iter()
        .map(|&d| log_log_energy(f, eta, grid, eps, d))
        .collect::<Result<Vec<_>>>()?;
    let trend = ExcisionTrend::from_values(deltas.to_vec(), reports.iter().map(|r| r.lhs).collect());
    Ok((reports, trend))
}

/// `∫ |∇ log(Φ_a∘F)|^q η^q`; equals the log-log integrand wherever `|F| > a`.
pub fn log_phi_energy(
    f: &Mapping,
    profile: &BumpProfile,
    eta: &Cutoff,
    grid: &GridDomain,
    q: f64,
) -> Result<EstimateReport> {
    log_energy(f, eta, grid, q, 0.0, LogKind::LogPhi(profile))
}

/// `ε = (p - n + 1)/(p + 1)`, the largest `ε` with `(n - 1 + ε)/(1 - ε) <= p`.
pub fn admissible_epsilon(n: usize, p: f64) -> Result<f64> {
    if n < 1 || !(p >= n as f64 - 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("need p >= n - 1, got n = {n}, p = {p}")));
    }
    Ok((p - n as f64 + 1.0) / (p + 1.0))
}

/// Exact rational form of [`admissible_epsilon`].
pub fn admissible_epsilon_exact(n: usize, p: &BigRational) -> Result<BigRational> {
    let nm1 = BigRational::from_integer((n as i64 - 1).into());
    if n < 1 || *p < nm1 {
        return Err(Error::InvalidParameter(format!("need p >= n - 1, got n = {n}, p = {p}")));
    }
    Ok((p - &nm1) / (p + BigRational::one()))
}

/// `1 - ε`.
pub fn hausdorff_bound(n: usize, eps: f64) -> Result<f64> {
    if n < 1 || !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps must lie in [0, 1), got {eps}")));
    }
    Ok(1.0 - eps)
}
