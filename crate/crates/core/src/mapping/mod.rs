//! Catalog of explicit test mappings and their pointwise differential analysis.
//!
//! Mappings are addressed by spec strings of the form `name:key=value,...`,
//! for example `winding:k=3,n=3` or `radial:beta=2`. Every mapping accepts
//! `n` (dimension, default 2) and `box` (half-width of the cube domain
//! `[-box, box]^n`, default 1).

mod differential;
mod energy;
mod linalg;

pub use differential::{
    differential, differential_fd, dilatation, ellipticity_form, Dilatation, DifferentialRecord,
    DifferentialSample, EllipticitySample, ELLIPTICITY_CONSTANT,
};
pub use energy::{
    dilatation_integral, polyconvex_energy, polyconvex_energy_masked, young_admissible,
    EnergyReport, LpReport,
};
pub use linalg::{adjugate, adjugate_residual, determinant, operator_norm};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this to an exceptional set are treated as lying on it.
pub const EXCEPTIONAL_TOLERANCE: f64 = 1e-14;

/// Default step of the central-difference differential (relative to `max(1, |x|)`).
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum MappingKind {
    Identity,
    /// `F(x) = A x`.
    Linear { matrix: Vec<Vec<f64>> },
    /// `F(x) = |x|^(beta-1) x`.
    RadialPower { beta: f64 },
    /// Angle in the `(x1, x2)` plane multiplied by `k`; remaining coordinates fixed.
    Winding { k: u32 },
    /// `F(x) = (c + |x|) x/|x|`, opening a hole of radius `c`.
    Cavitation { c: f64 },
    /// `F(x) = (g(x1), x2, ..., xn)` with `g' = 0` on `[-w/2, w/2]`.
    Squeeze { width: f64 },
    /// `F(x) = c x`.
    Scale { c: f64 },
    /// `F(x) = x + b`.
    Translate { offset: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Domain {
    pub fn cube(n: usize, half_width: f64) -> Self {
        Domain::Box {
            lower: vec![-half_width; n],
            upper: vec![half_width; n],
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        const SLACK: f64 = 1e-12;
        match self {
            Domain::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (lo, hi))| *v >= lo - SLACK && *v <= hi + SLACK),
            Domain::Ball { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                r2.sqrt() <= radius + SLACK
            }
        }
    }
}

/// Descriptive metadata attached to each catalog entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingMetadata {
    /// Uniform bound on the dilatation when the map is quasiregular.
    pub quasiregular_bound: Option<f64>,
    pub zero_set: String,
    pub exceptional_set: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mapping {
    kind: MappingKind,
    n: usize,
    domain: Domain,
    fd_step: f64,
    exact: bool,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Builds a catalog mapping from its name and numeric parameters.
///
/// `params` may contain `n` and `box` in addition to the mapping's own keys.
pub fn example_mapping(name: &str, params: &BTreeMap<String, f64>) -> Result<Mapping> {
    let mut params = params.clone();
    let n = match params.remove("n") {
        Some(v) if v >= 2.0 && v.fract() == 0.0 && v <= 16.0 => v as usize,
        Some(v) => {
            return Err(Error::InvalidParameter(format!(
                "dimension n must be an integer in 2..=16, got {v}"
            )))
        }
        None => 2,
    };
    let half_width = params.remove("box").unwrap_or(1.0);
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "box half-width must be positive, got {half_width}"
        )));
    }
    let mut take = |key: &str| params.remove(key);
    let kind = match name {
        "identity" => MappingKind::Identity,
        "linear" => {
            let mut matrix = vec![vec![0.0; n]; n];
            for (i, row) in matrix.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            let keys: Vec<String> = params.keys().cloned().collect();
            for key in keys {
                let (i, j) = parse_entry_key(&key, n)?;
                matrix[i][j] = params.remove(&key).unwrap_or_default();
            }
            MappingKind::Linear { matrix }
        }
        "radial" | "radial_power" => {
            let beta = take("beta").unwrap_or(2.0);
            if !(beta > 0.0) {
                return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
            }
            MappingKind::RadialPower { beta }
        }
        "winding" => {
            let k = take("k").unwrap_or(2.0);
            if !(k >= 1.0 && k.fract() == 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "winding number k must be an integer >= 1, got {k}"
                )));
            }
            MappingKind::Winding { k: k as u32 }
        }
        "cavitation" => {
            let c = take("c").unwrap_or(0.1);
            if !(c > 0.0) {
                return Err(Error::InvalidParameter(format!("c must be > 0, got {c}")));
            }
            MappingKind::Cavitation { c }
        }
        "squeeze" => {
            let width = take("w").unwrap_or(0.5);
            if !(width > 0.0) {
                return Err(Error::InvalidParameter(format!("w must be > 0, got {width}")));
            }
            MappingKind::Squeeze { width }
        }
        "scale" => {
            let c = take("c").unwrap_or(1.0);
            if !(c > 0.0) {
                return Err(Error::InvalidParameter(format!("c must be > 0, got {c}")));
            }
            MappingKind::Scale { c }
        }
        "translate" => {
            let mut offset = vec![0.0; n];
            for (k, o) in offset.iter_mut().enumerate() {
                *o = take(&format!("b{}", k + 1)).unwrap_or(0.0);
            }
            MappingKind::Translate { offset }
        }
        other => return Err(Error::UnknownMapping(other.to_string())),
    };
    if let Some(key) = params.keys().next() {
        return Err(Error::InvalidParameter(format!(
            "unknown key `{key}` for mapping `{name}`"
        )));
    }
    Ok(Mapping {
        kind,
        n,
        domain: Domain::cube(n, half_width),
        fd_step: DEFAULT_FD_STEP,
        exact: true,
    })
}

fn parse_entry_key(key: &str, n: usize) -> Result<(usize, usize)> {
    let bad = || Error::InvalidParameter(format!("unknown key `{key}` for mapping `linear`"));
    let digits = key.strip_prefix('a').ok_or_else(bad)?;
    let mut chars = digits.chars();
    let (i, j) = match (chars.next(), chars.next(), chars.next()) {
        (Some(i), Some(j), None) => (
            i.to_digit(10).ok_or_else(bad)? as usize,
            j.to_digit(10).ok_or_else(bad)? as usize,
        ),
        _ => return Err(bad()),
    };
    if i == 0 || j == 0 || i > n || j > n {
        return Err(bad());
    }
    Ok((i - 1, j - 1))
}

/// Parses `name:key=value,...` into a catalog mapping.
pub fn parse_mapping_spec(spec: &str) -> Result<Mapping> {
    let spec = spec.trim();
    let (name, rest) = match spec.split_once(':') {
        Some((name, rest)) => (name.trim(), rest.trim()),
        None => (spec, ""),
    };
    if name.is_empty() {
        return Err(Error::MalformedSpec(spec.to_string()));
    }
    let mut params = BTreeMap::new();
    for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::MalformedSpec(spec.to_string()))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::MalformedSpec(spec.to_string()))?;
        if params.insert(key.trim().to_string(), value).is_some() {
            return Err(Error::MalformedSpec(spec.to_string()));
        }
    }
    example_mapping(name, &params)
}

impl std::str::FromStr for Mapping {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_mapping_spec(s)
    }
}

fn squeeze_profile(width: f64, t: f64) -> (f64, f64) {
    let s = t.abs() - 0.5 * width;
    let sign = t.signum();
    if s <= 0.0 {
        (0.0, 0.0)
    } else if s <= 1.0 {
        (sign * 0.5 * s * s, s)
    } else {
        (sign * (s - 0.5), 1.0)
    }
}

impl Mapping {
    pub fn kind(&self) -> &MappingKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            MappingKind::Identity => "identity",
            MappingKind::Linear { .. } => "linear",
            MappingKind::RadialPower { .. } => "radial",
            MappingKind::Winding { .. } => "winding",
            MappingKind::Cavitation { .. } => "cavitation",
            MappingKind::Squeeze { .. } => "squeeze",
            MappingKind::Scale { .. } => "scale",
            MappingKind::Translate { .. } => "translate",
        }
    }

    /// Canonical spec string; parsing it back yields an equal mapping (up to the domain).
    pub fn spec_string(&self) -> String {
        let mut parts = vec![format!("n={}", self.n)];
        match &self.kind {
            MappingKind::Identity => {}
            MappingKind::Linear { matrix } => {
                for (i, row) in matrix.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        let default = if i == j { 1.0 } else { 0.0 };
                        if *v != default {
                            parts.push(format!("a{}{}={v}", i + 1, j + 1));
                        }
                    }
                }
            }
            MappingKind::RadialPower { beta } => parts.push(format!("beta={beta}")),
            MappingKind::Winding { k } => parts.push(format!("k={k}")),
            MappingKind::Cavitation { c } | MappingKind::Scale { c } => {
                parts.push(format!("c={c}"))
            }
            MappingKind::Squeeze { width } => parts.push(format!("w={width}")),
            MappingKind::Translate { offset } => {
                for (k, b) in offset.iter().enumerate() {
                    if *b != 0.0 {
                        parts.push(format!("b{}={b}", k + 1));
                    }
                }
            }
        }
        format!("{}:{}", self.name(), parts.join(","))
    }

    pub fn metadata(&self) -> MappingMetadata {
        let n = self.n as f64;
        let (bound, zero, exceptional) = match &self.kind {
            MappingKind::Identity | MappingKind::Scale { .. } => (Some(1.0), "{0}".into(), "none".into()),
            MappingKind::Linear { matrix } => {
                let a = DMatrix::from_fn(self.n, self.n, |i, j| matrix[i][j]);
                let det = a.determinant();
                let bound = (det > 0.0).then(|| operator_norm(&a).powf(n) / det);
                let zero = if det != 0.0 { "{0}" } else { "kernel of A" };
                (bound, zero.into(), "none".into())
            }
            MappingKind::RadialPower { beta } => (
                Some(beta.max(1.0).powf(n) / beta),
                "{0}".into(),
                if *beta < 1.0 { "{0}" } else { "none" }.into(),
            ),
            MappingKind::Winding { k } => (
                Some((*k as f64).powf(n - 1.0)),
                "{x1 = x2 = 0}".into(),
                if *k >= 2 { "{x1 = x2 = 0}" } else { "none" }.into(),
            ),
            MappingKind::Cavitation { .. } => (None, "empty".into(), "{0}".into()),
            MappingKind::Squeeze { width } => (
                None,
                format!("segment [-{0}, {0}] x {{0}}", 0.5 * width),
                "none".into(),
            ),
            MappingKind::Translate { offset } => {
                let z: Vec<String> = offset.iter().map(|b| format!("{}", -b)).collect();
                (Some(1.0), format!("{{({})}}", z.join(", ")), "none".into())
            }
        };
        MappingMetadata {
            quasiregular_bound: bound,
            zero_set: zero,
            exceptional_set: exceptional,
        }
    }

    /// The zero set when it is a finite list of points; `None` for curves and segments.
    pub fn zero_points(&self) -> Option<Vec<Vec<f64>>> {
        let origin = vec![0.0; self.n];
        match &self.kind {
            MappingKind::Identity | MappingKind::Scale { .. } | MappingKind::RadialPower { .. } => {
                Some(vec![origin])
            }
            MappingKind::Linear { matrix } => {
                let a = DMatrix::from_fn(self.n, self.n, |i, j| matrix[i][j]);
                (a.determinant() != 0.0).then(|| vec![origin])
            }
            MappingKind::Winding { .. } => (self.n == 2).then(|| vec![origin]),
            MappingKind::Cavitation { .. } => Some(Vec::new()),
            MappingKind::Squeeze { .. } => None,
            MappingKind::Translate { offset } => Some(vec![offset.iter().map(|b| -b).collect()]),
        }
    }

    /// True when `x` lies on the declared exceptional set (where `DF` is undefined).
    pub fn is_exceptional(&self, x: &[f64]) -> bool {
        match &self.kind {
            MappingKind::RadialPower { beta } if *beta < 1.0 => norm(x) < EXCEPTIONAL_TOLERANCE,
            MappingKind::Winding { k } if *k >= 2 => x[0].hypot(x[1]) < EXCEPTIONAL_TOLERANCE,
            MappingKind::Cavitation { .. } => norm(x) < EXCEPTIONAL_TOLERANCE,
            _ => false,
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        Ok(())
    }

    /// `F(x)`. Fails off the domain; cavitation is undefined at the origin.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.eval_unchecked(x)
    }

    fn eval_unchecked(&self, x: &[f64]) -> Result<Vec<f64>> {
        let out = match &self.kind {
            MappingKind::Identity => x.to_vec(),
            MappingKind::Linear { matrix } => matrix
                .iter()
                .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
                .collect(),
            MappingKind::RadialPower { beta } => {
                let r = norm(x);
                if r == 0.0 {
                    vec![0.0; self.n]
                } else {
                    let s = r.powf(beta - 1.0);
                    x.iter().map(|v| v * s).collect()
                }
            }
            MappingKind::Winding { k } => {
                let rho = x[0].hypot(x[1]);
                let theta = x[1].atan2(x[0]);
                let phi = *k as f64 * theta;
                let mut y = x.to_vec();
                y[0] = rho * phi.cos();
                y[1] = rho * phi.sin();
                y
            }
            MappingKind::Cavitation { c } => {
                let r = norm(x);
                if r < EXCEPTIONAL_TOLERANCE {
                    return Err(Error::ExceptionalPoint(x.to_vec()));
                }
                let s = (c + r) / r;
                x.iter().map(|v| v * s).collect()
            }
            MappingKind::Squeeze { width } => {
                let mut y = x.to_vec();
                y[0] = squeeze_profile(*width, x[0]).0;
                y
            }
            MappingKind::Scale { c } => x.iter().map(|v| c * v).collect(),
            MappingKind::Translate { offset } => x.iter().zip(offset).map(|(a, b)| a + b).collect(),
        };
        Ok(out)
    }

    pub fn has_exact_differential(&self) -> bool {
        self.exact
    }

    /// Drops (or restores) the closed-form differential, forcing finite differences.
    pub fn with_exact_differential(mut self, enabled: bool) -> Self {
        self.exact = enabled;
        self
    }

    /// Closed-form `DF(x)`; `None` when no exact rule is available.
    pub fn exact_differential(&self, x: &[f64]) -> Result<Option<DMatrix<f64>>> {
        self.check_point(x)?;
        if self.is_exceptional(x) {
            return Err(Error::ExceptionalPoint(x.to_vec()));
        }
        if !self.exact {
            return Ok(None);
        }
        let n = self.n;
        let m = match &self.kind {
            MappingKind::Identity | MappingKind::Translate { .. } => DMatrix::identity(n, n),
            MappingKind::Scale { c } => DMatrix::identity(n, n) * *c,
            MappingKind::Linear { matrix } => DMatrix::from_fn(n, n, |i, j| matrix[i][j]),
            MappingKind::RadialPower { beta } => {
                let r = norm(x);
                if r == 0.0 {
                    // beta >= 1 here: DF(0) = 0 for beta > 1, I for beta = 1
                    if *beta == 1.0 {
                        DMatrix::identity(n, n)
                    } else {
                        DMatrix::zeros(n, n)
                    }
                } else {
                    let u = DVector::from_iterator(n, x.iter().map(|v| v / r));
                    let s = r.powf(beta - 1.0);
                    (DMatrix::identity(n, n) + &u * u.transpose() * (beta - 1.0)) * s
                }
            }
            MappingKind::Winding { k } => {
                let mut m = DMatrix::identity(n, n);
                let rho = x[0].hypot(x[1]);
                if rho > 0.0 || *k == 1 {
                    let theta = x[1].atan2(x[0]);
                    let kf = *k as f64;
                    let phi = kf * theta;
                    let (st, ct) = theta.sin_cos();
                    let (sp, cp) = phi.sin_cos();
                    // R(k theta) diag(1, k) R(theta)^T
                    m[(0, 0)] = cp * ct + kf * sp * st;
                    m[(0, 1)] = cp * st - kf * sp * ct;
                    m[(1, 0)] = sp * ct - kf * cp * st;
                    m[(1, 1)] = sp * st + kf * cp * ct;
                }
                m
            }
            MappingKind::Cavitation { c } => {
                let r = norm(x);
                let u = DVector::from_iterator(n, x.iter().map(|v| v / r));
                let p = &u * u.transpose();
                (DMatrix::identity(n, n) - &p) * ((c + r) / r) + p
            }
            MappingKind::Squeeze { width } => {
                let mut m = DMatrix::identity(n, n);
                m[(0, 0)] = squeeze_profile(*width, x[0]).1;
                m
            }
        };
        Ok(Some(m))
    }

    /// Central-difference `DF(x)` with step `h`.
    pub fn fd_differential(&self, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        if self.is_exceptional(x) {
            return Err(Error::ExceptionalPoint(x.to_vec()));
        }
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        for j in 0..n {
            xp[j] = x[j] + h;
            xm[j] = x[j] - h;
            let fp = self.eval_unchecked(&xp)?;
            let fm = self.eval_unchecked(&xm)?;
            for i in 0..n {
                m[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
            xp[j] = x[j];
            xm[j] = x[j];
        }
        Ok(m)
    }

    /// Exact differential where available, central differences otherwise.
    pub fn jacobian_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        match self.exact_differential(x)? {
            Some(m) => Ok(m),
            None => {
                let h = self.fd_step * norm(x).max(1.0);
                self.fd_differential(x, h)
            }
        }
    }
}

/// Angle of `(x1, x2)` in `[0, 2 pi)`.
pub fn polar_angle(x: &[f64]) -> f64 {
    let t = x[1].atan2(x[0]);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}
