use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linalg::{adjugate, adjugate_residual, determinant, operator_norm};
use super::Mapping;
use crate::error::{Error, Result};

/// `DF` counts as zero when its norm is at most this times the scale.
pub const ZERO_DIFFERENTIAL_TOLERANCE: f64 = 1e-12;

/// Constant in the two-sided ellipticity bound
/// `(c K)^-1 |xi|^n <= A(x, xi).xi <= c K^(n-1) |xi|^n`.
///
/// With the spectral norm the bound holds with `c = 1`.
pub const ELLIPTICITY_CONSTANT: f64 = 1.0;

/// Dilatation `K = |DF|^n / J` under the finite-dilatation convention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Dilatation {
    Finite(f64),
    /// `J = 0` and `DF = 0`: counted as `K = 1`.
    Degenerate,
    /// `J <= 0` with `DF != 0`.
    Infinite,
}

impl Dilatation {
    pub fn value(&self) -> f64 {
        match self {
            Dilatation::Finite(k) => *k,
            Dilatation::Degenerate => 1.0,
            Dilatation::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, Dilatation::Infinite)
    }
}

/// Dilatation from a differential and its determinant.
pub fn dilatation(df: &DMatrix<f64>, jacobian: f64) -> Dilatation {
    dilatation_with_scale(df, jacobian, 1.0)
}

pub fn dilatation_with_scale(df: &DMatrix<f64>, jacobian: f64, scale: f64) -> Dilatation {
    let n = df.nrows() as i32;
    let norm = operator_norm(df);
    if jacobian > 0.0 {
        Dilatation::Finite(norm.powi(n) / jacobian)
    } else if norm <= ZERO_DIFFERENTIAL_TOLERANCE * scale {
        Dilatation::Degenerate
    } else {
        Dilatation::Infinite
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialSample {
    pub point: Vec<f64>,
    pub df: DMatrix<f64>,
    pub jacobian: f64,
    pub opnorm: f64,
    pub adjugate: DMatrix<f64>,
    pub dilatation: Dilatation,
    /// `DF` came from the closed-form rule rather than finite differences.
    pub exact: bool,
    /// `J < 0`: the map reverses orientation here.
    pub sense_reversing: bool,
}

impl DifferentialSample {
    pub fn from_matrix(point: Vec<f64>, df: DMatrix<f64>, exact: bool) -> Result<Self> {
        let jacobian = determinant(&df)?;
        let adj = adjugate(&df)?;
        Ok(Self {
            point,
            opnorm: operator_norm(&df),
            dilatation: dilatation(&df, jacobian),
            sense_reversing: jacobian < 0.0,
            jacobian,
            adjugate: adj,
            df,
            exact,
        })
    }

    pub fn dim(&self) -> usize {
        self.df.nrows()
    }

    /// `||DF adj(DF) - J I||`.
    pub fn adjugate_residual(&self) -> f64 {
        adjugate_residual(&self.df, &self.adjugate, self.jacobian)
    }

    pub fn record(&self) -> DifferentialRecord {
        let rows = |m: &DMatrix<f64>| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect()
        };
        DifferentialRecord {
            point: self.point.clone(),
            df: rows(&self.df),
            jacobian: self.jacobian,
            opnorm: self.opnorm,
            adjugate: rows(&self.adjugate),
            dilatation: self.dilatation,
            exact: self.exact,
            sense_reversing: self.sense_reversing,
            adjugate_residual: self.adjugate_residual(),
        }
    }
}

/// Serializable view of a [`DifferentialSample`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferentialRecord {
    pub point: Vec<f64>,
    pub df: Vec<Vec<f64>>,
    pub jacobian: f64,
    pub opnorm: f64,
    pub adjugate: Vec<Vec<f64>>,
    pub dilatation: Dilatation,
    pub exact: bool,
    pub sense_reversing: bool,
    pub adjugate_residual: f64,
}

/// Differential analysis of `f` at `x`.
pub fn differential(f: &Mapping, x: &[f64]) -> Result<DifferentialSample> {
    match f.exact_differential(x)? {
        Some(df) => DifferentialSample::from_matrix(x.to_vec(), df, true),
        None => {
            let h = f.fd_step() * x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
            differential_fd(f, x, h)
        }
    }
}

/// Differential analysis from central differences with step `h`.
pub fn differential_fd(f: &Mapping, x: &[f64], h: f64) -> Result<DifferentialSample> {
    let df = f.fd_differential(x, h)?;
    DifferentialSample::from_matrix(x.to_vec(), df, false)
}

/// Quadratic form `theta = J^(2/n) (DF^T DF)^-1` and the values `A(x, xi).xi`
/// of `A(x, xi) = <theta xi, xi>^((n-2)/2) theta xi` on the probes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticitySample {
    pub point: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
    pub probes: Vec<Vec<f64>>,
    /// `A(x, xi).xi / |xi|^n` per probe.
    pub normalized_forms: Vec<f64>,
    pub dilatation: f64,
    /// `1/(c K)` and `c K^(n-1)` with `c = ELLIPTICITY_CONSTANT`.
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Smallest `c` for which every probe satisfies both bounds.
    pub tightest_constant: f64,
    pub bounds_hold: bool,
}

pub fn ellipticity_form(
    sample: &DifferentialSample,
    probes: &[Vec<f64>],
) -> Result<EllipticitySample> {
    let n = sample.dim();
    if sample.jacobian <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ellipticity form needs J > 0, got {}",
            sample.jacobian
        )));
    }
    let gram = sample.df.transpose() * &sample.df;
    let inv = gram.try_inverse().ok_or(Error::SingularMatrix)?;
    let theta = inv * sample.jacobian.powf(2.0 / n as f64);
    let theta = (&theta + theta.transpose()) * 0.5;
    let k = sample.dilatation.value();
    let mut forms = Vec::with_capacity(probes.len());
    let mut tightest: f64 = 0.0;
    for xi in probes {
        if xi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: xi.len(),
            });
        }
        let v = DVector::from_column_slice(xi);
        let tv = &theta * &v;
        let q = tv.dot(&v);
        let a = &tv * q.powf((n as f64 - 2.0) / 2.0);
        let form = a.dot(&v);
        let len = v.norm();
        if len == 0.0 {
            forms.push(0.0);
            continue;
        }
        let normalized = form / len.powi(n as i32);
        tightest = tightest
            .max(1.0 / (k * normalized))
            .max(normalized / k.powi(n as i32 - 1));
        forms.push(normalized);
    }
    let c = ELLIPTICITY_CONSTANT;
    let lower = 1.0 / (c * k);
    let upper = c * k.powi(n as i32 - 1);
    let tol = 1e-10;
    let bounds_hold = forms
        .iter()
        .all(|&f| f >= lower * (1.0 - tol) && f <= upper * (1.0 + tol));
    Ok(EllipticitySample {
        point: sample.point.clone(),
        theta: (0..n)
            .map(|i| (0..n).map(|j| theta[(i, j)]).collect())
            .collect(),
        probes: probes.to_vec(),
        normalized_forms: forms,
        dilatation: k,
        lower_bound: lower,
        upper_bound: upper,
        tightest_constant: tightest,
        bounds_hold,
    })
}
