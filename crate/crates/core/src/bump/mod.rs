//! The radial n-superharmonic bump family `Φ_a` on the ball `|y| < e^{-e}`.
//!
//! In the normalized radius `s = |y|/a` the profile has three pieces:
//!
//! * inner, `s <= 1/2`: the even polynomial `Q(s) = c0 + c2 s² + c4 s⁴ + c6 s⁶`;
//! * middle, `1/2 < s <= 1`: `P(s) = ln(1/a) - (s - 1) + (s - 1)²/2`;
//! * outer, `s > 1`: `ln(1/|y|)`.
//!
//! Only `c0` carries `ln(1/a)`; `c2, c4, c6` are `a`-independent. The
//! coefficients are kept exactly in `Q[ln 2, ln(1/a)]` alongside a
//! floating-point mirror used for sampling.

mod certificate;
mod construct;
mod properties;

pub use certificate::{
    certify_middle, certify_outer, certify_profile, certify_superharmonic, CertificateMethod,
    QuadraticSign, SignCertificate,
};
pub use construct::{
    construct_bump, matching_matrix, closed_form_head_offset, solve_inner_coefficients,
    solve_inner_coefficients_exact, SearchConfig, SearchOutcome,
};
pub use properties::{
    check_flux_c1, matching_jumps, verify_properties, FluxC1Check, MatchingReport, PropertyCheck,
    PropertyConfig, PropertyReport,
};

use std::io::{self, Write};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ExactAffine, ExactReal};
use crate::target_radius;

/// Which piece of the profile a radius falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    Inner,
    Middle,
    Outer,
}

/// A radial function with two classical derivatives away from the origin.
pub trait RadialFunction {
    fn value(&self, r: f64) -> Result<f64>;
    fn d1(&self, r: f64) -> Result<f64>;
    fn d2(&self, r: f64) -> Result<f64>;
}

/// `ln(1/r)`, the n-harmonic fundamental solution.
#[derive(Clone, Copy, Debug, Default)]
pub struct LogInverse;

impl RadialFunction for LogInverse {
    fn value(&self, r: f64) -> Result<f64> {
        Ok(-r.ln())
    }
    fn d1(&self, r: f64) -> Result<f64> {
        Ok(-1.0 / r)
    }
    fn d2(&self, r: f64) -> Result<f64> {
        Ok(1.0 / (r * r))
    }
}

/// `r^k`.
#[derive(Clone, Copy, Debug)]
pub struct PowerLaw(pub f64);

impl RadialFunction for PowerLaw {
    fn value(&self, r: f64) -> Result<f64> {
        Ok(r.powf(self.0))
    }
    fn d1(&self, r: f64) -> Result<f64> {
        Ok(self.0 * r.powf(self.0 - 1.0))
    }
    fn d2(&self, r: f64) -> Result<f64> {
        Ok(self.0 * (self.0 - 1.0) * r.powf(self.0 - 2.0))
    }
}

/// Radial n-Laplacian `(n-1) |u'|^(n-2) (u'' + u'/r)`.
pub fn radial_n_laplacian<F: RadialFunction + ?Sized>(f: &F, n: usize, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::RadiusZero);
    }
    let d1 = f.d1(r)?;
    let d2 = f.d2(r)?;
    Ok((n as f64 - 1.0) * d1.abs().powi(n as i32 - 2) * (d2 + d1 / r))
}

/// Magnitude scale of the terms in [`radial_n_laplacian`]; rounding in the
/// cancellation `u'' + u'/r` is relative to this.
pub fn radial_n_laplacian_scale<F: RadialFunction + ?Sized>(f: &F, n: usize, r: f64) -> Result<f64> {
    let d1 = f.d1(r)?;
    let d2 = f.d2(r)?;
    Ok((n as f64 - 1.0) * d1.abs().powi(n as i32 - 2) * (d2.abs() + d1.abs() / r))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BumpProfile {
    a: f64,
    n: usize,
    exact: [ExactReal; 4],
    float: [f64; 4],
}

fn check_radius(a: f64) -> Result<()> {
    if !(a > 0.0 && a < target_radius()) {
        return Err(Error::InvalidParameter(format!(
            "bump radius a must satisfy 0 < a < e^-e ≈ {:.6}, got {a}",
            target_radius()
        )));
    }
    Ok(())
}

impl BumpProfile {
    /// Profile with exact inner coefficients `[c0, c2, c4, c6]` (`c0` includes `ln(1/a)`).
    ///
    /// No matching is enforced here; see [`matching_jumps`].
    pub fn from_exact(a: f64, n: usize, coefficients: [ExactReal; 4]) -> Result<Self> {
        check_radius(a)?;
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {n}")));
        }
        let float = [
            coefficients[0].to_f64(a),
            coefficients[1].to_f64(a),
            coefficients[2].to_f64(a),
            coefficients[3].to_f64(a),
        ];
        Ok(Self {
            a,
            n,
            exact: coefficients,
            float,
        })
    }

    /// Profile from floating-point coefficients, stored exactly as the given binary values.
    ///
    /// `c0` is absolute (it already includes `ln(1/a)`), so its exact form is the
    /// offset `c0 - ln(1/a)` rounded to a double plus one `ln(1/a)`.
    pub fn from_float_coefficients(a: f64, n: usize, c: [f64; 4]) -> Result<Self> {
        check_radius(a)?;
        let to_exact = |v: f64| {
            BigRational::from_float(v)
                .map(ExactReal::from_rational)
                .ok_or_else(|| Error::InvalidParameter(format!("non-finite coefficient {v}")))
        };
        let offset = c[0] - (1.0 / a).ln();
        let c0 = ExactReal::log_inv_a() + to_exact(offset)?;
        Self::from_exact(a, n, [c0, to_exact(c[1])?, to_exact(c[2])?, to_exact(c[3])?])
    }

    /// The explicit profile with head value `ln(1/a) + ln 2 + 1/2`.
    pub fn closed_form(a: f64, n: usize) -> Result<Self> {
        let head = closed_form_head_offset();
        let [c2, c4, c6] = solve_inner_coefficients_exact(&head);
        Self::from_exact(a, n, [ExactReal::log_inv_a() + head, c2, c4, c6])
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn with_dim(&self, n: usize) -> Result<Self> {
        Self::from_exact(self.a, n, self.exact.clone())
    }

    pub fn exact_coefficients(&self) -> &[ExactReal; 4] {
        &self.exact
    }

    /// `[c0, c2, c4, c6]` in floating point (`c0` includes `ln(1/a)`).
    pub fn coefficients(&self) -> [f64; 4] {
        self.float
    }

    /// `c0 - ln(1/a)`, exactly.
    pub fn head_offset(&self) -> ExactReal {
        self.exact[0].clone() - ExactReal::log_inv_a()
    }

    pub fn log_inv_a(&self) -> f64 {
        (1.0 / self.a).ln()
    }

    pub fn piece(&self, r: f64) -> Piece {
        if r <= 0.5 * self.a {
            Piece::Inner
        } else if r <= self.a {
            Piece::Middle
        } else {
            Piece::Outer
        }
    }

    fn check(&self, r: f64) -> Result<()> {
        if !(r >= 0.0 && r < target_radius()) {
            return Err(Error::OutsideBumpDomain { radius: r });
        }
        Ok(())
    }

    /// `(Q, Q', Q'')` of the inner polynomial in the normalized radius.
    pub fn inner_normalized(&self, s: f64) -> (f64, f64, f64) {
        let [c0, c2, c4, c6] = self.float;
        let u = s * s;
        let q = c0 + u * (c2 + u * (c4 + u * c6));
        let dq = s * (2.0 * c2 + u * (4.0 * c4 + u * 6.0 * c6));
        let ddq = 2.0 * c2 + u * (12.0 * c4 + u * 30.0 * c6);
        (q, dq, ddq)
    }

    /// `(P, P', P'')` of the middle quadratic in the normalized radius.
    pub fn middle_normalized(&self, s: f64) -> (f64, f64, f64) {
        let t = s - 1.0;
        (self.log_inv_a() - t + 0.5 * t * t, t - 1.0, 1.0)
    }

    /// `(Φ, Φ', Φ'')` with respect to `r = |y|`.
    pub fn eval_with_derivatives(&self, r: f64) -> Result<(f64, f64, f64)> {
        self.check(r)?;
        let a = self.a;
        Ok(match self.piece(r) {
            Piece::Outer => (-r.ln(), -1.0 / r, 1.0 / (r * r)),
            Piece::Middle => {
                let (p, dp, ddp) = self.middle_normalized(r / a);
                (p, dp / a, ddp / (a * a))
            }
            Piece::Inner => {
                let (q, dq, ddq) = self.inner_normalized(r / a);
                (q, dq / a, ddq / (a * a))
            }
        })
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        self.eval_with_derivatives(r).map(|v| v.0)
    }

    pub fn derivative(&self, r: f64) -> Result<f64> {
        self.eval_with_derivatives(r).map(|v| v.1)
    }

    pub fn second_derivative(&self, r: f64) -> Result<f64> {
        self.eval_with_derivatives(r).map(|v| v.2)
    }

    /// `Φ_a(y)` for a point of any dimension.
    pub fn eval_point(&self, y: &[f64]) -> Result<f64> {
        self.eval(y.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// `∇Φ_a(y) = Φ'(r) y/r` (zero at the origin).
    pub fn gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let d = self.derivative(r)?;
        if r == 0.0 {
            return Ok(vec![0.0; y.len()]);
        }
        Ok(y.iter().map(|v| d * v / r).collect())
    }

    /// Radial n-Laplacian with the limit value at `r = 0`:
    /// `4 c2 / a²` when `n = 2`, zero for `n > 2`.
    pub fn n_laplacian(&self, n: usize, r: f64) -> Result<f64> {
        if r == 0.0 {
            self.check(r)?;
            return Ok(if n == 2 {
                4.0 * self.float[1] / (self.a * self.a)
            } else {
                0.0
            });
        }
        radial_n_laplacian(self, n, r)
    }

    /// Signed radial component `|Φ'|^(n-2) Φ'` of the flux `|∇Φ|^(n-2) ∇Φ`.
    pub fn flux_radial(&self, n: usize, r: f64) -> Result<f64> {
        let d = self.derivative(r)?;
        Ok(d.abs().powi(n as i32 - 2) * d)
    }

    /// Exact coefficient dump.
    pub fn coefficient_dump(&self) -> CoefficientDump {
        let affine = |e: &ExactReal| e.to_affine_json();
        CoefficientDump {
            a: self.a,
            n: self.n,
            c0: affine(&self.exact[0]),
            c2: affine(&self.exact[1]),
            c4: affine(&self.exact[2]),
            c6: affine(&self.exact[3]),
            c0_exact: self.exact[0].to_string(),
            c2_exact: self.exact[1].to_string(),
            c4_exact: self.exact[2].to_string(),
            c6_exact: self.exact[3].to_string(),
            decimal: self.float.to_vec(),
            head_offset_decimal: self.head_offset().value(),
        }
    }

    /// CSV of `r, Φ, Φ', Δ_n Φ` at `samples` equally spaced radii in `(0, r_max]`.
    pub fn write_profile_csv<W: Write>(
        &self,
        n: usize,
        r_max: f64,
        samples: usize,
        mut out: W,
    ) -> io::Result<()> {
        writeln!(out, "r,phi,dphi,n_laplacian")?;
        let r_max = r_max.min(target_radius() * (1.0 - 1e-12));
        for k in 1..=samples {
            let r = r_max * k as f64 / samples as f64;
            let (v, d, _) = self
                .eval_with_derivatives(r)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
            let lap = self
                .n_laplacian(n, r)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
            writeln!(out, "{r:.17e},{v:.17e},{d:.17e},{lap:.17e}")?;
        }
        Ok(())
    }
}

impl RadialFunction for BumpProfile {
    fn value(&self, r: f64) -> Result<f64> {
        self.eval(r)
    }
    fn d1(&self, r: f64) -> Result<f64> {
        self.derivative(r)
    }
    fn d2(&self, r: f64) -> Result<f64> {
        self.second_derivative(r)
    }
}

/// JSON form of the inner coefficients: `{rational, log2_coeff, log_inv_a_coeff}` per entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientDump {
    pub a: f64,
    pub n: usize,
    pub c0: Option<ExactAffine>,
    pub c2: Option<ExactAffine>,
    pub c4: Option<ExactAffine>,
    pub c6: Option<ExactAffine>,
    pub c0_exact: String,
    pub c2_exact: String,
    pub c4_exact: String,
    pub c6_exact: String,
    pub decimal: Vec<f64>,
    pub head_offset_decimal: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn profile() -> BumpProfile {
        BumpProfile::closed_form(0.01, 3).unwrap()
    }

    #[test]
    fn outer_piece_value() {
        let v = profile().eval(0.02).unwrap();
        assert!((v - 50f64.ln()).abs() < 1e-15);
        assert!((v - 3.9120230).abs() < 1e-7);
    }

    #[test]
    fn head_value() {
        let v = profile().eval(0.0).unwrap();
        let expect = 100f64.ln() + LN2 + 0.5;
        assert!((v - expect).abs() < 1e-14);
        assert!((v - 5.798317366548037).abs() < 1e-13);
    }

    #[test]
    fn half_radius_from_both_pieces() {
        let p = profile();
        let (q, dq, ddq) = p.inner_normalized(0.5);
        let (m, dm, ddm) = p.middle_normalized(0.5);
        let expect = 100f64.ln() + 0.625;
        assert!((q - expect).abs() < 1e-14 && (m - expect).abs() < 1e-14);
        assert!((dq - dm).abs() < 1e-13 && (dm + 1.5).abs() < 1e-15);
        assert!((ddq - ddm).abs() < 1e-13);
    }

    #[test]
    fn domain_enforced() {
        let p = profile();
        assert!(matches!(p.eval(0.07), Err(Error::OutsideBumpDomain { .. })));
        assert!(p.eval(target_radius()).is_err());
        assert!(BumpProfile::closed_form(0.5, 2).is_err());
        assert!(BumpProfile::closed_form(0.0, 2).is_err());
    }

    #[test]
    fn n_laplacian_of_references() {
        for n in [2, 3, 5, 7] {
            for r in [0.01, 0.3, 2.0] {
                assert!(radial_n_laplacian(&LogInverse, n, r).unwrap().abs() < 1e-12 / (r * r) * r.powi(2 - n as i32).max(1.0));
            }
        }
        assert!((radial_n_laplacian(&PowerLaw(2.0), 2, 1.0).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(radial_n_laplacian(&LogInverse, 3, 0.0), Err(Error::RadiusZero));
    }

    #[test]
    fn n_laplacian_just_inside_half_radius() {
        let a = 0.01;
        let p = profile();
        let r = 0.5 * a;
        for n in [2usize, 3, 5] {
            let got = p.n_laplacian(n, r).unwrap();
            let expect = (n as f64 - 1.0) * (1.5 / a).powi(n as i32 - 2) * (-2.0 / (a * a));
            assert!((got - expect).abs() < 1e-10 * expect.abs(), "n={n}: {got} vs {expect}");
            assert!(got < 0.0);
        }
    }

    #[test]
    fn radial_formula_matches_cartesian_divergence() {
        // div(|∇Φ|^(n-2) ∇Φ) by central differences of the Cartesian flux
        let p = profile();
        let flux = |y: &[f64]| -> Vec<f64> {
            let g = p.gradient(y).unwrap();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            g.iter().map(|v| v * norm).collect()
        };
        let h = 1e-7;
        for y in [[0.003, 0.001, -0.0005], [0.004, -0.003, 0.002], [0.01, 0.012, 0.0]] {
            let mut div = 0.0;
            for i in 0..3 {
                let (mut yp, mut ym) = (y, y);
                yp[i] += h;
                ym[i] -= h;
                div += (flux(&yp)[i] - flux(&ym)[i]) / (2.0 * h);
            }
            let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let radial = p.n_laplacian(3, r).unwrap();
            let scale = radial_n_laplacian_scale(&p, 3, r).unwrap();
            assert!((div - radial).abs() < 1e-5 * scale, "{div} vs {radial}");
        }
    }

    #[test]
    fn float_coefficients_roundtrip() {
        let p = profile();
        let q = BumpProfile::from_float_coefficients(0.01, 3, p.coefficients()).unwrap();
        for r in [0.0, 0.001, 0.004, 0.007] {
            assert!((p.eval(r).unwrap() - q.eval(r).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn coefficient_dump_exact_form() {
        let d = profile().coefficient_dump();
        let c2 = d.c2.unwrap();
        assert_eq!((c2.rational.as_str(), c2.log2_coeff.as_str()), ("5", "-12"));
        let c0 = d.c0.unwrap();
        assert_eq!(
            (c0.rational.as_str(), c0.log2_coeff.as_str(), c0.log_inv_a_coeff.as_str()),
            ("1/2", "1", "1")
        );
        assert_eq!(d.c4_exact, "-28 + 48 ln2");
        assert_eq!(d.c6_exact, "40 - 64 ln2");
    }

    #[test]
    fn profile_csv_rows() {
        let mut buf = Vec::new();
        profile().write_profile_csv(3, 0.03, 30, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 31);
        assert!(text.starts_with("r,phi,dphi,n_laplacian\n"));
    }
}
