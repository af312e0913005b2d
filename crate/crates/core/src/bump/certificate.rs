//! Exact sign certificates for the bump pieces.
//!
//! Each n-Laplacian condition reduces to the sign of a quadratic on an
//! interval. For the inner piece, with `u = s²`,
//!
//! ```text
//! Δ_n Φ = (n-1) |Φ'|^(n-2) a^-n s^-1 (s Q')',   (s Q')' = 4 s g(u),
//! g(u) = c2 + 4 c4 u + 9 c6 u²,                   u ∈ [0, 1/4],
//! Q'(s) = 2 s h(u),  h(u) = c2 + 2 c4 u + 3 c6 u².
//! ```
//!
//! The reduction to the sign of `(s Q')'` holds wherever `Q' <= 0`, so the
//! slope quadratic `h` is certified alongside. Maxima are taken over the
//! endpoints and, when it is interior, the vertex; every sign is decided in
//! the exact ring.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::BumpProfile;
use crate::error::{Error, Result};
use crate::exact::{rational, ExactReal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMethod {
    VertexAnalysis,
}

/// Certified supremum sign of `alpha + beta t + gamma t²` on `[lo, hi]` (`hi = None` is `+∞`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSign {
    pub variable: String,
    /// `[alpha, beta, gamma]`, exact.
    pub coefficients_exact: Vec<String>,
    pub coefficients: Vec<f64>,
    pub interval: (f64, Option<f64>),
    /// Points where the supremum was examined.
    pub candidates: Vec<f64>,
    pub vertex_interior: bool,
    /// Floating value of the supremum (`+∞` if unbounded).
    pub max_value: f64,
    pub argmax: Option<f64>,
    /// Exact sign of the supremum: -1, 0 or 1.
    pub max_sign: i8,
    /// Supremum `<= 0`.
    pub pass: bool,
}

fn sign_i8(o: Ordering) -> i8 {
    match o {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

fn decide(e: &ExactReal) -> Result<Ordering> {
    e.sign().ok_or(Error::UndecidedSign)
}

fn eval_at(c: &[ExactReal; 3], t: &BigRational) -> ExactReal {
    let t2 = t * t;
    c[0].clone() + c[1].scale(t) + c[2].scale(&t2)
}

fn derivative_at(c: &[ExactReal; 3], t: &BigRational) -> ExactReal {
    c[1].clone() + c[2].scale(&(rational(2, 1) * t))
}

fn float_eval(c: &[f64; 3], t: f64) -> f64 {
    c[0] + t * (c[1] + t * c[2])
}

/// Certifies the sign of the supremum of a quadratic on an interval.
pub fn certify_quadratic(
    variable: &str,
    coefficients: [ExactReal; 3],
    lo: BigRational,
    hi: Option<BigRational>,
) -> Result<QuadraticSign> {
    let cf = [coefficients[0].value(), coefficients[1].value(), coefficients[2].value()];
    let to_f = |q: &BigRational| ExactReal::from_rational(q.clone()).value();
    let gamma = decide(&coefficients[2])?;
    let slope_lo = decide(&derivative_at(&coefficients, &lo))?;
    let slope_hi = match &hi {
        Some(h) => Some(decide(&derivative_at(&coefficients, h))?),
        None => None,
    };

    let mut candidates = vec![(to_f(&lo), decide(&eval_at(&coefficients, &lo))?)];
    if let Some(h) = &hi {
        candidates.push((to_f(h), decide(&eval_at(&coefficients, h))?));
    }
    let mut unbounded = false;
    if hi.is_none() {
        // behaviour at +∞: the leading nonzero coefficient decides
        let lead = if gamma != Ordering::Equal {
            gamma
        } else {
            decide(&coefficients[1])?
        };
        unbounded = lead == Ordering::Greater;
    }

    let vertex_interior = gamma == Ordering::Less
        && slope_lo == Ordering::Greater
        && slope_hi.is_none_or(|s| s == Ordering::Less);
    if vertex_interior {
        // g(t*) = (4 gamma alpha - beta²) / (4 gamma) with gamma < 0
        let disc = coefficients[2].scale(&rational(4, 1)) * coefficients[0].clone()
            - coefficients[1].clone() * coefficients[1].clone();
        let vertex_sign = decide(&disc)?.reverse();
        let t = -cf[1] / (2.0 * cf[2]);
        candidates.push((t, vertex_sign));
    }

    let (max_sign, max_value, argmax) = if unbounded {
        (Ordering::Greater, f64::INFINITY, None)
    } else {
        let best = candidates
            .iter()
            .map(|&(t, s)| (s, float_eval(&cf, t), t))
            .max_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)))
            .expect("at least one candidate");
        (best.0, best.1, Some(best.2))
    };

    Ok(QuadraticSign {
        variable: variable.to_string(),
        coefficients_exact: coefficients.iter().map(|c| c.to_string()).collect(),
        coefficients: cf.to_vec(),
        interval: (to_f(&lo), hi.as_ref().map(to_f)),
        candidates: candidates.iter().map(|c| c.0).collect(),
        vertex_interior,
        max_value,
        argmax,
        max_sign: sign_i8(max_sign),
        pass: max_sign != Ordering::Greater,
    })
}

/// Sign certificate for one piece of the profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignCertificate {
    pub piece: super::Piece,
    pub dimension: usize,
    /// Sign polynomial of the reduced n-Laplacian.
    pub laplacian: QuadraticSign,
    /// Sign polynomial of the radial slope.
    pub slope: QuadraticSign,
    /// The slope is nonpositive, so the n-Laplacian reduces to the polynomial above.
    pub reduction_valid: bool,
    pub pass: bool,
    pub method: CertificateMethod,
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {n}")));
    }
    Ok(())
}

fn assemble(piece: super::Piece, n: usize, laplacian: QuadraticSign, slope: QuadraticSign) -> SignCertificate {
    let reduction_valid = slope.pass;
    SignCertificate {
        piece,
        dimension: n,
        pass: reduction_valid && laplacian.pass,
        laplacian,
        slope,
        reduction_valid,
        method: CertificateMethod::VertexAnalysis,
    }
}

/// Certificate for the inner polynomial `c0 + c2 s² + c4 s⁴ + c6 s⁶` on `s <= 1/2`.
///
/// `coefficients` is `[c0, c2, c4, c6]`; `c0` does not enter. The reduction
/// is the same for every `n >= 2`.
pub fn certify_superharmonic(coefficients: &[ExactReal; 4], n: usize) -> Result<SignCertificate> {
    check_dim(n)?;
    let [_, c2, c4, c6] = coefficients;
    if c2.depends_on_a() || c4.depends_on_a() || c6.depends_on_a() {
        return Err(Error::UndecidedSign);
    }
    let quarter = rational(1, 4);
    let g = certify_quadratic(
        "u = s^2",
        [c2.clone(), c4.scale(&rational(4, 1)), c6.scale(&rational(9, 1))],
        BigRational::zero(),
        Some(quarter.clone()),
    )?;
    let h = certify_quadratic(
        "u = s^2",
        [c2.clone(), c4.scale(&rational(2, 1)), c6.scale(&rational(3, 1))],
        BigRational::zero(),
        Some(quarter),
    )?;
    Ok(assemble(super::Piece::Inner, n, g, h))
}

/// Certificate for the middle quadratic on `1/2 <= s <= 1`:
/// `(s P')' = 2 s - 2`, `P' = s - 2`.
pub fn certify_middle(n: usize) -> Result<SignCertificate> {
    check_dim(n)?;
    let g = certify_quadratic(
        "s",
        [ExactReal::int(-2), ExactReal::int(2), ExactReal::zero()],
        rational(1, 2),
        Some(BigRational::one()),
    )?;
    let h = certify_quadratic(
        "s",
        [ExactReal::int(-2), ExactReal::int(1), ExactReal::zero()],
        rational(1, 2),
        Some(BigRational::one()),
    )?;
    Ok(assemble(super::Piece::Middle, n, g, h))
}

/// Certificate for the outer piece on `s >= 1`: `(s u')' = 0`, `s u' = -1`.
pub fn certify_outer(n: usize) -> Result<SignCertificate> {
    check_dim(n)?;
    let zero = || ExactReal::zero();
    let g = certify_quadratic("s", [zero(), zero(), zero()], BigRational::one(), None)?;
    let h = certify_quadratic("s", [ExactReal::int(-1), zero(), zero()], BigRational::one(), None)?;
    Ok(assemble(super::Piece::Outer, n, g, h))
}

/// Certificates for the inner, middle and outer pieces.
pub fn certify_profile(profile: &BumpProfile) -> Result<[SignCertificate; 3]> {
    let n = profile.dim();
    Ok([
        certify_superharmonic(profile.exact_coefficients(), n)?,
        certify_middle(n)?,
        certify_outer(n)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form_coefficients() -> [ExactReal; 4] {
        let l2 = ExactReal::ln2;
        [
            ExactReal::log_inv_a() + l2() + ExactReal::ratio(1, 2),
            ExactReal::int(5) - l2().scale(&rational(12, 1)),
            ExactReal::int(-28) + l2().scale(&rational(48, 1)),
            ExactReal::int(40) - l2().scale(&rational(64, 1)),
        ]
    }

    #[test]
    fn quadratic_endpoint_max() {
        // -1 + t on [0, 1/2]: max at 1/2 is -1/2
        let q = certify_quadratic("t", [ExactReal::int(-1), ExactReal::int(1), ExactReal::zero()],
                                  BigRational::zero(), Some(rational(1, 2))).unwrap();
        assert!(q.pass && !q.vertex_interior);
        assert_eq!(q.max_sign, -1);
        assert!((q.max_value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn quadratic_vertex_decides() {
        // -(t - 1/2)² + 1/100 = -1/4 + 1/100 + t - t²: vertex positive
        let q = certify_quadratic(
            "t",
            [ExactReal::ratio(-24, 100), ExactReal::int(1), ExactReal::int(-1)],
            BigRational::zero(),
            Some(BigRational::one()),
        )
        .unwrap();
        assert!(q.vertex_interior && !q.pass);
        assert!((q.max_value - 0.01).abs() < 1e-15);
        // both endpoints negative: only the vertex reveals the failure
        assert!(q.candidates.len() == 3);
    }

    #[test]
    fn quadratic_unbounded() {
        let q = certify_quadratic("t", [ExactReal::int(-5), ExactReal::zero(), ExactReal::int(1)],
                                  BigRational::zero(), None).unwrap();
        assert!(!q.pass && q.max_value.is_infinite());
        let q = certify_quadratic("t", [ExactReal::int(-5), ExactReal::int(-1), ExactReal::zero()],
                                  BigRational::zero(), None).unwrap();
        assert!(q.pass);
    }

    #[test]
    fn inner_certificate_for_explicit_profile() {
        for n in [2, 3, 4, 5, 7] {
            let c = certify_superharmonic(&closed_form_coefficients(), n).unwrap();
            assert!(c.pass && c.reduction_valid, "n = {n}");
            // vertex near u = 0.2686 lies past 1/4, so the max is g(1/4) = -1/2 exactly
            assert!(!c.laplacian.vertex_interior);
            let q = &c.laplacian.coefficients;
            assert!((-q[1] / (2.0 * q[2]) - 0.2686).abs() < 1e-4);
            assert_eq!(c.laplacian.argmax, Some(0.25));
            assert!((c.laplacian.max_value + 0.5).abs() < 1e-14);
            assert!(c.laplacian.max_value < 0.0);
        }
    }

    #[test]
    fn middle_and_outer_certificates() {
        let m = certify_middle(3).unwrap();
        assert!(m.pass);
        assert_eq!(m.laplacian.max_sign, 0);
        assert_eq!(m.laplacian.argmax, Some(1.0));
        let o = certify_outer(3).unwrap();
        assert!(o.pass && o.laplacian.max_sign == 0);
        assert_eq!(o.slope.max_sign, -1);
    }

    #[test]
    fn large_c4_fails() {
        let mut c = closed_form_coefficients();
        c[2] = ExactReal::int(10);
        let cert = certify_superharmonic(&c, 3).unwrap();
        assert!(!cert.pass);
    }

    #[test]
    fn dimension_checked() {
        assert!(certify_superharmonic(&closed_form_coefficients(), 1).is_err());
        assert!(certify_middle(0).is_err());
    }
}
