use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{certify_superharmonic, BumpProfile, SignCertificate};
use crate::error::{Error, Result};
use crate::exact::{rational, solve_rational_system, ExactReal};
use crate::target_radius;

/// Matching rows at `s = 1/2` for `(c2, c4, c6)`: value, first and second derivative.
pub fn matching_matrix() -> Vec<Vec<BigRational>> {
    vec![
        vec![rational(1, 4), rational(1, 16), rational(1, 64)],
        vec![rational(1, 1), rational(1, 2), rational(3, 16)],
        vec![rational(2, 1), rational(3, 1), rational(15, 8)],
    ]
}

/// `ln 2 + 1/2`.
pub fn closed_form_head_offset() -> ExactReal {
    ExactReal::ln2() + ExactReal::ratio(1, 2)
}

/// Exact `(c2, c4, c6)` that match the middle quadratic to second order at
/// `s = 1/2`, for the head value `c0 = ln(1/a) + head_offset`.
pub fn solve_inner_coefficients_exact(head_offset: &ExactReal) -> [ExactReal; 3] {
    let rhs = [
        ExactReal::ratio(5, 8) - head_offset.clone(),
        ExactReal::ratio(-3, 2),
        ExactReal::int(1),
    ];
    let sol = solve_rational_system(&matching_matrix(), &rhs).expect("matching matrix is nonsingular");
    [sol[0].clone(), sol[1].clone(), sol[2].clone()]
}

/// Floating-point `(c2, c4, c6)` for an absolute head value `c0`.
pub fn solve_inner_coefficients(a: f64, c0: f64) -> Result<[f64; 3]> {
    if !(a > 0.0 && a < target_radius()) {
        return Err(Error::InvalidParameter(format!("bump radius out of range: {a}")));
    }
    let offset = BigRational::from_float(c0 - (1.0 / a).ln())
        .ok_or_else(|| Error::InvalidParameter(format!("non-finite head value {c0}")))?;
    let c = solve_inner_coefficients_exact(&ExactReal::from_rational(offset));
    Ok([c[0].value(), c[1].value(), c[2].value()])
}

/// Search for the head value, as an offset `δ = c0 - ln(1/a)`.
///
/// Candidates start at `cap` and step down by `step` to `floor`; after the
/// first certified candidate, the gap to the previous failure is bisected so
/// the returned value is the highest certified one found.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub cap: ExactReal,
    pub floor: ExactReal,
    pub step: BigRational,
    pub bisection_steps: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            cap: closed_form_head_offset(),
            floor: ExactReal::zero(),
            step: rational(1, 64),
            bisection_steps: 24,
        }
    }
}

impl SearchConfig {
    pub fn with_cap(mut self, cap: ExactReal) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_floor(mut self, floor: ExactReal) -> Self {
        self.floor = floor;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    #[serde(skip)]
    pub profile: Option<BumpProfile>,
    pub head_offset_exact: String,
    pub head_offset: f64,
    pub certificate: SignCertificate,
    pub candidates_tried: usize,
    /// `(certified, failed)` offsets bracketing the window edge, when bisection ran.
    pub bracket: Option<(f64, f64)>,
}

impl SearchOutcome {
    pub fn profile(&self) -> &BumpProfile {
        self.profile.as_ref().expect("search outcome carries its profile")
    }
}

fn candidate(head: &ExactReal, n: usize) -> Result<([ExactReal; 4], SignCertificate)> {
    let [c2, c4, c6] = solve_inner_coefficients_exact(head);
    let c = [ExactReal::log_inv_a() + head.clone(), c2, c4, c6];
    let cert = certify_superharmonic(&c, n)?;
    Ok((c, cert))
}

fn badness(cert: &SignCertificate) -> f64 {
    cert.laplacian.max_value.max(cert.slope.max_value)
}

/// Finds a certified head value and returns the resulting profile.
pub fn construct_bump(n: usize, a: f64, config: &SearchConfig) -> Result<SearchOutcome> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {n}")));
    }
    if !(a > 0.0 && a < target_radius()) {
        return Err(Error::InvalidParameter(format!(
            "bump radius a must satisfy 0 < a < e^-e, got {a}"
        )));
    }
    for (name, v) in [("cap", &config.cap), ("floor", &config.floor)] {
        if v.depends_on_a() {
            return Err(Error::InvalidParameter(format!("{name} must not depend on ln(1/a)")));
        }
    }
    if config.floor.sign() == Some(std::cmp::Ordering::Less) {
        return Err(Error::InvalidParameter(
            "floor below ln(1/a): the head value would fall under the value at |y| = a".into(),
        ));
    }
    if config.cap.cmp_exact(&config.floor) == Some(std::cmp::Ordering::Less) {
        return Err(Error::InvalidParameter("search cap lies below the floor".into()));
    }
    if config.step <= rational(0, 1) {
        return Err(Error::InvalidParameter("search step must be positive".into()));
    }

    let step = ExactReal::from_rational(config.step.clone());
    let mut tried = 0usize;
    let mut best_fail = f64::INFINITY;
    let mut previous_fail: Option<ExactReal> = None;
    let mut head = config.cap.clone();
    loop {
        let (coeffs, cert) = candidate(&head, n)?;
        tried += 1;
        if cert.pass {
            let mut pass = (head, coeffs, cert);
            let mut bracket = None;
            if let Some(mut fail) = previous_fail {
                for _ in 0..config.bisection_steps {
                    let mid = (pass.0.clone() + fail.clone()).scale(&rational(1, 2));
                    let (c, cert) = candidate(&mid, n)?;
                    tried += 1;
                    if cert.pass {
                        pass = (mid, c, cert);
                    } else {
                        fail = mid;
                    }
                }
                bracket = Some((pass.0.value(), fail.value()));
            }
            let (head, coeffs, cert) = pass;
            let profile = BumpProfile::from_exact(a, n, coeffs)?;
            return Ok(SearchOutcome {
                profile: Some(profile),
                head_offset_exact: head.to_string(),
                head_offset: head.value(),
                certificate: cert,
                candidates_tried: tried,
                bracket,
            });
        }
        best_fail = best_fail.min(badness(&cert));
        let next = head.clone() - step.clone();
        if next.cmp_exact(&config.floor) == Some(std::cmp::Ordering::Less) {
            return Err(Error::NoCertifiedHead { best_max: best_fail });
        }
        previous_fail = Some(head);
        head = next;
    }
}
