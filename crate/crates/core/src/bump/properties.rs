use serde::{Deserialize, Serialize};

use super::{certify_profile, closed_form_head_offset, radial_n_laplacian_scale, BumpProfile, SignCertificate};
use crate::error::Result;
use crate::exact::ExactReal;
use crate::target_radius;

/// Exact jumps (left minus right) of value, first and second derivative at
/// the piece boundaries, in the normalized radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingReport {
    pub at_half_exact: Vec<String>,
    pub at_one_exact: Vec<String>,
    pub at_half: Vec<f64>,
    pub at_one: Vec<f64>,
    pub all_zero: bool,
}

pub fn matching_jumps(profile: &BumpProfile) -> MatchingReport {
    let [c0, c2, c4, c6] = profile.exact_coefficients().clone();
    let q = |x: i64, y: i64| ExactReal::ratio(x, y);
    let l = ExactReal::log_inv_a();
    let r = |v: i64, d: i64| crate::exact::rational(v, d);
    let half = [
        c0 + c2.scale(&r(1, 4)) + c4.scale(&r(1, 16)) + c6.scale(&r(1, 64)) - (l.clone() + q(5, 8)),
        c2.clone() + c4.scale(&r(1, 2)) + c6.scale(&r(3, 16)) - q(-3, 2),
        c2.scale(&r(2, 1)) + c4.scale(&r(3, 1)) + c6.scale(&r(15, 8)) - q(1, 1),
    ];
    // P(1) = L, P'(1) = -1, P''(1) = 1 against L - ln s, -1/s, 1/s² at s = 1
    let one = [
        l.clone() - l,
        ExactReal::int(-1) - ExactReal::int(-1),
        ExactReal::int(1) - ExactReal::int(1),
    ];
    let a = profile.a();
    MatchingReport {
        at_half_exact: half.iter().map(|e| e.to_string()).collect(),
        at_one_exact: one.iter().map(|e| e.to_string()).collect(),
        at_half: half.iter().map(|e| e.to_f64(a)).collect(),
        at_one: one.iter().map(|e| e.to_f64(a)).collect(),
        all_zero: half.iter().chain(one.iter()).all(ExactReal::is_zero),
    }
}

/// One-sided difference checks on the flux `v = |Φ'|^(n-2) Φ'`.
///
/// All quantities are relative to `a^-n`, the size of `v'` at `r = a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxC1Check {
    pub steps: Vec<f64>,
    /// `|v'(a/2-) - v'(a/2+)|` per step.
    pub jump_half: Vec<f64>,
    /// `|v'(a-) - v'(a+)|` per step.
    pub jump_a: Vec<f64>,
    /// `|v'(h) - v(h)/h|`, the anisotropy of `DV` near the origin.
    pub origin: Vec<f64>,
    pub pass: bool,
}

/// Below this relative size a sequence counts as converged regardless of rate.
const FLUX_FLOOR: f64 = 1e-8;

fn converging(seq: &[f64]) -> bool {
    seq.windows(2).all(|w| w[1] <= FLUX_FLOOR || w[1] <= 0.5 * w[0])
}

pub fn check_flux_c1(profile: &BumpProfile, n: usize, levels: &[u32]) -> Result<FluxC1Check> {
    let a = profile.a();
    let v = |r: f64| profile.flux_radial(n, r);
    let scale = a.powi(-(n as i32));
    let mut out = FluxC1Check {
        steps: Vec::new(),
        jump_half: Vec::new(),
        jump_a: Vec::new(),
        origin: Vec::new(),
        pass: false,
    };
    for &k in levels {
        let h = a / 2f64.powi(k as i32);
        let jump = |b: f64| -> Result<f64> {
            let vb = v(b)?;
            let left = (3.0 * vb - 4.0 * v(b - h)? + v(b - 2.0 * h)?) / (2.0 * h);
            let right = (-3.0 * vb + 4.0 * v(b + h)? - v(b + 2.0 * h)?) / (2.0 * h);
            Ok((left - right).abs() / scale)
        };
        out.steps.push(h);
        out.jump_half.push(jump(0.5 * a)?);
        out.jump_a.push(jump(a)?);
        let dv = (v(1.5 * h)? - v(0.5 * h)?) / h;
        out.origin.push((dv - v(h)? / h).abs() / scale);
    }
    out.pass = [&out.jump_half, &out.jump_a, &out.origin]
        .iter()
        .all(|s| converging(s));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyConfig {
    pub samples_per_piece: usize,
    pub directions: usize,
    /// Relative tolerance of sampled checks.
    pub tolerance: f64,
    /// Flux steps are `a / 2^k`.
    pub flux_levels: Vec<u32>,
}

impl Default for PropertyConfig {
    fn default() -> Self {
        Self {
            samples_per_piece: 4000,
            directions: 16,
            tolerance: 1e-12,
            flux_levels: vec![6, 8, 10],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub id: String,
    pub description: String,
    pub pass: bool,
    /// Largest violation (0 when none), in the units of the check.
    pub worst: f64,
    pub worst_radius: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub a: f64,
    pub n: usize,
    pub properties: Vec<PropertyCheck>,
    pub certificates: Vec<SignCertificate>,
    pub matching: MatchingReport,
    pub flux: FluxC1Check,
    pub config: PropertyConfig,
    pub notes: Vec<String>,
    pub all_pass: bool,
}

impl PropertyReport {
    pub fn get(&self, id: &str) -> Option<&PropertyCheck> {
        self.properties.iter().find(|p| p.id == id)
    }

    /// The failing check with the largest violation.
    pub fn worst_violation(&self) -> Option<&PropertyCheck> {
        self.properties
            .iter()
            .filter(|p| !p.pass)
            .max_by(|x, y| x.worst.total_cmp(&y.worst))
    }
}

fn radii(profile: &BumpProfile, per_piece: usize) -> Vec<f64> {
    let a = profile.a();
    let edge = target_radius() * (1.0 - 1e-12);
    let mut out = vec![0.0, 0.5 * a, a];
    for (lo, hi) in [(0.0, 0.5 * a), (0.5 * a, a), (a, edge)] {
        out.extend((0..per_piece).map(|j| lo + (hi - lo) * (j as f64 + 0.5) / per_piece as f64));
    }
    out.push(edge);
    out
}

fn directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let v: Vec<f64> = (0..n)
                .map(|i| (0.7 * (k as f64 + 1.0) * (i as f64 + 1.0) + 1.3 * i as f64).cos())
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect()
}

struct Worst {
    value: f64,
    radius: Option<f64>,
}

impl Worst {
    fn new() -> Self {
        Self { value: 0.0, radius: None }
    }
    fn record(&mut self, value: f64, r: f64) {
        if value > self.value {
            self.value = value;
            self.radius = Some(r);
        }
    }
}

fn check(id: &str, description: &str, pass: bool, worst: Worst, detail: String) -> PropertyCheck {
    PropertyCheck {
        id: id.into(),
        description: description.into(),
        pass,
        worst: worst.value,
        worst_radius: worst.radius,
        detail,
    }
}

/// Checks the eight defining properties of the bump in dimension `profile.dim()`.
pub fn verify_properties(profile: &BumpProfile, config: &PropertyConfig) -> Result<PropertyReport> {
    let n = profile.dim();
    let a = profile.a();
    let tol = config.tolerance;
    let log_inv_a = profile.log_inv_a();
    let rs = radii(profile, config.samples_per_piece);
    let certs = certify_profile(profile)?;
    let matching = matching_jumps(profile);
    let flux = check_flux_c1(profile, n, &config.flux_levels)?;
    let mut props = Vec::with_capacity(8);

    // (i) exact C² matching
    let mut w = Worst::new();
    for (j, r) in [(matching.at_half.clone(), 0.5 * a), (matching.at_one.clone(), a)] {
        for v in j {
            w.record(v.abs(), r);
        }
    }
    props.push(check(
        "i",
        "C2 across the piece boundaries (the inner piece is an even polynomial)",
        matching.all_zero,
        w,
        format!("jumps at s=1/2: [{}]", matching.at_half_exact.join(", ")),
    ));

    // (ii) lower bound e
    let e = std::f64::consts::E;
    let mut w = Worst::new();
    let mut min_val = f64::INFINITY;
    for &r in &rs {
        let v = profile.eval(r)?;
        min_val = min_val.min(v);
        w.record(e - v, r);
    }
    props.push(check(
        "ii",
        "Phi >= e on the ball of radius e^-e",
        a < target_radius() && min_val >= e * (1.0 - 4.0 * f64::EPSILON),
        w,
        format!("sampled minimum {min_val:.17}"),
    ));

    // (iii) radial symmetry
    let dirs = directions(n, config.directions);
    let mut w = Worst::new();
    for &r in rs.iter().step_by(7) {
        let reference = profile.eval(r)?;
        for d in &dirs {
            let y: Vec<f64> = d.iter().map(|x| x * r).collect();
            let dev = (profile.eval_point(&y)? - reference).abs() / reference.abs();
            w.record(dev, r);
        }
    }
    props.push(check(
        "iii",
        "Phi depends only on |y|",
        w.value <= 1e-14,
        w,
        format!("{} directions", dirs.len()),
    ));

    // (iv) radially nonincreasing
    let mut w = Worst::new();
    for &r in &rs {
        w.record(profile.derivative(r)?.max(0.0), r);
    }
    let slopes_certified = certs.iter().all(|c| c.reduction_valid);
    props.push(check(
        "iv",
        "Phi' <= 0",
        slopes_certified && w.value == 0.0,
        w,
        format!("slope certificates pass: {slopes_certified}"),
    ));

    // (v) n-superharmonic
    let mut w = Worst::new();
    let mut sampled_ok = true;
    for &r in rs.iter().filter(|&&r| r > 0.0) {
        let lap = profile.n_laplacian(n, r)?;
        let scale = radial_n_laplacian_scale(profile, n, r)?;
        if lap > tol * scale {
            sampled_ok = false;
        }
        w.record(lap.max(0.0) / scale.max(f64::MIN_POSITIVE), r);
    }
    let lap_origin = profile.n_laplacian(n, 0.0)?;
    let lap_certified = certs.iter().all(|c| c.pass);
    props.push(check(
        "v",
        "Delta_n Phi <= 0 away from the origin",
        lap_certified && sampled_ok && lap_origin <= 0.0,
        w,
        format!(
            "certificates pass: {lap_certified}; inner sup of sign quadratic {:.6e}",
            certs[0].laplacian.max_value
        ),
    ));

    // (vi) ln(1/a) <= Phi <= ln(1/a) + ln2 + 1/2 on |y| <= a
    let head = profile.head_offset();
    let upper_gap = closed_form_head_offset() - head.clone();
    let exact_ok = !head.depends_on_a()
        && head.sign() != Some(std::cmp::Ordering::Less)
        && upper_gap.sign() != Some(std::cmp::Ordering::Less);
    let upper = log_inv_a + std::f64::consts::LN_2 + 0.5;
    let mut w = Worst::new();
    let mut outer_min = f64::INFINITY;
    for &r in &rs {
        let v = profile.eval(r)?;
        if r <= a {
            w.record((log_inv_a - v).max(v - upper).max(0.0) / log_inv_a, r);
        } else {
            outer_min = outer_min.min(v);
        }
    }
    props.push(check(
        "vi",
        "ln(1/a) <= Phi <= ln(1/a) + ln2 + 1/2 on |y| <= a",
        exact_ok && w.value <= tol,
        w,
        format!("head offset {head}; outer piece dips to {outer_min:.6} below ln(1/a) = {log_inv_a:.6}"),
    ));

    // (vii) exact outer identity
    let mut w = Worst::new();
    for &r in rs.iter().filter(|&&r| r > a) {
        let v = profile.eval(r)?;
        if v != -r.ln() {
            w.record((v + r.ln()).abs().max(f64::MIN_POSITIVE), r);
        }
    }
    props.push(check(
        "vii",
        "Phi = ln(1/|y|) for a < |y| < e^-e",
        w.value == 0.0,
        w,
        "bitwise comparison".into(),
    ));

    // (viii) C¹ flux
    let mut w = Worst::new();
    for (r, s) in [(0.5 * a, &flux.jump_half), (a, &flux.jump_a), (0.0, &flux.origin)] {
        w.record(*s.last().unwrap_or(&0.0), r);
    }
    props.push(check(
        "viii",
        "|grad Phi|^(n-2) grad Phi is C1",
        flux.pass,
        w,
        format!("finest step a/2^{}", config.flux_levels.last().copied().unwrap_or(0)),
    ));

    let notes = vec![format!(
        "the two-sided bound of (vi) is checked on |y| <= a only; on the outer piece a < |y| < e^-e the profile equals ln(1/|y|) and takes values in (e, ln(1/a)) = ({e:.6}, {log_inv_a:.6})"
    )];
    let all_pass = props.iter().all(|p| p.pass);
    Ok(PropertyReport {
        a,
        n,
        properties: props,
        certificates: certs.to_vec(),
        matching,
        flux,
        config: config.clone(),
        notes,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::solve_inner_coefficients_exact;

    #[test]
    fn explicit_profile_passes_everything() {
        for n in [2, 3, 4, 5, 7] {
            let p = BumpProfile::closed_form(0.01, n).unwrap();
            let rep = verify_properties(&p, &PropertyConfig::default()).unwrap();
            assert_eq!(rep.properties.len(), 8);
            for c in &rep.properties {
                assert!(c.pass, "n = {n}: {c:?}");
            }
            assert!(rep.worst_violation().is_none());
        }
    }

    #[test]
    fn broken_c4_fails_superharmonicity() {
        let p = BumpProfile::closed_form(0.01, 3).unwrap();
        let mut c = p.exact_coefficients().clone();
        c[2] = ExactReal::int(10);
        let broken = BumpProfile::from_exact(0.01, 3, c).unwrap();
        let rep = verify_properties(&broken, &PropertyConfig::default()).unwrap();
        assert!(!rep.get("v").unwrap().pass);
        assert!(rep.get("iii").unwrap().pass && rep.get("vii").unwrap().pass);
        // the value at s = 1/2 no longer matches
        assert!(!rep.get("i").unwrap().pass);
        assert!(!rep.get("viii").unwrap().pass);
        assert!(!rep.all_pass);
        assert!(rep.worst_violation().is_some());
    }

    #[test]
    fn matched_head_outside_window_fails_only_sign_checks() {
        let head = ExactReal::ratio(29, 20);
        let [c2, c4, c6] = solve_inner_coefficients_exact(&head);
        let p = BumpProfile::from_exact(0.01, 3, [ExactReal::log_inv_a() + head, c2, c4, c6]).unwrap();
        let rep = verify_properties(&p, &PropertyConfig::default()).unwrap();
        assert!(rep.get("i").unwrap().pass);
        assert!(rep.get("viii").unwrap().pass);
        assert!(!rep.get("v").unwrap().pass);
    }

    #[test]
    fn flux_sequences_shrink() {
        let p = BumpProfile::closed_form(0.01, 3).unwrap();
        let f = check_flux_c1(&p, 3, &[6, 8, 10]).unwrap();
        assert!(f.pass);
        assert!(f.jump_half[2] < f.jump_half[0]);
        assert!(f.origin[2] < f.origin[0]);
    }
}
