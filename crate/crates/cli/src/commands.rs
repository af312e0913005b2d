use std::sync::Arc;

use dilatation_core::bump::{
    certify_profile, construct_bump as search_bump, radial_n_laplacian_scale, verify_properties,
    BumpProfile, PropertyConfig, SearchConfig,
};
use dilatation_core::exact::{parse_rational, rational, ExactReal};
use dilatation_core::identities::{
    admissible_epsilon, admissible_epsilon_exact, caccioppoli_check, caccioppoli_constant,
    hausdorff_bound, log_log_energy_sweep, weak_identity_sweep, BumpVectorField, ConstantField,
    EstimateReport, ImageField, LinearField, SummaryRow,
};
use dilatation_core::mapping::{
    differential, dilatation_integral, ellipticity_form, parse_mapping_spec, polyconvex_energy,
    young_admissible, Dilatation, Domain, Mapping,
};
use dilatation_core::singular::{box_counting_dimension, grid_scales, zero_set, DimensionEstimate};
use dilatation_core::tensorgrid::{smooth_cutoff, Cutoff, ExcisionTrend, GridDomain, TrendKind};
use dilatation_core::{target_radius, Error};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::envelope::{Envelope, Report};
use crate::{BumpArgs, CutoffArgs, Extras, Failure, FieldKind, HeadPolicy};

/// Slack on the box-counting dimension against the bound 1 - eps.
const DIMENSION_SLACK: f64 = 0.05;

const SCOPE_NOTE: &str = "Discreteness and openness of F are not checked numerically. \
They are represented by the bump property suite, the identity and estimate checks, and a \
contrast case: the squeeze map has infinite dilatation on a strip and a zero set that is a \
segment, whose box-counting dimension (about 1) exceeds the bounds 1 - eps.";

fn classify(e: Error) -> Failure {
    match e {
        Error::InvalidParameter(_)
        | Error::DegenerateBox { .. }
        | Error::ResolutionTooCoarse { .. }
        | Error::GridTooLarge { .. }
        | Error::UnknownMapping(_)
        | Error::MalformedSpec(_)
        | Error::OutsideDomain(_)
        | Error::DimensionMismatch { .. }
        | Error::SupportExceedsGrid { .. }
        | Error::OutsideBumpDomain { .. } => Failure::Invalid(e.to_string()),
        other => Failure::Compute(other.to_string()),
    }
}

trait CoreResult<T> {
    fn core(self) -> Result<T, Failure>;
}

impl<T> CoreResult<T> for Result<T, Error> {
    fn core(self) -> Result<T, Failure> {
        self.map_err(classify)
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Invalid(msg.into()))
}

fn report<T: Serialize>(kind: &str, pass: bool, data: &T) -> Result<Report, Failure> {
    Report::new(kind, pass, data).map_err(|e| Failure::Compute(e.to_string()))
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .or_else(|_| invalid(format!("{what}: expected comma-separated numbers, got `{text}`")))
}

fn check_positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be positive, got {v}"))
    }
}

fn mapping(spec: &str) -> Result<Mapping, Failure> {
    parse_mapping_spec(spec).core()
}

fn cutoff(args: &CutoffArgs, n: usize, r0: f64, r1: f64) -> Result<Cutoff, Failure> {
    let center = match &args.center {
        Some(c) => parse_list(c, "--center")?,
        None => vec![0.0; n],
    };
    if center.len() != n {
        return invalid(format!("--center has {} coordinates, mapping dimension is {n}", center.len()));
    }
    smooth_cutoff(center, args.r0.unwrap_or(r0), args.r1.unwrap_or(r1)).core()
}

fn cube(n: usize, half_width: f64, resolution: usize) -> Result<GridDomain, Failure> {
    check_positive("--box", half_width)?;
    GridDomain::cube(n, -half_width, half_width, resolution).core()
}

fn estimate_csv(rows: &[EstimateReport]) -> String {
    let mut out = format!("{}\n", EstimateReport::csv_header());
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn pass_word(p: bool) -> &'static str {
    if p {
        "PASS"
    } else {
        "FAIL"
    }
}

fn property_config(samples: usize, directions: usize) -> Result<PropertyConfig, Failure> {
    if samples < 2 || directions < 1 {
        return invalid("--samples must be >= 2 and --directions >= 1");
    }
    Ok(PropertyConfig {
        samples_per_piece: samples,
        directions,
        ..PropertyConfig::default()
    })
}

pub fn verify_bump(
    bump: &BumpArgs,
    head: HeadPolicy,
    samples: usize,
    directions: usize,
    env: &mut Envelope,
    extras: &mut Extras,
) -> Result<(), Failure> {
    let config = property_config(samples, directions)?;
    let mut profile = BumpProfile::closed_form(bump.a, bump.n).core()?;
    if head == HeadPolicy::Search {
        let outcome = search_bump(bump.n, bump.a, &SearchConfig::default()).core()?;
        profile = outcome.profile().clone();
        env.push(report("search_outcome", outcome.certificate.pass, &outcome)?);
    }
    let rep = verify_properties(&profile, &config).core()?;
    env.push(report("property_report", rep.all_pass, &rep)?);
    extras.csv = String::from("id,description,pass,worst,worst_radius\n");
    for p in &rep.properties {
        extras.csv.push_str(&format!(
            "{},\"{}\",{},{:e},{}\n",
            p.id,
            p.description.replace('"', "'"),
            p.pass,
            p.worst,
            p.worst_radius.map(|r| format!("{r:e}")).unwrap_or_default()
        ));
        extras.text.push(format!("property {:>4}: {}  {}", p.id, pass_word(p.pass), p.description));
    }
    env.notes.extend(rep.notes.iter().cloned());
    Ok(())
}

pub fn construct_bump(
    bump: &BumpArgs,
    cap: Option<&str>,
    floor: &str,
    step: &str,
    bisection_steps: usize,
    env: &mut Envelope,
    extras: &mut Extras,
) -> Result<(), Failure> {
    BumpProfile::closed_form(bump.a, bump.n).core()?;
    let mut config = SearchConfig {
        step: parse_rational(step).core()?,
        bisection_steps,
        ..SearchConfig::default()
    };
    if let Some(cap) = cap {
        config = config.with_cap(ExactReal::from_rational(parse_rational(cap).core()?));
    }
    config = config.with_floor(ExactReal::from_rational(parse_rational(floor).core()?));
    let outcome = search_bump(bump.n, bump.a, &config).core()?;
    let dump = outcome.profile().coefficient_dump();
    env.push(report("sign_certificate", outcome.certificate.pass, &outcome.certificate)?);
    env.push(report("search_outcome", outcome.certificate.pass, &outcome)?);
    env.push(report("coefficients", true, &dump)?);
    extras.csv = String::from("coefficient,exact,decimal\n");
    let exact = [&dump.c0_exact, &dump.c2_exact, &dump.c4_exact, &dump.c6_exact];
    for (k, (e, d)) in exact.iter().zip(&dump.decimal).enumerate() {
        extras.csv.push_str(&format!("c{},{e},{d:.17e}\n", 2 * k));
        extras.text.push(format!("c{} = {e} ≈ {d:.7}", 2 * k));
    }
    extras.text.push(format!(
        "head offset Q(0) - ln(1/a) = {} ≈ {:.7}",
        outcome.head_offset_exact, outcome.head_offset
    ));
    Ok(())
}

#[derive(Serialize)]
struct ProfileSummary {
    a: f64,
    n: usize,
    r_max: f64,
    samples: usize,
    columns: Vec<&'static str>,
    /// Largest sampled n-Laplacian relative to its term scale.
    max_normalized_laplacian: f64,
}

pub fn nlaplacian_profile(
    bump: &BumpArgs,
    r_max: Option<f64>,
    samples: usize,
    env: &mut Envelope,
    extras: &mut Extras,
) -> Result<(), Failure> {
    let profile = BumpProfile::closed_form(bump.a, bump.n).core()?;
    let r_max = r_max.unwrap_or((3.0 * bump.a).min(target_radius() * (1.0 - 1e-9)));
    check_positive("--r-max", r_max)?;
    if r_max >= target_radius() {
        return invalid(format!("--r-max must be below e^-e, got {r_max}"));
    }
    if samples < 2 {
        return invalid("--samples must be >= 2");
    }
    let n = bump.n;
    let mut buf = Vec::new();
    profile
        .write_profile_csv(n, r_max, samples, &mut buf)
        .map_err(|e| Failure::Compute(e.to_string()))?;
    extras.csv = String::from_utf8(buf).map_err(|e| Failure::Compute(e.to_string()))?;
    let mut worst = f64::NEG_INFINITY;
    for k in 1..=samples {
        let r = r_max * k as f64 / samples as f64;
        let v = profile.n_laplacian(n, r).core()?;
        worst = worst.max(v / radial_n_laplacian_scale(&profile, n, r).core()?);
    }
    let certs = certify_profile(&profile).core()?;
    for c in &certs {
        env.push(report("sign_certificate", c.pass, c)?);
    }
    let summary = ProfileSummary {
        a: bump.a,
        n,
        r_max,
        samples,
        columns: vec!["r", "phi", "dphi", "n_laplacian"],
        max_normalized_laplacian: worst,
    };
    env.push(report("nlaplacian_profile", worst <= 1e-12, &summary)?);
    extras.text.push(format!("{samples} radii in (0, {r_max}], max Δ_n/scale = {worst:.3e}"));
    Ok(())
}

pub struct FieldSpec<'a> {
    pub kind: FieldKind,
    pub matrix: Option<&'a str>,
    pub vector: Option<&'a str>,
    pub a: f64,
}

fn image_field(spec: &FieldSpec, n: usize) -> Result<Box<dyn ImageField>, Failure> {
    Ok(match spec.kind {
        FieldKind::Bump => {
            let profile = BumpProfile::closed_form(spec.a, n).core()?;
            Box::new(BumpVectorField::new(&profile, n).core()?)
        }
        FieldKind::Linear => {
            let entries = match spec.matrix {
                Some(m) => parse_list(m, "--matrix")?,
                None if n == 2 => vec![1.0, 0.5, -0.3, 2.0],
                None => (0..n * n).map(|k| if k % (n + 1) == 0 { 1.0 } else { 0.0 }).collect(),
            };
            if entries.len() != n * n {
                return invalid(format!("--matrix needs {} entries, got {}", n * n, entries.len()));
            }
            Box::new(LinearField::new(DMatrix::from_row_slice(n, n, &entries)))
        }
        FieldKind::Constant => {
            let v = match spec.vector {
                Some(v) => parse_list(v, "--vector")?,
                None => (0..n).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect(),
            };
            if v.len() != n {
                return invalid(format!("--vector needs {n} entries, got {}", v.len()));
            }
            Box::new(ConstantField::new(v))
        }
    })
}

pub fn check_identity(
    spec: &str,
    field: &FieldSpec,
    half_width: f64,
    resolutions: &str,
    cutoff_args: &CutoffArgs,
    env: &mut Envelope,
    extras: &mut Extras,
) -> Result<(), Failure> {
    let f = mapping(spec)?;
    let n = f.dim();
    let levels = resolutions
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .or_else(|_| invalid(format!("--resolutions: expected integers, got `{resolutions}`")))?;
    if levels.len() < 2 {
        return invalid("--resolutions needs at least two levels");
    }
    let grids = levels
        .iter()
        .map(|&r| cube(n, half_width, r))
        .collect::<Result<Vec<_>, _>>()?;
    let eta = cutoff(cutoff_args, n, 0.25 * half_width, 5.0 / 6.0 * half_width)?;
    let v = image_field(field, n)?;
    let sweep = weak_identity_sweep(&f, v.as_ref(), &eta, &grids).core()?;
    env.push(report("identity_sweep", sweep.pass, &sweep)?);
    extras.csv = format!("{}\n", dilatation_core::identities::IdentityReport::csv_header());
    for r in &sweep.reports {
        extras.csv.push_str(&r.csv_row());
        extras.csv.push('\n');
        extras.text.push(format!(
            "res {:>4}: lhs {:+.6e} rhs {:+.6e} rel {:.3e}",
            r.resolution, r.lhs, r.rhs, r.relative_residual
        ));
    }
    match (v.is_divergence_free(), sweep.fitted_slope) {
        (true, _) => extras.text.push("divergence-free field: RHS is exactly 0".into()),
        (false, Some(s)) => extras.text.push(format!("fitted refinement slope {s:.3}")),
        _ => {}
    }
    Ok(())
}

#[derive(Serialize)]
struct CaccioppoliResult {
    estimate: EstimateReport,
    reference_constant: f64,
    holds: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn caccioppoli(
    spec: &str,
    a: f64,
    half_width: f64,
    resolution: usize,
    cutoff_args: &CutoffArgs,
    constant: Option<f64>,
    env: &mut Envelope,
    extras: &mut Extras,
) -> Result<(), Failure> {
    let f = mapping(spec)?;
    let n = f.dim();
    let profile = BumpProfile::closed_form(a, n).core()?;
    let grid = cube(n, half_width, resolution)?;
    let eta = cutoff(cutoff_args, n, 0.25 * half_width, 0.75 * half_width)?;
    let c = constant.unwrap_or_else(|| caccioppoli_constant(n));
    check_positive("--constant", c)?;
    let est = caccioppoli_check(&f, &profile, &eta, &grid).core()?;
    let rhs = est.rhs.unwrap_or(0.0);
    let holds = est.lhs <= c * rhs;
    extras.csv = estimate_csv(std::slice::from_ref(&est));
    extras.text.push(format!("lhs {:.6e}  rhs {:.6e}  lhs/rhs {:?}  C {c}", est.lhs, rhs, est.constant));
    env.push(report(
        "caccioppoli",
        holds,
        &CaccioppoliResult {
            estimate: est,
            reference_constant: c,
            holds,
        },
    )?);
    Ok(())
}

#[derive(Serialize)]
struct LogLogResult {
    eps: f64,
    exponent: f64,
    reports: Vec<EstimateReport>,
    trend: ExcisionTrend,
}

#[allow(clippy::too_many_arguments)]
pub fn loglog_energy(
    spec: &str,
    eps: f64,
    half_width: f64,
    resolution: usize,
    cutoff_args: &CutoffArgs,
    deltas: Option<&str>,
    env: &mut Envelope,
    extras: &mut Extras,
) -> Result<(), Failure> {
    let f = mapping(spec)?;
    let n = f.dim();
    if !(0.0..1.0).contains(&eps) {
        return invalid(format!("--eps must lie in [0, 1), got {eps}"));
    }
    let grid = cube(n, half_width, resolution)?;
    let eta = cutoff(cutoff_args, n, 0.25 * half_width, 5.0 / 6.0 * half_width)?;
    let h = grid.max_spacing();
    let deltas = match deltas {
        Some(d) => parse_list(d, "--deltas")?,
        None => vec![4.0 * h, 2.0 * h, h],
    };
    if deltas.len() < 3 || deltas.windows(2).any(|w| w[1] >= w[0]) || deltas.iter().any(|d| *d <= 0.0) {
        return invalid("--deltas needs at least three positive, strictly decreasing radii");
    }
    let (reports, trend) = log_log_energy_sweep(&f, &eta, &grid, eps, &deltas).core()?;
    extras.csv = String::from("delta,lhs,mask_volume\n");
    for (d, r) in deltas.iter().zip(&reports) {
        extras.csv.push_str(&format!("{d:e},{:e},{:e}\n", r.lhs, r.mask_volume));
        extras.text.push(format!("delta {d:.4e}: {:.8e}", r.lhs));
    }
    extras.text.push(format!("trend {:?} (increment ratio {:.3})", trend.kind, trend.increment_ratio));
    let pass = trend.kind == TrendKind::Stable;
    env.push(report(
        "loglog_energy",
        pass,
        &LogLogResult {
            eps,
            exponent: n as f64 - 1.0 + eps,
            reports,
            trend,
        },
    )?);
    Ok(())
}

pub struct AnalyzeOptions {
    pub resolution: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub p: Option<f64>,
    pub zero_tol: f64,
    pub probe_resolution: usize,
}

#[derive(Serialize, Default)]
struct DifferentialSummary {
    samples: usize,
    exceptional_skipped: usize,
    min_dilatation: Option<f64>,
    max_dilatation: Option<f64>,
    infinite_count: usize,
    degenerate_count: usize,
    min_jacobian: f64,
    max_adjugate_residual: f64,
    ellipticity_samples: usize,
    ellipticity_bounds_hold: bool,
    max_tightest_constant: f64,
}

#[derive(Serialize)]
struct EnergySummary {
    energy: dilatation_core::mapping::EnergyReport,
    p: Option<f64>,
    young_admissible: Option<bool>,
    dilatation_integral: Option<dilatation_core::mapping::LpReport>,
}

#[derive(Serialize)]
struct ZeroSetSummary {
    points: usize,
    tolerance: f64,
    estimate: DimensionEstimate,
    eps: Option<f64>,
    dimension_bound: Option<f64>,
    hypothesis_holds: bool,
    within_bound: Option<bool>,
}

fn domain_box(f: &Mapping) -> (Vec<f64>, Vec<f64>) {
    match f.domain() {
        Domain::Box { lower, upper } => (lower.clone(), upper.clone()),
        Domain::Ball { center, radius } => (
            center.iter().map(|c| c - radius).collect(),
            center.iter().map(|c| c + radius).collect(),
        ),
    }
}

pub fn analyze_map(spec: &str, opts: &AnalyzeOptions, env: &mut Envelope, extras: &mut Extras) -> Result<(), Failure> {
    let f = mapping(spec)?;
    let n = f.dim();
    check_positive("--alpha", opts.alpha)?;
    check_positive("--beta", opts.beta)?;
    check_positive("--zero-tol", opts.zero_tol)?;
    if let Some(p) = opts.p {
        check_positive("--p", p)?;
    }
    let (lower, upper) = domain_box(&f);
    let bounds: Vec<(f64, f64)> = lower.iter().copied().zip(upper.iter().copied()).collect();
    let default_res = match n {
        2 => 257,
        3 => 33,
        _ => 9,
    };
    let res = opts.resolution.unwrap_or(default_res);
    let grid = Arc::new(dilatation_core::tensorgrid::make_grid(n, &bounds, &vec![res; n]).core()?);
    let probes = dilatation_core::tensorgrid::make_grid(n, &bounds, &vec![opts.probe_resolution; n]).core()?;

    let mut probe_dirs: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    probe_dirs.push(vec![1.0 / (n as f64).sqrt(); n]);
    let mut d = DifferentialSummary {
        min_jacobian: f64::INFINITY,
        ellipticity_bounds_hold: true,
        ..Default::default()
    };
    extras.csv = (1..=n).map(|i| format!("x{i},")).collect::<String>()
        + "jacobian,opnorm,dilatation,adjugate_residual\n";
    for i in 0..probes.len() {
        let x = probes.point(i);
        if f.is_exceptional(&x) {
            d.exceptional_skipped += 1;
            continue;
        }
        let s = differential(&f, &x).core()?;
        d.samples += 1;
        d.min_jacobian = d.min_jacobian.min(s.jacobian);
        let rel = s.adjugate_residual() / (1.0 + s.opnorm.powi(n as i32));
        d.max_adjugate_residual = d.max_adjugate_residual.max(rel);
        match s.dilatation {
            Dilatation::Infinite => d.infinite_count += 1,
            k => {
                if k == Dilatation::Degenerate {
                    d.degenerate_count += 1;
                }
                let v = k.value();
                d.min_dilatation = Some(d.min_dilatation.map_or(v, |m| m.min(v)));
                d.max_dilatation = Some(d.max_dilatation.map_or(v, |m| m.max(v)));
            }
        }
        if s.jacobian > 0.0 {
            let e = ellipticity_form(&s, &probe_dirs).core()?;
            d.ellipticity_samples += 1;
            d.ellipticity_bounds_hold &= e.bounds_hold;
            d.max_tightest_constant = d.max_tightest_constant.max(e.tightest_constant);
        }
        let coords: String = x.iter().map(|v| format!("{v:e},")).collect();
        extras.csv.push_str(&format!(
            "{coords}{:e},{:e},{:e},{:e}\n",
            s.jacobian,
            s.opnorm,
            s.dilatation.value(),
            rel
        ));
    }
    let diff_pass = d.max_adjugate_residual <= 1e-10
        && d.min_dilatation.is_none_or(|k| k >= 1.0 - 1e-10)
        && d.min_jacobian >= -1e-10
        && d.ellipticity_bounds_hold;
    extras.text.push(format!(
        "differential: {} samples, K in [{:?}, {:?}], {} infinite, adjugate residual {:.1e}",
        d.samples, d.min_dilatation, d.max_dilatation, d.infinite_count, d.max_adjugate_residual
    ));
    let k_finite = d.infinite_count == 0;
    env.push(report("differential", diff_pass, &d)?);

    let energy = polyconvex_energy(&f, &grid, opts.alpha, opts.beta).core()?;
    let (young, lp) = match opts.p {
        Some(p) => (
            Some(young_admissible(n, opts.alpha, opts.beta, p)),
            Some(dilatation_integral(&f, &grid, p).core()?),
        ),
        None => (None, None),
    };
    let energy_finite = !energy.infinite && energy.total.is_finite();
    let lp_finite = lp.as_ref().map(|l| !l.infinite && l.integral.is_finite());
    let consistent = !(energy_finite && young == Some(true)) || lp_finite == Some(true);
    extras.text.push(format!(
        "energy: {:.6e} (stretch {:.6e}, volume {:.6e}), young admissible {:?}, K^p integral {:?}",
        energy.total,
        energy.stretch_term,
        energy.volume_term,
        young,
        lp.as_ref().map(|l| l.integral)
    ));
    env.push(report(
        "energy",
        consistent,
        &EnergySummary {
            energy,
            p: opts.p,
            young_admissible: young,
            dilatation_integral: lp,
        },
    )?);

    let cloud = zero_set(&f, &grid, opts.zero_tol).core()?;
    let estimate = box_counting_dimension(&cloud, &grid_scales(&grid)).core()?;
    let eps = match opts.p {
        Some(p) if p >= n as f64 - 1.0 => Some(admissible_epsilon(n, p).core()?),
        _ => None,
    };
    let bound = match eps {
        Some(e) if e < 1.0 => Some(hausdorff_bound(n, e).core()?),
        _ => None,
    };
    let hypothesis = k_finite && lp_finite.unwrap_or(true);
    let within = bound.map(|b| estimate.dimension <= b + DIMENSION_SLACK);
    let zero_pass = !(hypothesis && within == Some(false));
    extras.text.push(format!(
        "zero set: {} points, box-counting dimension {:.3}{}, bound {:?}",
        cloud.len(),
        estimate.dimension,
        if estimate.empty { " (empty)" } else { "" },
        bound
    ));
    if !hypothesis && estimate.dimension >= 0.85 {
        env.notes.push(format!(
            "contrast: {} violates the finite-dilatation hypothesis and its zero set measures dimension {:.3}",
            f.spec_string(),
            estimate.dimension
        ));
    }
    let mut cloud_csv = Vec::new();
    cloud.write_csv(&mut cloud_csv).map_err(|e| Failure::Compute(e.to_string()))?;
    extras.files.push((
        "analyze-map-zeros.csv".into(),
        String::from_utf8(cloud_csv).map_err(|e| Failure::Compute(e.to_string()))?,
    ));
    env.push(report(
        "zero_set",
        zero_pass,
        &ZeroSetSummary {
            points: cloud.len(),
            tolerance: opts.zero_tol,
            estimate,
            eps,
            dimension_bound: bound,
            hypothesis_holds: hypothesis,
            within_bound: within,
        },
    )?);
    env.notes.push(SCOPE_NOTE.to_string());
    Ok(())
}

#[derive(Serialize)]
struct ExponentRow {
    n: usize,
    p: String,
    p_decimal: f64,
    eps: String,
    eps_decimal: f64,
    hausdorff_bound: f64,
}

#[derive(Serialize)]
struct ExponentTable {
    rows: Vec<ExponentRow>,
}

pub fn exponents(
    n: usize,
    p: Option<&str>,
    p_min: Option<&str>,
    p_max: Option<&str>,
    steps: usize,
    env: &mut Envelope,
    extras: &mut Extras,
) -> Result<(), Failure> {
    if n < 2 {
        return invalid(format!("--n must be >= 2, got {n}"));
    }
    let ps = match (p, p_min, p_max) {
        (Some(p), _, _) => vec![parse_rational(p).core()?],
        (None, Some(lo), Some(hi)) => {
            if steps < 2 {
                return invalid("--steps must be >= 2");
            }
            let (lo, hi) = (parse_rational(lo).core()?, parse_rational(hi).core()?);
            if hi < lo {
                return invalid("--p-max must not be below --p-min");
            }
            let span = hi - lo.clone();
            (0..steps)
                .map(|k| lo.clone() + span.clone() * rational(k as i64, steps as i64 - 1))
                .collect()
        }
        _ => return invalid("give --p or both --p-min and --p-max"),
    };
    let mut rows = Vec::new();
    extras.csv = String::from("n,p,p_decimal,eps,eps_decimal,hausdorff_bound\n");
    for p in ps {
        let eps = admissible_epsilon_exact(n, &p).core()?;
        let pd = ExactReal::from_rational(p.clone()).value();
        let ed = ExactReal::from_rational(eps.clone()).value();
        let bound = hausdorff_bound(n, ed).core()?;
        extras.csv.push_str(&format!("{n},{p},{pd},{eps},{ed},{bound}\n"));
        extras.text.push(format!("n = {n}  p = {p}  eps = {eps} ≈ {ed:.6}  bound = {bound:.6}"));
        rows.push(ExponentRow {
            n,
            p: p.to_string(),
            p_decimal: pd,
            eps: eps.to_string(),
            eps_decimal: ed,
            hausdorff_bound: bound,
        });
    }
    env.push(report("exponents", true, &ExponentTable { rows })?);
    Ok(())
}
