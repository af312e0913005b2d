use std::f64::consts::{LN_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use dilatation_core::bump::{
    certify_profile, certify_superharmonic, matching_jumps, closed_form_head_offset,
    radial_n_laplacian_scale, solve_inner_coefficients, solve_inner_coefficients_exact, BumpProfile,
    PropertyConfig, verify_properties,
};
use dilatation_core::exact::{rational, ExactReal};
use dilatation_core::identities::{
    admissible_epsilon_exact, caccioppoli_check, caccioppoli_constant, weak_identity_residual,
    weak_identity_sweep, BumpVectorField, ConstantField, ImageField, LinearField,
};
use dilatation_core::mapping::{differential, parse_mapping_spec, Dilatation, Mapping};
use dilatation_core::singular::{
    box_counting_dimension, dyadic_scales, grid_scales, sobolev_log_norm_sweep, zero_set, PointCloud,
};
use dilatation_core::tensorgrid::{smooth_cutoff, GridDomain, TrendKind};
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Fail(String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(e.to_string())
    }
}

type Outcome = Result<String, Fail>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), Fail> {
    if cond {
        Ok(())
    } else {
        Err(Fail(msg.into()))
    }
}

const RADII: [f64; 3] = [1e-2, 1e-3, 1e-4];

fn closed_form_coefficients() -> [ExactReal; 3] {
    let q = |r: i64, l: i64| ExactReal::affine(rational(r, 1), rational(l, 1), BigRational::zero());
    [q(5, -12), q(-28, 48), q(40, -64)]
}

fn c1_coefficients() -> Outcome {
    let expected = closed_form_coefficients();
    let exact = solve_inner_coefficients_exact(&closed_form_head_offset());
    check(exact == expected, format!("exact solve gave {exact:?}"))?;
    let closed = [5.0 - 12.0 * LN_2, 4.0 * (-7.0 + 12.0 * LN_2), 8.0 * (5.0 - 8.0 * LN_2)];
    let mut worst: f64 = 0.0;
    for a in RADII {
        let c0 = (1.0 / a).ln() + LN_2 + 0.5;
        let got = solve_inner_coefficients(a, c0)?;
        // independent LU solve of the matching system in normalized radius
        let m = DMatrix::from_row_slice(3, 3, &[0.25, 1.0 / 16.0, 1.0 / 64.0, 1.0, 0.5, 3.0 / 16.0, 2.0, 3.0, 15.0 / 8.0]);
        let rhs = DVector::from_vec(vec![(1.0 / a).ln() + 5.0 / 8.0 - c0, -1.5, 1.0]);
        let lu = m.lu().solve(&rhs).ok_or("matching matrix singular")?;
        for k in 0..3 {
            worst = worst.max((got[k] - closed[k]).abs()).max((lu[k] - closed[k]).abs());
        }
    }
    check(worst <= 1e-12, format!("float deviation {worst:e} > 1e-12"))?;
    Ok(format!("exact match; float deviation {worst:.1e} (tol 1e-12)"))
}

fn c2_matching() -> Outcome {
    for a in RADII {
        let m = matching_jumps(&BumpProfile::closed_form(a, 2)?);
        check(m.all_zero, format!("a={a}: jumps {:?} / {:?}", m.at_half_exact, m.at_one_exact))?;
        check(m.at_half.iter().chain(&m.at_one).all(|v| *v == 0.0), "float jumps nonzero")?;
    }
    let [c2, c4, c6] = closed_form_coefficients();
    let q2 = c2.scale(&rational(2, 1)) + c4.scale(&rational(3, 1)) + c6.scale(&rational(15, 8));
    check(q2 == ExactReal::int(1), format!("Q''(1/2) = {q2}"))?;
    check(q2.coefficient(1, 0).is_zero(), "ln2 term survives in Q''(1/2)")?;
    Ok("all six jumps exactly 0 for each a; Q''(1/2) = 1 with no ln2 term".into())
}

fn c3_certificate() -> Outcome {
    let [c2, c4, c6] = closed_form_coefficients();
    let g_quarter = c2.clone() + c4.scale(&rational(1, 1)) + c6.scale(&rational(9, 16));
    check(g_quarter == ExactReal::ratio(-1, 2), format!("g(1/4) = {g_quarter}"))?;
    let coeffs = [ExactReal::log_inv_a() + closed_form_head_offset(), c2, c4, c6];
    let mut worst: f64 = f64::NEG_INFINITY;
    for n in [2usize, 3, 5, 7] {
        let cert = certify_superharmonic(&coeffs, n)?;
        check(cert.pass && cert.laplacian.max_sign <= 0, format!("n={n}: certificate fails"))?;
        check(cert.laplacian.max_value <= 0.0, "certified maximum positive")?;
        let p = BumpProfile::closed_form(0.01, n)?;
        check(certify_profile(&p)?.iter().all(|c| c.pass), format!("n={n}: piece certificate fails"))?;
        let a = p.a();
        let pieces = [(0.0, 0.5 * a), (0.5 * a, a), (a, dilatation_core::target_radius())];
        for (lo, hi) in pieces {
            for k in 1..=10_000 {
                let r = lo + (hi - lo) * (k as f64 - 0.5) / 10_000.0;
                let v = p.n_laplacian(n, r)?;
                let scale = radial_n_laplacian_scale(&p, n, r)?;
                worst = worst.max(v / scale);
            }
        }
    }
    check(worst <= 1e-12, format!("sampled normalized n-Laplacian reaches {worst:e}"))?;
    Ok(format!("g(1/4) = -1/2 exactly; max sampled Δ_n/scale {worst:.2e} (tol 1e-12)"))
}

fn c4_properties() -> Outcome {
    let mut cases = 0;
    for a in RADII {
        for n in [2usize, 3, 5] {
            let rep = verify_properties(&BumpProfile::closed_form(a, n)?, &PropertyConfig::default())?;
            check(rep.properties.len() == 8, "report must list eight properties")?;
            check(rep.all_pass, format!("a={a}, n={n}: {:?}", rep.worst_violation()))?;
            let vi = rep.get("vi").ok_or("property vi missing")?;
            check(vi.description.contains("|y| <= a"), "property vi not restricted to |y| <= a")?;
            check(rep.notes.iter().any(|s| s.contains("outer")), "outer-piece caveat missing")?;
            cases += 1;
        }
    }
    Ok(format!("{cases} (a, n) cases pass i-viii; outer-piece caveat recorded"))
}

fn box_grid(res: usize, hw: f64) -> GridDomain {
    GridDomain::cube(2, -hw, hw, res).unwrap()
}

fn c5_weak_identity() -> Outcome {
    let grids: Vec<GridDomain> = [65, 129, 257].iter().map(|&r| box_grid(r, 0.06)).collect();
    let eta = smooth_cutoff(vec![0.0, 0.0], 0.015, 0.05)?;
    let linear = LinearField::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.3, 2.0]));
    let bump = BumpVectorField::new(&BumpProfile::closed_form(0.01, 2)?, 2)?;
    let fields: [&dyn ImageField; 2] = [&linear, &bump];
    let mut min_fit = f64::INFINITY;
    let mut worst_free: f64 = 0.0;
    for spec in ["identity", "winding:k=2", "radial:beta=2"] {
        let f = parse_mapping_spec(spec)?;
        for v in fields {
            let sweep = weak_identity_sweep(&f, v, &eta, &grids)?;
            let fit = sweep.fitted_slope.unwrap_or(f64::NAN);
            check(fit >= 1.8, format!("{spec} / {}: fitted slope {fit:.3} (levels {:?})", v.describe(), sweep.slopes))?;
            min_fit = min_fit.min(fit);
        }
        for v in [
            Box::new(ConstantField::new(vec![1.0, 0.0])) as Box<dyn ImageField>,
            Box::new(LinearField::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.5, -1.0]))),
        ] {
            let rep = weak_identity_residual(&f, v.as_ref(), &eta, &grids[2])?;
            check(rep.rhs == 0.0, format!("{spec}: divergence-free RHS = {}", rep.rhs))?;
            check(rep.lhs.abs() <= 1e-6, format!("{spec} / {}: |LHS| = {:e}", v.describe(), rep.lhs))?;
            worst_free = worst_free.max(rep.lhs.abs());
        }
    }
    Ok(format!(
        "min fitted slope {min_fit:.3} (>= 1.8); divergence-free max |LHS| {worst_free:.1e} at 257 (<= 1e-6)"
    ))
}

fn c6_caccioppoli() -> Outcome {
    let c = caccioppoli_constant(2);
    let g = box_grid(129, 0.04);
    let eta = smooth_cutoff(vec![0.0, 0.0], 0.01, 0.03)?;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for a in RADII {
        let p = BumpProfile::closed_form(a, 2)?;
        for spec in ["identity", "winding:k=2", "winding:k=3", "radial:beta=2", "linear:a11=1.5,a12=0.3", "scale:c=0.5"] {
            let rep = caccioppoli_check(&parse_mapping_spec(spec)?, &p, &eta, &g)?;
            let k = rep.constant.ok_or("rhs vanished")?;
            check(rep.lhs <= c * rep.rhs.unwrap(), format!("a={a}, {spec}: LHS/RHS = {k:.4} > {c}"))?;
            let phi_max = rep.diagnostics["test_function_max"];
            check(rep.diagnostics["test_function_min"] >= 0.0 && phi_max <= (-1.0f64).exp(), "test function range")?;
            worst = worst.max(k);
            cases += 1;
        }
    }
    let zero = caccioppoli_check(&parse_mapping_spec("identity")?, &BumpProfile::closed_form(0.01, 2)?, &eta.clone().scaled(0.0), &g)?;
    check(zero.lhs == 0.0 && zero.rhs == Some(0.0), "eta = 0 gives nonzero sides")?;
    let p = BumpProfile::closed_form(0.01, 2)?;
    let base = caccioppoli_check(&parse_mapping_spec("identity")?, &p, &eta, &g)?.constant.unwrap();
    let mut scal = Vec::new();
    for k in [2u32, 4] {
        let r = caccioppoli_check(&parse_mapping_spec(&format!("winding:k={k}"))?, &p, &eta, &g)?;
        let shrink = base / r.constant.unwrap();
        let target = (k as f64).powi(2);
        check((shrink / target - 1.0).abs() <= 0.10, format!("K={k}: shrink {shrink:.4} vs {target}"))?;
        scal.push(format!("{shrink:.3}/{target}"));
    }
    Ok(format!(
        "C = (n/(n-1))^n = {c} holds over {cases} cases (max LHS/RHS {worst:.4}); K-scaling shrink {}",
        scal.join(", ")
    ))
}

fn c7_exponents() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let n: usize = rng.gen_range(2..=9);
        let num: i64 = rng.gen_range(1..=1000);
        let den: i64 = rng.gen_range(1..=97);
        let nm1 = BigRational::from_integer(BigInt::from(n as i64 - 1));
        let p = &nm1 + rational(num, den);
        let eps = admissible_epsilon_exact(n, &p)?;
        let lhs = (&nm1 + &eps) / (BigRational::one() - &eps);
        check(lhs == p, format!("n={n}, p={p}: (n-1+eps)/(1-eps) = {lhs}"))?;
        check(eps == (&p - &nm1) / (&p + BigRational::one()), "closed form differs")?;
    }
    for n in 2..=9usize {
        let p = BigRational::from_integer(BigInt::from(n as i64 - 1));
        check(admissible_epsilon_exact(n, &p)?.is_zero(), format!("boundary n={n} nonzero"))?;
    }
    Ok("50 random (n, p) satisfy the identity exactly; boundary gives eps = 0".into())
}

fn sample_points(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.9..0.9)).collect();
        if x[0].hypot(x[1]) > 1e-3 {
            out.push(x);
        }
    }
    out
}

fn c8_dilatation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst_law, mut min_k, mut worst_adj) = (0.0f64, f64::INFINITY, 0.0f64);
    let mut samples = 0usize;
    let mut record = |m: &Mapping, x: &[f64]| -> Result<Option<f64>, Fail> {
        let s = differential(m, x)?;
        let n = m.dim() as i32;
        worst_adj = worst_adj.max(s.adjugate_residual() / (1.0 + s.opnorm.powi(n)));
        samples += 1;
        Ok(match s.dilatation {
            Dilatation::Infinite => None,
            d => {
                min_k = min_k.min(d.value());
                Some(d.value())
            }
        })
    };
    for n in [2usize, 3] {
        for k in [2u32, 3] {
            let m = parse_mapping_spec(&format!("winding:k={k},n={n}"))?;
            let expected = (k as f64).powi(n as i32 - 1);
            for x in sample_points(&mut rng, n, 1000) {
                let got = record(&m, &x)?.ok_or("winding gave infinite K")?;
                worst_law = worst_law.max((got - expected).abs());
            }
        }
        let specs = [
            "identity".to_string(),
            "radial:beta=0.5".into(),
            "radial:beta=3".into(),
            "cavitation:c=0.1".into(),
            "squeeze:w=0.5".into(),
            "scale:c=2".into(),
            "translate:b1=0.2".into(),
            if n == 2 { "linear:a11=2,a12=1,a21=-0.5,a22=0.7".into() } else { "linear:a11=2,a13=1,a32=-0.5".into() },
        ];
        for spec in specs {
            let sep = if spec.contains(':') { ',' } else { ':' };
            let m = parse_mapping_spec(&format!("{spec}{sep}n={n}"))?;
            for x in sample_points(&mut rng, n, 200) {
                if !m.is_exceptional(&x) {
                    record(&m, &x)?;
                }
            }
        }
    }
    check(worst_law <= 1e-8, format!("winding law deviation {worst_law:e}"))?;
    check(min_k >= 1.0 - 1e-10, format!("finite K as low as {min_k}"))?;
    check(worst_adj <= 1e-10, format!("adjugate residual {worst_adj:e}"))?;
    Ok(format!(
        "{samples} samples: winding law dev {worst_law:.1e}, min K {min_k:.12}, adjugate residual {worst_adj:.1e}"
    ))
}

fn square_oracle(q: f64, delta: f64) -> f64 {
    // ∫ over [-1,1]² minus B_δ of |x|^-q, in polar coordinates by octant
    let m = 20_000;
    let dt = 0.25 * PI / m as f64;
    let mid = |k: usize| (k as f64 + 0.5) * dt;
    if (q - 2.0).abs() < 1e-12 {
        let ln_sec: f64 = (0..m).map(|k| (1.0 / mid(k).cos()).ln()).sum::<f64>() * dt;
        2.0 * PI * (1.0 / delta).ln() + 8.0 * ln_sec
    } else {
        let sec: f64 = (0..m).map(|k| (1.0 / mid(k).cos()).powf(2.0 - q)).sum::<f64>() * dt;
        (8.0 * sec - 2.0 * PI * delta.powf(2.0 - q)) / (2.0 - q)
    }
}

fn c9_singular() -> Outcome {
    let g = box_grid(257, 1.0);
    let id = parse_mapping_spec("identity")?;
    let cloud = zero_set(&id, &g, 1e-9)?;
    let d0 = box_counting_dimension(&cloud, &grid_scales(&g))?.dimension;
    check(d0.abs() <= 0.05, format!("identity zero set dimension {d0}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let seg: Vec<Vec<f64>> = (0..10_000)
        .map(|_| {
            let t: f64 = rng.gen();
            vec![0.1 + 0.7 * t, 0.2 + 0.3 * t]
        })
        .collect();
    let seg = PointCloud::new(2, seg, vec![0.0, 0.0], vec![1.0, 1.0]);
    let d1 = box_counting_dimension(&seg, &dyadic_scales(1.0, 3, 5))?.dimension;
    check((d1 - 1.0).abs() <= 0.15, format!("segment dimension {d1}"))?;
    let h = g.max_spacing();
    let deltas = [16.0 * h, 8.0 * h, 4.0 * h];
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for (q, kind) in [(2.0 - 0.25, TrendKind::Stable), (2.0, TrendKind::LogGrowth)] {
        let (reps, trend) = sobolev_log_norm_sweep(&id, &g, q, &deltas)?;
        for (r, d) in reps.iter().zip(deltas) {
            let o = square_oracle(q, d);
            let rel = (r.lhs - o).abs() / o;
            check(rel <= 0.05, format!("q={q}, delta={d}: {} vs oracle {o}", r.lhs))?;
            worst = worst.max(rel);
        }
        check(trend.kind == kind, format!("q={q}: trend {:?} (ratio {})", trend.kind, trend.increment_ratio))?;
        ratios.push(format!("q={q}: {:?} ({:.3})", trend.kind, trend.increment_ratio));
    }
    Ok(format!(
        "identity dim {d0:.3}; segment dim {d1:.3}; {}; max oracle error {:.2}%",
        ratios.join(", "),
        100.0 * worst
    ))
}

fn c10_squeeze() -> Outcome {
    let g = box_grid(513, 1.0);
    let f = parse_mapping_spec("squeeze:w=0.5")?;
    let cloud = zero_set(&f, &g, 1e-9)?;
    let est = box_counting_dimension(&cloud, &grid_scales(&g))?;
    check(est.dimension >= 0.85, format!("squeeze preimage dimension {}", est.dimension))?;
    let s = differential(&f, &[0.0, 0.3])?;
    check(s.dilatation == Dilatation::Infinite, "squeeze should have infinite K on the flat strip")?;
    Ok(format!(
        "squeeze preimage dimension {:.3} (>= 0.85) with counts {:?}; K infinite on the flat strip",
        est.dimension, est.counts
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("coefficient reproduction", c1_coefficients),
        ("C2 matching", c2_matching),
        ("sign certificate", c3_certificate),
        ("bump property suite", c4_properties),
        ("weak identity", c5_weak_identity),
        ("Caccioppoli estimate", c6_caccioppoli),
        ("exponent arithmetic", c7_exponents),
        ("dilatation laws", c8_dilatation),
        ("singular-set diagnostics", c9_singular),
        ("squeeze contrast", c10_squeeze),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(Fail(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(Fail(detail)) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
