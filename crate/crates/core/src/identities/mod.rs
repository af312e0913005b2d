//! Quadrature checks of the adjugate divergence identity and of the energy
//! estimates built on it.
//!
//! The identity `div(adj(DF) V∘F) = (div V)∘F J_F` is tested in weak form:
//! against a cutoff `η`,
//!
//! ```text
//! LHS = -∫ adj(DF)(V∘F) · ∇η dx,    RHS = ∫ (div V)∘F J_F η dx.
//! ```

mod estimates;
mod fields;
mod report;

pub use estimates::{
    admissible_epsilon, admissible_epsilon_exact, caccioppoli_check, caccioppoli_constant, hausdorff_bound,
    log_log_energy, log_log_energy_sweep, log_log_energy_with_exponent, log_phi_energy,
    EstimateReport,
};
pub use fields::{BumpVectorField, ConstantField, ImageField, LinearField};
pub use report::{append_csv, IdentityReport, IdentitySweep, SummaryRow};
pub(crate) use report::least_squares_slope;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::mapping::{differential, Mapping};
use crate::tensorgrid::{Cutoff, GridDomain};

/// Slope of `log residual` against `log h` that the sweep is expected to reach.
pub const MIN_REFINEMENT_SLOPE: f64 = 1.8;

/// Bound on `|LHS|` at the finest level when the field is divergence-free.
pub const DIVERGENCE_FREE_TOLERANCE: f64 = 1e-6;

pub(crate) fn check_support(eta: &Cutoff, grid: &GridDomain) -> Result<()> {
    if eta.center().len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: eta.center().len(),
        });
    }
    if grid.distance_to_boundary(eta.center()) < eta.outer_radius() {
        return Err(Error::SupportExceedsGrid {
            radius: eta.outer_radius(),
        });
    }
    Ok(())
}

/// Weak-form residual of the divergence identity on one grid.
pub fn weak_identity_residual(
    f: &Mapping,
    v: &dyn ImageField,
    eta: &Cutoff,
    grid: &GridDomain,
) -> Result<IdentityReport> {
    let n = grid.dim();
    if f.dim() != n || v.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if f.dim() != n { f.dim() } else { v.dim() },
        });
    }
    check_support(eta, grid)?;
    let divergence_free = v.is_divergence_free();
    let (mut lhs, mut rhs, mut mask_volume) = (0.0, 0.0, 0.0);
    let mut x = vec![0.0; n];
    for i in 0..grid.len() {
        grid.point_into(i, &mut x);
        if !eta.supports(&x) {
            continue;
        }
        let w = grid.weight(i);
        if f.is_exceptional(&x) {
            mask_volume += w;
            continue;
        }
        let s = differential(f, &x)?;
        let y = f.eval(&x)?;
        let field = DVector::from_vec(v.value(&y)?);
        let pulled = &s.adjugate * field;
        let grad = eta.gradient(&x);
        lhs -= w * pulled.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>();
        if !divergence_free {
            rhs += w * v.divergence(&y)? * s.jacobian * eta.value(&x);
        }
    }
    let residual = (lhs - rhs).abs();
    Ok(IdentityReport {
        identity: if divergence_free { "divergence_free" } else { "weak_divergence" }.into(),
        mapping: f.spec_string(),
        field: v.describe(),
        resolution: grid.resolution()[0],
        h: grid.max_spacing(),
        lhs,
        rhs,
        residual,
        relative_residual: residual / lhs.abs().max(rhs.abs()).max(1e-30),
        mask_volume,
        slope: None,
    })
}

/// Runs [`weak_identity_residual`] on each grid and records consecutive refinement slopes.
pub fn weak_identity_sweep(
    f: &Mapping,
    v: &dyn ImageField,
    eta: &Cutoff,
    grids: &[GridDomain],
) -> Result<IdentitySweep> {
    let mut reports: Vec<IdentityReport> = Vec::with_capacity(grids.len());
    for g in grids {
        let mut rep = weak_identity_residual(f, v, eta, g)?;
        if let Some(prev) = reports.last() {
            rep.slope = Some(
                (prev.relative_residual / rep.relative_residual).ln() / (prev.h / rep.h).ln(),
            );
        }
        reports.push(rep);
    }
    Ok(IdentitySweep::new(reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::BumpProfile;
    use crate::mapping::parse_mapping_spec;
    use crate::tensorgrid::smooth_cutoff;
    use nalgebra::DMatrix;

    fn grid(res: usize, hw: f64) -> GridDomain {
        GridDomain::cube(2, -hw, hw, res).unwrap()
    }

    #[test]
    fn identity_linear_matches_integration_by_parts() {
        // -∫ x·∇η = n ∫ η
        let f = parse_mapping_spec("identity").unwrap();
        let v = LinearField::new(DMatrix::identity(2, 2));
        let eta = smooth_cutoff(vec![0.0, 0.0], 0.3, 0.8).unwrap();
        let rep = weak_identity_residual(&f, &v, &eta, &grid(129, 1.0)).unwrap();
        // oracle: 2 ∫ η = 2 * 2π ∫ r η(r) dr
        let m = 200_000;
        let dr = 0.8 / m as f64;
        let integral: f64 = (0..m)
            .map(|k| {
                let r = (k as f64 + 0.5) * dr;
                r * eta.profile(r).0
            })
            .sum::<f64>()
            * dr;
        let oracle = 2.0 * 2.0 * std::f64::consts::PI * integral;
        assert!((rep.lhs - oracle).abs() < 1e-5 * oracle, "{} vs {oracle}", rep.lhs);
        assert!(rep.relative_residual < 1e-5);
    }

    #[test]
    fn constant_field_has_zero_rhs() {
        let v = ConstantField::new(vec![1.0, 0.0]);
        let eta = smooth_cutoff(vec![0.0, 0.0], 0.2, 0.7).unwrap();
        for spec in ["identity", "winding:k=2", "radial:beta=2", "linear:a11=2,a12=0.5"] {
            let f = parse_mapping_spec(spec).unwrap();
            let rep = weak_identity_residual(&f, &v, &eta, &grid(129, 1.0)).unwrap();
            assert_eq!(rep.rhs, 0.0);
            assert!(rep.lhs.abs() < 1e-6, "{spec}: {}", rep.lhs);
        }
    }

    #[test]
    fn bump_field_identity_converges() {
        let p = BumpProfile::closed_form(0.02, 2).unwrap();
        let v = BumpVectorField::new(&p, 2).unwrap();
        let eta = smooth_cutoff(vec![0.0, 0.0], 0.015, 0.05).unwrap();
        let f = parse_mapping_spec("winding:k=2").unwrap();
        let grids: Vec<GridDomain> = [33, 65, 129].iter().map(|&r| grid(r, 0.06)).collect();
        let sweep = weak_identity_sweep(&f, &v, &eta, &grids).unwrap();
        assert!(sweep.reports[2].relative_residual < sweep.reports[0].relative_residual);
    }

    #[test]
    fn support_must_fit() {
        let f = parse_mapping_spec("identity").unwrap();
        let v = ConstantField::new(vec![1.0, 0.0]);
        let eta = smooth_cutoff(vec![0.5, 0.0], 0.2, 0.7).unwrap();
        assert!(matches!(
            weak_identity_residual(&f, &v, &eta, &grid(33, 1.0)),
            Err(Error::SupportExceedsGrid { .. })
        ));
    }
}
