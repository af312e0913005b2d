use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::differential::{differential, Dilatation};
use super::Mapping;
use crate::error::{Error, Result};
use crate::tensorgrid::{integrate_masked, GridDomain, ScalarField};

/// Whether the integrability exponents make `K` land in `L^p` via Young's inequality:
/// `n/alpha + 1/beta < 1/p`.
pub fn young_admissible(n: usize, alpha: f64, beta: f64, p: f64) -> bool {
    n as f64 / alpha + 1.0 / beta < 1.0 / p
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub alpha: f64,
    pub beta: f64,
    /// `∫ |DF|^alpha`.
    pub stretch_term: f64,
    /// `∫ J^-beta`.
    pub volume_term: f64,
    pub total: f64,
    pub mask_volume: f64,
    /// Some unmasked point has `J <= 0`.
    pub infinite: bool,
}

fn sample_mask(f: &Mapping, grid: &GridDomain, extra: Option<&[bool]>) -> Result<Vec<bool>> {
    let mut mask = vec![false; grid.len()];
    for (i, m) in mask.iter_mut().enumerate() {
        let x = grid.point(i);
        if !f.domain().contains(&x) {
            return Err(Error::OutsideDomain(x));
        }
        *m = f.is_exceptional(&x) || extra.is_some_and(|e| e[i]);
    }
    Ok(mask)
}

/// Polyconvex energy `∫ (|DF|^alpha + J^-beta)` by trapezoidal quadrature.
pub fn polyconvex_energy(
    f: &Mapping,
    grid: &Arc<GridDomain>,
    alpha: f64,
    beta: f64,
) -> Result<EnergyReport> {
    polyconvex_energy_masked(f, grid, alpha, beta, None)
}

/// As [`polyconvex_energy`], additionally excising the points flagged in `extra_mask`.
pub fn polyconvex_energy_masked(
    f: &Mapping,
    grid: &Arc<GridDomain>,
    alpha: f64,
    beta: f64,
    extra_mask: Option<&[bool]>,
) -> Result<EnergyReport> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "energy exponents must be positive, got alpha = {alpha}, beta = {beta}"
        )));
    }
    let mask = sample_mask(f, grid, extra_mask)?;
    let mut stretch = vec![0.0; grid.len()];
    let mut volume = vec![0.0; grid.len()];
    let mut infinite = false;
    for i in 0..grid.len() {
        if mask[i] {
            continue;
        }
        let s = differential(f, &grid.point(i))?;
        stretch[i] = s.opnorm.powf(alpha);
        if s.jacobian > 0.0 {
            volume[i] = s.jacobian.powf(-beta);
        } else {
            infinite = true;
        }
    }
    let m = Some(mask);
    let st = integrate_masked(&ScalarField::new(grid.clone(), stretch, m.clone())?)?;
    let vol = integrate_masked(&ScalarField::new(grid.clone(), volume, m)?)?;
    let volume_term = if infinite { f64::INFINITY } else { vol.value };
    Ok(EnergyReport {
        alpha,
        beta,
        stretch_term: st.value,
        volume_term,
        total: st.value + volume_term,
        mask_volume: st.excised_volume,
        infinite,
    })
}

/// Quadrature of `K^p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpReport {
    pub p: f64,
    pub integral: f64,
    pub max_dilatation: f64,
    pub mask_volume: f64,
    pub infinite: bool,
}

pub fn dilatation_integral(f: &Mapping, grid: &Arc<GridDomain>, p: f64) -> Result<LpReport> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("p must be positive, got {p}")));
    }
    let mask = sample_mask(f, grid, None)?;
    let mut values = vec![0.0; grid.len()];
    let mut infinite = false;
    let mut max_k: f64 = 0.0;
    for i in 0..grid.len() {
        if mask[i] {
            continue;
        }
        let s = differential(f, &grid.point(i))?;
        match s.dilatation {
            Dilatation::Infinite => infinite = true,
            d => {
                values[i] = d.value().powf(p);
                max_k = max_k.max(d.value());
            }
        }
    }
    let q = integrate_masked(&ScalarField::new(grid.clone(), values, Some(mask))?)?;
    Ok(LpReport {
        p,
        integral: if infinite { f64::INFINITY } else { q.value },
        max_dilatation: if infinite { f64::INFINITY } else { max_k },
        mask_volume: q.excised_volume,
        infinite,
    })
}
