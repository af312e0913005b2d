use nalgebra::DMatrix;

use crate::bump::{check_flux_c1, BumpProfile, PropertyConfig};
use crate::error::{Error, Result};

/// A C¹ vector field on the image side, with its divergence.
pub trait ImageField {
    fn dim(&self) -> usize;
    fn value(&self, y: &[f64]) -> Result<Vec<f64>>;
    fn divergence(&self, y: &[f64]) -> Result<f64>;
    fn is_divergence_free(&self) -> bool {
        false
    }
    fn describe(&self) -> String;
}

#[derive(Clone, Debug)]
pub struct ConstantField {
    value: Vec<f64>,
}

impl ConstantField {
    pub fn new(value: Vec<f64>) -> Self {
        Self { value }
    }
}

impl ImageField for ConstantField {
    fn dim(&self) -> usize {
        self.value.len()
    }
    fn value(&self, _y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value.clone())
    }
    fn divergence(&self, _y: &[f64]) -> Result<f64> {
        Ok(0.0)
    }
    fn is_divergence_free(&self) -> bool {
        true
    }
    fn describe(&self) -> String {
        format!("constant{:?}", self.value)
    }
}

/// `V(y) = A y`.
#[derive(Clone, Debug)]
pub struct LinearField {
    matrix: DMatrix<f64>,
}

impl LinearField {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }
}

impl ImageField for LinearField {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn value(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok((0..self.matrix.nrows())
            .map(|i| (0..y.len()).map(|j| self.matrix[(i, j)] * y[j]).sum())
            .collect())
    }
    fn divergence(&self, _y: &[f64]) -> Result<f64> {
        Ok(self.matrix.trace())
    }
    fn is_divergence_free(&self) -> bool {
        self.matrix.trace() == 0.0
    }
    fn describe(&self) -> String {
        let rows: Vec<String> = self
            .matrix
            .row_iter()
            .map(|r| format!("{:?}", r.iter().collect::<Vec<_>>()))
            .collect();
        format!("linear[{}]", rows.join(","))
    }
}

/// `V = |∇Φ_a|^(n-2) ∇Φ_a`; its divergence is the radial n-Laplacian of the profile.
///
/// On the outer piece `V(y) = -y/|y|^n`.
#[derive(Clone, Debug)]
pub struct BumpVectorField {
    profile: BumpProfile,
    n: usize,
}

impl BumpVectorField {
    /// Fails with [`Error::FluxNotC1`] unless the flux passes the C¹ check.
    pub fn new(profile: &BumpProfile, n: usize) -> Result<Self> {
        let profile = profile.with_dim(n)?;
        let flux = check_flux_c1(&profile, n, &PropertyConfig::default().flux_levels)?;
        if !flux.pass {
            return Err(Error::FluxNotC1(format!(
                "jumps at a/2 {:?}, at a {:?}",
                flux.jump_half, flux.jump_a
            )));
        }
        Ok(Self { profile, n })
    }

    pub fn profile(&self) -> &BumpProfile {
        &self.profile
    }
}

impl ImageField for BumpVectorField {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, y: &[f64]) -> Result<Vec<f64>> {
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = self.profile.flux_radial(self.n, r)?;
        if r == 0.0 {
            return Ok(vec![0.0; y.len()]);
        }
        Ok(y.iter().map(|c| v * c / r).collect())
    }
    fn divergence(&self, y: &[f64]) -> Result<f64> {
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.profile.n_laplacian(self.n, r)
    }
    fn describe(&self) -> String {
        format!("bump(a={},n={})", self.profile.a(), self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactReal;

    #[test]
    fn outer_piece_is_inverse_power() {
        for n in [2usize, 3, 5] {
            let p = BumpProfile::closed_form(0.01, n).unwrap();
            let v = BumpVectorField::new(&p, n).unwrap();
            let mut y = vec![0.0; n];
            y[0] = 0.03;
            y[1] = -0.02;
            let r = (0.03f64 * 0.03 + 0.02 * 0.02).sqrt();
            let got = v.value(&y).unwrap();
            for (g, c) in got.iter().zip(&y) {
                assert!((g + c / r.powi(n as i32)).abs() < 1e-12 * r.powi(1 - n as i32));
            }
            assert!(v.divergence(&y).unwrap().abs() < 1e-9 * r.powi(-(n as i32)));
        }
    }

    #[test]
    fn vanishes_at_origin_like_power() {
        let p = BumpProfile::closed_form(0.01, 3).unwrap();
        let v = BumpVectorField::new(&p, 3).unwrap();
        assert_eq!(v.value(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0; 3]);
        // |V| ~ r^(n-1)
        let m1 = v.value(&[1e-6, 0.0, 0.0]).unwrap()[0].abs();
        let m2 = v.value(&[2e-6, 0.0, 0.0]).unwrap()[0].abs();
        assert!(((m2 / m1).log2() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn planar_field_is_gradient() {
        let p = BumpProfile::closed_form(0.01, 2).unwrap();
        let v = BumpVectorField::new(&p, 2).unwrap();
        let y = [0.003, 0.002];
        assert_eq!(v.value(&y).unwrap(), p.gradient(&y).unwrap());
    }

    #[test]
    fn broken_profile_rejected() {
        let p = BumpProfile::closed_form(0.01, 3).unwrap();
        let mut c = p.exact_coefficients().clone();
        c[2] = ExactReal::int(10);
        let broken = BumpProfile::from_exact(0.01, 3, c).unwrap();
        assert!(matches!(BumpVectorField::new(&broken, 3), Err(Error::FluxNotC1(_))));
    }

    #[test]
    fn linear_divergence_is_trace() {
        let v = LinearField::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, -1.0]));
        assert_eq!(v.divergence(&[0.3, 0.1]).unwrap(), 0.0);
        assert!(v.is_divergence_free());
        assert_eq!(v.value(&[1.0, 1.0]).unwrap(), vec![3.0, 2.0]);
    }
}
