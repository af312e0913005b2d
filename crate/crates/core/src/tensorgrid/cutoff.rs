use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial C² cutoff: 1 on the ball of radius `r0`, 0 outside radius `r1`,
/// with the quintic transition `1 - (10t³ - 15t⁴ + 6t⁵)`, `t = (r - r0)/(r1 - r0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    center: Vec<f64>,
    r0: f64,
    r1: f64,
    #[serde(default = "unit")]
    amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

pub fn smooth_cutoff(center: Vec<f64>, r0: f64, r1: f64) -> Result<Cutoff> {
    if !(r0 > 0.0 && r0 < r1 && r1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "cutoff radii must satisfy 0 < r0 < r1, got r0 = {r0}, r1 = {r1}"
        )));
    }
    Ok(Cutoff {
        center,
        r0,
        r1,
        amplitude: 1.0,
    })
}

impl Cutoff {
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// `k η`; `k = 0` gives the zero test function with the same support ball.
    pub fn scaled(mut self, k: f64) -> Self {
        self.amplitude *= k;
        self
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn inner_radius(&self) -> f64 {
        self.r0
    }

    pub fn outer_radius(&self) -> f64 {
        self.r1
    }

    /// `(η, η', η'')` as functions of the distance `r` to the center.
    pub fn profile(&self, r: f64) -> (f64, f64, f64) {
        let (v, d1, d2) = self.unit_profile(r);
        (self.amplitude * v, self.amplitude * d1, self.amplitude * d2)
    }

    fn unit_profile(&self, r: f64) -> (f64, f64, f64) {
        if r <= self.r0 {
            return (1.0, 0.0, 0.0);
        }
        if r >= self.r1 {
            return (0.0, 0.0, 0.0);
        }
        let w = self.r1 - self.r0;
        let t = (r - self.r0) / w;
        let s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
        let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        let dds = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
        (1.0 - s, -ds / w, -dds / (w * w))
    }

    pub fn radius_of(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.profile(self.radius_of(x)).0
    }

    /// Analytic gradient `η'(r) (x - c)/r`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = self.radius_of(x);
        let (_, d, _) = self.profile(r);
        if d == 0.0 {
            return vec![0.0; x.len()];
        }
        x.iter()
            .zip(&self.center)
            .map(|(a, b)| d * (a - b) / r)
            .collect()
    }

    /// True when `x` lies in the closed support ball.
    pub fn supports(&self, x: &[f64]) -> bool {
        self.radius_of(x) < self.r1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eta() -> Cutoff {
        smooth_cutoff(vec![0.0, 0.0], 0.2, 0.6).unwrap()
    }

    #[test]
    fn plateau_support_and_midpoint() {
        let c = eta();
        assert_eq!(c.value(&[0.1, 0.0]), 1.0);
        assert_eq!(c.profile(0.6), (0.0, 0.0, 0.0));
        assert!((c.profile(0.4).0 - 0.5).abs() < 1e-15);
        assert_eq!(c.value(&[0.0, 0.0]), 1.0);
    }

    #[test]
    fn c2_matching_at_both_radii() {
        let c = eta();
        let eps = 1e-7;
        for r in [0.2, 0.6] {
            let (l0, l1, l2) = c.profile(r - eps);
            let (h0, h1, h2) = c.profile(r + eps);
            assert!((l0 - h0).abs() < 1e-12);
            assert!((l1 - h1).abs() < 1e-6);
            assert!((l2 - h2).abs() < 1e-4);
        }
    }

    #[test]
    fn sandwich_and_fd_derivative() {
        let c = eta();
        let h = 1e-4;
        for k in 0..=1000 {
            let r = k as f64 * 1e-3;
            let (v, d, _) = c.profile(r);
            assert!((0.0..=1.0).contains(&v));
            if r > h {
                let fd = (c.profile(r + h).0 - c.profile(r - h).0) / (2.0 * h);
                assert!((fd - d).abs() < 1e-5, "r {r}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(smooth_cutoff(vec![0.0; 2], 0.5, 0.5).is_err());
        assert!(smooth_cutoff(vec![0.0; 2], 0.0, 0.5).is_err());
    }
}
