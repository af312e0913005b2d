//! Uniform tensor grids, finite-difference gradients, trapezoidal quadrature
//! and smooth radial cutoffs.
//!
//! Points are stored in row-major order: the last axis varies fastest, so the
//! flat index of multi-index `(i_0, ..., i_{n-1})` is `sum_k i_k * stride_k`
//! with `stride_{n-1} = 1`.

mod cutoff;
mod excision;
mod field;

pub use cutoff::{smooth_cutoff, Cutoff};
pub use excision::{mask_near_points, ExcisionTrend, TrendKind};
pub use field::{fd_gradient, integrate, integrate_masked, Integral, ScalarField, VectorField};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest point count `make_grid` accepts unless a different cap is passed.
pub const DEFAULT_POINT_CAP: usize = 50_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    resolution: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
}

/// Builds a grid over `bounds` with `resolution` points per axis.
///
/// A single entry in `bounds` or `resolution` is broadcast to every axis.
pub fn make_grid(n: usize, bounds: &[(f64, f64)], resolution: &[usize]) -> Result<GridDomain> {
    make_grid_with_cap(n, bounds, resolution, DEFAULT_POINT_CAP)
}

pub fn make_grid_with_cap(
    n: usize,
    bounds: &[(f64, f64)],
    resolution: &[usize],
    cap: usize,
) -> Result<GridDomain> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid dimension must be at least 2, got {n}"
        )));
    }
    let broadcast = |len: usize, what: &str| -> Result<()> {
        if len == 1 || len == n {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{what} has {len} entries for a {n}-dimensional grid"
            )))
        }
    };
    broadcast(bounds.len(), "box")?;
    broadcast(resolution.len(), "resolution")?;
    let bound = |k: usize| bounds[if bounds.len() == 1 { 0 } else { k }];
    let res = |k: usize| resolution[if resolution.len() == 1 { 0 } else { k }];

    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut resolutions = Vec::with_capacity(n);
    for axis in 0..n {
        let (lo, hi) = bound(axis);
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::DegenerateBox {
                axis,
                lower: lo,
                upper: hi,
            });
        }
        let r = res(axis);
        if r < 3 {
            return Err(Error::ResolutionTooCoarse {
                axis,
                resolution: r,
            });
        }
        lower.push(lo);
        upper.push(hi);
        resolutions.push(r);
    }
    let points = resolutions
        .iter()
        .try_fold(1usize, |acc, &r| acc.checked_mul(r))
        .unwrap_or(usize::MAX);
    if points > cap {
        return Err(Error::GridTooLarge { points, cap });
    }
    let spacing = (0..n)
        .map(|k| (upper[k] - lower[k]) / (resolutions[k] - 1) as f64)
        .collect();
    let mut strides = vec![1usize; n];
    for k in (0..n - 1).rev() {
        strides[k] = strides[k + 1] * resolutions[k + 1];
    }
    Ok(GridDomain {
        lower,
        upper,
        resolution: resolutions,
        spacing,
        strides,
    })
}

impl GridDomain {
    /// Cube `[lo, hi]^n` with the same resolution on every axis.
    pub fn cube(n: usize, lo: f64, hi: f64, resolution: usize) -> Result<Self> {
        make_grid(n, &[(lo, hi)], &[resolution])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (k, s) in self.strides.iter().enumerate() {
            idx[k] = flat / s;
            flat %= s;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.point_into(flat, &mut x);
        x
    }

    pub fn point_into(&self, mut flat: usize, out: &mut [f64]) {
        for k in 0..self.dim() {
            let i = flat / self.strides[k];
            flat %= self.strides[k];
            out[k] = self.coordinate(k, i);
        }
    }

    /// Coordinate of grid line `i` on `axis`; the last line lands exactly on `upper`.
    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.resolution[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + i as f64 * self.spacing[axis]
        }
    }

    /// Trapezoidal weight of a grid point.
    pub fn weight(&self, flat: usize) -> f64 {
        let idx = self.multi_index(flat);
        idx.iter()
            .enumerate()
            .map(|(k, &i)| {
                let h = self.spacing[k];
                if i == 0 || i + 1 == self.resolution[k] {
                    0.5 * h
                } else {
                    h
                }
            })
            .product()
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .product()
    }

    /// Largest spacing over all axes.
    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    /// Distance from `x` to the nearest face of the box (negative outside).
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        (0..self.dim())
            .map(|k| (x[k] - self.lower[k]).min(self.upper[k] - x[k]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.distance_to_boundary(x) >= 0.0
    }

    /// Flat index of the grid point nearest to `x`, clamped into the box.
    pub fn nearest_index(&self, x: &[f64]) -> usize {
        let idx: Vec<usize> = (0..self.dim())
            .map(|k| {
                let t = ((x[k] - self.lower[k]) / self.spacing[k]).round();
                t.clamp(0.0, (self.resolution[k] - 1) as f64) as usize
            })
            .collect();
        self.flat_index(&idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_three_points() {
        let g = make_grid(2, &[(0.0, 1.0)], &[3]).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.spacing(), &[0.5, 0.5]);
    }

    #[test]
    fn cube_of_125() {
        let g = GridDomain::cube(3, -1.0, 1.0, 5).unwrap();
        assert_eq!(g.len(), 125);
        assert_eq!(g.spacing(), &[0.5, 0.5, 0.5]);
    }

    #[test]
    fn degenerate_box_rejected() {
        let err = make_grid(2, &[(0.0, 1.0), (0.0, 0.0)], &[3]).unwrap_err();
        assert!(matches!(err, Error::DegenerateBox { axis: 1, .. }));
    }

    #[test]
    fn coarse_and_oversized_rejected() {
        assert!(matches!(
            make_grid(2, &[(0.0, 1.0)], &[2]),
            Err(Error::ResolutionTooCoarse { .. })
        ));
        assert!(matches!(
            make_grid_with_cap(3, &[(0.0, 1.0)], &[100], 10_000),
            Err(Error::GridTooLarge { points: 1_000_000, .. })
        ));
        assert!(make_grid(1, &[(0.0, 1.0)], &[3]).is_err());
    }

    #[test]
    fn row_major_order() {
        let g = make_grid(2, &[(0.0, 1.0), (0.0, 2.0)], &[3, 5]).unwrap();
        assert_eq!(g.point(1), vec![0.0, 0.5]);
        assert_eq!(g.point(5), vec![0.5, 0.0]);
        assert_eq!(g.point(g.len() - 1), vec![1.0, 2.0]);
        for flat in 0..g.len() {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
        assert_eq!(g.nearest_index(&[0.49, 1.6]), g.flat_index(&[1, 3]));
    }
}
