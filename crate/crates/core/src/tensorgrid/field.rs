use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::GridDomain;
use crate::error::{Error, Result};

/// Scalar values at every grid point, with an optional excision mask
/// (`true` marks an excised point).
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<GridDomain>,
    values: Vec<f64>,
    mask: Option<Vec<bool>>,
}

/// `dim`-vectors at every grid point, stored point-major.
#[derive(Clone, Debug)]
pub struct VectorField {
    grid: Arc<GridDomain>,
    dim: usize,
    values: Vec<f64>,
    mask: Option<Vec<bool>>,
}

fn check_mask(grid: &GridDomain, mask: &Option<Vec<bool>>) -> Result<()> {
    match mask {
        Some(m) if m.len() != grid.len() => Err(Error::FieldSizeMismatch {
            expected: grid.len(),
            got: m.len(),
        }),
        _ => Ok(()),
    }
}

fn is_masked(mask: &Option<Vec<bool>>, i: usize) -> bool {
    mask.as_ref().is_some_and(|m| m[i])
}

impl ScalarField {
    pub fn new(grid: Arc<GridDomain>, values: Vec<f64>, mask: Option<Vec<bool>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldSizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        check_mask(&grid, &mask)?;
        if let Some(i) = (0..values.len()).find(|&i| !is_masked(&mask, i) && !values[i].is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "non-finite unmasked value at grid point {:?}",
                grid.point(i)
            )));
        }
        Ok(Self { grid, values, mask })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Arc<GridDomain>, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.point_into(i, &mut x);
                f(&x)
            })
            .collect();
        Self::new(grid, values, None)
    }

    /// Samples `f` where it returns `Some`, masking the remaining points.
    pub fn from_partial_fn(
        grid: Arc<GridDomain>,
        mut f: impl FnMut(&[f64]) -> Option<f64>,
    ) -> Result<Self> {
        let mut x = vec![0.0; grid.dim()];
        let mut mask = vec![false; grid.len()];
        let values = (0..grid.len())
            .map(|i| {
                grid.point_into(i, &mut x);
                f(&x).unwrap_or_else(|| {
                    mask[i] = true;
                    0.0
                })
            })
            .collect();
        let mask = mask.iter().any(|&m| m).then_some(mask);
        Self::new(grid, values, mask)
    }

    pub fn grid(&self) -> &Arc<GridDomain> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn is_masked(&self, i: usize) -> bool {
        is_masked(&self.mask, i)
    }

    /// Adds `extra` to the mask (logical or).
    pub fn with_extra_mask(mut self, extra: &[bool]) -> Result<Self> {
        if extra.len() != self.grid.len() {
            return Err(Error::FieldSizeMismatch {
                expected: self.grid.len(),
                got: extra.len(),
            });
        }
        let mask = match self.mask.take() {
            Some(m) => m.iter().zip(extra).map(|(a, b)| *a || *b).collect(),
            None => extra.to_vec(),
        };
        self.mask = Some(mask);
        Ok(self)
    }

    /// CSV with header `x1,..,xn,value`; masked points are written as `nan`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.grid.dim();
        let header: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
        writeln!(out, "{},value", header.join(","))?;
        for i in 0..self.grid.len() {
            let x = self.grid.point(i);
            let coords: Vec<String> = x.iter().map(|c| format!("{c:.17e}")).collect();
            let v = if self.is_masked(i) { f64::NAN } else { self.values[i] };
            writeln!(out, "{},{v:.17e}", coords.join(","))?;
        }
        Ok(())
    }
}

impl VectorField {
    pub fn new(
        grid: Arc<GridDomain>,
        dim: usize,
        values: Vec<f64>,
        mask: Option<Vec<bool>>,
    ) -> Result<Self> {
        if values.len() != grid.len() * dim {
            return Err(Error::FieldSizeMismatch {
                expected: grid.len() * dim,
                got: values.len(),
            });
        }
        check_mask(&grid, &mask)?;
        Ok(Self {
            grid,
            dim,
            values,
            mask,
        })
    }

    pub fn grid(&self) -> &Arc<GridDomain> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_masked(&self, i: usize) -> bool {
        is_masked(&self.mask, i)
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    /// CSV with header `x1,..,xn,v1,..,vd`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.grid.dim();
        let mut header: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
        header.extend((1..=self.dim).map(|k| format!("v{k}")));
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.grid.len() {
            let mut cols: Vec<String> = self
                .grid
                .point(i)
                .iter()
                .map(|c| format!("{c:.17e}"))
                .collect();
            let masked = self.is_masked(i);
            cols.extend(self.at(i).iter().map(|&v| {
                let v = if masked { f64::NAN } else { v };
                format!("{v:.17e}")
            }));
            writeln!(out, "{}", cols.join(","))?;
        }
        Ok(())
    }
}

/// Gradient by central differences in the interior and second-order
/// one-sided differences on the boundary faces.
///
/// Any masked point in a stencil masks the output point.
pub fn fd_gradient(field: &ScalarField) -> Result<VectorField> {
    let grid = field.grid();
    let n = grid.dim();
    for (axis, &r) in grid.resolution().iter().enumerate() {
        if r < 3 {
            return Err(Error::ResolutionTooCoarse {
                axis,
                resolution: r,
            });
        }
    }
    let f = field.values();
    let mut out = vec![0.0; grid.len() * n];
    let mut mask = field.mask().map(|_| vec![false; grid.len()]);
    for i in 0..grid.len() {
        let idx = grid.multi_index(i);
        let mut masked = false;
        for axis in 0..n {
            let s = grid.stride(axis);
            let h = grid.spacing()[axis];
            let last = grid.resolution()[axis] - 1;
            let (stencil, d): ([usize; 3], f64) = if idx[axis] == 0 {
                let st = [i, i + s, i + 2 * s];
                (st, (-3.0 * f[st[0]] + 4.0 * f[st[1]] - f[st[2]]) / (2.0 * h))
            } else if idx[axis] == last {
                let st = [i, i - s, i - 2 * s];
                (st, (3.0 * f[st[0]] - 4.0 * f[st[1]] + f[st[2]]) / (2.0 * h))
            } else {
                let st = [i - s, i, i + s];
                (st, (f[st[2]] - f[st[0]]) / (2.0 * h))
            };
            if field.mask().is_some() && stencil.iter().any(|&j| field.is_masked(j)) {
                masked = true;
            }
            out[i * n + axis] = d;
        }
        if let Some(m) = mask.as_mut() {
            m[i] = masked;
        }
    }
    VectorField::new(grid.clone(), n, out, mask)
}

/// Value of a masked quadrature together with the excised volume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub excised_volume: f64,
}

/// Tensor-product trapezoidal rule; masked points contribute zero.
pub fn integrate(field: &ScalarField) -> Result<f64> {
    integrate_masked(field).map(|q| q.value)
}

pub fn integrate_masked(field: &ScalarField) -> Result<Integral> {
    let grid = field.grid();
    let mut value = 0.0;
    let mut excised = 0.0;
    let mut live = 0usize;
    for (i, v) in field.values().iter().enumerate() {
        let w = grid.weight(i);
        if field.is_masked(i) {
            excised += w;
        } else {
            value += w * v;
            live += 1;
        }
    }
    if live == 0 {
        return Err(Error::AllMasked);
    }
    Ok(Integral {
        value,
        excised_volume: excised,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorgrid::{make_grid, GridDomain};

    fn unit(res: usize) -> Arc<GridDomain> {
        Arc::new(make_grid(2, &[(0.0, 1.0)], &[res]).unwrap())
    }

    #[test]
    fn affine_gradient_exact() {
        let g = Arc::new(make_grid(2, &[(-1.0, 2.0), (0.0, 1.0)], &[7, 5]).unwrap());
        let f = ScalarField::from_fn(g.clone(), |x| 3.0 * x[0] - 2.0 * x[1]).unwrap();
        let grad = fd_gradient(&f).unwrap();
        for i in 0..g.len() {
            assert!((grad.at(i)[0] - 3.0).abs() < 1e-13);
            assert!((grad.at(i)[1] + 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn quadratic_gradient_exact_to_rounding() {
        let g = unit(101);
        let f = ScalarField::from_fn(g.clone(), |x| x[0] * x[0]).unwrap();
        let grad = fd_gradient(&f).unwrap();
        let err = (0..g.len())
            .map(|i| (grad.at(i)[0] - 2.0 * g.point(i)[0]).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "err {err}");
    }

    fn sine_error(res: usize) -> f64 {
        let g = Arc::new(make_grid(2, &[(0.0, 2.0)], &[res]).unwrap());
        let f = ScalarField::from_fn(g.clone(), |x| x[0].sin()).unwrap();
        let grad = fd_gradient(&f).unwrap();
        (0..g.len())
            .filter(|&i| {
                let idx = g.multi_index(i);
                idx[0] > 0 && idx[0] + 1 < res
            })
            .map(|i| (grad.at(i)[0] - g.point(i)[0].cos()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn sine_gradient_second_order() {
        let coarse = sine_error(33);
        let fine = sine_error(65);
        let ratio = coarse / fine;
        assert!((4.0 / 1.2..=4.0 * 1.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn trapezoid_cases() {
        let ones = ScalarField::from_fn(unit(3), |_| 1.0).unwrap();
        assert_eq!(integrate(&ones).unwrap(), 1.0);
        let bilinear = ScalarField::from_fn(unit(3), |x| x[0] * x[1]).unwrap();
        assert!((integrate(&bilinear).unwrap() - 0.25).abs() < 1e-15);
        let sq = ScalarField::from_fn(unit(101), |x| x[0] * x[0]).unwrap();
        assert!((integrate(&sq).unwrap() - 1.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn masking_propagates_and_reports_volume() {
        let g = unit(5);
        let f = ScalarField::from_partial_fn(g.clone(), |x| {
            (x[0] > 0.0 || x[1] > 0.0).then_some(1.0)
        })
        .unwrap();
        let q = integrate_masked(&f).unwrap();
        assert!((q.excised_volume - 0.125 * 0.125).abs() < 1e-15);
        assert!((q.value + q.excised_volume - 1.0).abs() < 1e-15);
        let grad = fd_gradient(&f).unwrap();
        assert!(grad.is_masked(0));
        assert!(grad.is_masked(1));
        assert!(!grad.is_masked(g.flat_index(&[3, 3])));

        let all = ScalarField::from_partial_fn(g, |_| None).unwrap();
        assert_eq!(integrate(&all), Err(Error::AllMasked));
    }

    #[test]
    fn non_finite_needs_mask() {
        let g = unit(3);
        assert!(ScalarField::new(g.clone(), vec![f64::NAN; 9], None).is_err());
        assert!(ScalarField::new(g, vec![f64::NAN; 9], Some(vec![true; 9])).is_ok());
    }

    #[test]
    fn csv_layout() {
        let g = unit(3);
        let f = ScalarField::from_fn(g, |x| x[0] + x[1]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,x2,value");
        assert_eq!(lines.len(), 10);
        let last: Vec<f64> = lines[9].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(last, vec![1.0, 1.0, 2.0]);
    }
}
