use serde::{Deserialize, Serialize};

use super::GridDomain;

/// Mask of grid points within distance `delta` of any of `points`.
pub fn mask_near_points(grid: &GridDomain, points: &[Vec<f64>], delta: f64) -> Vec<bool> {
    let mut mask = vec![false; grid.len()];
    if points.is_empty() || delta <= 0.0 {
        return mask;
    }
    let n = grid.dim();
    let d2 = delta * delta;
    for p in points {
        // only visit the bounding box of the excision ball
        let lo: Vec<usize> = (0..n)
            .map(|k| {
                let t = ((p[k] - delta - grid.lower()[k]) / grid.spacing()[k]).floor();
                t.clamp(0.0, (grid.resolution()[k] - 1) as f64) as usize
            })
            .collect();
        let hi: Vec<usize> = (0..n)
            .map(|k| {
                let t = ((p[k] + delta - grid.lower()[k]) / grid.spacing()[k]).ceil();
                t.clamp(0.0, (grid.resolution()[k] - 1) as f64) as usize
            })
            .collect();
        let mut idx = lo.clone();
        loop {
            let flat = grid.flat_index(&idx);
            let x = grid.point(flat);
            let r2: f64 = x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
            if r2 < d2 {
                mask[flat] = true;
            }
            if !advance(&mut idx, &lo, &hi) {
                break;
            }
        }
    }
    mask
}

/// Odometer step over the index box `lo..=hi`; false once exhausted.
fn advance(idx: &mut [usize], lo: &[usize], hi: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        if idx[k] < hi[k] {
            idx[k] += 1;
            return true;
        }
        idx[k] = lo[k];
    }
    false
}

/// Qualitative behaviour of an excised integral as the excision radius halves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendKind {
    /// Increments shrink geometrically: the integral converges.
    Stable,
    /// Increments stay constant: logarithmic divergence.
    LogGrowth,
    /// Increments grow: power-law divergence.
    PowerGrowth,
}

/// Values of an excised integral over a halving schedule of radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcisionTrend {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub increments: Vec<f64>,
    /// Mean ratio of consecutive increments.
    pub increment_ratio: f64,
    pub kind: TrendKind,
    /// Largest relative change between consecutive values.
    pub max_relative_change: f64,
}

/// Increment ratios at or below this mark a convergent trend.
pub const STABLE_RATIO: f64 = 0.95;
/// Increment ratios above this mark a power-law divergence.
pub const POWER_RATIO: f64 = 1.05;

impl ExcisionTrend {
    /// `deltas` must be strictly decreasing.
    pub fn from_values(deltas: Vec<f64>, values: Vec<f64>) -> Self {
        let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let ratios: Vec<f64> = increments
            .windows(2)
            .filter(|w| w[0].abs() > 0.0)
            .map(|w| w[1] / w[0])
            .collect();
        let max_relative_change = values
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() / w[1].abs().max(w[0].abs()).max(1e-300))
            .fold(0.0, f64::max);
        let increment_ratio = if ratios.is_empty() {
            0.0
        } else {
            ratios.iter().sum::<f64>() / ratios.len() as f64
        };
        let kind = if increments.iter().all(|d| d.abs() <= 1e-12 * values[0].abs().max(1.0))
            || increment_ratio <= STABLE_RATIO
        {
            TrendKind::Stable
        } else if increment_ratio <= POWER_RATIO {
            TrendKind::LogGrowth
        } else {
            TrendKind::PowerGrowth
        };
        Self {
            deltas,
            values,
            increments,
            increment_ratio,
            kind,
            max_relative_change,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorgrid::make_grid;

    #[test]
    fn mask_counts_ball_points() {
        let g = make_grid(2, &[(-1.0, 1.0)], &[21]).unwrap();
        let m = mask_near_points(&g, &[vec![0.0, 0.0]], 0.12);
        // points at distance 0 and 0.1 (4 of them) lie inside 0.12
        assert_eq!(m.iter().filter(|&&b| b).count(), 5);
        let corner = mask_near_points(&g, &[vec![1.0, 1.0]], 0.25);
        assert_eq!(corner.iter().filter(|&&b| b).count(), 8);
    }

    #[test]
    fn trend_classification() {
        let geometric = ExcisionTrend::from_values(vec![0.4, 0.2, 0.1, 0.05], vec![1.0, 1.5, 1.75, 1.875]);
        assert_eq!(geometric.kind, TrendKind::Stable);
        assert!((geometric.increment_ratio - 0.5).abs() < 1e-12);
        let log = ExcisionTrend::from_values(vec![0.4, 0.2, 0.1], vec![1.0, 1.7, 2.4]);
        assert_eq!(log.kind, TrendKind::LogGrowth);
        let power = ExcisionTrend::from_values(vec![0.4, 0.2, 0.1], vec![1.0, 2.0, 4.0]);
        assert_eq!(power.kind, TrendKind::PowerGrowth);
        let flat = ExcisionTrend::from_values(vec![0.4, 0.2, 0.1], vec![3.0, 3.0, 3.0]);
        assert_eq!(flat.kind, TrendKind::Stable);
    }
}
