use serde::Serialize;

use super::curve::RateFunctionCurve;
use crate::error::{Error, Result};
use crate::numerics::{interpolate, linspace};

const MIN_CURVES: usize = 3;
const MIN_XI: f64 = 1.0;
const COMMON_POINTS: usize = 200;

/// Rescaled curves `y(x) = (I(w) - 2f_s) ξ^d` against `x = w ξ^{d+1}` on a
/// common window.
#[derive(Debug, Clone, Serialize)]
pub struct CollapseReport {
    pub dimension: f64,
    /// Correlation lengths of the curves kept, in input order.
    pub xi: Vec<f64>,
    /// Input indices dropped by the `ξ ≥ 1` guard.
    pub excluded: Vec<usize>,
    pub x_window: (f64, f64),
    pub x: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    /// Sup-distance between each kept curve and the next one.
    pub consecutive_distances: Vec<f64>,
    pub max_distance: f64,
}

impl CollapseReport {
    pub fn distances_decreasing(&self) -> bool {
        self.consecutive_distances.windows(2).all(|w| w[1] < w[0])
    }
}

/// Collapses rate-function curves. The `x` window runs from 0 to the
/// smallest rescaled mean work (optionally capped by `x_max`), so only the
/// lower tail where the film picture applies is compared.
pub fn casimir_collapse(
    curves: &[(RateFunctionCurve, f64)],
    dimension: f64,
    x_max: Option<f64>,
) -> Result<CollapseReport> {
    if curves.len() < MIN_CURVES {
        return Err(Error::InsufficientCurves {
            got: curves.len(),
            required: MIN_CURVES,
        });
    }
    let mut excluded = Vec::new();
    let mut kept = Vec::new();
    for (i, (c, xi)) in curves.iter().enumerate() {
        if *xi >= MIN_XI && xi.is_finite() {
            kept.push((c, *xi));
        } else {
            excluded.push(i);
        }
    }
    if kept.len() < 2 {
        return Err(Error::InsufficientCurves {
            got: kept.len(),
            required: 2,
        });
    }
    let rescaled: Vec<(Vec<f64>, Vec<f64>)> = kept
        .iter()
        .map(|(c, xi)| {
            c.w_grid
                .iter()
                .zip(&c.rate)
                .zip(&c.boundary)
                .filter(|((w, r), b)| **w >= 0.0 && !r.is_infinite() && (!**b || **w == 0.0))
                .map(|((w, r), _)| {
                    (w * xi.powf(dimension + 1.0), (r.as_f64() - c.surface_limit) * xi.powf(dimension))
                })
                .unzip()
        })
        .collect();
    let x_hi = kept
        .iter()
        .zip(&rescaled)
        .map(|((c, xi), (x, _))| (c.mean_w * xi.powf(dimension + 1.0)).min(*x.last().unwrap_or(&0.0)))
        .fold(f64::INFINITY, f64::min)
        .min(x_max.unwrap_or(f64::INFINITY));
    let x_lo = rescaled
        .iter()
        .map(|(x, _)| x.first().copied().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    if !(x_hi > x_lo) {
        return Err(Error::invalid("rescaled curves share no common window"));
    }
    let x = linspace(x_lo, x_hi, COMMON_POINTS);
    let y: Vec<Vec<f64>> = rescaled
        .iter()
        .map(|(cx, cy)| x.iter().map(|&v| interpolate(cx, cy, v).unwrap_or(f64::NAN)).collect())
        .collect();
    let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let consecutive_distances: Vec<f64> = y.windows(2).map(|p| sup(&p[0], &p[1])).collect();
    let mut max_distance = 0.0f64;
    for i in 0..y.len() {
        for j in i + 1..y.len() {
            max_distance = max_distance.max(sup(&y[i], &y[j]));
        }
    }
    Ok(CollapseReport {
        dimension,
        xi: kept.iter().map(|(_, xi)| *xi).collect(),
        excluded,
        x_window: (x_lo, x_hi),
        x,
        y,
        consecutive_distances,
        max_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising_chain::build_modes;
    use crate::large_dev::curve::{rate_function, RateConfig};

    fn curve(lf: f64) -> (RateFunctionCurve, f64) {
        let m = build_modes(400, 1.5, lf).unwrap();
        let wbar = m.mean_irreversible_work() / 400.0;
        let c = rate_function(&m, &RateConfig::new(linspace(0.0, wbar, 101))).unwrap();
        (c, 1.0 / m.mass())
    }

    #[test]
    fn identical_curves_collapse_exactly() {
        let c = curve(1.2);
        let rep = casimir_collapse(&[c.clone(), c.clone(), c], 1.0, None).unwrap();
        assert_eq!(rep.max_distance, 0.0);
    }

    #[test]
    fn guards() {
        let c = curve(1.2);
        assert!(matches!(
            casimir_collapse(&[c.clone(), c.clone()], 1.0, None),
            Err(Error::InsufficientCurves { .. })
        ));
        let far = curve(3.0);
        let rep = casimir_collapse(&[c.clone(), c, far], 1.0, None).unwrap();
        assert_eq!(rep.excluded, vec![2]);
    }
}
