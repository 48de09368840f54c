use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

const CONCAVITY_TOL: f64 = 1e-9;

/// Rate-function value with an explicit `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateValue {
    Finite(f64),
    Infinite,
}

impl RateValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            RateValue::Finite(v) => Some(v),
            RateValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, RateValue::Infinite)
    }

    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl Serialize for RateValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RateValue::Finite(v) => s.serialize_f64(*v),
            RateValue::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LegendreTransform {
    pub rate: Vec<RateValue>,
    /// Maximizing `R` per `w`.
    pub argmax: Vec<f64>,
    /// The supremum was attained at an end of the `R` grid, so the value is
    /// only a lower bound.
    pub boundary: Vec<bool>,
}

/// Checks that `f` is concave on a possibly nonuniform grid through its
/// divided differences.
pub fn check_concave(r_grid: &[f64], f: &[f64]) -> Result<()> {
    if r_grid.len() != f.len() {
        return Err(Error::invalid("grid and samples differ in length"));
    }
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("R grid must be strictly ascending"));
    }
    let slopes: Vec<f64> = (0..f.len().saturating_sub(1))
        .map(|i| (f[i + 1] - f[i]) / (r_grid[i + 1] - r_grid[i]))
        .collect();
    for i in 1..slopes.len() {
        let jump = slopes[i] - slopes[i - 1];
        if jump > CONCAVITY_TOL * slopes[i - 1].abs().max(1.0) {
            return Err(Error::NonConcaveInput {
                r: r_grid[i],
                second_difference: jump,
            });
        }
    }
    Ok(())
}

/// `I(w) = sup_R [f_ex(R) - R w]` by direct scan over the `R` grid, with
/// `I(w < 0) = +∞`.
pub fn legendre_fenchel(r_grid: &[f64], f_ex: &[f64], w_grid: &[f64]) -> Result<LegendreTransform> {
    check_concave(r_grid, f_ex)?;
    let last = r_grid.len() - 1;
    let rows: Vec<(RateValue, f64, bool)> = w_grid
        .par_iter()
        .map(|&w| {
            if w < 0.0 {
                return (RateValue::Infinite, f64::NAN, false);
            }
            let (idx, best) = f_ex
                .iter()
                .zip(r_grid)
                .map(|(f, r)| f - r * w)
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            (RateValue::Finite(best), r_grid[idx], idx == 0 || idx == last)
        })
        .collect();
    Ok(LegendreTransform {
        rate: rows.iter().map(|r| r.0).collect(),
        argmax: rows.iter().map(|r| r.1).collect(),
        boundary: rows.iter().map(|r| r.2).collect(),
    })
}

/// `f(R) = inf_w [I(w) + R w]` over the finite samples; the inverse of
/// [`legendre_fenchel`] on concave inputs.
pub fn legendre_fenchel_inverse(w_grid: &[f64], rate: &[RateValue], r_grid: &[f64]) -> Vec<f64> {
    r_grid
        .par_iter()
        .map(|&r| {
            w_grid
                .iter()
                .zip(rate)
                .filter_map(|(w, i)| i.finite().map(|v| v + r * w))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}
