use serde::Serialize;

use super::legendre::{legendre_fenchel, RateValue};
use super::mgf::{excess_free_energy, MomentGenerating};
use crate::error::{Error, Result};
use crate::numerics::{geomspace, interpolate, richardson_first};

#[derive(Debug, Clone, Serialize)]
pub struct RateConfig {
    /// Intensive work values `w = W_irr / N` at which `I` is wanted.
    pub w_grid: Vec<f64>,
    /// Points per sign of `R`.
    pub r_points: usize,
    /// Geometric span of `|R|` in units of the inverse energy scale.
    pub r_span: (f64, f64),
    pub max_extensions: usize,
}

impl RateConfig {
    pub fn new(w_grid: Vec<f64>) -> Self {
        Self {
            w_grid,
            r_points: 200,
            r_span: (1e-3, 50.0),
            max_extensions: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFunctionCurve {
    pub r_grid: Vec<f64>,
    pub f_ex: Vec<f64>,
    pub w_grid: Vec<f64>,
    pub rate: Vec<RateValue>,
    /// Values whose supremum sat at an end of the `R` grid.
    pub boundary: Vec<bool>,
    pub n_cells: f64,
    pub mean_w: f64,
    /// `2 f_s`.
    pub surface_limit: f64,
    /// Numerical `f'_ex(0)`.
    pub slope_at_zero: f64,
    /// True when `R < 0` was not explored, so `I(w > w̄)` is unresolved.
    pub upper_branch_unresolved: bool,
}

impl RateFunctionCurve {
    /// Linear interpolation of the finite part of `I`.
    pub fn rate_at(&self, w: f64) -> Option<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .w_grid
            .iter()
            .zip(&self.rate)
            .filter_map(|(w, r)| r.finite().map(|v| (*w, v)))
            .unzip();
        interpolate(&x, &y, w)
    }

    pub fn rate_at_zero(&self) -> Option<f64> {
        self.rate_at(0.0)
    }

    /// Most negative second divided difference of the finite part of `I`.
    pub fn min_second_difference(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .w_grid
            .iter()
            .zip(&self.rate)
            .filter_map(|(w, r)| r.finite().map(|v| (*w, v)))
            .collect();
        pts.windows(3)
            .map(|p| {
                let s1 = (p[1].1 - p[0].1) / (p[1].0 - p[0].0);
                let s2 = (p[2].1 - p[1].1) / (p[2].0 - p[1].0);
                (s2 - s1) / (0.5 * (p[2].0 - p[0].0))
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_rate(&self) -> f64 {
        self.rate.iter().filter_map(|r| r.finite()).fold(f64::INFINITY, f64::min)
    }
}

fn build_grid(scale: f64, cfg: &RateConfig, pos_max: f64, neg_max: Option<f64>) -> Vec<f64> {
    let (lo, hi) = cfg.r_span;
    let ratio = lo / hi;
    let mut grid = Vec::with_capacity(2 * cfg.r_points + 1);
    if let Some(neg) = neg_max {
        let mut neg_side = geomspace(neg * ratio / scale, neg / scale, cfg.r_points);
        neg_side.reverse();
        grid.extend(neg_side.into_iter().map(|r| -r));
    }
    grid.push(0.0);
    grid.extend(geomspace(pos_max * ratio / scale, pos_max / scale, cfg.r_points));
    grid
}

/// `I(w)` for a ground-state quench, extending the `R` grid until no
/// interior `w > 0` has its supremum on the grid boundary.
pub fn rate_function<M: MomentGenerating + ?Sized>(source: &M, cfg: &RateConfig) -> Result<RateFunctionCurve> {
    if cfg.w_grid.is_empty() || cfg.r_points < 2 {
        return Err(Error::invalid("rate function needs a w grid and at least two R points"));
    }
    let n = source.n_cells();
    let scale = source.energy_scale();
    if !(scale.is_finite() && scale > 0.0) {
        // No irreversible work at all: deterministic W_irr = 0.
        return deterministic_curve(source, cfg);
    }
    let allow_negative = source.ln_mgf(-cfg.r_span.0 / scale).is_ok();
    let (_, hi) = cfg.r_span;
    let mut pos_max = hi;
    let mut neg_max = if allow_negative { Some(hi) } else { None };

    for attempt in 0..=cfg.max_extensions {
        let r_grid = build_grid(scale, cfg, pos_max, neg_max);
        let f_ex = match excess_free_energy(source, &r_grid) {
            Ok(f) => f,
            Err(Error::DivergentMgf { .. }) if neg_max.is_some() => {
                neg_max = neg_max.map(|v| v / 2.0).filter(|v| *v > 2.0 * cfg.r_span.0);
                continue;
            }
            Err(e) => return Err(e),
        };
        let lt = legendre_fenchel(&r_grid, &f_ex, &cfg.w_grid)?;
        let last = *r_grid.last().unwrap();
        let first = r_grid[0];
        let mut extend_pos = false;
        let mut extend_neg = false;
        for ((w, b), r) in cfg.w_grid.iter().zip(&lt.boundary).zip(&lt.argmax) {
            if *w > 0.0 && *b {
                if *r == last {
                    extend_pos = true;
                } else if *r == first && neg_max.is_some() {
                    extend_neg = true;
                }
            }
        }
        if (extend_pos || extend_neg) && attempt < cfg.max_extensions {
            if extend_pos {
                pos_max *= 2.0;
            }
            if extend_neg {
                neg_max = neg_max.map(|v| v * 2.0);
            }
            continue;
        }
        let h = 1e-4 / scale;
        let slope_at_zero = richardson_first(
            |r| -source.ln_mgf(r).unwrap_or(f64::NAN) / n,
            0.0,
            if allow_negative { h } else { h.min(1e-6) },
        );
        return Ok(RateFunctionCurve {
            r_grid,
            f_ex,
            w_grid: cfg.w_grid.clone(),
            rate: lt.rate,
            boundary: lt.boundary,
            n_cells: n,
            mean_w: source.mean_work() / n,
            surface_limit: source.surface_limit(),
            slope_at_zero,
            upper_branch_unresolved: neg_max.is_none(),
        });
    }
    unreachable!("loop returns on its final attempt")
}

fn deterministic_curve<M: MomentGenerating + ?Sized>(source: &M, cfg: &RateConfig) -> Result<RateFunctionCurve> {
    let r_grid = vec![0.0];
    let rate = cfg
        .w_grid
        .iter()
        .map(|w| if *w == 0.0 { RateValue::Finite(0.0) } else { RateValue::Infinite })
        .collect();
    Ok(RateFunctionCurve {
        r_grid,
        f_ex: vec![0.0],
        w_grid: cfg.w_grid.clone(),
        rate,
        boundary: vec![false; cfg.w_grid.len()],
        n_cells: source.n_cells(),
        mean_w: 0.0,
        surface_limit: 0.0,
        slope_at_zero: 0.0,
        upper_branch_unresolved: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising_chain::build_modes;
    use crate::large_dev::mgf::AtomicWork;
    use crate::numerics::linspace;

    #[test]
    fn two_atom_rate_function() {
        // Bernoulli on {0, 2} with p = 1/2, N = 1: I(w) = sup_R[f(R) - Rw].
        let src = AtomicWork::from_pairs(vec![(0.0, 0.5), (2.0, 0.5)], 1.0).unwrap();
        let cfg = RateConfig::new(linspace(0.0, 2.0, 41));
        let c = rate_function(&src, &cfg).unwrap();
        for (w, i) in c.w_grid.iter().zip(&c.rate) {
            let x = w / 2.0;
            // Cramér function of a fair coin scaled to {0, 2}.
            let exact = if x == 0.0 || x == 1.0 {
                2f64.ln()
            } else {
                x * x.ln() + (1.0 - x) * (1.0 - x).ln() + 2f64.ln()
            };
            assert!((i.as_f64() - exact).abs() < 2e-3, "w={w}: {} vs {exact}", i.as_f64());
        }
        assert!((c.mean_w - 1.0).abs() < 1e-14);
        assert!((c.slope_at_zero - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ising_curve_properties() {
        let m = build_modes(200, 1.5, 1.2).unwrap();
        let wbar = m.mean_irreversible_work() / 200.0;
        let mut w = linspace(0.0, 2.0 * wbar, 81);
        w.insert(0, -0.01);
        let c = rate_function(&m, &RateConfig::new(w)).unwrap();
        assert!(c.rate[0].is_infinite());
        assert!(c.min_rate() >= -1e-12);
        assert!(c.min_second_difference() >= -1e-9);
        assert!(c.rate_at(wbar).unwrap() < 1e-4);
        assert!((c.rate_at_zero().unwrap() - c.surface_limit).abs() < 1e-6 * c.surface_limit);
        assert!((c.slope_at_zero - wbar).abs() < 1e-6);
        assert!(c.f_ex.iter().zip(&c.r_grid).any(|(f, r)| *r == 0.0 && f.abs() < 1e-12));
    }

    #[test]
    fn deterministic_source() {
        let src = AtomicWork::from_pairs(vec![(0.0, 1.0)], 4.0).unwrap();
        let c = rate_function(&src, &RateConfig::new(vec![-1.0, 0.0, 0.5])).unwrap();
        assert!(c.rate[0].is_infinite());
        assert_eq!(c.rate[1], RateValue::Finite(0.0));
        assert!(c.rate[2].is_infinite());
    }
}
