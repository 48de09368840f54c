//! Large-deviation rate function of the intensive irreversible work for an
//! Ising quench.

use quenchlab_core::ising_chain::build_modes;
use quenchlab_core::large_dev::{binned_irreversible_work, rate_function, RateConfig, RateValue};
use quenchlab_core::numerics::linspace;
use serde::Deserialize;

use super::{Invariant, Parse, ScenarioOutput};
use crate::emit::{Cell, Table};
use crate::error::{CliError, Context, Result};

const CONVEXITY_TOL: f64 = 1e-7;
const SURFACE_TOL: f64 = 0.02;
const MEAN_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalParams {
    /// Bins per mean intensive work `w̄`.
    #[serde(default = "default_bins")]
    pub bins_per_mean: usize,
    /// Energy lattice steps per bin for the exact convolution.
    #[serde(default = "default_sub")]
    pub lattice_per_bin: usize,
}

fn default_bins() -> usize {
    20
}

fn default_sub() -> usize {
    20
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub length: usize,
    pub lambda0: f64,
    pub lambda_f: f64,
    /// `w` range in units of `w̄`.
    #[serde(default = "default_range")]
    pub w_range: (f64, f64),
    #[serde(default = "default_w_points")]
    pub w_points: usize,
    #[serde(default = "default_r_points")]
    pub r_points: usize,
    #[serde(default)]
    pub empirical: Option<EmpiricalParams>,
}

fn default_range() -> (f64, f64) {
    (-0.1, 1.5)
}

fn default_w_points() -> usize {
    161
}

fn default_r_points() -> usize {
    200
}

impl Parse for Params {
    fn validate(&self, prefix: &str) -> Result<()> {
        let (lo, hi) = self.w_range;
        if !(lo.is_finite() && hi.is_finite() && hi > lo.max(0.0)) {
            return Err(CliError::config(
                format!("{prefix}.w_range"),
                "need finite bounds with a positive upper end above the lower",
            ));
        }
        if self.w_points < 3 || self.r_points < 2 {
            return Err(CliError::config(
                format!("{prefix}.w_points"),
                "need at least 3 w points and 2 R points",
            ));
        }
        if let Some(e) = &self.empirical {
            if e.bins_per_mean == 0 || e.lattice_per_bin == 0 {
                return Err(CliError::config(format!("{prefix}.empirical"), "counts must be positive"));
            }
        }
        Ok(())
    }
}

fn rate_cell(r: RateValue) -> Cell {
    Cell::Float(r.as_f64())
}

pub fn run(p: &Params) -> Result<ScenarioOutput> {
    let modes = build_modes(p.length, p.lambda0, p.lambda_f).context("mode data")?;
    let mut out = ScenarioOutput::default();
    let n = modes.n_cells();
    let wbar = modes.mean_irreversible_work() / n;
    if !(wbar > 0.0) {
        return Err(CliError::config(
            "parameters.lambda_f",
            "quench produces no irreversible work; choose lambda_f != lambda0",
        ));
    }
    let mut w = linspace(p.w_range.0 * wbar, p.w_range.1 * wbar, p.w_points);
    for pin in [0.0, wbar] {
        if pin >= w[0] && pin <= *w.last().unwrap() && !w.iter().any(|x| (x - pin).abs() < 1e-12 * wbar) {
            w.push(pin);
        }
    }
    w.sort_by(f64::total_cmp);
    let mut cfg = RateConfig::new(w);
    cfg.r_points = p.r_points;
    let curve = rate_function(&modes, &cfg).context("rate function")?;

    let mut table = Table::new(&["w", "rate", "boundary"]);
    for i in 0..curve.w_grid.len() {
        table.push(vec![curve.w_grid[i].into(), rate_cell(curve.rate[i]), curve.boundary[i].into()]);
    }
    out.csv("rate_function.csv", table);
    let mut table = Table::new(&["r", "f_ex"]);
    for (r, f) in curve.r_grid.iter().zip(&curve.f_ex) {
        table.push(vec![(*r).into(), (*f).into()]);
    }
    out.csv("excess_free_energy.csv", table);

    out.set("mean_w", curve.mean_w);
    out.set("surface_limit", curve.surface_limit);
    out.set("slope_at_zero", curve.slope_at_zero);
    let i0 = curve.rate_at_zero();
    if let Some(v) = i0 {
        out.set("rate_at_zero", v);
    }

    let negatives: Vec<_> = curve.w_grid.iter().zip(&curve.rate).filter(|(w, _)| **w < 0.0).collect();
    if !negatives.is_empty() {
        out.check(Invariant::holds(
            "infinite_below_zero",
            negatives.iter().all(|(_, r)| r.is_infinite()),
        ));
    }
    out.check(Invariant::at_least_zero("nonnegative", curve.min_rate(), 1e-10));
    out.check(Invariant::at_least_zero("convex", curve.min_second_difference(), CONVEXITY_TOL));
    if let Some(at_mean) = curve.rate_at(curve.mean_w) {
        out.check(Invariant::within("zero_at_mean", at_mean, MEAN_TOL * curve.surface_limit.max(1e-12)));
    }
    if let Some(v) = i0 {
        out.check(Invariant::within(
            "surface_limit_at_zero",
            v / curve.surface_limit - 1.0,
            SURFACE_TOL,
        ));
    }

    if let Some(e) = &p.empirical {
        let width = wbar / e.bins_per_mean as f64;
        let binned = binned_irreversible_work(&modes, width, p.w_range.1 * wbar, width / e.lattice_per_bin as f64)
            .context("binned work")?;
        let mut table = Table::new(&["w", "probability", "empirical_rate", "rate"]);
        for (wc, prob) in binned.w_centers.iter().zip(&binned.probability) {
            let emp = if *prob > 0.0 { -prob.ln() / n } else { f64::INFINITY };
            table.push(vec![(*wc).into(), (*prob).into(), emp.into(), curve.rate_at(*wc).into()]);
        }
        out.csv("empirical_rate.csv", table);
    }
    Ok(out)
}
