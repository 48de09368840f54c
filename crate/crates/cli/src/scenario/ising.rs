//! Transverse-field Ising quench from free-fermion mode data.

use quenchlab_core::ising_chain::{
    build_modes, ed_oracle_g, ising_film, ising_g_exact, work_density, IsingChain, CRITICAL_FIELD, ED_MAX_LENGTH,
};
use quenchlab_core::numerics::linspace;
use quenchlab_core::quench_ground::{fit_edge, susceptibility_at, EdgeMode};
use serde::Deserialize;
use serde_json::json;

use super::{Invariant, Parse, ScenarioOutput};
use crate::config::Grid;
use crate::emit::{json_f64, Table};
use crate::error::{CliError, Context, Result};

const ORACLE_TOL: f64 = 1e-8;
const FILM_TOL: f64 = 1e-8;
const DEFAULT_DENSITY_POINTS: usize = 2001;
const W_MAX_PER_MODE: f64 = 4.0;
const ETA_PER_SPAN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EdgeParam {
    /// Fit threshold, exponent and amplitude.
    Measure,
    /// Hold `q` and `a` fixed and fit the amplitude only.
    Verify { q: f64, a: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityParams {
    /// Gaussian broadening; defaults to a thousandth of the grid span.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Upper end of the `W_irr` grid; defaults to four times the largest
    /// quasiparticle energy.
    #[serde(default)]
    pub w_max: Option<f64>,
    #[serde(default = "default_density_points")]
    pub points: usize,
    #[serde(default)]
    pub edge: Option<EdgeParam>,
    #[serde(default)]
    pub edge_window: Option<(f64, f64)>,
}

fn default_density_points() -> usize {
    DEFAULT_DENSITY_POINTS
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub length: usize,
    pub lambda0: f64,
    pub lambda_f: f64,
    #[serde(default)]
    pub u_grid: Option<Grid>,
    #[serde(default)]
    pub density: Option<DensityParams>,
    /// Compare against the spin-chain oracle; defaults to on when the chain
    /// is small enough.
    #[serde(default)]
    pub oracle: Option<bool>,
    #[serde(default = "yes")]
    pub susceptibility: bool,
}

fn yes() -> bool {
    true
}

impl Parse for Params {
    fn validate(&self, prefix: &str) -> Result<()> {
        if self.length < 4 || self.length % 2 != 0 {
            return Err(CliError::config(
                format!("{prefix}.length"),
                format!("must be even and at least 4, got {}", self.length),
            ));
        }
        if self.oracle == Some(true) && self.length > ED_MAX_LENGTH {
            return Err(CliError::config(
                format!("{prefix}.oracle"),
                format!("oracle needs length <= {ED_MAX_LENGTH}"),
            ));
        }
        if let Some(g) = &self.u_grid {
            g.values(&format!("{prefix}.u_grid"))?;
        }
        if let Some(d) = &self.density {
            if d.eta.is_some_and(|e| !(e > 0.0 && e.is_finite())) || d.points < 2 {
                return Err(CliError::config(
                    format!("{prefix}.density"),
                    "eta must be positive and points at least 2",
                ));
            }
        }
        Ok(())
    }
}

pub fn run(p: &Params) -> Result<ScenarioOutput> {
    let modes = build_modes(p.length, p.lambda0, p.lambda_f).context("mode data")?;
    let mut out = ScenarioOutput::default();

    let mut table = Table::new(&["k", "pre_energy", "post_energy", "pair_energy", "pair_probability"]);
    let pair_e = modes.pair_energies();
    let pair_p = modes.pair_probabilities();
    for i in 0..modes.momenta.len() {
        table.push(vec![
            modes.momenta[i].into(),
            modes.pre_energies[i].into(),
            modes.post_energies[i].into(),
            pair_e[i].into(),
            pair_p[i].into(),
        ]);
    }
    out.csv("modes.csv", table);

    let fidelity = modes.fidelity();
    out.set("length", p.length as f64);
    out.set("fidelity", fidelity);
    out.set("ln_fidelity", modes.ln_fidelity());
    out.set("ground_shift", modes.ground_shift);
    out.set("mass", modes.mass());
    out.set("mean_irreversible_work", modes.mean_irreversible_work());
    out.set("irreversible_work_variance", modes.irreversible_work_variance());

    if modes.angle_diffs.iter().any(|d| *d != 0.0) {
        let film = ising_film(&modes).context("film")?;
        let mut table = Table::new(&["r", "z", "f_total", "casimir"]);
        for i in 0..film.r_grid.len() {
            table.push(vec![
                film.r_grid[i].into(),
                film.z_samples[i].into(),
                film.f_total[i].into(),
                film.casimir[i].into(),
            ]);
        }
        out.csv("film.csv", table);
        out.set("surface", film.surface);
        out.set("bulk", film.bulk);
        out.check(Invariant::within(
            "film_surface_identity",
            (-2.0 * film.transverse_cells * film.surface - 2.0 * modes.ln_fidelity()).exp_m1(),
            FILM_TOL,
        ));
    } else {
        out.set("surface", 0.0);
    }

    if p.susceptibility && (p.lambda_f - CRITICAL_FIELD).abs() > 1e-9 {
        let chain = IsingChain { length: p.length };
        for order in [1usize, 2] {
            let chi = susceptibility_at(&chain, p.lambda0, p.lambda_f, order, CRITICAL_FIELD)
                .context("susceptibility")?;
            out.set(&format!("chi{order}"), chi);
        }
    }

    let oracle = p.oracle.unwrap_or(p.length <= ED_MAX_LENGTH);
    let u = match &p.u_grid {
        Some(g) => Some(g.values("parameters.u_grid")?),
        None if oracle => Some(linspace(-6.0, 6.0, 64)),
        None => None,
    };
    if let Some(u) = u {
        let g = ising_g_exact(&modes, &u);
        if p.u_grid.is_some() {
            let mut table = Table::new(&["u", "re", "im"]);
            for (ui, z) in u.iter().zip(&g) {
                table.push(vec![(*ui).into(), z.re.into(), z.im.into()]);
            }
            out.csv("characteristic_function.csv", table);
        }
        if oracle {
            let ed = ed_oracle_g(p.length, p.lambda0, p.lambda_f, &u).context("spin-chain oracle")?;
            let err = g.iter().zip(&ed).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            out.set("oracle_max_error", err);
            out.check(Invariant::within("free_fermion_vs_ed", err, ORACLE_TOL));
        }
    }

    if let Some(dp) = &p.density {
        density(&modes, dp, &mut out)?;
    }
    Ok(out)
}

fn density(
    modes: &quenchlab_core::ising_chain::BogoliubovModeSet,
    dp: &DensityParams,
    out: &mut ScenarioOutput,
) -> Result<()> {
    let w_max = dp
        .w_max
        .unwrap_or_else(|| W_MAX_PER_MODE * modes.post_energies.iter().copied().fold(0.0, f64::max));
    if !(w_max > 0.0) {
        return Err(CliError::config("parameters.density.w_max", "must be positive"));
    }
    let w = linspace(0.0, w_max, dp.points);
    let eta = dp.eta.unwrap_or(ETA_PER_SPAN * w_max);
    let d = work_density(modes, eta, &w).context("work density")?;
    let mut table = Table::new(&["w", "density"]);
    for (wi, r) in d.w_grid.iter().zip(&d.density) {
        table.push(vec![(*wi).into(), (*r).into()]);
    }
    out.csv("work_density.csv", table);
    out.set("delta_weight", d.delta_weight);
    out.set("normalization_defect", d.normalization_defect());

    if let Some(edge) = dp.edge {
        let mode = match edge {
            EdgeParam::Measure => EdgeMode::Measure,
            EdgeParam::Verify { q, a } => EdgeMode::Verify { q, a },
        };
        let fit = fit_edge(&d, modes.mass(), mode, dp.edge_window).context("edge fit")?;
        let threshold = fit.threshold();
        out.json(
            "edge.json",
            json!({
                "amplitude": json_f64(fit.amplitude),
                "exponent": json_f64(fit.exponent),
                "mass": json_f64(fit.mass),
                "points": fit.points,
                "residual": json_f64(fit.residual),
                "threshold": json_f64(threshold),
                "threshold_multiplier": json_f64(fit.threshold_multiplier),
                "threshold_vs_m": json_f64(threshold - fit.mass),
                "threshold_vs_2m": json_f64(threshold - 2.0 * fit.mass),
                "weight": json_f64(fit.weight),
                "window": [fit.window.0, fit.window.1],
            }),
        );
        out.set("edge_exponent", fit.exponent);
        out.set("edge_threshold_multiplier", fit.threshold_multiplier);
    }
    Ok(())
}
