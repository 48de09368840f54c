//! Localized scatterer in a free Fermi gas: Anderson overlap, persistence
//! amplitude, linked-cluster term and absorption spectrum.

use quenchlab_core::fermi_impurity::ed::{ed_persistence, ed_work_distribution, ED_MAX_LEVELS};
use quenchlab_core::fermi_impurity::{
    absorption_spectrum, anderson_overlap, broadened_lehmann, build_impurity_model, fit_absorption_edge,
    persistence_determinant, persistence_time_grid, strength_for_coupling, work_cumulants, Dispersion,
};
use quenchlab_core::spectral_core::{cumulants, Beta};
use serde::Deserialize;
use serde_json::json;

use super::{Invariant, Parse, ScenarioOutput};
use crate::config::Grid;
use crate::emit::{json_f64, json_opt, Table};
use crate::error::{CliError, Context, Result};

const ED_TOL: f64 = 1e-9;
const LEHMANN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    /// Width of the Gaussian time window.
    pub eta: f64,
    /// Window value at the end of the time grid.
    #[serde(default = "default_leak")]
    pub leak: f64,
    pub detuning: Grid,
    #[serde(default)]
    pub edge_window: Option<(f64, f64)>,
}

fn default_leak() -> f64 {
    1e-12
}

fn default_dispersion() -> Dispersion {
    Dispersion::Linear { spacing: 1.0 }
}

fn ground_state() -> Beta {
    Beta::GroundState
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub n_particles: usize,
    /// Number of levels; defaults to `2 n_particles`.
    #[serde(default)]
    pub n_levels: Option<usize>,
    #[serde(default = "default_dispersion")]
    pub dispersion: Dispersion,
    /// Dimensionless `ρ_F v`. Exactly one of this and `potential_strength`.
    #[serde(default)]
    pub coupling: Option<f64>,
    #[serde(default)]
    pub potential_strength: Option<f64>,
    #[serde(default = "ground_state")]
    pub beta: Beta,
    #[serde(default)]
    pub spectrum: Option<SpectrumParams>,
}

impl Params {
    pub fn n_levels(&self) -> usize {
        self.n_levels.unwrap_or(2 * self.n_particles)
    }
}

impl Parse for Params {
    fn validate(&self, prefix: &str) -> Result<()> {
        if self.n_particles == 0 || self.n_particles > self.n_levels() {
            return Err(CliError::config(
                format!("{prefix}.n_particles"),
                "must be positive and at most n_levels",
            ));
        }
        match (self.coupling, self.potential_strength) {
            (Some(c), None) | (None, Some(c)) if c.is_finite() => {}
            (None, None) => return Err(CliError::config(prefix, "missing field `coupling` or `potential_strength`")),
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    format!("{prefix}.potential_strength"),
                    "give either coupling or potential_strength, not both",
                ))
            }
            _ => return Err(CliError::config(format!("{prefix}.coupling"), "must be finite")),
        }
        if let Some(s) = &self.spectrum {
            let path = format!("{prefix}.spectrum");
            if !(s.eta > 0.0 && s.eta.is_finite()) || !(s.leak > 0.0 && s.leak < 1.0) {
                return Err(CliError::config(path, "eta must be positive and leak in (0, 1)"));
            }
            s.detuning.values(&format!("{path}.detuning"))?;
        }
        Ok(())
    }
}

pub fn run(p: &Params) -> Result<ScenarioOutput> {
    let (m, n) = (p.n_levels(), p.n_particles);
    let v = match (p.coupling, p.potential_strength) {
        (Some(c), _) => strength_for_coupling(m, n, p.dispersion, c).context("coupling")?,
        (_, Some(v)) => v,
        _ => unreachable!("validated"),
    };
    let model = build_impurity_model(m, n, p.dispersion, v).context("impurity model")?;
    let mut out = ScenarioOutput::default();
    let overlap = anderson_overlap(&model);
    let [k1, k2, k3] = work_cumulants(&model);
    out.set("n_particles", n as f64);
    out.set("n_levels", m as f64);
    out.set("potential_strength", v);
    out.set("overlap", overlap);
    out.set("phase_shift", model.phase_shift);
    out.set("eigenphase_shift", model.eigenphase_shift);
    out.set("alpha_oc", model.alpha_oc());
    out.set("ground_shift", model.ground_shift());
    out.set("fermi_density", model.fermi_density());
    out.json(
        "model.json",
        json!({
            "alpha_oc": json_f64(model.alpha_oc()),
            "bandwidth": json_f64(model.bandwidth()),
            "eigenphase_shift": json_f64(model.eigenphase_shift),
            "fermi_density": json_f64(model.fermi_density()),
            "fermi_energy": json_f64(model.fermi_energy()),
            "ground_shift": json_f64(model.ground_shift()),
            "n_levels": m,
            "n_particles": n,
            "overlap": json_f64(overlap),
            "phase_shift": json_f64(model.phase_shift),
            "potential_strength": json_f64(v),
            "work_cumulants": [k1, k2, k3],
        }),
    );

    let small = m <= ED_MAX_LEVELS;
    let zero_t = matches!(p.beta, Beta::GroundState);
    if small && zero_t {
        let d = ed_work_distribution(&model, Beta::GroundState).context("Fock-space oracle")?;
        out.check(Invariant::within(
            "overlap_vs_adiabatic_weight",
            overlap * overlap - d.adiabatic_weight(),
            ED_TOL,
        ));
        let ed = cumulants(&d, 3).context("oracle cumulants")?;
        let err = ed
            .iter()
            .zip([k1, k2, k3])
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max);
        out.check(Invariant::within("work_cumulants_vs_ed", err, ED_TOL));
    }

    if let Some(sp) = &p.spectrum {
        let t = persistence_time_grid(&model, sp.eta, sp.leak).context("time grid")?;
        let series = persistence_determinant(&model, &t, p.beta).context("persistence amplitude")?;
        let mut table = Table::new(&["t", "nu_re", "nu_im", "lambda2_re", "lambda2_im"]);
        for i in 0..t.len() {
            table.push(vec![
                t[i].into(),
                series.nu[i].re.into(),
                series.nu[i].im.into(),
                series.lambda2[i].re.into(),
                series.lambda2[i].im.into(),
            ]);
        }
        out.csv("persistence.csv", table);
        let max_abs = series.nu.iter().map(|z| z.norm()).fold(0.0, f64::max);
        out.check(Invariant::at_most("persistence_bounded", max_abs, 1.0, 1e-9));

        let x = sp.detuning.values("parameters.spectrum.detuning")?;
        let spec = absorption_spectrum(&series, &x, sp.eta).context("absorption spectrum")?;
        let mut table = Table::new(&["detuning", "absorption"]);
        for (xi, a) in x.iter().zip(&spec.a_values) {
            table.push(vec![(*xi).into(), (*a).into()]);
        }
        out.csv("absorption.csv", table);

        let edge = match sp.edge_window {
            Some(w) => Some(fit_absorption_edge(&spec, w).context("edge fit")?.slope),
            None => None,
        };
        out.json(
            "linked_cluster.json",
            json!({
                "edge_exponent": json_opt(edge),
                "fitted_alpha": json_opt(series.fitted_alpha),
                "g": json_opt(series.coupling),
                "sum_rule": json_f64(spec.sum_rule),
                "tau0": json_opt(series.tau0),
                "threshold": json_f64(spec.threshold),
                "time_cutoff": json_f64(spec.time_cutoff),
                "window_width": json_f64(spec.window_width),
            }),
        );
        out.set("sum_rule", spec.sum_rule);
        for (k, val) in [("g", series.coupling), ("fitted_alpha", series.fitted_alpha), ("edge_exponent", edge)] {
            if let Some(val) = val {
                out.set(k, val);
            }
        }

        if small {
            let ed = ed_persistence(&model, &t, p.beta).context("Fock-space oracle")?;
            let err = series.nu.iter().zip(&ed).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            out.check(Invariant::within("determinant_vs_ed", err, ED_TOL));
            if zero_t {
                let d = ed_work_distribution(&model, Beta::GroundState).context("Fock-space oracle")?;
                let lehmann = broadened_lehmann(&d, &x, sp.eta);
                let err = spec
                    .a_values
                    .iter()
                    .zip(&lehmann)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
                    / (2.0 * std::f64::consts::PI);
                out.check(Invariant::within("lehmann_identity", err, LEHMANN_TOL));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn small_model_runs_every_oracle() {
        let p = Params::parse(
            json!({"n_particles": 3, "n_levels": 6, "potential_strength": 1.9,
                   "spectrum": {"eta": 0.3, "detuning": {"start": -2.0, "end": 12.0, "points": 141}}}),
            "parameters",
        )
        .unwrap();
        let out = run(&p).unwrap();
        let names: Vec<&str> = out.invariants.iter().map(|i| i.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "overlap_vs_adiabatic_weight",
                "work_cumulants_vs_ed",
                "persistence_bounded",
                "determinant_vs_ed",
                "lehmann_identity"
            ]
        );
        for inv in &out.invariants {
            assert!(inv.passed, "{inv:?}");
        }
    }

    #[test]
    fn finite_temperature_oracle() {
        let p = Params::parse(
            json!({"n_particles": 3, "n_levels": 6, "potential_strength": -1.0, "beta": 2.0,
                   "spectrum": {"eta": 0.5, "detuning": {"start": -5.0, "end": 5.0, "points": 11}}}),
            "parameters",
        )
        .unwrap();
        let out = run(&p).unwrap();
        assert!(out.invariants.iter().any(|i| i.name == "determinant_vs_ed" && i.passed));
    }

    #[test]
    fn strength_must_be_given_once() {
        let none = Params::parse(json!({"n_particles": 3}), "parameters").unwrap_err();
        assert!(none.to_string().contains("coupling"));
        let both = Params::parse(
            json!({"n_particles": 3, "coupling": 0.1, "potential_strength": 1.0}),
            "parameters",
        )
        .unwrap_err();
        assert!(both.to_string().contains("potential_strength"));
    }

    #[test]
    fn dispersion_is_strict() {
        let err = Params::parse(
            json!({"n_particles": 3, "coupling": 0.1, "dispersion": {"kind": "linear", "spacing": 1.0, "gap": 2}}),
            "parameters",
        )
        .unwrap_err();
        assert!(err.to_string().contains("gap"), "{err}");
    }
}
