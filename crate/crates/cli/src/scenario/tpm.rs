//! Finite-dimensional quench: TPM work distribution, characteristic
//! function, entropy production and the imaginary-time film.

use quenchlab_core::quench_ground::{default_film_grid, film_partition_function, ground_fidelity, reachable_gap};
use quenchlab_core::spectral_core::random::{random_hermitian, random_unitary};
use quenchlab_core::spectral_core::{
    characteristic_function, characteristic_function_trace, eigendecompose, entropy_production,
    tpm_distribution_with_cap, Beta, CMatrix, MatrixJson, QuenchSpec, DEFAULT_DIMENSION_CAP,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use super::{identity, Invariant, Parse, ScenarioOutput};
use crate::config::Grid;
use crate::emit::{json_f64, json_vec, Cell, Table};
use crate::error::{CliError, Context, Result};

const NORMALIZATION_TOL: f64 = 1e-10;
const ROUTE_TOL: f64 = 1e-10;
const JARZYNSKI_TOL: f64 = 1e-9;
const FILM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomMatrix {
    pub random_dim: usize,
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged, expecting = "a matrix {\"dim\", \"re\", \"im\"} or {\"random_dim\", \"scale\"}")]
pub enum MatrixSource {
    Explicit(MatrixJson),
    Random(RandomMatrix),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomTag {
    Random,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged, expecting = "\"random\" or a unitary matrix {\"dim\", \"re\", \"im\"}")]
pub enum UnitarySource {
    Random(RandomTag),
    Explicit(MatrixJson),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub h0: MatrixSource,
    pub hf: MatrixSource,
    /// A number, or `"inf"` for the ground state.
    pub beta: Beta,
    #[serde(default)]
    pub unitary: Option<UnitarySource>,
    #[serde(default)]
    pub u_grid: Option<Grid>,
    #[serde(default = "default_cap")]
    pub dimension_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_DIMENSION_CAP
}

impl Parse for Params {
    fn validate(&self, prefix: &str) -> Result<()> {
        for (key, m) in [("h0", &self.h0), ("hf", &self.hf)] {
            if let MatrixSource::Random(r) = m {
                if r.random_dim == 0 || !(r.scale > 0.0 && r.scale.is_finite()) {
                    return Err(CliError::config(
                        format!("{prefix}.{key}"),
                        "random_dim must be positive and scale finite and positive",
                    ));
                }
            }
        }
        if let Some(g) = &self.u_grid {
            g.values(&format!("{prefix}.u_grid"))?;
        }
        Ok(())
    }
}

fn matrix(src: &MatrixSource, rng: &mut ChaCha8Rng, what: &str) -> Result<CMatrix> {
    match src {
        MatrixSource::Explicit(m) => m.to_matrix().context(what),
        MatrixSource::Random(r) => Ok(random_hermitian(r.random_dim, r.scale, rng)),
    }
}

/// Builds the quench; random inputs are drawn in the order h0, hf, unitary.
pub fn build_quench(p: &Params, seed: u64) -> Result<QuenchSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h0 = eigendecompose(matrix(&p.h0, &mut rng, "h0")?).context("h0")?;
    let hf = eigendecompose(matrix(&p.hf, &mut rng, "hf")?).context("hf")?;
    let u = match &p.unitary {
        None => None,
        Some(UnitarySource::Random(_)) => Some(random_unitary(h0.dim(), &mut rng)),
        Some(UnitarySource::Explicit(m)) => Some(m.to_matrix().context("unitary")?),
    };
    QuenchSpec::new(h0, hf, u, p.beta).context("quench")
}

pub fn run(p: &Params, seed: u64) -> Result<ScenarioOutput> {
    let q = build_quench(p, seed)?;
    let mut out = ScenarioOutput::default();
    let d = tpm_distribution_with_cap(&q, p.dimension_cap).context("work distribution")?;

    let mut table = Table::new(&["work", "probability"]);
    for a in &d.atoms {
        table.push(vec![a.work.into(), a.probability.into()]);
    }
    out.csv("work_distribution.csv", table);
    out.set("dim", q.dim() as f64);
    out.set("mean_work", d.mean());
    out.set("adiabatic_shift", d.adiabatic_shift);
    out.check(Invariant::within("normalization", d.total_probability() - 1.0, NORMALIZATION_TOL));

    if let Some(g) = &p.u_grid {
        let u = g.values("parameters.u_grid")?;
        let from_atoms = characteristic_function(&d, &u);
        let from_trace = characteristic_function_trace(&q, &u).context("characteristic function")?;
        let mut table = Table::new(&["u", "re", "im"]);
        for (ui, z) in u.iter().zip(&from_atoms) {
            table.push(vec![(*ui).into(), z.re.into(), z.im.into()]);
        }
        out.csv("characteristic_function.csv", table);
        let gap = from_atoms
            .iter()
            .zip(&from_trace)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        out.check(Invariant::within("characteristic_function_routes", gap, ROUTE_TOL));
    }

    match q.beta {
        Beta::Finite(b) if b > 0.0 => {
            if let Some(r) = identity(entropy_production(&q), &mut out, "entropy_identities", "entropy production")? {
                out.json(
                    "entropy.json",
                    json!({
                        "beta": b,
                        "mean_work": json_f64(r.mean_work),
                        "mean_work_trace": json_f64(r.mean_work_trace),
                        "delta_f": json_f64(r.delta_f),
                        "s_irr": json_f64(r.s_irr),
                        "relative_entropy": json_f64(r.relative_entropy),
                        "trace_distance": json_f64(r.trace_distance),
                        "trace_norm": json_f64(r.trace_norm),
                        "jarzynski_residual": json_f64(r.jarzynski_residual),
                        "cumulants": json_vec(&r.cumulants),
                    }),
                );
                out.set("s_irr", r.s_irr);
                out.set("delta_f", r.delta_f);
                out.check(Invariant::within("jarzynski", r.jarzynski_residual, JARZYNSKI_TOL));
                out.check(Invariant::within(
                    "relative_entropy_identity",
                    (r.s_irr - r.relative_entropy) / r.s_irr.abs().max(1.0),
                    1e-8,
                ));
                out.check(Invariant::holds("pinsker", r.pinsker_holds()));
            }
        }
        Beta::Finite(_) => {}
        Beta::GroundState => film(&q, &mut out)?,
    }
    Ok(out)
}

fn film(q: &QuenchSpec, out: &mut ScenarioOutput) -> Result<()> {
    let f = ground_fidelity(&q.initial, &q.final_).context("fidelity")?;
    out.set("fidelity", f);
    let gap = match reachable_gap(&q.initial, &q.final_) {
        Ok(g) => g,
        // Only the ground state is reachable; the film is trivial.
        Err(quenchlab_core::Error::NoContinuum) => return Ok(()),
        Err(e) => return Err(e).context("film"),
    };
    let film = film_partition_function(&q.initial, &q.final_, &default_film_grid(gap), 1.0).context("film")?;
    let mut table = Table::new(&["r", "z", "f_total", "casimir"]);
    for i in 0..film.r_grid.len() {
        table.push(vec![
            Cell::from(film.r_grid[i]),
            film.z_samples[i].into(),
            film.f_total[i].into(),
            film.casimir[i].into(),
        ]);
    }
    out.csv("film.csv", table);
    out.set("surface", film.surface);
    out.set("bulk", film.bulk);
    // Relative, since both sides vanish exponentially in the system size.
    let log_gap = -2.0 * film.transverse_cells * film.surface - 2.0 * f.ln();
    out.check(Invariant::within("film_surface_identity", log_gap.exp_m1(), FILM_TOL));
    Ok(())
}
