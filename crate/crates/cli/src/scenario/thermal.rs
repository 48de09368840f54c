//! Sudden quench of a Gibbs state along a linear family `A + λB`.

use quenchlab_core::ising_chain::{ising_dense_family, DENSE_MAX_LENGTH};
use quenchlab_core::spectral_core::random::random_hermitian;
use quenchlab_core::spectral_core::{
    entropy_production, small_quench_entropy_expansion, thermal_sudden_work, Beta, HamiltonianFamily, MatrixJson,
    QuenchSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use super::{identity, Invariant, Parse, ScenarioOutput};
use crate::emit::{json_f64, json_opt, Table};
use crate::error::{CliError, Context, Result};

const WORK_TOL: f64 = 1e-6;
const JARZYNSKI_TOL: f64 = 1e-9;
const ORDER_RANGE: (f64, f64) = (2.7, 3.3);

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyParams {
    /// Periodic transverse-field Ising chain on the full spin space.
    Ising { length: usize },
    Matrices { base: MatrixJson, coupling: MatrixJson },
    /// Two independent random Hermitian matrices drawn from the run seed.
    Random {
        dim: usize,
        #[serde(default = "unit")]
        scale: f64,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub family: FamilyParams,
    pub lambda0: f64,
    pub lambda_f: f64,
    pub beta: f64,
    /// Quench amplitudes for the small-quench entropy expansion.
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
}

impl Parse for Params {
    fn validate(&self, prefix: &str) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(CliError::config(format!("{prefix}.beta"), "must be finite and positive"));
        }
        match &self.family {
            FamilyParams::Ising { length } if *length < 2 || *length > DENSE_MAX_LENGTH => Err(CliError::config(
                format!("{prefix}.family.length"),
                format!("must be in [2, {DENSE_MAX_LENGTH}]"),
            )),
            FamilyParams::Random { dim, scale } if *dim == 0 || !(*scale > 0.0) => Err(CliError::config(
                format!("{prefix}.family"),
                "dim and scale must be positive",
            )),
            _ => Ok(()),
        }
    }
}

fn family(p: &FamilyParams, seed: u64) -> Result<HamiltonianFamily> {
    match p {
        FamilyParams::Ising { length } => ising_dense_family(*length).context("Ising family"),
        FamilyParams::Matrices { base, coupling } => {
            let a = base.to_matrix().context("family base")?;
            let b = coupling.to_matrix().context("family coupling")?;
            HamiltonianFamily::new(a, b).context("family")
        }
        FamilyParams::Random { dim, scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_hermitian(*dim, *scale, &mut rng);
            let b = random_hermitian(*dim, *scale, &mut rng);
            HamiltonianFamily::new(a, b).context("family")
        }
    }
}

pub fn run(p: &Params, seed: u64) -> Result<ScenarioOutput> {
    let fam = family(&p.family, seed)?;
    let mut out = ScenarioOutput::default();
    let beta = Beta::Finite(p.beta);
    let q = QuenchSpec::sudden(
        fam.at(p.lambda0).context("initial Hamiltonian")?,
        fam.at(p.lambda_f).context("final Hamiltonian")?,
        beta,
    )
    .context("quench")?;

    let work = identity(
        thermal_sudden_work(&fam, p.lambda0, p.lambda_f, p.beta),
        &mut out,
        "mean_work_two_routes",
        "thermal work",
    )?;
    let report = identity(entropy_production(&q), &mut out, "entropy_identities", "entropy production")?;

    if let Some(w) = &work {
        out.set("mean_work", w.lhs);
        out.check(Invariant::within(
            "mean_work_two_routes",
            (w.lhs - w.rhs) / w.lhs.abs().max(1.0),
            WORK_TOL,
        ));
    }
    if let Some(r) = &report {
        out.set("s_irr", r.s_irr);
        out.set("delta_f", r.delta_f);
        out.set("relative_entropy", r.relative_entropy);
        out.check(Invariant::within("jarzynski", r.jarzynski_residual, JARZYNSKI_TOL));
        out.check(Invariant::holds("pinsker", r.pinsker_holds()));
    }
    out.json(
        "thermal.json",
        json!({
            "beta": p.beta,
            "lambda0": p.lambda0,
            "lambda_f": p.lambda_f,
            "mean_work_tpm": json_opt(work.map(|w| w.lhs)),
            "mean_work_free_energy_slope": json_opt(work.map(|w| w.rhs)),
            "s_irr": json_opt(report.as_ref().map(|r| r.s_irr)),
            "delta_f": json_opt(report.as_ref().map(|r| r.delta_f)),
            "relative_entropy": json_opt(report.as_ref().map(|r| r.relative_entropy)),
            "trace_distance": json_opt(report.as_ref().map(|r| r.trace_distance)),
            "jarzynski_residual": json_opt(report.as_ref().map(|r| r.jarzynski_residual)),
        }),
    );

    if let Some(deltas) = &p.deltas {
        let exp = small_quench_entropy_expansion(&fam, p.lambda0, deltas, p.beta).context("entropy expansion")?;
        let mut table = Table::new(&["delta_lambda", "exact", "quadratic"]);
        for r in &exp.rows {
            table.push(vec![r.delta_lambda.into(), r.exact.into(), r.quadratic.into()]);
        }
        out.csv("entropy_expansion.csv", table);
        out.json(
            "entropy_expansion.json",
            json!({
                "free_energy_second_derivative": json_f64(exp.second_derivative),
                "residual_order": json_opt(exp.residual_order),
            }),
        );
        if let Some(order) = exp.residual_order {
            out.set("residual_order", order);
            out.check(Invariant::in_range("expansion_residual_order", order, ORDER_RANGE.0, ORDER_RANGE.1));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn ising_family_passes() {
        let p = Params::parse(
            json!({"family": {"kind": "ising", "length": 6}, "lambda0": 0.9, "lambda_f": 1.1, "beta": 2.0,
                   "deltas": [0.02, 0.04, 0.08, 0.16]}),
            "parameters",
        )
        .unwrap();
        let out = run(&p, 0).unwrap();
        for inv in &out.invariants {
            assert!(inv.passed, "{inv:?}");
        }
        assert!(out.summary.contains_key("residual_order"));
    }

    #[test]
    fn zero_beta_is_rejected() {
        let err = Params::parse(
            json!({"family": {"kind": "random", "dim": 3}, "lambda0": 0.0, "lambda_f": 1.0, "beta": 0.0}),
            "parameters",
        )
        .unwrap_err();
        assert!(err.to_string().contains("parameters.beta"));
    }
}
