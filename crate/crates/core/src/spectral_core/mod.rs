//! Exact-diagonalization engine for the two-point-measurement scheme.

mod entropy;
mod gibbs;
mod operator;
pub mod random;
mod thermal;
mod work;

pub use entropy::{entropy_production, EntropyReport};
pub use gibbs::{free_energy_difference, gibbs_state, Beta, GibbsEnsemble};
pub use operator::{
    eigendecompose, unitarity_deviation, CMatrix, HamiltonianFamily, HermitianOperator, MatrixJson,
};
pub use thermal::{
    equilibrium_free_energy, small_quench_entropy_expansion, sudden_entropy_production,
    thermal_sudden_work, EntropyExpansion, ExpansionRow, ThermalWork,
};
pub use work::{
    characteristic_function, characteristic_function_trace, cumulant_entropy_series, cumulants,
    tpm_distribution, tpm_distribution_with_cap, QuenchSpec, WorkAtom, WorkDistribution,
    CUMULANT_ORDER_CAP, DEFAULT_DIMENSION_CAP,
};
