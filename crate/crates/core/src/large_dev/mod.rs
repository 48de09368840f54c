//! Large deviations of intensive irreversible work: excess free energy from
//! the moment generating function, the Legendre–Fenchel rate function, and
//! scaling collapse near criticality.

mod collapse;
mod curve;
mod empirical;
mod legendre;
mod mgf;

pub use collapse::{casimir_collapse, CollapseReport};
pub use curve::{rate_function, RateConfig, RateFunctionCurve};
pub use empirical::{binned_irreversible_work, BinnedWork};
pub use legendre::{check_concave, legendre_fenchel, legendre_fenchel_inverse, LegendreTransform, RateValue};
pub use mgf::{excess_free_energy, AtomicWork, DensityWork, MomentGenerating};
