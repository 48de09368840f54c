//! Ground-state sudden quenches seen as an imaginary-time film: fidelity,
//! vacuum persistence, the bulk/surface/Casimir split, generalized
//! susceptibilities and the lower edge of `P(W_irr)`.

mod edge;
mod fidelity;
mod film;
mod susceptibility;

pub use edge::{fit_edge, EdgeFit, EdgeMode, WorkDensity};
pub use fidelity::{ground_fidelity, vacuum_persistence, VacuumPersistence};
pub use film::{default_film_grid, film_partition_function, reachable_gap, FilmFreeEnergy};
pub use susceptibility::{
    fidelity_susceptibility, susceptibility_at, CriticalExponents, FamilySource, GroundStateSource, SusceptibilityReport,
    MAX_ORDER,
};
