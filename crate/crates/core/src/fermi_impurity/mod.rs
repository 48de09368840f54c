//! A static scatterer switched on in a free Fermi gas: Anderson overlap,
//! vacuum persistence amplitude, its second-order linked-cluster term and
//! the absorption spectrum.
//!
//! At zero temperature `ν(t)` is the complex conjugate of the work
//! characteristic function of the sudden local quench, so the absorption
//! spectrum is the work distribution up to a factor `2π`.

pub mod ed;
mod linked;
mod model;
mod persistence;
mod spectrum;

pub use linked::{
    fit_linked_cluster, linked_cluster_lambda2, linked_cluster_lambda2_quadrature, log_window, work_cumulants,
    LinkedClusterFit,
};
pub use model::{
    adiabatic_probability_scan, anderson_overlap, build_impurity_model, overlap_scaling, strength_for_coupling,
    AdiabaticScan, Dispersion, ImpurityModel, OverlapScan,
};
pub use persistence::{occupations, persistence_determinant, persistence_time_grid, PersistenceSeries};
pub use spectrum::{absorption_spectrum, broadened_lehmann, fit_absorption_edge, AbsorptionSpectrum};
