mod functional;
mod linking;
mod search;

pub use functional::{cutoff, cutoff_derivative, ReducedEval, ReducedFunctional};
pub use linking::{
    verify_linking_geometry, Face, GeometryConstants, LinkingGeometry, LinkingReport, Sample,
};
pub use search::{
    default_seeds, embed_orbit, equation_residual, find_critical_point, minimax_estimate,
    nontriviality_check, phase_align, CriticalPoint, NontrivialityReport, SearchOptions, Seed,
    SeedKind, SeedOutcome, SeedTrace,
};
