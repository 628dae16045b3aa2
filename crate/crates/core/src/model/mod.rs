//! Serialized description of an anchored bundle or Lie algebroid with
//! connection, its validation, and the sampling and reporting plumbing
//! shared by all checks.

mod checks;
mod jets;
mod load;
mod report;
mod sampling;
mod spec;

pub use checks::{
    anchor_morphism_residual, check_anchor_morphism, check_jacobi, closedness_residual, jacobi_residual,
    jacobiator_component, min_leading_minor, poisson_jacobi_residual, validate_spec, ValidateOptions, ALGEBRAIC_TOL,
    DEGENERACY_FLOOR,
};
pub use jets::PointJets;
pub use load::{load_psi, load_spec, load_spec_file, SpecError};
pub use report::{run_check, CheckReport};
pub use sampling::{sample_points, sample_uniform, DEFAULT_POINTS, DEFAULT_SEED};
pub use spec::{AlgebroidSpec, AntisymmetricField, ChartSpec, Mode, StructureFunctions, SymmetricField};
