//! Transition matrices, the projective limit of their cones, and the
//! harmonic-side numerical checks.

mod ergodic;
mod harmonic;
mod hilbert;
mod matrix;
mod transition;

pub use ergodic::{
    block_frequencies, ergodic_measure_count, measure_frequencies, DepthSnapshot, ErgodicReport, FrequencyTable,
    Status, BASE_LEVEL, DEFAULT_EPSILON, DEFAULT_MAX_DEPTH,
};
pub use harmonic::{
    boundary_recover, boundary_recover_oracle, cylinder_mass, cylinder_mass_exact, herglotz_evaluate,
    transport_scaling_check, BoundaryAtoms, Rect, SymbolicMass, TransportCheck,
};
pub use hilbert::{
    contraction_certificate, hilbert_distance, hilbert_distance_exact, hilbert_distance_segment, matrix_contraction,
    ContractionReport, LevelContraction, LevelVerdict,
};
pub use matrix::{normalize, Matrix};
pub use transition::{
    compose_range, in_convex_hull, mass_conservation_check, nested_simplex, nesting_check, transition_matrix,
    ExactMatrix, MassResidual, Scheme, SimplexVertices, TransitionMatrix,
};
