//! Concrete matrices for feasible instances.

mod eigen;
mod horn;
mod matrix;
mod movemass;
mod realize;
mod verify;

pub use eigen::symmetric_eigenvalues;
pub use horn::horn_construct;
pub use matrix::{Rotation, SymmetricMatrix};
pub use movemass::{move_mass, move_mass_entries, Transfer};
pub use realize::{realize_problem, realize_truncated, truncated_problem, SrimCase, TruncatedProblem, MAX_DIM};
pub use verify::{verify_realization, RealizationReport};
