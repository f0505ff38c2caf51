//! P1 finite elements: sparse storage, direct factorization, assembly and
//! harmonic extension.

mod assembly;
mod cholesky;
mod sparse;

pub(crate) use assembly::require_connected_with_boundary;
pub use assembly::{
    assemble_boundary_mass, assemble_stiffness, element_stiffness, harmonic_extension,
    DofPartition, HarmonicExtender,
};
pub use cholesky::{reverse_cuthill_mckee, EnvelopeCholesky};
pub use sparse::SparseSymmetricMatrix;
