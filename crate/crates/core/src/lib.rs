//! Steklov eigenpairs on triangulated surfaces and the piecewise-linear index
//! identities satisfied by their critical points.
//!
//! The pipeline is: build or load a [`mesh::SurfaceMesh`], assemble the P1
//! stiffness and boundary mass ([`fem`]), solve the boundary eigenproblem of the
//! Dirichlet-to-Neumann operator ([`spectrum`]), classify critical points
//! ([`critical`]) and check the index identities ([`identity`]). Closed-form
//! eigenpairs for the disk, annulus and flat cylinder live in [`oracle`].

pub mod convergence;
pub mod critical;
pub mod error;
pub mod fem;
pub mod identity;
pub mod mesh;
pub mod oracle;
pub mod spectrum;

pub use error::{Error, Result};
