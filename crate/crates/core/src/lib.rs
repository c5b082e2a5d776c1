//! Classical electrodynamics of massless point charges.
//!
//! Retarded fields of null worldlines, cutoff-regularized radiated fluxes,
//! the field-tensor eigenproblem that decides which directions a massless
//! charge can move along without radiating, a small catalog of external
//! fields, and conformal-invariance checks.

pub mod catalog;
pub mod conformal;
pub mod eigen;
pub mod minkowski;
pub mod quadrature;
pub mod radiation;
pub mod retarded;
pub mod worldline;

pub use catalog::{make_field, CatalogField, ExternalField, FieldError, FieldSpec};
pub use eigen::{admissible_velocities, classify_field, EigenSolution, FieldClass};
pub use minkowski::{mdot, EmTensor, FieldEB, FourVector, Vec3};
pub use retarded::{retarded_frame, retarded_time, RetardedError, RetardedFrame};
pub use worldline::{NullWorldline, WorldlineSpec};
