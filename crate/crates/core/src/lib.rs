//! Symmetric 2-designs: verification, canonical forms, automorphism groups,
//! GF(p) ranks, orbit matrices and their expansion into incidence matrices.

pub mod canon;
pub mod classical;
pub mod design;
pub mod error;
pub mod expand;
pub mod gfrank;
pub mod io;
pub mod orbmat;
pub mod permgroup;
pub mod reconstruct;
pub mod report;
pub mod subgroups;

pub use canon::{CanonicalForm, Relabeling, SearchLimits};
pub use design::{DesignDefect, DesignParams, IncidenceStructure};
pub use error::{Error, Result};
pub use gfrank::PrimeField;
pub use permgroup::{PermGroup, Permutation};
