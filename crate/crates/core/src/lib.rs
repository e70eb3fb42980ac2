//! Numerical verification of strongly cone-paraconvex vector mappings.

pub mod cone;
pub mod derivative;
pub mod mapping;
mod error;
pub mod modulus;
pub mod paraconvex;
pub mod report;
pub mod sampling;

pub use cone::{NormKind, Point, PolyCone};
pub use mapping::{DomainBox, VectorMapping};
pub use error::{Error, Result};
pub use modulus::{Modulus, ParaSpec};
pub use report::{CheckReport, SampleTriple, Witness};
