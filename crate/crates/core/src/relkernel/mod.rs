//! Finite sets and binary relations.
//!
//! Everything here is an immutable value. Operations return new values and
//! share storage with their inputs where they can, so machine states built
//! from these types are cheap snapshots that hash and compare structurally.

mod element;
mod relation;
mod set;
pub mod text;

use thiserror::Error;

pub use element::Element;
pub use relation::FiniteRelation;
pub use set::{FiniteSet, NatSegment};
pub use text::{parse_element, ParseElementError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelError {
    #[error("application outside domain at {0}")]
    OutsideDomain(Element),
    #[error("relation is not functional at {0}")]
    NotFunctionalAt(Element),
}
