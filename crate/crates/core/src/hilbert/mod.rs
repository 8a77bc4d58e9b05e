//! Multipartite complex linear algebra.
//!
//! All composite indices are leftmost-slowest over the owning
//! [`SubsystemLayout`]; [`StateVector::permute`] and
//! [`DensityOperator::permute`] reorder factors when needed.

mod basis;
mod layout;
mod ops;
mod state;

pub use basis::SubsystemBasis;
pub use layout::{IndexSplit, Subsystem, SubsystemLayout};
pub use ops::{
    embed_operator, embed_operator_on, expand_in_basis, partial_scalar_product,
    partial_scalar_product_on, partial_trace, partial_trace_operator, resum_expansion, StateRef,
};
pub use state::{DensityOperator, StateVector};
