//! Unitary premeasurement chains in finite dimensions.
//!
//! The crate is organised bottom-up:
//!
//! * [`hilbert`]: multipartite layouts, pure and mixed states, partial traces,
//!   partial scalar products, subsystem-basis expansions and operator embedding.
//! * [`observables`]: observables in unique spectral form, decompositions of the
//!   identity and event complements.
//! * [`premeasurement`]: ideal and dressed (general exact) premeasurement
//!   unitaries with numerical checks of the calibration, probability
//!   reproduction and dynamical conditions.
//! * [`chains`]: von Neumann chains, improper mixtures, relative and
//!   conditional states, world branches and ensemble re-weighting.
//! * [`scenario`] and [`verify`]: the declarative scenario runner and the
//!   property-suite driver used by the `vnchain` binary.
//!
//! Product-basis indices follow one fixed convention everywhere: the leftmost
//! subsystem of a [`SubsystemLayout`] varies slowest.

pub mod chains;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod observables;
pub mod premeasurement;
pub mod random;
pub mod scenario;
pub mod tolerance;
pub mod verify;

pub use chains::{
    conditional_state, ensemble_update, improper_mixture, monte_carlo_update,
    monte_carlo_update_sharded, relative_state, relative_state_forms, run_two_link_chain,
    tripartite_conditional_consistency, world_branches, Branch, BranchComponent,
    BranchDecomposition, ConditionalForm, EnsembleUpdateResult, MonteCarloUpdate,
    RelativeStateForms, WeightedEnsemble,
};
pub use error::{Error, Result};
pub use hilbert::{
    embed_operator, embed_operator_on, expand_in_basis, partial_scalar_product,
    partial_trace, partial_trace_operator, DensityOperator, StateVector, Subsystem,
    SubsystemBasis, SubsystemLayout,
};
pub use linalg::{CMatrix, CVector, C64};
pub use observables::{
    check_decomposition, event_complement, observable_from_matrix, DecompositionOfIdentity,
    DecompositionReport, Projector, SpectralBranch, SpectralObservable,
};
pub use premeasurement::{
    branch_decomposition, luders_state, Completion, ConditionReport, Dressing, Premeasurement,
};
pub use tolerance::Tolerances;
