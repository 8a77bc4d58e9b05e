//! Von Neumann chains, improper mixtures, relative/conditional states and
//! ensemble re-weighting.

mod branches;
mod ensemble;
mod mixture;
mod relative;

pub use branches::{Branch, BranchComponent, BranchDecomposition};
pub use ensemble::{
    ensemble_update, monte_carlo_update, monte_carlo_update_sharded, EnsembleUpdateResult,
    MonteCarloUpdate, UpdatedMember, WeightedEnsemble,
};
pub use mixture::{
    improper_mixture, max_off_diagonal_block, run_two_link_chain, tripartite_conditional_consistency,
    world_branches,
};
pub use relative::{conditional_state, relative_state, relative_state_forms, ConditionalForm, RelativeStateForms};
