//! Per-AP closed-form beamforming, AP selection and validation oracles.

pub mod eigen;
pub mod gram;
pub mod oracle;
pub mod solve;

pub use eigen::{canonicalize_phase, largest_eigenpair, EigenPair};
pub use gram::{build_gram, WeightedGram};
pub use oracle::{oracle_alpha_enumeration, oracle_random_search, AlphaTable, RandomSearch};
pub use solve::{
    closed_form_value, objective_value, select_target_device, solve_ap, solve_cellless, ApSolution,
    BeamAllocation,
};
