//! Approachability when the player only observes random signals.
//!
//! The pipeline is: the signal operator `H̃` and its image `F`; fibers and the ambiguity
//! sets `m̄(p, σ)`; a decomposition of `F` (map `Φ`) and of the player's simplex (map
//! `Θ`) on which `m̄` is bilinear; the lifted set-valued game `m̿`; and the block strategy
//! that estimates signals, projects them on `F` and runs robust approachability on the
//! lift.

mod apm;
mod decomposition;
mod estimator;
mod fiber;
pub mod fixtures;
mod game;
mod lift;
mod strategy;

pub use apm::{check_apm, check_apm_report, has_reply, ApmReport};
pub(crate) use apm::facets;
pub use decomposition::{
    build_action_decomposition, check_anchor_identity, decompose_signal_space, ActionDecomposition,
    SignalDecomposition, MAX_SIGNAL_DIM,
};
pub use estimator::{bernstein_envelope, estimate_signal_distribution, SignalEstimator};
pub use fiber::{fiber, fiber_images, fiber_vertices, mbar, mbar_support, FIBER_TOL};
pub use game::{FeasibleSet, GameSpec, PMGame, PayoffEntry, SignalEntry, SignalOperator, TargetSpec};
pub use lift::BilinearLift;
pub use strategy::{pm_strategy_step, BlockSchedule, BlockStrategy, BlockSummary};
