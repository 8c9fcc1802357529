//! Monte Carlo estimation with confidence intervals, bound verification with
//! three-valued verdicts, and the larger seeded studies: star survival
//! scaling, hub-to-hub relay, and the cut-edge comparison.
//!
//! Every estimator derives replica seeds from `(base seed, replica index)` and
//! aggregates by counting, so results are identical at any parallelism degree.

mod edge_removal;
mod estimate;
mod relay;
mod scaling;
mod schedule;
mod verify;

pub use edge_removal::{edge_removal_experiment, EdgeRemovalReport};
pub use estimate::{estimate_event, estimate_event_with, run_replicas, CiMethod, Estimate, WILSON_Z95};
pub use relay::{relay_experiment, HopEstimate};
pub use scaling::{star_survival_scaling, ScalingCell, ScalingOptions, ScalingReport};
pub use schedule::{compute_proof_schedule, ProofSchedule};
pub use verify::{
    classify, verify_path_transmission, verify_rw_interval, verify_star_extinction,
    verify_tree_extinction, BoundSide, TreeExtinctionReport, Verdict, VerdictKind,
};

use crate::exact::ExactError;
use crate::graphs::GraphError;
use crate::simulate::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error(transparent)]
    Build(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}
