//! Trajectories, first returns of the χ-coordinate, recurrence statistics and
//! the drift certificate.

mod conservativity;
mod drift;
mod returns;
mod stepper;
mod trajectory;

pub use conservativity::{conservativity_check, ReturnFraction};
pub use drift::{
    drift_certify, drift_certify_search, drift_grid, Certificate, DriftOutcome, DriftSearch, Failure, GridPoint,
    GridSpec, PointEstimate,
};
pub use returns::{
    first_return_sampler, heavy_tail_diagnostic, return_log_norm, return_tail, return_time, sample_first_return,
    tail_exponent, truncated_mean, HeavyTail, HeavyTailRow, ReturnOutcome, ReturnSample, ReturnTail, TailRow,
    DEFAULT_CAP,
};
pub use stepper::DyadicTorus;
pub use trajectory::{run_word, simulate, Trajectory};
