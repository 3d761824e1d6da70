//! Local limit experiments: exact lattice oracles for the χ-walk and the
//! joint Monte Carlo estimate.

mod joint;
mod lattice;

pub use joint::{joint_llt_estimate, stationary_flag, JointLlt, JointRow, JOINT_N_CAP};
pub use lattice::{
    lattice_dp, llt_1d_check, period_detect, return_time_dp, LatticeDist, LltRow, Masses, ReturnTimes,
    EXACT_RETURN_KMAX, SUPPORT_GUARD,
};
