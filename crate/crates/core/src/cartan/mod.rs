//! Log-scale linear algebra for long matrix products: Cartan projection,
//! density points, the Iwasawa cocycle, Lyapunov estimates and the
//! growth/contraction check.

mod cocycle;
mod frame;
mod growth;
pub mod linalg;
mod logvec;
mod lyapunov;

pub use cocycle::{
    adaptive_lookahead, cocycle_of_letters, flag_distance, iwasawa_cocycle, lookahead_flag, omega, theta_n,
    transport, Flag, DEFAULT_LOOKAHEAD,
};
pub use frame::{
    cartan_projection, cartan_projection_exact, density_points, renormalized_product, CartanFrame, ProductTracker,
    WedgeTable,
};
pub use growth::{
    check_growth_contraction, check_growth_contraction_exact, growth_contraction_sweep, GrowthReport, GrowthSweep,
    GROWTH_SLACK,
};
pub use linalg::Mat;
pub use logvec::LogVector;
pub use lyapunov::{
    density_convergence, lyapunov_estimate, lyapunov_replica, summarize_lyapunov, DensityConvergence, DensityRow,
    LyapunovEstimate,
};
