//! The fibered system made concrete: fiber points, window conditioning, the
//! law of angles and the exponential drift experiment.

mod angles;
mod base;
mod drift;
mod equidist;

pub use angles::{kuiper_distance, law_of_angles, line_angle, AngleLaws};
pub use base::{fiber_point, window_conditional_sample, BasePoint, FiberContext, FiberSample, WindowSample, WindowSpec};
pub use drift::{
    angle_to_top, drift_demo, exact_drift, pull_back, transport_word, DirectionAbort, DriftDemo, DriftParams, DriftRecord,
    WRAP_BOUND,
};
pub use equidist::{fiber_equidistribution, EquidistRow, FiberEquidist, Partition};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WalkConfig;

    #[test]
    fn single_cell_has_full_mass() {
        let cfg = WalkConfig::reference();
        let c = BasePoint::random(&cfg, 300, 2);
        let w = WindowSpec::default_for(&cfg);
        let ctxs: Vec<FiberContext> = [10, 20].iter().map(|&n| FiberContext::new(&cfg, &c, n, 200).unwrap()).collect();
        let r = fiber_equidistribution(&ctxs, &w, Partition { u_cells: 1, i_cells: 1 }, 100, 4, 1_000_000).unwrap();
        assert!(r.rows.iter().all(|row| row.mass == 1.0));
        assert_eq!(r.l1_diffs, vec![0.0]);
    }
}
