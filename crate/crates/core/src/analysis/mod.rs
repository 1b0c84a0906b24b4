//! Exhaustive optimality verification, region classification and figure data.

mod figures;
mod quantum;
mod region;
mod search;
mod verify;

pub use figures::{distill_curve, distill_staircase, one_step_boundary, DistillCurveRow, StaircaseRow};
pub use quantum::{is_quantum_compatible, quantum_boundary};
pub use region::{
    classify_cell, monotone_region_violations, region_classify, region_width_probe,
    region_width_probe_with, RegionCell, RegionClass, DEFAULT_MAX_ITER, DEFAULT_RESOLUTION,
    DEFAULT_WIDTH_SAMPLES,
};
pub use search::{
    optimal_two_copy_search, optimal_two_copy_search_with, sampled_search, SearchOptions,
    SearchResult,
};
pub use verify::{verify_protocol_identity, IdentityReport};
