//! Local planners over the robot-centric cost map.

pub mod collision;
pub mod mppi;
pub mod primitives;
mod throughput;

pub use collision::{check_collision_line, supercover_cell_coords, supercover_cells};
pub use mppi::{
    mppi_weights, plan_mppi, sample_rollouts, shift_sequence, summarize, weighted_sequence, MppiOutput, MppiParams,
    MppiPlanner, Pose2, RolloutBatch, RolloutSummary,
};
pub use primitives::{arc_cost, plan_primitives, Arc, PrimitiveChoice, PrimitiveLibrary, PrimitiveParams};
pub use throughput::{benchmark_map, measure_throughput, ThroughputReport};
