//! Intrinsic-metric ladders, the V′ and tail-criterion statistics, the
//! multidimensional monotonicity checks, the coupling cascade and the
//! assembled report.

mod cascade;
mod coordinates;
mod ladder;
mod report;

pub use cascade::{
    coupling_cascade_simulation, CascadeRow, CascadeTable, MultipascalCoupler, PairCoupler, QuantileCoupler,
    SquareFlipCoupler,
};
pub use coordinates::{
    coordinate_immersion_check, coordinate_projection_chain, metric_decomposition_check, strong_monotonicity_check,
    well_ordered_check, wellordered_coupling_exists, CoordinateWeights,
};
pub use ladder::{
    expected_distance, intrinsic_metrics, tail_criterion_statistic, vprime_equals_conditional_kantorovich,
    vprime_statistic, CheckOutcome, MetricLadder,
};
pub use report::{
    loglog_slope, standardness_report, verdict_for, ReportConfig, ReportRow, StandardnessReport, Verdict, REPORT_SCHEMA,
};
