//! Zero-energy flows of 2+1 dimensional stationary metrics inside their
//! ergoregions: characteristic fields, trajectories, and horizon census.

pub mod flow;
pub mod horizon;
pub mod metric;
pub mod numeric;
pub mod presets;
pub mod report;

pub use metric::{
    Branch, Chart, Covector, Domain, ErgoStatus, InverseMetricField, InverseMetricSample, MetricError, PolarView,
    SpatialPoint,
};
