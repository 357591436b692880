//! Project records, forecast inaccuracy measures and their statistics.

pub mod hypothesis;
pub mod io;
pub mod record;
pub mod summary;

pub use hypothesis::{test_group_difference, test_mean_nonzero, test_time_trend, TestResult};
pub use io::{parse_dataset, write_dataset};
pub use record::{
    cost_overrun, observations, overestimate_from_shortfall, shortfall_from_overestimate,
    traffic_inaccuracy, InaccuracyKind, InaccuracyObservation, ProjectRecord, ProjectType, Region,
};
pub use summary::{summarize, summarize_records, DatasetSummary, GroupBy, GroupKey};
