//! Feature schema, synthetic booking-history generation, CSV ingestion,
//! sequence construction, and imbalance statistics.

mod csv_io;
pub mod schema;
mod sequences;
mod stats;
mod synthetic;
mod types;

pub use csv_io::{load_csv, save_csv, CSV_HEADER};
pub use schema::{feature_names, feature_scales, Race, SCHEMA_VERSION, TOTAL_FEATURES};
pub use sequences::{
    build_sequences, record_recurs, temporal_validation_split, DEFAULT_SPLIT_YEAR,
    LABEL_WINDOW_YEARS,
};
pub use stats::{class_stats, StatsRow, StatsTable, AGE_BUCKETS};
pub use synthetic::{generate_synthetic, GeneratorConfig, ANY_RATE_CAP};
pub use types::{Booking, Dataset, SequenceSample, Split, SuspectRecord, Task};

#[cfg(test)]
mod tests;
