//! The five-sequence, three-period running example used throughout the tests.
//!
//! Items `a..f` are encoded as `1..6`.

use crate::ingest::{parse_database_str, ShelfPolicy};
use crate::model::TemporalDatabase;

pub const RUNNING_EXAMPLE_DB: &str = include_str!("../../../data/running_example.db");
pub const RUNNING_EXAMPLE_UTILITIES: &str = include_str!("../../../data/running_example.ut");
pub const RUNNING_EXAMPLE_SHELF: &str = include_str!("../../../data/running_example.sh");

pub fn running_example() -> TemporalDatabase {
    parse_database_str(
        RUNNING_EXAMPLE_DB,
        RUNNING_EXAMPLE_UTILITIES,
        Some(RUNNING_EXAMPLE_SHELF),
        ShelfPolicy::Strict,
    )
    .expect("running example parses")
    .database
}
