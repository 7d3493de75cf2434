//! High-utility sequential pattern mining over temporal databases in which
//! every item is on shelf only during some time periods.

pub mod cli;
pub mod ctree;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod osums;
pub mod osums_plus;
pub mod projection;
pub mod qmatrix;
pub mod report;

pub use error::{IngestError, MineError, ModelError, OracleError};
pub use model::{
    ExtensionKind, ItemId, MinedPattern, Pattern, PeriodId, QItem, QItemset, QSequence, ShelfTable,
    TemporalDatabase, Threshold, UtilityRatio, UtilityTable,
};
pub use report::{MineOptions, MiningReport, StrategyFlags};
