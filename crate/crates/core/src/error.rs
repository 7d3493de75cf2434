use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::{ItemId, PeriodId};
use crate::report::{LimitKind, MiningReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("{0} identifiers must be positive")]
    ZeroId(&'static str),
    #[error("item {0} has zero quantity")]
    ZeroQuantity(ItemId),
    #[error("item {0} has zero external utility")]
    ZeroProfit(ItemId),
    #[error("empty itemset")]
    EmptyItemset,
    #[error("q-sequence ({tid}, {sid}) has no itemsets")]
    EmptySequence { tid: PeriodId, sid: u32 },
    #[error("item {0} repeated within one itemset")]
    DuplicateItem(ItemId),
    #[error("item {0} has no external utility")]
    UnknownItem(ItemId),
    #[error("item {0} has no on-shelf time periods")]
    MissingShelf(ItemId),
    #[error("item {item} occurs in q-sequence ({tid}, {sid}) but is not on shelf in period {tid}")]
    OffShelf { item: ItemId, tid: PeriodId, sid: u32 },
    #[error("duplicate q-sequence identifier ({tid}, {sid})")]
    DuplicateSequence { tid: PeriodId, sid: u32 },
    #[error("threshold {0} must be a ratio in (0, 1]")]
    InvalidThreshold(String),
    #[error("malformed pattern {0:?}")]
    BadPattern(String),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}:{line}:{column}: {message}")]
    Syntax {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: ModelError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Error)]
pub enum MineError {
    #[error("{kind} limit exceeded after {} candidates", partial.candidates_generated)]
    LimitExceeded {
        kind: LimitKind,
        partial: Box<MiningReport>,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(
        "input too large for exhaustive enumeration: {items} distinct items x max sequence length {length} \
         exceeds budget {budget}; shrink the database or raise the budget"
    )]
    BudgetExceeded {
        items: usize,
        length: usize,
        budget: usize,
    },
}
