//! Text formats for temporal q-sequence databases, plus dataset generators.
//!
//! Database file, one q-sequence per line (`#` starts a comment line):
//!
//! ```text
//! <TID> <SID> <item>:<qty> ... -1 <item>:<qty> ... -1 -2
//! ```
//!
//! `-1` closes an itemset and `-2` closes the line. The utility file holds one
//! `<item> <profit>` pair per line and the shelf file one
//! `<item> <tid> [<tid> ...]` line per item.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::IngestError;
use crate::model::{
    ItemId, PeriodId, QItem, QItemset, QSequence, ShelfTable, TemporalDatabase, UtilityTable,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetBundle {
    pub database: PathBuf,
    pub utilities: PathBuf,
    pub shelf: Option<PathBuf>,
}

impl DatasetBundle {
    /// `<prefix>.db`, `<prefix>.ut` and, when it exists, `<prefix>.sh`.
    pub fn from_prefix(prefix: impl AsRef<Path>) -> Self {
        let prefix = prefix.as_ref().to_string_lossy().into_owned();
        let shelf = PathBuf::from(format!("{prefix}.sh"));
        DatasetBundle {
            database: PathBuf::from(format!("{prefix}.db")),
            utilities: PathBuf::from(format!("{prefix}.ut")),
            shelf: shelf.exists().then_some(shelf),
        }
    }
}

/// What to do when an item occurs in a period outside its shelf set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShelfPolicy {
    #[default]
    Strict,
    /// Widen the shelf set and report the widening.
    Relax,
}

#[derive(Debug, Clone)]
pub struct ParsedDatabase {
    pub database: TemporalDatabase,
    /// Shelf entries added under [`ShelfPolicy::Relax`].
    pub widened: Vec<(ItemId, PeriodId)>,
}

pub fn parse_database(bundle: &DatasetBundle, policy: ShelfPolicy) -> Result<ParsedDatabase, IngestError> {
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|source| IngestError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    let db_text = read(&bundle.database)?;
    let ut_text = read(&bundle.utilities)?;
    let sh_text = bundle.shelf.as_deref().map(read).transpose()?;
    parse_with_paths(
        &db_text,
        &bundle.database,
        &ut_text,
        &bundle.utilities,
        sh_text.as_deref().zip(bundle.shelf.as_deref()),
        policy,
    )
}

/// Parses in-memory file contents.
pub fn parse_database_str(
    database: &str,
    utilities: &str,
    shelf: Option<&str>,
    policy: ShelfPolicy,
) -> Result<ParsedDatabase, IngestError> {
    parse_with_paths(
        database,
        Path::new("<database>"),
        utilities,
        Path::new("<utilities>"),
        shelf.map(|s| (s, Path::new("<shelf>"))),
        policy,
    )
}

fn parse_with_paths(
    db_text: &str,
    db_path: &Path,
    ut_text: &str,
    ut_path: &Path,
    shelf: Option<(&str, &Path)>,
    policy: ShelfPolicy,
) -> Result<ParsedDatabase, IngestError> {
    let sequences = parse_sequences(db_text, db_path)?;
    let utilities = parse_utilities(ut_text, ut_path)?;
    let invalid = |path: &Path| {
        let path = path.to_path_buf();
        move |source| IngestError::Invalid { path, source }
    };

    let mut widened = Vec::new();
    let shelf = match shelf {
        Some((text, path)) => {
            let mut table = parse_shelf(text, path)?;
            if policy == ShelfPolicy::Relax {
                for s in &sequences {
                    for item in s.distinct_items() {
                        if !table.is_on_shelf(item, s.tid) {
                            table.add_period(item, s.tid);
                            widened.push((item, s.tid));
                        }
                    }
                }
                widened.sort();
                widened.dedup();
            }
            table
        }
        None => shelf_from_occurrences(&sequences),
    };
    let database = TemporalDatabase::new(sequences, utilities, shelf).map_err(invalid(db_path))?;
    Ok(ParsedDatabase { database, widened })
}

/// Whitespace-separated tokens with their 1-based character columns.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = line;
    let mut offset = 0usize;
    std::iter::from_fn(move || {
        let start = rest.find(|c: char| !c.is_whitespace())?;
        let tail = &rest[start..];
        let len = tail.find(char::is_whitespace).unwrap_or(tail.len());
        let token = &tail[..len];
        let column = line[..offset + start].chars().count() + 1;
        offset += start + len;
        rest = &tail[len..];
        Some((column, token))
    })
}

fn syntax(path: &Path, line: usize, column: usize, message: impl Into<String>) -> IngestError {
    IngestError::Syntax {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

fn positive(token: &str, what: &str, path: &Path, line: usize, column: usize) -> Result<u32, IngestError> {
    match token.parse::<u32>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(syntax(path, line, column, format!("expected positive {what}, found {token:?}"))),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('#')
        })
}

fn parse_sequences(text: &str, path: &Path) -> Result<Vec<QSequence>, IngestError> {
    let mut out = Vec::new();
    for (ln, line) in content_lines(text) {
        let mut toks = tokens(line);
        let (col, tok) = toks.next().expect("non-empty line");
        let tid = PeriodId(positive(tok, "TID", path, ln, col)?);
        let (col, tok) = toks
            .next()
            .ok_or_else(|| syntax(path, ln, line.len() + 1, "missing SID"))?;
        let sid = positive(tok, "SID", path, ln, col)?;

        let mut itemsets = Vec::new();
        let mut current: Vec<QItem> = Vec::new();
        let mut current_col = 0;
        let mut terminated = false;
        for (col, tok) in toks.by_ref() {
            match tok {
                "-1" => {
                    if current.is_empty() {
                        return Err(syntax(path, ln, col, "empty itemset"));
                    }
                    let set = QItemset::new(std::mem::take(&mut current))
                        .map_err(|e| syntax(path, ln, current_col, e.to_string()))?;
                    itemsets.push(set);
                }
                "-2" => {
                    terminated = true;
                    break;
                }
                _ => {
                    let (item, qty) = tok
                        .split_once(':')
                        .ok_or_else(|| syntax(path, ln, col, format!("expected <item>:<qty>, found {tok:?}")))?;
                    let item = ItemId(positive(item, "item id", path, ln, col)?);
                    let qty = positive(qty, "quantity", path, ln, col + tok.find(':').unwrap() + 1)?;
                    if current.is_empty() {
                        current_col = col;
                    }
                    current.push(QItem { item, quantity: qty });
                }
            }
        }
        if !terminated {
            return Err(syntax(path, ln, line.chars().count() + 1, "line must end with -2"));
        }
        if let Some((col, tok)) = toks.next() {
            return Err(syntax(path, ln, col, format!("unexpected token {tok:?} after -2")));
        }
        if !current.is_empty() {
            return Err(syntax(path, ln, current_col, "itemset not closed with -1"));
        }
        let seq = QSequence::new(tid, sid, itemsets).map_err(|e| syntax(path, ln, 1, e.to_string()))?;
        out.push(seq);
    }
    Ok(out)
}

fn parse_utilities(text: &str, path: &Path) -> Result<UtilityTable, IngestError> {
    let mut table = UtilityTable::new();
    let mut seen = BTreeSet::new();
    for (ln, line) in content_lines(text) {
        let toks: Vec<_> = tokens(line).collect();
        if toks.len() != 2 {
            return Err(syntax(path, ln, 1, "expected `<item> <profit>`"));
        }
        let item = ItemId(positive(toks[0].1, "item id", path, ln, toks[0].0)?);
        let profit = positive(toks[1].1, "external utility", path, ln, toks[1].0)?;
        if !seen.insert(item) {
            return Err(syntax(path, ln, toks[0].0, format!("item {item} listed twice")));
        }
        table
            .insert(item, profit as u64)
            .map_err(|e| syntax(path, ln, toks[1].0, e.to_string()))?;
    }
    Ok(table)
}

fn parse_shelf(text: &str, path: &Path) -> Result<ShelfTable, IngestError> {
    let mut table = ShelfTable::new();
    let mut seen = BTreeSet::new();
    for (ln, line) in content_lines(text) {
        let mut toks = tokens(line);
        let (col, tok) = toks.next().expect("non-empty line");
        let item = ItemId(positive(tok, "item id", path, ln, col)?);
        if !seen.insert(item) {
            return Err(syntax(path, ln, col, format!("item {item} listed twice")));
        }
        let periods = toks
            .map(|(c, t)| positive(t, "TID", path, ln, c).map(PeriodId))
            .collect::<Result<BTreeSet<_>, _>>()?;
        if periods.is_empty() {
            return Err(syntax(path, ln, line.len() + 1, format!("item {item} has no on-shelf periods")));
        }
        table.insert(item, periods);
    }
    Ok(table)
}

/// Shelf table where each item is on shelf exactly where it occurs.
pub fn shelf_from_occurrences(sequences: &[QSequence]) -> ShelfTable {
    let mut table = ShelfTable::new();
    for s in sequences {
        for item in s.distinct_items() {
            table.add_period(item, s.tid);
        }
    }
    table
}

/// Contents of the three dataset files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SerializedDatabase {
    pub database: String,
    pub utilities: String,
    pub shelf: String,
}

pub fn serialize_database(db: &TemporalDatabase) -> SerializedDatabase {
    let mut database = String::new();
    for s in db.sequences() {
        database.push_str(&format!("{} {}", s.tid, s.sid));
        for set in s.itemsets() {
            for q in set.items() {
                database.push_str(&format!(" {}:{}", q.item, q.quantity));
            }
            database.push_str(" -1");
        }
        database.push_str(" -2\n");
    }
    let utilities = db
        .utilities()
        .iter()
        .map(|(i, p)| format!("{i} {p}\n"))
        .collect();
    let shelf = db
        .shelf()
        .iter()
        .map(|(i, periods)| {
            let ps: Vec<String> = periods.iter().map(|p| p.to_string()).collect();
            format!("{i} {}\n", ps.join(" "))
        })
        .collect();
    SerializedDatabase {
        database,
        utilities,
        shelf,
    }
}

/// Writes `<prefix>.db`, `<prefix>.ut` and `<prefix>.sh`.
pub fn write_database(db: &TemporalDatabase, prefix: impl AsRef<Path>) -> Result<DatasetBundle, IngestError> {
    let text = serialize_database(db);
    let bundle = DatasetBundle {
        shelf: Some(PathBuf::from(format!("{}.sh", prefix.as_ref().display()))),
        ..DatasetBundle::from_prefix(prefix)
    };
    let write = |p: &Path, body: &str| {
        fs::write(p, body).map_err(|source| IngestError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    write(&bundle.database, &text.database)?;
    write(&bundle.utilities, &text.utilities)?;
    write(bundle.shelf.as_deref().unwrap(), &text.shelf)?;
    Ok(bundle)
}

/// Replication of a base database across `periods` randomly assigned periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub scale: u32,
    pub periods: u32,
    pub seed: u64,
}

/// Concatenates `scale` copies of the base sequences, assigning each copy a
/// period drawn uniformly from `1..=periods`. SIDs are renumbered per period
/// and the shelf table is rebuilt from occurrences.
pub fn generate_scaled(base: &TemporalDatabase, config: GeneratorConfig) -> TemporalDatabase {
    assert!(config.scale >= 1 && config.periods >= 1, "scale and period count must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dist = Uniform::new_inclusive(1, config.periods).expect("non-empty range");
    let mut next_sid: BTreeMap<u32, u32> = BTreeMap::new();
    let mut sequences = Vec::with_capacity(base.sequences().len() * config.scale as usize);
    for _ in 0..config.scale {
        for s in base.sequences() {
            let tid = dist.sample(&mut rng);
            let sid = next_sid.entry(tid).or_insert(0);
            *sid += 1;
            sequences.push(
                QSequence::new(PeriodId(tid), *sid, s.itemsets().to_vec()).expect("copied from a valid sequence"),
            );
        }
    }
    let shelf = shelf_from_occurrences(&sequences);
    TemporalDatabase::new(sequences, base.utilities().clone(), shelf).expect("shelf rebuilt from occurrences")
}

/// Parameters of the synthetic database generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub sequences: usize,
    pub items: u32,
    pub periods: u32,
    /// Itemsets per sequence are drawn from `1..=max_itemsets`.
    pub max_itemsets: usize,
    /// Items per itemset are drawn from `1..=max_itemset_len`.
    pub max_itemset_len: usize,
    pub max_quantity: u32,
    pub max_profit: u32,
    /// Probability in `[0, 1]` that an item is on shelf in a given period.
    pub shelf_density: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            sequences: 300,
            items: 40,
            periods: 5,
            max_itemsets: 6,
            max_itemset_len: 3,
            max_quantity: 5,
            max_profit: 10,
            shelf_density: 0.7,
            seed: 1,
        }
    }
}

/// Random database with skewed item popularity and per-item shelf periods.
///
/// Each sequence lands in a uniformly drawn period and only uses items on
/// shelf there; the stored shelf table is the drawn one, so items may be on
/// shelf in periods where they never occur.
pub fn generate_synthetic(config: &SynthConfig) -> TemporalDatabase {
    assert!(config.items >= 1 && config.periods >= 1 && config.max_itemsets >= 1 && config.max_itemset_len >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut utilities = UtilityTable::new();
    let mut shelf = ShelfTable::new();
    for i in 1..=config.items {
        let item = ItemId(i);
        utilities
            .insert(item, rng.random_range(1..=config.max_profit.max(1)) as u64)
            .expect("positive profit");
        let mut periods: BTreeSet<PeriodId> = (1..=config.periods)
            .filter(|_| rng.random_bool(config.shelf_density.clamp(0.0, 1.0)))
            .map(PeriodId)
            .collect();
        if periods.is_empty() {
            periods.insert(PeriodId(rng.random_range(1..=config.periods)));
        }
        shelf.insert(item, periods);
    }

    // Zipf-like weights: item k drawn with weight 1/k.
    let on_shelf: BTreeMap<u32, Vec<(ItemId, f64)>> = (1..=config.periods)
        .map(|t| {
            let items = (1..=config.items)
                .filter(|&i| shelf.is_on_shelf(ItemId(i), PeriodId(t)))
                .map(|i| (ItemId(i), 1.0 / i as f64))
                .collect();
            (t, items)
        })
        .collect();

    let mut next_sid: BTreeMap<u32, u32> = BTreeMap::new();
    let mut sequences = Vec::with_capacity(config.sequences);
    while sequences.len() < config.sequences {
        let tid = rng.random_range(1..=config.periods);
        let pool = &on_shelf[&tid];
        if pool.is_empty() {
            continue;
        }
        let total: f64 = pool.iter().map(|(_, w)| w).sum();
        let n_sets = rng.random_range(1..=config.max_itemsets);
        let mut itemsets = Vec::with_capacity(n_sets);
        for _ in 0..n_sets {
            let want = rng.random_range(1..=config.max_itemset_len.min(pool.len()));
            let mut chosen = BTreeSet::new();
            while chosen.len() < want {
                let mut x = rng.random_range(0.0..total);
                let mut pick = pool[pool.len() - 1].0;
                for &(item, w) in pool {
                    if x < w {
                        pick = item;
                        break;
                    }
                    x -= w;
                }
                chosen.insert(pick);
            }
            let items = chosen
                .into_iter()
                .map(|item| QItem {
                    item,
                    quantity: rng.random_range(1..=config.max_quantity.max(1)),
                })
                .collect();
            itemsets.push(QItemset::new(items).expect("distinct items"));
        }
        let sid = next_sid.entry(tid).or_insert(0);
        *sid += 1;
        sequences.push(QSequence::new(PeriodId(tid), *sid, itemsets).expect("non-empty"));
    }
    TemporalDatabase::new(sequences, utilities, shelf).expect("items drawn from on-shelf pools")
}

/// The first `n` q-sequences (in `(tid, sid)` order) with the original tables.
pub fn take_prefix(db: &TemporalDatabase, n: usize) -> TemporalDatabase {
    let sequences = db.sequences().iter().take(n).cloned().collect();
    TemporalDatabase::new(sequences, db.utilities().clone(), db.shelf().clone())
        .expect("subset of a valid database")
}
