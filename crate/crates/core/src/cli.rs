//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input, 3 time or memory
//! limit reached, 4 input too large for the reference miner, 5 result sets
//! disagree (`verify`).

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{MineError, OracleError};
use crate::ingest::{
    generate_scaled, generate_synthetic, parse_database, write_database, DatasetBundle, GeneratorConfig,
    ShelfPolicy, SynthConfig,
};
use crate::model::{MinedPattern, Pattern, TemporalDatabase, Threshold};
use crate::oracle::{self, OracleConfig};
use crate::osums::mine_osums;
use crate::osums_plus::mine_osums_plus;
use crate::report::{MineOptions, MiningReport, StrategyFlags};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;

pub const CSV_HEADER: &str = "algo,xi,patterns,candidates,time_ms,peak_mem_bytes,flags";

const DEFAULT_TIME_LIMIT_SECS: f64 = 10_000.0;

#[derive(Debug, Parser)]
#[command(name = "oshusp", version, about = "On-shelf high-utility sequential pattern mining")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine patterns whose on-shelf utility ratio reaches the threshold.
    Mine(MineArgs),
    /// Run all three miners and compare their result sets.
    Verify(VerifyArgs),
    /// Scale a base dataset by replicating it across random periods.
    Gen(GenArgs),
    /// Generate a random dataset with per-item shelf periods.
    Synth(SynthArgs),
    /// Time the miners over several thresholds, optionally with ablations.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Osums,
    OsumsPlus,
    Oracle,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Osums => "osums",
            Algo::OsumsPlus => "osums-plus",
            Algo::Oracle => "oracle",
        }
    }

    fn relevant_flags(self) -> &'static [&'static str] {
        match self {
            Algo::Osums => &["ldp", "lwp", "arc"],
            Algo::OsumsPlus => &["gdp", "gwp"],
            Algo::Oracle => &[],
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Sequence database file.
    #[arg(long)]
    pub db: PathBuf,
    /// Item profit file.
    #[arg(long)]
    pub utils: PathBuf,
    /// Shelf file; derived from occurrences when omitted.
    #[arg(long)]
    pub shelf: Option<PathBuf>,
    /// Widen shelf sets instead of rejecting off-shelf occurrences.
    #[arg(long)]
    pub relax_shelf: bool,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[arg(long, value_enum, default_value = "osums-plus")]
    pub algo: Algo,
    #[command(flatten)]
    pub input: InputArgs,
    /// Minimum on-shelf utility ratio, as a decimal or a fraction `a/b`.
    #[arg(long)]
    pub threshold: String,
    /// Pattern output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_ldp: bool,
    #[arg(long)]
    pub no_lwp: bool,
    #[arg(long)]
    pub no_arc: bool,
    #[arg(long)]
    pub no_gdp: bool,
    #[arg(long)]
    pub no_gwp: bool,
    /// Longest pattern to report, in items.
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Write a one-row run summary CSV here.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = DEFAULT_TIME_LIMIT_SECS)]
    pub time_limit: f64,
    /// Limit on the internal live-byte counter.
    #[arg(long)]
    pub memory_limit: Option<usize>,
    /// Ceiling on distinct items x max sequence length for the reference miner.
    #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
    pub oracle_budget: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub threshold: String,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
    pub oracle_budget: usize,
    /// Drop one pattern from the one-phase result before comparing (detector self-test).
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Dataset prefix: reads `<base>.db`, `<base>.ut` and `<base>.sh` if present.
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub scale: u32,
    #[arg(long, default_value_t = 5)]
    pub periods: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_prefix: PathBuf,
    #[arg(long)]
    pub relax_shelf: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 300)]
    pub sequences: usize,
    #[arg(long, default_value_t = 40)]
    pub items: u32,
    #[arg(long, default_value_t = 5)]
    pub periods: u32,
    #[arg(long, default_value_t = 6)]
    pub max_itemsets: usize,
    #[arg(long, default_value_t = 4)]
    pub max_itemset_len: usize,
    #[arg(long, default_value_t = 5)]
    pub max_quantity: u32,
    #[arg(long, default_value_t = 10)]
    pub max_profit: u32,
    #[arg(long, default_value_t = 0.6)]
    pub shelf_density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',', required = true)]
    pub thresholds: Vec<String>,
    /// Algorithms to run (default: both miners).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub algos: Vec<Algo>,
    /// Also run each miner with every strategy disabled in turn and all disabled.
    #[arg(long)]
    pub ablate: bool,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TIME_LIMIT_SECS)]
    pub time_limit: f64,
    /// CSV output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure mapped to an exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::new(EXIT_BUDGET, e.to_string())
    }
}

impl From<MineError> for Failure {
    fn from(e: MineError) -> Self {
        Failure::new(EXIT_LIMIT, e.to_string())
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::new(EXIT_INVALID, format!("{}: {e}", path.display()))
}

fn parse_threshold(s: &str) -> Result<Threshold, Failure> {
    s.parse()
        .map_err(|e| Failure::new(EXIT_INVALID, format!("bad threshold: {e}")))
}

fn load(input: &InputArgs, err: &mut dyn Write) -> Result<TemporalDatabase, Failure> {
    let bundle = DatasetBundle {
        database: input.db.clone(),
        utilities: input.utils.clone(),
        shelf: input.shelf.clone(),
    };
    let policy = if input.relax_shelf {
        ShelfPolicy::Relax
    } else {
        ShelfPolicy::Strict
    };
    let parsed = parse_database(&bundle, policy).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    for (item, t) in &parsed.widened {
        let _ = writeln!(err, "warning: item {item} occurs in period {t}; added to its shelf set");
    }
    Ok(parsed.database)
}

fn time_limit(secs: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(secs).map_err(|_| Failure::new(EXIT_USAGE, format!("bad time limit {secs}")))
}

/// Renders one result line: `pattern<TAB>ou<TAB>our<TAB>ot`.
pub fn format_pattern_line(m: &MinedPattern) -> String {
    let ot: Vec<String> = m.ot.iter().map(ToString::to_string).collect();
    format!("{}\t{}\t{}\t{}", m.pattern, m.ou, m.our.to_fixed6(), ot.join(","))
}

/// Renders one summary row matching [`CSV_HEADER`].
pub fn format_csv_row(algo: Algo, xi: &str, report: &MiningReport, flags: &str) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        algo.name(),
        xi,
        report.patterns.len(),
        report.candidates_generated,
        format_args!("{:.3}", report.wall_time.as_secs_f64() * 1000.0),
        report.peak_bytes,
        flags
    )
}

fn mine_flags(args: &MineArgs) -> Result<StrategyFlags, Failure> {
    let given = [
        ("--no-ldp", args.no_ldp, Algo::Osums),
        ("--no-lwp", args.no_lwp, Algo::Osums),
        ("--no-arc", args.no_arc, Algo::Osums),
        ("--no-gdp", args.no_gdp, Algo::OsumsPlus),
        ("--no-gwp", args.no_gwp, Algo::OsumsPlus),
    ];
    for (name, set, owner) in given {
        if set && owner != args.algo {
            return Err(Failure::new(
                EXIT_USAGE,
                format!("{name} does not apply to --algo {}", args.algo.name()),
            ));
        }
    }
    Ok(StrategyFlags {
        ldp: !args.no_ldp,
        lwp: !args.no_lwp,
        arc: !args.no_arc,
        gdp: !args.no_gdp,
        gwp: !args.no_gwp,
    })
}

/// Runs one algorithm. The reference miner reports no search statistics
/// beyond the number of patterns it scored.
fn run_algo(
    algo: Algo,
    db: &TemporalDatabase,
    threshold: Threshold,
    options: &MineOptions,
    oracle_budget: usize,
) -> Result<MiningReport, Failure> {
    match algo {
        Algo::Osums => Ok(mine_osums(db, threshold, options)?),
        Algo::OsumsPlus => Ok(mine_osums_plus(db, threshold, options)?),
        Algo::Oracle => {
            let started = std::time::Instant::now();
            let mut cfg = OracleConfig::unbounded(db, threshold);
            cfg.budget = oracle_budget;
            if let Some(m) = options.max_len {
                cfg.max_pattern_length = m.max(1);
            }
            let scored = oracle::score_all(db, cfg.max_pattern_length, cfg.budget)?;
            let mut report = MiningReport {
                candidates_generated: scored.len() as u64,
                patterns: oracle::filter_by_threshold(&scored, threshold),
                ..Default::default()
            };
            report.wall_time = started.elapsed();
            Ok(report)
        }
    }
}

fn write_text(path: Option<&Path>, body: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| io_failure(p, e)),
        None => out.write_all(body.as_bytes()).map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn cmd_mine(args: &MineArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let flags = mine_flags(args)?;
    let threshold = parse_threshold(&args.threshold)?;
    let db = load(&args.input, err)?;
    let options = MineOptions {
        flags,
        max_len: args.max_len,
        time_limit: Some(time_limit(args.time_limit)?),
        memory_limit: args.memory_limit,
    };
    let result = run_algo(args.algo, &db, threshold, &options, args.oracle_budget);
    let flag_text = flags.describe(args.algo.relevant_flags());
    let report = match result {
        Ok(r) => r,
        Err(failure) => {
            if let (Some(path), EXIT_LIMIT) = (&args.stats, failure.code) {
                let row = format!("{CSV_HEADER}\n{},{},,,,,{flag_text} (limit)\n", args.algo.name(), args.threshold);
                fs::write(path, row).map_err(|e| io_failure(path, e))?;
            }
            return Err(failure);
        }
    };
    let body: String = report.patterns.iter().map(|m| format_pattern_line(m) + "\n").collect();
    write_text(args.out.as_deref(), &body, out)?;
    if let Some(path) = &args.stats {
        let row = format_csv_row(args.algo, &args.threshold, &report, &flag_text);
        fs::write(path, format!("{CSV_HEADER}\n{row}\n")).map_err(|e| io_failure(path, e))?;
    }
    Ok(())
}

/// Differences between two result sets compared as sets of `(pattern, ou)`.
/// Empty when they agree.
pub fn compare_results(left: (&str, &[MinedPattern]), right: (&str, &[MinedPattern])) -> Vec<String> {
    let as_set = |ps: &[MinedPattern]| -> BTreeSet<(Pattern, u64)> {
        ps.iter().map(|m| (m.pattern.clone(), m.ou)).collect()
    };
    let (a, b) = (as_set(left.1), as_set(right.1));
    let mut diff: Vec<String> = a
        .difference(&b)
        .map(|(p, ou)| format!("only in {}: {p}\t{ou}", left.0))
        .collect();
    diff.extend(b.difference(&a).map(|(p, ou)| format!("only in {}: {p}\t{ou}", right.0)));
    diff
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let threshold = parse_threshold(&args.threshold)?;
    let db = load(&args.input, err)?;
    let options = MineOptions {
        max_len: args.max_len,
        ..Default::default()
    };
    let reference = run_algo(Algo::Oracle, &db, threshold, &options, args.oracle_budget)?;
    let two = run_algo(Algo::Osums, &db, threshold, &options, args.oracle_budget)?;
    let mut one = run_algo(Algo::OsumsPlus, &db, threshold, &options, args.oracle_budget)?;
    if args.corrupt {
        one.patterns.pop();
    }
    let mut diff = compare_results(("oracle", &reference.patterns), ("osums", &two.patterns));
    diff.extend(compare_results(("oracle", &reference.patterns), ("osums-plus", &one.patterns)));
    for line in &diff {
        let _ = writeln!(out, "{line}");
    }
    if diff.is_empty() {
        let _ = writeln!(out, "ok: {} patterns, all three miners agree", reference.patterns.len());
        Ok(())
    } else {
        Err(Failure::new(EXIT_MISMATCH, format!("{} differing entries", diff.len())))
    }
}

fn cmd_gen(args: &GenArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    if args.scale == 0 || args.periods == 0 {
        return Err(Failure::new(EXIT_USAGE, "--scale and --periods must be positive"));
    }
    let bundle = DatasetBundle::from_prefix(&args.base);
    let input = InputArgs {
        db: bundle.database,
        utils: bundle.utilities,
        shelf: bundle.shelf,
        relax_shelf: args.relax_shelf,
    };
    let base = load(&input, err)?;
    let db = generate_scaled(
        &base,
        GeneratorConfig {
            scale: args.scale,
            periods: args.periods,
            seed: args.seed,
        },
    );
    let written = write_database(&db, &args.out_prefix).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    let _ = writeln!(out, "wrote {} sequences to {}", db.sequences().len(), written.database.display());
    Ok(())
}

fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if args.items == 0 || args.periods == 0 || args.max_itemsets == 0 || args.max_itemset_len == 0 {
        return Err(Failure::new(EXIT_USAGE, "sizes must be positive"));
    }
    let db = generate_synthetic(&SynthConfig {
        sequences: args.sequences,
        items: args.items,
        periods: args.periods,
        max_itemsets: args.max_itemsets,
        max_itemset_len: args.max_itemset_len,
        max_quantity: args.max_quantity,
        max_profit: args.max_profit,
        shelf_density: args.shelf_density,
        seed: args.seed,
    });
    let written = write_database(&db, &args.out_prefix).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    let _ = writeln!(out, "wrote {} sequences to {}", db.sequences().len(), written.database.display());
    Ok(())
}

/// Strategy variants benchmarked for `algo`: the full configuration first.
pub fn bench_variants(algo: Algo, ablate: bool) -> Vec<StrategyFlags> {
    let all = StrategyFlags::all();
    let mut out = vec![all];
    if ablate {
        match algo {
            Algo::Osums => out.extend([
                StrategyFlags { ldp: false, ..all },
                StrategyFlags { lwp: false, ..all },
                StrategyFlags { arc: false, ..all },
            ]),
            Algo::OsumsPlus => out.extend([StrategyFlags { gdp: false, ..all }, StrategyFlags { gwp: false, ..all }]),
            Algo::Oracle => return out,
        }
        out.push(StrategyFlags::none());
    }
    out
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let thresholds: Vec<(String, Threshold)> = args
        .thresholds
        .iter()
        .map(|s| parse_threshold(s).map(|t| (s.trim().to_string(), t)))
        .collect::<Result<_, _>>()?;
    let db = load(&args.input, err)?;
    let algos = if args.algos.is_empty() {
        vec![Algo::Osums, Algo::OsumsPlus]
    } else {
        args.algos.clone()
    };
    let limit = time_limit(args.time_limit)?;
    let mut csv = format!("{CSV_HEADER}\n");
    for &algo in &algos {
        for flags in bench_variants(algo, args.ablate) {
            let flag_text = flags.describe(algo.relevant_flags());
            for (text, xi) in &thresholds {
                let options = MineOptions {
                    flags,
                    max_len: args.max_len,
                    time_limit: Some(limit),
                    memory_limit: None,
                };
                let row = match run_algo(algo, &db, *xi, &options, oracle::DEFAULT_BUDGET) {
                    Ok(report) => format_csv_row(algo, text, &report, &flag_text),
                    Err(f) if f.code == EXIT_LIMIT => format!("{},{text},,,,,{flag_text} (limit)", algo.name()),
                    Err(f) => return Err(f),
                };
                csv.push_str(&row);
                csv.push('\n');
            }
        }
    }
    write_text(args.out.as_deref(), &csv, out)
}

/// Runs the parsed command, writing results to `out` and diagnostics to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Mine(a) => cmd_mine(a, out, err),
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::Gen(a) => cmd_gen(a, out, err),
        Command::Synth(a) => cmd_synth(a, out),
        Command::Bench(a) => cmd_bench(a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (stdout, stderr) = (io::stdout(), io::stderr());
    run(&cli, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;
    use crate::model::UtilityRatio;
    use crate::osums_plus::mine_osums_plus_default;

    #[test]
    fn pattern_lines() {
        let m = MinedPattern {
            pattern: Pattern::from_ids(&[&[1], &[3]]),
            ou: 28,
            our: UtilityRatio::new(28, 76),
            ot: vec![crate::PeriodId(2), crate::PeriodId(3)],
        };
        assert_eq!(format_pattern_line(&m), "{1}{3}\t28\t0.368421\t2,3");
    }

    #[test]
    fn flags_outside_the_algorithm_are_usage_errors() {
        let cli = Cli::try_parse_from([
            "oshusp", "mine", "--algo", "osums", "--db", "x", "--utils", "y", "--threshold", "0.3", "--no-gdp",
        ])
        .unwrap();
        let Command::Mine(args) = &cli.command else { unreachable!() };
        assert_eq!(mine_flags(args).unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn corrupted_results_are_detected() {
        let db = running_example();
        let xi = "0.05".parse().unwrap();
        let good = mine_osums_plus_default(&db, xi).unwrap().patterns;
        assert!(compare_results(("a", &good), ("b", &good)).is_empty());

        let mut dropped = good.clone();
        let lost = dropped.remove(3);
        let diff = compare_results(("a", &good), ("b", &dropped));
        assert_eq!(diff, [format!("only in a: {}\t{}", lost.pattern, lost.ou)]);

        let mut skewed = good.clone();
        skewed[0].ou += 1;
        assert_eq!(compare_results(("a", &good), ("b", &skewed)).len(), 2);
    }

    #[test]
    fn ablation_variants() {
        assert_eq!(bench_variants(Algo::Osums, false).len(), 1);
        assert_eq!(bench_variants(Algo::Osums, true).len(), 5);
        assert_eq!(bench_variants(Algo::OsumsPlus, true).len(), 4);
        assert_eq!(
            bench_variants(Algo::OsumsPlus, true)[0].describe(Algo::OsumsPlus.relevant_flags()),
            "gdp+gwp"
        );
    }
}
