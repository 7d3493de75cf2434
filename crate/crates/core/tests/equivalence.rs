//! Both miners against the exhaustive reference miner on random databases.

use oshusp::ingest::{generate_synthetic, SynthConfig};
use oshusp::oracle::{filter_by_threshold, score_all, DEFAULT_BUDGET};
use oshusp::osums::mine_osums;
use oshusp::osums_plus::mine_osums_plus;
use oshusp::{MineOptions, StrategyFlags, TemporalDatabase, Threshold};
use proptest::prelude::*;

fn small_db() -> impl Strategy<Value = TemporalDatabase> {
    (1usize..=6, 1u32..=6, 1u32..=3, any::<u64>(), 0.2f64..0.9).prop_map(
        |(sequences, items, periods, seed, shelf_density)| {
            generate_synthetic(&SynthConfig {
                sequences,
                items,
                periods,
                max_itemsets: 4,
                max_itemset_len: 3,
                max_quantity: 4,
                max_profit: 6,
                shelf_density,
                seed,
            })
        },
    )
}

fn thresholds() -> [Threshold; 3] {
    ["0.05", "0.2", "0.5"].map(|s| s.parse().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn miners_match_the_oracle(db in small_db()) {
        let cap = db.max_sequence_length().max(1);
        let scored = score_all(&db, cap, DEFAULT_BUDGET).unwrap();
        for xi in thresholds() {
            let expected = filter_by_threshold(&scored, xi);
            let two = mine_osums(&db, xi, &MineOptions::default()).unwrap();
            let one = mine_osums_plus(&db, xi, &MineOptions::default()).unwrap();
            prop_assert_eq!(&two.patterns, &expected, "two-phase, xi = {}", xi);
            prop_assert_eq!(&one.patterns, &expected, "one-phase, xi = {}", xi);
        }
    }

    #[test]
    fn disabling_a_strategy_is_lossless(db in small_db(), which in 0usize..6) {
        let flags = match which {
            0 => StrategyFlags { ldp: false, ..StrategyFlags::all() },
            1 => StrategyFlags { lwp: false, ..StrategyFlags::all() },
            2 => StrategyFlags { arc: false, ..StrategyFlags::all() },
            3 => StrategyFlags { gdp: false, ..StrategyFlags::all() },
            4 => StrategyFlags { gwp: false, ..StrategyFlags::all() },
            _ => StrategyFlags::none(),
        };
        let ablated = MineOptions::with_flags(flags);
        for xi in thresholds() {
            let full = mine_osums(&db, xi, &MineOptions::default()).unwrap();
            let cut = mine_osums(&db, xi, &ablated).unwrap();
            prop_assert_eq!(&full.patterns, &cut.patterns);
            prop_assert!(full.candidates_generated <= cut.candidates_generated);

            let full = mine_osums_plus(&db, xi, &MineOptions::default()).unwrap();
            let cut = mine_osums_plus(&db, xi, &ablated).unwrap();
            prop_assert_eq!(&full.patterns, &cut.patterns);
            prop_assert!(full.candidates_generated <= cut.candidates_generated);
        }
    }
}
