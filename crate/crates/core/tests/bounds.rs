//! Chain-based utilities and bounds against direct scans, and the upper
//! bounds against the true utilities of every descendant.

use std::collections::BTreeSet;

use oshusp::ingest::{generate_synthetic, SynthConfig};
use oshusp::oracle::{self, enumerate_all_patterns, DEFAULT_BUDGET};
use oshusp::projection::{on_shelf_stats, project, Scope};
use oshusp::qmatrix::build_matrices;
use oshusp::{Pattern, TemporalDatabase};
use proptest::prelude::*;

fn small_db() -> impl Strategy<Value = TemporalDatabase> {
    (1usize..=5, 1u32..=5, 1u32..=3, any::<u64>()).prop_map(|(sequences, items, periods, seed)| {
        generate_synthetic(&SynthConfig {
            sequences,
            items,
            periods,
            max_itemsets: 4,
            max_itemset_len: 3,
            max_quantity: 4,
            max_profit: 6,
            shelf_density: 0.5,
            seed,
        })
    })
}

fn is_prefix(prefix: &Pattern, r: &Pattern) -> bool {
    r.ancestors().contains(prefix)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chains_agree_with_scans(db in small_db()) {
        let store = build_matrices(&db);
        let all = enumerate_all_patterns(&db, 4, DEFAULT_BUDGET).unwrap();
        for r in &all {
            let chain = project(r, &store, Scope::AllPeriods);
            for &t in db.periods() {
                prop_assert_eq!(chain.periodical_utility(t), oracle::periodical_utility(r, t, &db));
                prop_assert_eq!(chain.tpeu(t), oracle::tpeu(r, Some(t), &db));
                let local = project(r, &store, Scope::Period(t));
                prop_assert_eq!(local.tpeu(t), chain.tpeu(t));
            }
            prop_assert_eq!(chain.tpeu_total(), oracle::tpeu(r, None, &db));
            let stats = on_shelf_stats(&chain, db.shelf(), store.aggregates());
            let reference = oracle::score(r, &db);
            prop_assert_eq!(stats.ou, reference.ou);
            prop_assert_eq!(stats.our(), reference.our);
            prop_assert_eq!(stats.ot.into_iter().collect::<Vec<_>>(), reference.ot);
        }
    }

    #[test]
    fn extension_rsu_matches_scan(db in small_db()) {
        let store = build_matrices(&db);
        for r in enumerate_all_patterns(&db, 3, DEFAULT_BUDGET).unwrap() {
            let chain = project(&r, &store, Scope::AllPeriods);
            let ext = oshusp::projection::find_extension_items(&chain, &store);
            for (item, kind, trsu) in ext.iter() {
                let child = r.extend(item, kind).unwrap();
                prop_assert_eq!(trsu, oracle::trsu(&child, None, &db), "{}", child);
            }
        }
    }

    #[test]
    fn bounds_dominate_descendants(db in small_db()) {
        let all: BTreeSet<Pattern> = enumerate_all_patterns(&db, 5, DEFAULT_BUDGET).unwrap();
        for r in &all {
            let local: Vec<_> = db.periods().iter().map(|&t| (t, oracle::tpeu(r, Some(t), &db))).collect();
            let global = oracle::tpeu(r, None, &db);
            let rsu = oracle::trsu(r, None, &db);
            let r_den = oracle::score(r, &db).our.den;
            for d in all.iter().filter(|d| is_prefix(r, d)) {
                let scored = oracle::score(d, &db);
                // period-local depth bound
                for &(t, bound) in &local {
                    prop_assert!(oracle::periodical_utility(d, t, &db) <= bound);
                }
                // global depth and width bounds
                prop_assert!(scored.ou <= global);
                prop_assert!(scored.ou <= rsu);
                // descendants never shrink the denominator
                prop_assert!(scored.our.den >= r_den);
            }
            prop_assert!(oracle::score(r, &db).ou <= rsu);
        }
    }
}
