use std::cmp::Ordering;

use proptest::prelude::*;
use proptest::sample::subsequence;
use punctual_core::adversary::{SuccAdversary, SuccFixture};
use punctual_core::copy::oracle::DEFAULT_ORACLE_FUEL;
use punctual_core::copy::{
    length_lex_compare, BinString, CaseData, PathFixture, PathSource, PrefixConfig, PrefixCopier, PtimeConfig,
    PtimeCopier, PunctualConfig, PunctualCopier, SuccConfig, SuccDiagonalizer, TreeFixture, TreeSource,
};
use punctual_core::structures::{isomorphic, RpoTree, Structure};

fn bits() -> impl Strategy<Value = BinString> {
    prop::collection::vec(any::<bool>(), 0..12).prop_map(BinString::from_bits)
}

/// Shorter first, then lexicographic with 0 < 1.
fn reference(a: &BinString, b: &BinString) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.bits().cmp(b.bits()))
}

fn iso(a: &RpoTree, b: &RpoTree) -> bool {
    isomorphic(&Structure::Rpo(a.clone()), &Structure::Rpo(b.clone())).unwrap().is_some()
}

proptest! {
    #[test]
    fn binary_strings_are_totally_ordered(mut xs in prop::collection::vec(bits(), 1..20)) {
        let mut ys = xs.clone();
        xs.sort_by(length_lex_compare);
        ys.sort_by(reference);
        prop_assert_eq!(&xs, &ys);
        for w in xs.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            prop_assert_eq!(length_lex_compare(a, b), length_lex_compare(b, a).reverse());
            let r = a.rank().unwrap();
            prop_assert_eq!(BinString::from_rank(r), a.clone());
            prop_assert_eq!(a.next().rank(), Some(r + 1));
            prop_assert_eq!(length_lex_compare(a, &a.next()), Ordering::Less);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ptime_copies_are_sound(f in prop::sample::select(vec![TreeFixture::Chain, TreeFixture::BinaryGrowth, TreeFixture::Comb]),
                              horizon in 1u64..40, l in 1u64..6) {
        let config = PtimeConfig { horizon, l, fuel: DEFAULT_ORACLE_FUEL, checked: true };
        let mut c = PtimeCopier::new(TreeSource::Native(f), config);
        while c.stage < horizon {
            c.step().unwrap();
            // soundness: the copy is an embedding of the part copied so far
            let dom = c.target().restrict(|x| c.phi(x).is_some());
            prop_assert!(iso(&dom, c.image()));
            // coverage: nothing below the largest reserved string is skipped
            if let Some(top) = c.reservoir().iter().max_by(|a, b| length_lex_compare(a, b)) {
                let mut w = BinString::empty();
                while &w != top {
                    prop_assert!(c.is_used(&w), "{} skipped", w);
                    w = w.next();
                }
            }
            // neutrality: reserved strings relate to nothing
            let reserved: Vec<&BinString> = c.reservoir().iter().collect();
            for a in &reserved {
                for b in c.used() {
                    if a != &b {
                        prop_assert!(!c.relation(a, b).related() && !c.relation(b, a).related());
                    }
                }
            }
        }
    }

    #[test]
    fn prefix_copies_flush_on_jumps(horizon in 1u64..60, l in 1u64..4) {
        let mut c = PrefixCopier::new(PathSource::Native(PathFixture::BranchJump), PrefixConfig { horizon, l, fuel: DEFAULT_ORACLE_FUEL });
        while c.stage < horizon {
            let before = c.target().clone();
            let flushes = c.flushes;
            c.step().unwrap();
            prop_assert!(c.check());
            let jumped = c.target().paths().filter(|p| !before.contains(p)).any(|p| {
                let m = (0..=p.len()).rev().find(|&k| before.contains(&p[..k])).unwrap_or(0);
                p.len() >= m + 2
            });
            if jumped {
                prop_assert_eq!(c.waiting(), 0);
                prop_assert!(c.flushes > flushes);
            }
        }
    }

    #[test]
    fn successor_layers_double_or_miss_by_one(names in subsequence(vec!["full-binary", "left-spine", "full-to:2", "full-to:3", "broken"], 0..=4).prop_shuffle(),
                                              horizon in 1u64..9) {
        let advs: Vec<SuccAdversary> = names.iter().map(|n| SuccAdversary::Native(SuccFixture::parse(n).unwrap())).collect();
        let mut d = SuccDiagonalizer::new(advs, SuccConfig { horizon, ..Default::default() });
        while d.stage < horizon {
            let n = d.tree().layers().last().unwrap().len();
            d.step().unwrap();
            let s = d.stage as usize;
            let grown = d.tree().layer(s).len();
            prop_assert!(grown == 2 * n || grown == 2 * n - 1, "stage {}: {} below {}", s, grown, n);
            prop_assert_eq!(d.tree().is_full(s), grown == 2 * n);
        }
    }

    #[test]
    fn punctual_fragments_stay_isomorphic(which in 0usize..3, horizon in 1u64..50, l in 2u64..6) {
        let (f, case) = [
            (TreeFixture::StarOfPaths, CaseData::A { a: 0 }),
            (TreeFixture::IntervalOmega, CaseData::B { a: 0, u0: 1, u1: 2 }),
            (TreeFixture::IntervalZigzag, CaseData::B { a: 0, u0: 1, u1: 2 }),
        ][which].clone();
        let config = PunctualConfig { horizon, l, fuel: DEFAULT_ORACLE_FUEL, case };
        let mut c = PunctualCopier::new(TreeSource::Native(f), config).unwrap();
        let mut copied = 0;
        while c.stage < horizon {
            c.step().unwrap();
            let (dom, img) = c.fragments();
            prop_assert!(iso(&dom, &img));
            prop_assert!(dom.len() >= copied, "the copy shrank");
            copied = dom.len();
        }
    }
}
