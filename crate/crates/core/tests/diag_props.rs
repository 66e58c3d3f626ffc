use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::sample::{subsequence, Index};
use punctual_core::adversary::{ModalAdversary, ModalFixture, PosetAdversary, PosetFixture};
use punctual_core::lattice::join_meet;
use punctual_core::modal_diag::{self, replay_deactivations, verify_run, ModalRunConfig};
use punctual_core::poset_diag::{Certificate, PosetConstruction, PosetRunConfig};
use punctual_core::structures::{FinitePosetTree, NodeId};

fn up(t: &FinitePosetTree, x: NodeId) -> Vec<NodeId> {
    let mut out = vec![x];
    while let Some(p) = t.parent(*out.last().unwrap()) {
        out.push(p);
    }
    out
}

fn poset_names() -> Vec<&'static str> {
    vec!["mirror:1", "mirror:2", "mirror:3", "chain", "non-tree", "axiom-violator", "heap"]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn poset_construction_invariants(names in subsequence(poset_names(), 0..=4).prop_shuffle(), horizon in 1u64..10) {
        let advs: Vec<PosetAdversary> = names.iter().map(|n| PosetAdversary::Native(PosetFixture::parse(n).unwrap())).collect();
        let mut c = PosetConstruction::new(advs, PosetRunConfig { horizon, ..Default::default() });
        let mut prev_len = 1;
        let mut frozen: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut settled: BTreeMap<usize, Certificate> = BTreeMap::new();
        for _ in 0..horizon {
            let before = c.tree.clone();
            c.step().unwrap();
            let t = &c.tree;
            // growth: the old tree survives as an up-closed part
            prop_assert!(t.len() >= prev_len);
            for x in before.nodes() {
                prop_assert_eq!(t.parent(x), before.parent(x));
            }
            prev_len = t.len();
            let lengths: Vec<usize> = t.nodes().filter(|&x| t.children(x).len() >= 2).map(|x| up(t, x).len()).collect();
            let distinct: BTreeSet<usize> = lengths.iter().copied().collect();
            prop_assert_eq!(distinct.len(), lengths.len(), "branching lengths repeat");
            let mut per_level: BTreeMap<usize, usize> = BTreeMap::new();
            for &b in &c.blocked {
                let level = up(t, b)[1..].iter().filter(|&&a| t.children(a).len() >= 2).count();
                prop_assert!(level > 0);
                *per_level.entry(level).or_default() += 1;
            }
            prop_assert!(per_level.values().all(|&k| k <= 1));
            frozen.retain(|x, _| c.blocked.contains(x));
            for &b in &c.blocked {
                let size = t.subtree_size(b);
                prop_assert_eq!(*frozen.entry(b).or_insert(size), size, "blocked subtree grew");
            }
            // deficits and disqualifications, once found, persist; the
            // adversary's side of a deficit may only grow
            for (i, cert) in c.certificates().into_iter().enumerate() {
                match (settled.get(&i), &cert) {
                    (Some(Certificate::BlockedDeficit(old)), Certificate::BlockedDeficit(new)) => {
                        prop_assert_eq!((old.node, old.since, old.t_size, old.image), (new.node, new.since, new.t_size, new.image));
                        prop_assert!(new.p_size >= old.p_size && new.p_size > new.t_size);
                    }
                    (Some(old), _) => prop_assert_eq!(old, &cert),
                    (None, Certificate::BlockedDeficit(_) | Certificate::NotPosetTree { .. }) => {
                        settled.insert(i, cert);
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn join_meet_is_the_least_common_ancestor(picks in prop::collection::vec(any::<Index>(), 0..25), x in any::<Index>(), y in any::<Index>()) {
        let edges = picks.iter().enumerate().map(|(i, p)| (i as NodeId + 1, p.index(i + 1) as NodeId));
        let t = FinitePosetTree::from_parents(0, edges).unwrap();
        let (x, y) = (x.index(t.len()) as NodeId, y.index(t.len()) as NodeId);
        let (ux, uy) = (up(&t, x), up(&t, y));
        let lub = *ux.iter().find(|z| uy.contains(z)).unwrap();
        let jm = join_meet(&t, x, y).unwrap();
        prop_assert_eq!(jm.join, lub);
        prop_assert_eq!(jm.meet_reversed, lub);
        let below = |u: &[NodeId]| u.iter().position(|&z| z == lub).unwrap() as u32;
        let comparable = lub == x || lub == y;
        prop_assert_eq!(jm.steps, if comparable { 0 } else { below(&ux) + below(&uy) });
    }
}

fn modal_names() -> Vec<&'static str> {
    vec![
        "honest", "mirror:1", "mirror:2", "orbit-nine", "all-threes", "non-injective", "axiom-breaker", "shrunk-top",
        "fixed-point", "double-one", "big-cycle:101",
    ]
}

fn largest_prime_factor(mut n: u128) -> u128 {
    let (mut best, mut p) = (1, 2);
    while p * p <= n {
        while n % p == 0 {
            best = p;
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        n
    } else {
        best
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn modal_construction_invariants(names in subsequence(modal_names(), 0..=4).prop_shuffle(), horizon in 1u64..6) {
        let advs: Vec<ModalAdversary> = names.iter().map(|n| ModalAdversary::Native(ModalFixture::parse(n).unwrap())).collect();
        let config = ModalRunConfig { horizon, ..Default::default() };
        let (trace, out) = modal_diag::run_construction(&advs, config).unwrap();
        verify_run(&trace).unwrap();
        replay_deactivations(&trace, &advs, config.fuel, config.m_cap, config.iterate_cap).unwrap();

        let mut cycles = BTreeSet::new();
        let mut forbidden = BTreeSet::new();
        let mut forbid_stages = BTreeSet::new();
        let mut on_alert: Option<u64> = None;
        let mut promoted = BTreeSet::new();
        let mut dead = BTreeSet::new();
        for r in trace.body() {
            let req: Option<u64> = r.get("req").and_then(|v| v.parse().ok());
            match r.get("event").unwrap() {
                "cycle" => {
                    let p: u64 = r.get("p").unwrap().parse().unwrap();
                    prop_assert!(cycles.insert(p), "two {}-cycles", p);
                    prop_assert!(!forbidden.contains(&p), "{} installed after being forbidden", p);
                }
                "forbid" => {
                    forbid_stages.insert(r.get("stage").unwrap().to_string());
                    forbidden.insert(r.get("prime").unwrap().parse::<u64>().unwrap());
                }
                "dagger" => {
                    let p: u128 = r.get("prime").unwrap().parse().unwrap();
                    if let Ok(n) = r.get("orbit").unwrap().parse::<u128>() {
                        prop_assert!(largest_prime_factor(n) > p, "orbit {} against prime {}", n, p);
                    }
                }
                "promote" => {
                    let e = req.unwrap();
                    prop_assert!(on_alert.is_none(), "R{} promoted while R{:?} is on alert", e, on_alert);
                    let least = (0..advs.len() as u64).find(|i| !promoted.contains(i) && !dead.contains(i));
                    prop_assert_eq!(Some(e), least);
                    promoted.insert(e);
                    on_alert = Some(e);
                }
                "alert" if r.get("witness").is_some() => on_alert = None,
                "deactivate" => {
                    let e = req.unwrap();
                    dead.insert(e);
                    if on_alert == Some(e) {
                        on_alert = None;
                    }
                }
                _ => {}
            }
        }
        // one cycle per stage, except on stages that forbid a prime
        prop_assert_eq!(cycles.len() + forbid_stages.len(), horizon as usize);
        prop_assert_eq!(&out.forbidden, &forbidden);
    }
}
