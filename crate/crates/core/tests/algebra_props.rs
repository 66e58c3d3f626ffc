use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::sample::subsequence;
use punctual_core::boolean::{epsilon_product, generated_subalgebra, AlgebraElement, FinCofSet};
use punctual_core::modal::{odd_primes, ModalityTable, OrbitCase};
use punctual_core::Error;

fn side() -> impl Strategy<Value = FinCofSet> {
    (any::<bool>(), prop::collection::btree_set(0u64..8, 0..5))
        .prop_map(|(cof, s)| if cof { FinCofSet::cofinite(s) } else { FinCofSet::finite(s) })
}

fn element() -> impl Strategy<Value = AlgebraElement> {
    (side(), side()).prop_map(|(l, r)| AlgebraElement::new(l, r))
}

/// Membership of a point: side 0 or 1 and a natural number.
fn has(x: &AlgebraElement, side: usize, n: u64) -> bool {
    if side == 0 {
        x.left.contains(n)
    } else {
        x.right.contains(n)
    }
}

fn points() -> impl Iterator<Item = (usize, u64)> {
    // points past 8 all behave like 8
    (0..2).flat_map(|k| (0..10).map(move |n| (k, n)))
}

proptest! {
    #[test]
    fn boolean_algebra_axioms(a in element(), b in element(), c in element()) {
        let (zero, one) = (AlgebraElement::zero(), AlgebraElement::one());
        prop_assert_eq!(a.join(&b), b.join(&a));
        prop_assert_eq!(a.meet(&b), b.meet(&a));
        prop_assert_eq!(a.join(&b.join(&c)), a.join(&b).join(&c));
        prop_assert_eq!(a.meet(&b.join(&c)), a.meet(&b).join(&a.meet(&c)));
        prop_assert_eq!(a.join(&a.meet(&b)), a.clone());
        prop_assert_eq!(a.join(&a.complement()), one.clone());
        prop_assert_eq!(a.meet(&a.complement()), zero.clone());
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert_eq!(a.leq(&b), a.meet(&b) == a);
        for (k, n) in points() {
            prop_assert_eq!(has(&a.join(&b), k, n), has(&a, k, n) || has(&b, k, n));
            prop_assert_eq!(has(&a.complement(), k, n), !has(&a, k, n));
        }
    }

    #[test]
    fn frechet_elements_are_closed(a in element(), b in element()) {
        let (a, b) = (a.meet(&b.complement()), b);
        if a.is_frechet() && b.is_frechet() {
            prop_assert!(a.join(&b).is_frechet());
            prop_assert!(a.meet(&b).is_frechet());
            prop_assert!(!a.complement().is_frechet());
        }
        prop_assert_eq!(a.atoms().is_some(), a.is_frechet());
        if let Some(atoms) = a.atoms() {
            prop_assert_eq!(AlgebraElement::from_atoms(atoms), a);
        }
    }

    #[test]
    fn epsilon_products_partition_one(gens in prop::collection::vec(element(), 1..5)) {
        let n = gens.len();
        let products: Vec<AlgebraElement> = (0..1u32 << n)
            .map(|m| epsilon_product(&gens, &(0..n).map(|i| m >> i & 1 == 1).collect::<Vec<_>>()).unwrap())
            .collect();
        let mut all = AlgebraElement::zero();
        for (i, p) in products.iter().enumerate() {
            for q in &products[i + 1..] {
                prop_assert!(p.meet(q).is_zero());
            }
            all = all.join(p);
        }
        prop_assert!(all.is_one());
        prop_assert!(matches!(epsilon_product(&gens, &[]), Err(Error::LengthMismatch(..))));
    }

    #[test]
    fn subalgebra_atoms_generate(gens in prop::collection::vec(element(), 1..5)) {
        let sub = generated_subalgebra(&gens);
        let mut all = AlgebraElement::zero();
        for (i, a) in sub.atoms.iter().enumerate() {
            prop_assert!(!a.is_zero());
            for b in &sub.atoms[i + 1..] {
                prop_assert!(a.meet(b).is_zero());
            }
            all = all.join(a);
        }
        prop_assert!(all.is_one());
        for g in &gens {
            prop_assert!(sub.contains(g));
            let below = sub.atoms.iter().filter(|a| a.leq(g)).fold(AlgebraElement::zero(), |x, a| x.join(a));
            prop_assert_eq!(&below, g);
        }
        // every atom is an epsilon product of the generators
        for a in &sub.atoms {
            let eps: Vec<bool> = gens.iter().map(|g| a.leq(g)).collect();
            prop_assert_eq!(&epsilon_product(&gens, &eps).unwrap(), a);
        }
    }
}

fn table_with(primes: &[u64]) -> ModalityTable {
    let mut t = ModalityTable::new();
    for &p in primes {
        t.add_p_cycle(p).unwrap();
    }
    t
}

fn installed() -> impl Strategy<Value = (Vec<u64>, Vec<bool>)> {
    let ps: Vec<u64> = odd_primes().take(5).collect();
    subsequence(ps, 1..=4)
        .prop_shuffle()
        .prop_flat_map(|ps| {
            let atoms: usize = ps.iter().sum::<u64>() as usize;
            (Just(ps), prop::collection::vec(any::<bool>(), atoms))
        })
}

fn join_of(t: &ModalityTable, pick: &[bool]) -> AlgebraElement {
    let atoms = t.cycles().iter().flat_map(|c| c.atoms());
    atoms
        .zip(pick)
        .filter(|(_, &b)| b)
        .fold(AlgebraElement::zero(), |x, (a, _)| x.join(&a.element()))
}

proptest! {
    #[test]
    fn modality_axioms((ps, pick) in installed(), split in any::<u64>()) {
        let t = table_with(&ps);
        let x = join_of(&t, &pick);
        let other: Vec<bool> = pick.iter().enumerate().map(|(i, &b)| b ^ (split >> (i % 64) & 1 == 1)).collect();
        let y = join_of(&t, &other);
        let f = |e: &AlgebraElement| t.apply(e).unwrap();
        prop_assert!(f(&AlgebraElement::zero()).is_zero());
        prop_assert!(f(&AlgebraElement::one()).is_one());
        prop_assert_eq!(f(&x.join(&y)), f(&x).join(&f(&y)));
        // everything outside the Frechet ideal goes to 1
        prop_assert!(f(&AlgebraElement::top0()).is_one());
        // a permutation of the installed atoms, hence injective there
        if x != y {
            prop_assert_ne!(f(&x), f(&y));
        }
        prop_assert_eq!(f(&x).atoms().map(|a| a.len()), x.atoms().map(|a| a.len()));
    }

    #[test]
    fn duplicate_primes_are_refused((ps, _) in installed(), again in any::<prop::sample::Index>()) {
        let mut t = table_with(&ps);
        let p = ps[again.index(ps.len())];
        prop_assert!(t.add_p_cycle(p).is_err());
        prop_assert!(t.add_p_cycle(9).is_err());
        prop_assert_eq!(t.cycles().len(), ps.len());
        let sizes: BTreeSet<u64> = t.cycles().iter().map(|c| c.size).collect();
        prop_assert_eq!(sizes.len(), ps.len());
    }

    #[test]
    fn orbit_lengths_are_prime_products((ps, pick) in installed()) {
        let t = table_with(&ps);
        let x = join_of(&t, &pick);
        prop_assume!(!x.is_zero());
        let mut n = 1u128;
        let mut cur = t.apply(&x).unwrap();
        while cur != x {
            cur = t.apply(&cur).unwrap();
            n += 1;
        }
        // the cycles met by x, and which of them x covers entirely
        let mut met = Vec::new();
        let mut offset = 0;
        for c in t.cycles() {
            let k = c.size as usize;
            let here = &pick[offset..offset + k];
            // the whole cycle is fixed; any other nonempty part moves with period p
            if !here.iter().all(|&b| b) && here.iter().any(|&b| b) {
                met.push(c.size);
            }
            offset += k;
        }
        let expect: u128 = met.iter().map(|&p| p as u128).product();
        prop_assert_eq!(n, expect);
        match t.classify_orbit(&x).unwrap() {
            OrbitCase::Fixed => prop_assert_eq!(n, 1),
            OrbitCase::Cycle { n: m, primes } => {
                prop_assert_eq!(m, n);
                let mut primes = primes;
                primes.sort_unstable();
                met.sort_unstable();
                prop_assert_eq!(primes, met);
            }
            OrbitCase::NonFrechet => prop_assert!(false, "installed atoms are Frechet"),
        }
    }
}
