//! Scripted adversaries with known behaviour, used by tests and configs.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;

use super::encoding::{element_id, element_of};
use super::{ModalOp, SuccOp};
use crate::boolean::{AlgebraElement, Atom, FinCofSet};
use crate::error::{Error, Result};
use crate::modal::{is_prime, ModalityTable};
use crate::structures::{induced_order, FinitePosetTree, NodeId, Violation};

// ---------------------------------------------------------------- posets

#[derive(Clone)]
pub enum PosetFixture {
    /// The tree the construction builds when unopposed, with ids reversed
    /// inside consecutive blocks of `delay` ids.
    DelayedMirror { delay: u32, cache: RefCell<FinitePosetTree> },
    /// `x <= y` iff `y <= x` as numbers: a single infinite chain.
    Chain,
    /// A poset tree until id 3 appears below both 1 and 2.
    NonTree,
    /// A complete binary tree with `3 <= 3` false.
    AxiomViolator,
    /// The complete binary tree in heap order.
    Heap,
}

impl fmt::Debug for PosetFixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl PosetFixture {
    pub fn mirror(delay: u32) -> Self {
        assert!(delay >= 1, "delay counts ids per block");
        PosetFixture::DelayedMirror {
            delay,
            cache: RefCell::new(FinitePosetTree::singleton(0)),
        }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(d) = spec.strip_prefix("mirror:") {
            let d: u32 = d.parse().map_err(|_| Error::Config(format!("bad mirror delay in {spec:?}")))?;
            if d == 0 {
                return Err(Error::Config("mirror delay must be at least 1".into()));
            }
            return Ok(Self::mirror(d));
        }
        match spec {
            "chain" => Ok(PosetFixture::Chain),
            "non-tree" => Ok(PosetFixture::NonTree),
            "axiom-violator" => Ok(PosetFixture::AxiomViolator),
            "heap" => Ok(PosetFixture::Heap),
            _ => Err(Error::Config(format!("unknown poset fixture {spec:?}"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            PosetFixture::DelayedMirror { delay, .. } => format!("mirror:{delay}"),
            PosetFixture::Chain => "chain".into(),
            PosetFixture::NonTree => "non-tree".into(),
            PosetFixture::AxiomViolator => "axiom-violator".into(),
            PosetFixture::Heap => "heap".into(),
        }
    }

    /// Whether the fixture really is a poset tree (so the construction owes
    /// it a non-isomorphism certificate rather than a disqualification).
    pub fn is_poset_tree(&self) -> bool {
        !matches!(self, PosetFixture::NonTree | PosetFixture::AxiomViolator)
    }

    fn sigma(delay: u32, x: u64) -> u64 {
        let d = delay as u64;
        let block = x / d;
        block * d + (d - 1 - x % d)
    }

    /// Grows the cached unopposed tree until it holds every id below `n`.
    fn ensure(cache: &RefCell<FinitePosetTree>, n: u64) {
        let mut t = cache.borrow_mut();
        while (t.len() as u64) < n {
            crate::poset_diag::expand(&mut t, &BTreeSet::new()).expect("unopposed expansion always has open leaves");
        }
    }

    pub fn leq(&self, x: u64, y: u64) -> bool {
        match self {
            PosetFixture::DelayedMirror { delay, cache } => {
                let (a, b) = (Self::sigma(*delay, x), Self::sigma(*delay, y));
                Self::ensure(cache, a.max(b) + 1);
                cache.borrow().leq(a as NodeId, b as NodeId)
            }
            PosetFixture::Chain => y <= x,
            PosetFixture::NonTree => up_non_tree(x).contains(&y),
            PosetFixture::AxiomViolator => !(x == 3 && y == 3) && heap_leq(x, y),
            PosetFixture::Heap => heap_leq(x, y),
        }
    }

    /// Up-sets of the restriction to `{0, ..., n-1}`, sorted.
    pub fn up_sets(&self, n: usize) -> Vec<Vec<usize>> {
        let n64 = n as u64;
        match self {
            PosetFixture::DelayedMirror { delay, cache } => {
                let d = *delay as u64;
                Self::ensure(cache, n64.div_ceil(d) * d);
                let t = cache.borrow();
                (0..n64)
                    .map(|x| {
                        let mut u: Vec<usize> = std::iter::once(Self::sigma(*delay, x) as NodeId)
                            .chain(t.ancestors(Self::sigma(*delay, x) as NodeId))
                            .map(|a| Self::sigma(*delay, a as u64))
                            .filter(|&a| a < n64)
                            .map(|a| a as usize)
                            .collect();
                        u.sort_unstable();
                        u
                    })
                    .collect()
            }
            PosetFixture::Chain => (0..n).map(|x| (0..=x).collect()).collect(),
            PosetFixture::NonTree => (0..n64)
                .map(|x| up_non_tree(x).into_iter().filter(|&y| y < n64).map(|y| y as usize).collect())
                .collect(),
            PosetFixture::AxiomViolator | PosetFixture::Heap => (0..n64)
                .map(|x| {
                    let mut u: Vec<usize> = heap_up(x).into_iter().map(|y| y as usize).collect();
                    if matches!(self, PosetFixture::AxiomViolator) && x == 3 {
                        u.retain(|&y| y != 3);
                    }
                    u.sort_unstable();
                    u
                })
                .collect(),
        }
    }
}

/// Non-tree fixtures are judged on this prefix once the table is larger:
/// their violation is already visible there and persists.
pub const VIOLATION_PREFIX: usize = 8;

impl PosetFixture {
    /// The restriction to `{0, ..., n-1}` as a poset tree on those ids, or a
    /// clause it breaks, without materialising the (possibly dense) table.
    pub fn approximation(&self, n: usize) -> Result<FinitePosetTree, Violation> {
        let ids = |m: usize| (0..m as NodeId).collect::<Vec<_>>();
        match self {
            PosetFixture::DelayedMirror { delay, cache } => {
                if n == 0 {
                    return FinitePosetTree::from_upsets(&[], Vec::new());
                }
                let d = *delay as u64;
                let n64 = n as u64;
                Self::ensure(cache, n64.div_ceil(d) * d);
                let t = cache.borrow();
                induced_order(&t, |a| Self::sigma(*delay, a as u64) < n64, |a| Self::sigma(*delay, a as u64) as NodeId)
            }
            PosetFixture::Chain if n > 0 => FinitePosetTree::from_parents(0, (1..n as NodeId).map(|x| (x, x - 1))),
            PosetFixture::Heap if n > 0 => FinitePosetTree::from_parents(0, (1..n as NodeId).map(|x| (x, (x - 1) / 2))),
            PosetFixture::NonTree | PosetFixture::AxiomViolator if n > VIOLATION_PREFIX => {
                match FinitePosetTree::from_upsets(&ids(VIOLATION_PREFIX), self.up_sets(VIOLATION_PREFIX)) {
                    Err(v) => Err(v),
                    Ok(_) => unreachable!("the violation lies within the prefix"),
                }
            }
            _ => FinitePosetTree::from_upsets(&ids(n), self.up_sets(n)),
        }
    }
}

fn up_non_tree(x: u64) -> BTreeSet<u64> {
    match x {
        0 => [0].into(),
        1 => [0, 1].into(),
        2 => [0, 2].into(),
        _ => [0, 1, 2].into_iter().chain(3..=x).collect(),
    }
}

fn heap_up(mut x: u64) -> Vec<u64> {
    let mut out = vec![x];
    while x > 0 {
        x = (x - 1) / 2;
        out.push(x);
    }
    out
}

fn heap_leq(x: u64, y: u64) -> bool {
    heap_up(x).contains(&y)
}

// ---------------------------------------------------------------- modal

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CycleTail {
    /// Consecutive odd primes starting at the given one.
    PrimesFrom(u64),
    /// The same size forever.
    Repeat(u64),
}

/// Deliberate departures from an honest algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quirk {
    None,
    /// `meet(a, b)` answers with the join whenever `a > b` as ids.
    LopsidedMeet,
    /// `T1` is reported without the atom `v0`.
    ShrunkTop1,
}

/// `B(N) x B(N)` with the modality of an atom map made of cycles, in the
/// standard id encoding with optional id swaps, overrides and quirks.
#[derive(Clone)]
pub struct ModalFixture {
    name: String,
    prefix: Vec<u64>,
    tail: CycleTail,
    overrides: BTreeMap<Atom, AlgebraElement>,
    swaps: BTreeMap<BigUint, BigUint>,
    quirk: Quirk,
    table: RefCell<ModalityTable>,
}

impl fmt::Debug for ModalFixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl ModalFixture {
    pub fn new(name: impl Into<String>, prefix: Vec<u64>, tail: CycleTail) -> Self {
        for &p in &prefix {
            assert!(p % 2 == 1, "cycle sizes are odd");
        }
        match tail {
            CycleTail::PrimesFrom(p) => assert!(p >= 3 && is_prime(p)),
            CycleTail::Repeat(p) => assert!(p >= 3 && p % 2 == 1),
        }
        ModalFixture {
            name: name.into(),
            prefix,
            tail,
            overrides: BTreeMap::new(),
            swaps: BTreeMap::new(),
            quirk: Quirk::None,
            table: RefCell::new(ModalityTable::new()),
        }
    }

    pub fn with_override(mut self, a: Atom, image: AlgebraElement) -> Self {
        self.overrides.insert(a, image);
        self
    }

    /// Exchanges two ids of the presentation.
    pub fn with_swap(mut self, a: u64, b: u64) -> Self {
        let (a, b) = (BigUint::from(a), BigUint::from(b));
        assert!(!self.swaps.contains_key(&a) && !self.swaps.contains_key(&b), "swaps must be disjoint");
        self.swaps.insert(a.clone(), b.clone());
        self.swaps.insert(b, a);
        self
    }

    pub fn with_quirk(mut self, q: Quirk) -> Self {
        self.quirk = q;
        self
    }

    /// Every odd prime once, in order: the unopposed construction's algebra.
    pub fn honest() -> Self {
        Self::new("honest", vec![], CycleTail::PrimesFrom(3))
    }

    /// The honest algebra missing its first `delay` primes.
    pub fn delayed_mirror(delay: usize) -> Self {
        let p = crate::modal::nth_odd_prime(delay + 1);
        Self::new(format!("mirror:{delay}"), vec![], CycleTail::PrimesFrom(p))
    }

    /// A 3-cycle, then a 9-cycle, then the odd primes from 5.
    pub fn orbit_nine() -> Self {
        Self::new("orbit-nine", vec![3, 9], CycleTail::PrimesFrom(5))
    }

    /// Infinitely many 3-cycles.
    pub fn all_threes() -> Self {
        Self::new("all-threes", vec![], CycleTail::Repeat(3))
    }

    /// A single cycle of size `p`, then the odd primes from 3.
    pub fn big_cycle(p: u64) -> Self {
        Self::new(format!("big-cycle:{p}"), vec![p], CycleTail::PrimesFrom(3))
    }

    /// The first 3-cycle folds back onto `v0`: `f(u1) = f(u0)`.
    pub fn non_injective() -> Self {
        Self::new("non-injective", vec![], CycleTail::PrimesFrom(3))
            .with_override(Atom::U(1), AlgebraElement::v(0))
    }

    /// Meets are not commutative.
    pub fn axiom_breaker() -> Self {
        Self::honest().with_quirk(Quirk::LopsidedMeet).renamed("axiom-breaker")
    }

    /// `T0 join T1` misses an atom.
    pub fn shrunk_top() -> Self {
        Self::honest().with_quirk(Quirk::ShrunkTop1).renamed("shrunk-top")
    }

    /// `u0` is a fixed point, and ids 0, 1 present `u0` and `T0 - u0`.
    pub fn fixed_point() -> Self {
        Self::new("fixed-point", vec![1], CycleTail::PrimesFrom(3)).with_swap(0, 4).with_swap(1, 5)
    }

    /// `f(u0) = f(u1) = 1`, and ids 0, 1 present `u0` and `u1`.
    pub fn double_one() -> Self {
        Self::honest()
            .with_override(Atom::U(0), AlgebraElement::one())
            .with_override(Atom::U(1), AlgebraElement::one())
            .with_swap(0, 4)
            .with_swap(1, 8)
            .renamed("double-one")
    }

    fn renamed(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let num = |s: &str| -> Result<u64> { s.parse().map_err(|_| Error::Config(format!("bad number in {spec:?}"))) };
        if let Some(d) = spec.strip_prefix("mirror:") {
            return Ok(Self::delayed_mirror(num(d)? as usize));
        }
        if let Some(p) = spec.strip_prefix("big-cycle:") {
            let p = num(p)?;
            if p < 3 || p % 2 == 0 {
                return Err(Error::Config(format!("big-cycle size must be odd and at least 3, got {p}")));
            }
            return Ok(Self::big_cycle(p));
        }
        match spec {
            "honest" => Ok(Self::honest()),
            "orbit-nine" => Ok(Self::orbit_nine()),
            "all-threes" => Ok(Self::all_threes()),
            "non-injective" => Ok(Self::non_injective()),
            "axiom-breaker" => Ok(Self::axiom_breaker()),
            "shrunk-top" => Ok(Self::shrunk_top()),
            "fixed-point" => Ok(Self::fixed_point()),
            "double-one" => Ok(Self::double_one()),
            _ => Err(Error::Config(format!("unknown modal fixture {spec:?}"))),
        }
    }

    pub fn name(&self) -> String {
        self.name.clone()
    }

    fn cycle_size(&self, index: usize) -> u64 {
        if let Some(&p) = self.prefix.get(index) {
            return p;
        }
        let k = index - self.prefix.len();
        match self.tail {
            CycleTail::Repeat(p) => p,
            CycleTail::PrimesFrom(p) => crate::modal::odd_primes().skip_while(|&q| q < p).nth(k).unwrap(),
        }
    }

    fn g(&self, a: Atom) -> AlgebraElement {
        if let Some(img) = self.overrides.get(&a) {
            return img.clone();
        }
        let mut t = self.table.borrow_mut();
        loop {
            if let Some(img) = t.g(a) {
                return img.clone();
            }
            let size = self.cycle_size(t.cycles().len());
            t.add_cycle_of_size(size);
        }
    }

    /// The modality on elements of `B(N) x B(N)`.
    pub fn modality(&self, x: &AlgebraElement) -> AlgebraElement {
        if x.is_zero() {
            return AlgebraElement::zero();
        }
        match x.atoms() {
            None => AlgebraElement::one(),
            Some(atoms) => atoms.into_iter().fold(AlgebraElement::zero(), |acc, a| acc.join(&self.g(a))),
        }
    }

    fn to_std(&self, id: &BigUint) -> AlgebraElement {
        element_of(self.swaps.get(id).unwrap_or(id))
    }

    fn from_std(&self, x: &AlgebraElement) -> BigUint {
        let id = element_id(x);
        self.swaps.get(&id).cloned().unwrap_or(id)
    }

    /// Id under which this presentation shows a standard element.
    pub fn id_of(&self, x: &AlgebraElement) -> BigUint {
        self.from_std(x)
    }

    /// Standard element behind an id of this presentation.
    pub fn element(&self, id: &BigUint) -> AlgebraElement {
        self.to_std(id)
    }

    pub fn call(&self, op: ModalOp, args: &[BigUint]) -> Result<BigUint> {
        if args.len() != op.arity() {
            return Err(Error::LengthMismatch(op.arity(), args.len()));
        }
        let x: Vec<AlgebraElement> = args.iter().map(|a| self.to_std(a)).collect();
        let out = match op {
            ModalOp::Zero => AlgebraElement::zero(),
            ModalOp::One => AlgebraElement::one(),
            ModalOp::Top0 => AlgebraElement::top0(),
            ModalOp::Top1 => match self.quirk {
                Quirk::ShrunkTop1 => AlgebraElement::new(FinCofSet::empty(), FinCofSet::cofinite([0])),
                _ => AlgebraElement::top1(),
            },
            ModalOp::Join => x[0].join(&x[1]),
            ModalOp::Meet => {
                if self.quirk == Quirk::LopsidedMeet && args[0] > args[1] {
                    x[0].join(&x[1])
                } else {
                    x[0].meet(&x[1])
                }
            }
            ModalOp::Comp => x[0].complement(),
            ModalOp::F => self.modality(&x[0]),
        };
        Ok(self.from_std(&out))
    }
}

// ---------------------------------------------------------------- successor trees

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SuccFixture {
    /// Heap order: `S1(x) = 2x`, `S2(x) = 2x + 1`, empty node 0, root 1.
    FullBinary,
    /// Only left children: `S1(x) = x + 1`, `S2(x) = 0`.
    LeftSpine,
    /// Full binary down to depth `d`, then only left children.
    FullTo(u32),
    /// `S1` moves the empty node.
    Broken,
}

impl SuccFixture {
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(d) = spec.strip_prefix("full-to:") {
            let d = d.parse().map_err(|_| Error::Config(format!("bad depth in {spec:?}")))?;
            return Ok(SuccFixture::FullTo(d));
        }
        match spec {
            "full-binary" => Ok(SuccFixture::FullBinary),
            "left-spine" => Ok(SuccFixture::LeftSpine),
            "broken" => Ok(SuccFixture::Broken),
            _ => Err(Error::Config(format!("unknown successor-tree fixture {spec:?}"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            SuccFixture::FullBinary => "full-binary".into(),
            SuccFixture::LeftSpine => "left-spine".into(),
            SuccFixture::FullTo(d) => format!("full-to:{d}"),
            SuccFixture::Broken => "broken".into(),
        }
    }

    pub fn call(&self, op: SuccOp, x: u64) -> u64 {
        match op {
            SuccOp::Empty => return 0,
            SuccOp::Root => return 1,
            _ => {}
        }
        if x == 0 {
            return match self {
                SuccFixture::Broken if op == SuccOp::S1 => 1,
                _ => 0,
            };
        }
        match self {
            SuccFixture::FullBinary | SuccFixture::Broken => match op {
                SuccOp::S1 => x.saturating_mul(2),
                _ => x.saturating_mul(2).saturating_add(1),
            },
            SuccFixture::LeftSpine => match op {
                SuccOp::S1 => x + 1,
                _ => 0,
            },
            SuccFixture::FullTo(d) => full_to(*d, op, x),
        }
    }
}

/// Full binary tree of depth `d` in heap order (ids `1 .. 2^(d+1)`), and
/// below each of its `2^d` leaves a left-only chain. Chain nodes take the
/// remaining ids round-robin: the `j`-th step under leaf `i` is
/// `2^(d+1) + j * 2^d + i`.
fn full_to(d: u32, op: SuccOp, x: u64) -> u64 {
    let leaves = 1u64 << d;
    let first_leaf = leaves;
    let chain_base = leaves << 1;
    if x < first_leaf {
        return match op {
            SuccOp::S1 => 2 * x,
            _ => 2 * x + 1,
        };
    }
    if op == SuccOp::S2 {
        return 0;
    }
    if x < chain_base {
        chain_base + (x - first_leaf)
    } else {
        x + leaves
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::encoding::element_of;

    #[test]
    fn mirror_with_delay_one_is_the_unopposed_tree() {
        let m = PosetFixture::mirror(1);
        assert!(m.leq(5, 0));
        let up = m.up_sets(8);
        let t = FinitePosetTree::from_upsets(&(0..8).collect::<Vec<_>>(), up).unwrap();
        assert_eq!(t.root(), 0);
    }

    #[test]
    fn fast_path_matches_cells() {
        for f in [
            PosetFixture::mirror(1),
            PosetFixture::mirror(3),
            PosetFixture::mirror(5),
            PosetFixture::Chain,
            PosetFixture::NonTree,
            PosetFixture::AxiomViolator,
            PosetFixture::Heap,
        ] {
            for n in [0usize, 1, 2, 7, 23, 40] {
                let up = f.up_sets(n);
                for x in 0..n {
                    for y in 0..n {
                        assert_eq!(up[x].binary_search(&y).is_ok(), f.leq(x as u64, y as u64), "{f:?} n={n} ({x},{y})");
                    }
                }
            }
        }
    }

    #[test]
    fn direct_approximations_match_the_tables() {
        for f in [
            PosetFixture::mirror(1),
            PosetFixture::mirror(2),
            PosetFixture::mirror(4),
            PosetFixture::Chain,
            PosetFixture::NonTree,
            PosetFixture::AxiomViolator,
            PosetFixture::Heap,
        ] {
            for n in 1usize..40 {
                let ids: Vec<NodeId> = (0..n as NodeId).collect();
                let want = FinitePosetTree::from_upsets(&ids, f.up_sets(n));
                let got = f.approximation(n);
                match (&want, &got) {
                    (Ok(a), Ok(b)) => assert_eq!(a.leq_pairs(), b.leq_pairs(), "{f:?} n={n}"),
                    (Err(a), Err(b)) if n <= VIOLATION_PREFIX => assert_eq!(a.clause, b.clause, "{f:?} n={n}"),
                    (Err(a), Err(b)) => assert_eq!(a.clause == "greatest element", b.clause == "greatest element"),
                    _ => panic!("{f:?} n={n}: {want:?} vs {got:?}"),
                }
            }
        }
    }

    #[test]
    fn non_tree_breaks_at_four() {
        let f = PosetFixture::NonTree;
        let ids = |n: u32| (0..n).collect::<Vec<_>>();
        assert!(FinitePosetTree::from_upsets(&ids(3), f.up_sets(3)).is_ok());
        let v = FinitePosetTree::from_upsets(&ids(4), f.up_sets(4)).unwrap_err();
        assert_eq!(v.clause, "up-set chain");
    }

    #[test]
    fn modal_fixture_presentations() {
        let h = ModalFixture::honest();
        let id = |n: u32| BigUint::from(n);
        // u0 -> v0 -> u1 -> u0
        assert_eq!(h.call(ModalOp::F, &[id(4)]).unwrap(), id(6));
        assert_eq!(h.call(ModalOp::F, &[id(6)]).unwrap(), id(8));
        assert_eq!(h.call(ModalOp::F, &[id(8)]).unwrap(), id(4));
        assert_eq!(h.call(ModalOp::F, &[id(1)]).unwrap(), id(3));

        let fp = ModalFixture::fixed_point();
        assert_eq!(fp.call(ModalOp::Zero, &[]).unwrap(), id(4));
        assert_eq!(fp.element(&id(0)), AlgebraElement::u(0));
        assert_eq!(fp.call(ModalOp::F, &[id(0)]).unwrap(), id(0));
        assert_eq!(fp.call(ModalOp::Join, &[id(0), id(1)]).unwrap(), fp.call(ModalOp::Top0, &[]).unwrap());

        let d = ModalFixture::double_one();
        assert_eq!(d.call(ModalOp::F, &[id(1)]).unwrap(), id(3));
        assert_eq!(d.element(&id(1)), AlgebraElement::u(1));

        let ni = ModalFixture::non_injective();
        assert_eq!(ni.call(ModalOp::F, &[id(8)]).unwrap(), id(6));

        let lop = ModalFixture::axiom_breaker();
        assert_ne!(lop.call(ModalOp::Meet, &[id(1), id(2)]).unwrap(), lop.call(ModalOp::Meet, &[id(2), id(1)]).unwrap());
    }

    #[test]
    fn delayed_mirror_skips_primes() {
        let m = ModalFixture::delayed_mirror(1);
        // First cycle has size 5: u0 -> v0 -> u1 -> v1 -> u2 -> u0.
        let mut x = BigUint::from(4u32);
        let mut seen = vec![x.clone()];
        loop {
            x = m.call(ModalOp::F, &[x]).unwrap();
            if x == seen[0] {
                break;
            }
            seen.push(x.clone());
        }
        assert_eq!(seen.len(), 5);
        assert_eq!(element_of(&seen[4]), AlgebraElement::u(2));
    }

    #[test]
    fn successor_fixtures() {
        let f = SuccFixture::FullBinary;
        assert_eq!((f.call(SuccOp::S1, 1), f.call(SuccOp::S2, 1)), (2, 3));
        assert_eq!(f.call(SuccOp::S1, 0), 0);
        assert_eq!(SuccFixture::Broken.call(SuccOp::S1, 0), 1);
        let g = SuccFixture::FullTo(1);
        // depth 1 full: 1 -> 2, 3; then chains 2 -> 4 -> 6 ..., 3 -> 5 -> 7 ...
        assert_eq!((g.call(SuccOp::S1, 1), g.call(SuccOp::S2, 1)), (2, 3));
        assert_eq!((g.call(SuccOp::S1, 2), g.call(SuccOp::S2, 2)), (4, 0));
        assert_eq!(g.call(SuccOp::S1, 3), 5);
        assert_eq!(g.call(SuccOp::S1, 4), 6);
        assert_eq!(g.call(SuccOp::S1, 5), 7);
        // every id >= 2 has exactly one parent
        let mut parents = BTreeMap::new();
        for x in 1..200u64 {
            for op in [SuccOp::S1, SuccOp::S2] {
                let c = g.call(op, x);
                if c != 0 && c < 200 {
                    assert!(parents.insert(c, x).is_none(), "{c} has two parents");
                }
            }
        }
        assert_eq!(parents.len(), 198);
    }
}
