//! Exact arithmetic in `B(N) x B(N)`, where `B(N)` is the algebra of finite
//! and cofinite subsets of the naturals.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// A finite or cofinite subset of the naturals. `support` is the set itself
/// when finite and its complement when cofinite.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinCofSet {
    cofinite: bool,
    support: BTreeSet<u64>,
}

impl FinCofSet {
    pub fn empty() -> Self {
        FinCofSet {
            cofinite: false,
            support: BTreeSet::new(),
        }
    }

    pub fn full() -> Self {
        FinCofSet {
            cofinite: true,
            support: BTreeSet::new(),
        }
    }

    pub fn finite(items: impl IntoIterator<Item = u64>) -> Self {
        FinCofSet {
            cofinite: false,
            support: items.into_iter().collect(),
        }
    }

    /// The complement of the given finite set.
    pub fn cofinite(missing: impl IntoIterator<Item = u64>) -> Self {
        FinCofSet {
            cofinite: true,
            support: missing.into_iter().collect(),
        }
    }

    pub fn is_cofinite(&self) -> bool {
        self.cofinite
    }

    pub fn is_finite(&self) -> bool {
        !self.cofinite
    }

    pub fn support(&self) -> &BTreeSet<u64> {
        &self.support
    }

    pub fn contains(&self, n: u64) -> bool {
        self.cofinite != self.support.contains(&n)
    }

    pub fn is_empty(&self) -> bool {
        !self.cofinite && self.support.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.cofinite && self.support.is_empty()
    }

    pub fn union(&self, other: &Self) -> Self {
        match (self.cofinite, other.cofinite) {
            (false, false) => FinCofSet::finite(self.support.union(&other.support).copied()),
            (false, true) => FinCofSet::cofinite(other.support.difference(&self.support).copied()),
            (true, false) => FinCofSet::cofinite(self.support.difference(&other.support).copied()),
            (true, true) => FinCofSet::cofinite(self.support.intersection(&other.support).copied()),
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        match (self.cofinite, other.cofinite) {
            (false, false) => FinCofSet::finite(self.support.intersection(&other.support).copied()),
            (false, true) => FinCofSet::finite(self.support.difference(&other.support).copied()),
            (true, false) => FinCofSet::finite(other.support.difference(&self.support).copied()),
            (true, true) => FinCofSet::cofinite(self.support.union(&other.support).copied()),
        }
    }

    pub fn complement(&self) -> Self {
        FinCofSet {
            cofinite: !self.cofinite,
            support: self.support.clone(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        match (self.cofinite, other.cofinite) {
            (false, false) => self.support.is_subset(&other.support),
            (false, true) => self.support.is_disjoint(&other.support),
            (true, false) => false,
            (true, true) => other.support.is_subset(&self.support),
        }
    }
}

impl fmt::Display for FinCofSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.cofinite { "cof{" } else { "fin{" })?;
        for (i, n) in self.support.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str("}")
    }
}

/// The atoms of `B(N) x B(N)`: `u_i = ({i}, 0)` and `v_i = (0, {i})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    U(u64),
    V(u64),
}

impl Atom {
    pub fn element(self) -> AlgebraElement {
        match self {
            Atom::U(i) => AlgebraElement::u(i),
            Atom::V(i) => AlgebraElement::v(i),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::U(i) => write!(f, "u{i}"),
            Atom::V(i) => write!(f, "v{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraElement {
    pub left: FinCofSet,
    pub right: FinCofSet,
}

impl AlgebraElement {
    pub fn new(left: FinCofSet, right: FinCofSet) -> Self {
        AlgebraElement { left, right }
    }

    pub fn zero() -> Self {
        AlgebraElement::new(FinCofSet::empty(), FinCofSet::empty())
    }

    pub fn one() -> Self {
        AlgebraElement::new(FinCofSet::full(), FinCofSet::full())
    }

    pub fn top0() -> Self {
        AlgebraElement::new(FinCofSet::full(), FinCofSet::empty())
    }

    pub fn top1() -> Self {
        AlgebraElement::new(FinCofSet::empty(), FinCofSet::full())
    }

    pub fn u(i: u64) -> Self {
        AlgebraElement::new(FinCofSet::finite([i]), FinCofSet::empty())
    }

    pub fn v(i: u64) -> Self {
        AlgebraElement::new(FinCofSet::empty(), FinCofSet::finite([i]))
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Self {
        let (mut l, mut r) = (BTreeSet::new(), BTreeSet::new());
        for a in atoms {
            match a {
                Atom::U(i) => l.insert(i),
                Atom::V(i) => r.insert(i),
            };
        }
        AlgebraElement::new(FinCofSet::finite(l), FinCofSet::finite(r))
    }

    pub fn join(&self, other: &Self) -> Self {
        AlgebraElement::new(self.left.union(&other.left), self.right.union(&other.right))
    }

    pub fn meet(&self, other: &Self) -> Self {
        AlgebraElement::new(self.left.intersection(&other.left), self.right.intersection(&other.right))
    }

    pub fn complement(&self) -> Self {
        AlgebraElement::new(self.left.complement(), self.right.complement())
    }

    pub fn leq(&self, other: &Self) -> bool {
        self.left.is_subset(&other.left) && self.right.is_subset(&other.right)
    }

    pub fn is_zero(&self) -> bool {
        self.left.is_empty() && self.right.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.left.is_full() && self.right.is_full()
    }

    /// Membership in the Frechet ideal, the finite joins of atoms.
    pub fn is_frechet(&self) -> bool {
        self.left.is_finite() && self.right.is_finite()
    }

    pub fn is_atom(&self) -> bool {
        self.is_frechet() && self.left.support().len() + self.right.support().len() == 1
    }

    pub fn as_atom(&self) -> Option<Atom> {
        if !self.is_atom() {
            return None;
        }
        match self.left.support().iter().next() {
            Some(&i) => Some(Atom::U(i)),
            None => self.right.support().iter().next().map(|&i| Atom::V(i)),
        }
    }

    /// The atoms below a Frechet element, `u`s first.
    pub fn atoms(&self) -> Option<Vec<Atom>> {
        if !self.is_frechet() {
            return None;
        }
        let mut out: Vec<Atom> = self.left.support().iter().map(|&i| Atom::U(i)).collect();
        out.extend(self.right.support().iter().map(|&i| Atom::V(i)));
        Some(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Parse {
            line: 1,
            msg: format!("bad element literal {text:?}"),
        };
        let inner = text.trim().strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(bad)?;
        let (l, r) = inner.split_once(';').ok_or_else(bad)?;
        Ok(AlgebraElement::new(parse_side(l.trim()).ok_or_else(bad)?, parse_side(r.trim()).ok_or_else(bad)?))
    }
}

fn parse_side(s: &str) -> Option<FinCofSet> {
    let (cof, rest) = if let Some(r) = s.strip_prefix("fin") {
        (false, r)
    } else {
        (true, s.strip_prefix("cof")?)
    };
    let body = rest.strip_prefix('{')?.strip_suffix('}')?;
    let mut items = BTreeSet::new();
    if !body.is_empty() {
        for t in body.split(',') {
            items.insert(t.parse::<u64>().ok()?);
        }
    }
    Some(if cof {
        FinCofSet::cofinite(items)
    } else {
        FinCofSet::finite(items)
    })
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} ; {})", self.left, self.right)
    }
}

/// `a_0^{e_0} & ... & a_n^{e_n}` with `a^0 = C(a)` and `a^1 = a`.
pub fn epsilon_product(elems: &[AlgebraElement], eps: &[bool]) -> Result<AlgebraElement> {
    if elems.len() != eps.len() {
        return Err(Error::LengthMismatch(elems.len(), eps.len()));
    }
    Ok(elems.iter().zip(eps).fold(AlgebraElement::one(), |acc, (a, &e)| {
        if e {
            acc.meet(a)
        } else {
            acc.meet(&a.complement())
        }
    }))
}

/// A finite subalgebra, represented by its atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSubalgebra {
    pub generators: Vec<AlgebraElement>,
    /// Pairwise disjoint and nonzero, sorted, joining to 1.
    pub atoms: Vec<AlgebraElement>,
}

impl FiniteSubalgebra {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// `2^(atom count)`, saturating at `u128::MAX`.
    pub fn cardinality(&self) -> u128 {
        1u128.checked_shl(self.atoms.len() as u32).unwrap_or(u128::MAX)
    }

    /// Atoms of the subalgebra below `x`.
    pub fn atoms_below(&self, x: &AlgebraElement) -> Vec<&AlgebraElement> {
        self.atoms.iter().filter(|a| a.leq(x)).collect()
    }

    /// `x` belongs iff it equals the join of the atoms below it.
    pub fn contains(&self, x: &AlgebraElement) -> bool {
        let join = self.atoms_below(x).into_iter().fold(AlgebraElement::zero(), |acc, a| acc.join(a));
        &join == x
    }

    /// Join of the atoms selected by the bits of `mask`.
    pub fn element(&self, mask: u64) -> AlgebraElement {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(AlgebraElement::zero(), |acc, (_, a)| acc.join(a))
    }

    /// Every member; only sensible for small atom counts.
    pub fn elements(&self) -> Vec<AlgebraElement> {
        assert!(self.atoms.len() < 26, "subalgebra too large to enumerate");
        (0..1u64 << self.atoms.len()).map(|m| self.element(m)).collect()
    }
}

/// The subalgebra generated by `generators`: its atoms are the distinct
/// nonzero epsilon-products, obtained by refining `{1}` one generator at a time.
pub fn generated_subalgebra(generators: &[AlgebraElement]) -> FiniteSubalgebra {
    let mut atoms = vec![AlgebraElement::one()];
    for g in generators {
        let cg = g.complement();
        let mut next = Vec::with_capacity(atoms.len() * 2);
        for a in &atoms {
            for part in [a.meet(g), a.meet(&cg)] {
                if !part.is_zero() {
                    next.push(part);
                }
            }
        }
        atoms = next;
    }
    atoms.sort();
    FiniteSubalgebra {
        generators: generators.to_vec(),
        atoms,
    }
}
