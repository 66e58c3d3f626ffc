//! The modality `F_[g]` induced by a partial atom map `g`, grown by p-cycles.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::boolean::{AlgebraElement, Atom};
use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The odd primes in increasing order: `p_1 = 3, p_2 = 5, ...`.
pub fn odd_primes() -> impl Iterator<Item = u64> {
    (3u64..).step_by(2).filter(|&n| is_prime(n))
}

/// `p_s` for `s >= 1`.
pub fn nth_odd_prime(s: usize) -> u64 {
    assert!(s >= 1, "odd primes are indexed from 1");
    odd_primes().nth(s - 1).unwrap()
}

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub fn factorize(mut n: u128) -> Vec<(u128, u32)> {
    let mut out = Vec::new();
    let mut d = 2u128;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRecord {
    pub size: u64,
    /// First of the `k + 1` consecutive `u` indices, `k = size / 2`.
    pub u_start: u64,
    /// First of the `k` consecutive `v` indices.
    pub v_start: u64,
}

impl CycleRecord {
    pub fn k(&self) -> u64 {
        self.size / 2
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let k = self.k();
        let mut out: Vec<Atom> = (0..=k).map(|m| Atom::U(self.u_start + m)).collect();
        out.extend((0..k).map(|m| Atom::V(self.v_start + m)));
        out
    }

    pub fn contains(&self, a: Atom) -> bool {
        match a {
            Atom::U(i) => (self.u_start..=self.u_start + self.k()).contains(&i),
            Atom::V(j) => (self.v_start..self.v_start + self.k()).contains(&j),
        }
    }

    pub fn join(&self) -> AlgebraElement {
        AlgebraElement::from_atoms(self.atoms())
    }

    pub fn u_half(&self) -> AlgebraElement {
        AlgebraElement::from_atoms(self.atoms().into_iter().filter(|a| matches!(a, Atom::U(_))))
    }

    pub fn v_half(&self) -> AlgebraElement {
        AlgebraElement::from_atoms(self.atoms().into_iter().filter(|a| matches!(a, Atom::V(_))))
    }
}

impl fmt::Display for CycleRecord {
    /// `cycle p=<p> u=<i..i+k> v=<j..j+k-1>`; an empty `v` range is `v=-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.k();
        write!(f, "cycle p={} u={}..{} v=", self.size, self.u_start, self.u_start + k)?;
        if k == 0 {
            f.write_str("-")
        } else {
            write!(f, "{}..{}", self.v_start, self.v_start + k - 1)
        }
    }
}

impl CycleRecord {
    pub fn parse(text: &str) -> Option<Self> {
        let rest = text.strip_prefix("cycle p=")?;
        let (p, rest) = rest.split_once(" u=")?;
        let (u, v) = rest.split_once(" v=")?;
        let size: u64 = p.parse().ok()?;
        let (u0, u1) = u.split_once("..")?;
        let (u0, u1): (u64, u64) = (u0.parse().ok()?, u1.parse().ok()?);
        let v_start = if v == "-" {
            0
        } else {
            let (v0, v1) = v.split_once("..")?;
            let (v0, v1): (u64, u64) = (v0.parse().ok()?, v1.parse().ok()?);
            if v1 + 1 < v0 || v1 + 1 - v0 != size / 2 {
                return None;
            }
            v0
        };
        if u1 < u0 || u1 - u0 != size / 2 || size % 2 == 0 {
            return None;
        }
        Some(CycleRecord {
            size,
            u_start: u0,
            v_start,
        })
    }
}

/// The partial map `g` on atoms together with the cycles that define it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModalityTable {
    g: BTreeMap<Atom, AlgebraElement>,
    cycles: Vec<CycleRecord>,
    next_u: u64,
    next_v: u64,
}

impl ModalityTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cycles(&self) -> &[CycleRecord] {
        &self.cycles
    }

    pub fn next_u(&self) -> u64 {
        self.next_u
    }

    pub fn next_v(&self) -> u64 {
        self.next_v
    }

    pub fn has_prime(&self, p: u64) -> bool {
        self.cycles.iter().any(|c| c.size == p)
    }

    pub fn g(&self, a: Atom) -> Option<&AlgebraElement> {
        self.g.get(&a)
    }

    pub fn cycle_of(&self, a: Atom) -> Option<&CycleRecord> {
        self.cycles.iter().find(|c| c.contains(a))
    }

    /// The basic module: a `p`-cycle on the least unused atom indices.
    pub fn add_p_cycle(&mut self, p: u64) -> Result<&CycleRecord> {
        if p % 2 == 0 || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if self.has_prime(p) {
            return Err(Error::DuplicatePrime(p));
        }
        Ok(self.add_cycle_of_size(p))
    }

    /// The same module for any odd size, for adversary fixtures only; the
    /// construction itself only ever calls `add_p_cycle`.
    pub fn add_cycle_of_size(&mut self, size: u64) -> &CycleRecord {
        assert!(size % 2 == 1, "cycles alternate u and v atoms, so sizes are odd");
        let (i, j, k) = (self.next_u, self.next_v, size / 2);
        for m in 0..k {
            self.g.insert(Atom::U(i + m), AlgebraElement::v(j + m));
            self.g.insert(Atom::V(j + m), AlgebraElement::u(i + m + 1));
        }
        self.g.insert(Atom::U(i + k), AlgebraElement::u(i));
        self.next_u = i + k + 1;
        self.next_v = j + k;
        self.cycles.push(CycleRecord {
            size,
            u_start: i,
            v_start: j,
        });
        self.cycles.last().unwrap()
    }

    /// Sets `g(a)` directly; used to build deliberately irregular fixtures.
    pub fn set_image(&mut self, a: Atom, image: AlgebraElement) {
        match a {
            Atom::U(i) => self.next_u = self.next_u.max(i + 1),
            Atom::V(j) => self.next_v = self.next_v.max(j + 1),
        }
        self.g.insert(a, image);
    }

    pub fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        if x.is_zero() {
            return Ok(AlgebraElement::zero());
        }
        let Some(atoms) = x.atoms() else {
            return Ok(AlgebraElement::one());
        };
        let mut acc = AlgebraElement::zero();
        for a in atoms {
            match self.g.get(&a) {
                Some(img) => acc = acc.join(img),
                None => return Err(Error::Defer(a.to_string())),
            }
        }
        Ok(acc)
    }

    /// Default orbit cutoff: one more than the product of installed sizes.
    pub fn default_cutoff(&self) -> u128 {
        self.cycles
            .iter()
            .fold(1u128, |acc, c| acc.saturating_mul(c.size as u128))
            .saturating_add(1)
    }

    pub fn forward_orbit(&self, a: &AlgebraElement, cutoff: u128) -> Result<Orbit> {
        let mut seen: HashMap<AlgebraElement, usize> = HashMap::new();
        let mut iterates = Vec::new();
        let mut cur = a.clone();
        loop {
            if let Some(&at) = seen.get(&cur) {
                return Ok(Orbit {
                    iterates,
                    closed: true,
                    repeat_to: at,
                });
            }
            if iterates.len() as u128 >= cutoff {
                return Ok(Orbit {
                    iterates,
                    closed: false,
                    repeat_to: 0,
                });
            }
            seen.insert(cur.clone(), iterates.len());
            let next = self.apply(&cur)?;
            iterates.push(cur);
            cur = next;
        }
    }

    /// The trichotomy for nonzero elements; case 3 is computed from the
    /// straddled cycles without iterating.
    pub fn classify_orbit(&self, a: &AlgebraElement) -> Result<OrbitCase> {
        if a.is_zero() {
            return Err(Error::Precondition("classification needs a nonzero element".into()));
        }
        let Some(atoms) = a.atoms() else {
            return Ok(OrbitCase::NonFrechet);
        };
        let mut primes = Vec::new();
        for c in &self.cycles {
            let inside = c.atoms().iter().filter(|&&w| w.element().leq(a)).count();
            if inside > 0 && inside < c.size as usize {
                primes.push(c.size);
            }
        }
        if let Some(w) = atoms.iter().find(|w| self.cycle_of(**w).is_none()) {
            return Err(Error::Defer(w.to_string()));
        }
        if primes.is_empty() {
            return Ok(OrbitCase::Fixed);
        }
        primes.sort_unstable();
        let n = primes.iter().fold(1u128, |acc, &p| acc * p as u128);
        Ok(OrbitCase::Cycle { n, primes })
    }
}

/// Distinct iterates `a, F(a), ...` up to the first repetition or the cutoff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub iterates: Vec<AlgebraElement>,
    pub closed: bool,
    /// When closed, the index the next iterate equals.
    pub repeat_to: usize,
}

impl Orbit {
    pub fn card(&self) -> Option<usize> {
        self.closed.then_some(self.iterates.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitCase {
    NonFrechet,
    Fixed,
    Cycle { n: u128, primes: Vec<u64> },
}
