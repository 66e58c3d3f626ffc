//! A computable bijection between natural numbers and `B(N) x B(N)`.
//!
//! Each component is coded as `2 * sum(2^i for i in support) + cofinite`,
//! and an element's code interleaves the two component codes bit by bit
//! (left on even positions). Codes `0..4` are `0, T0, T1, 1` and the atom
//! codes are exactly the powers of two from `4` on.
//!
//! Ids reorder codes so that atoms arrive early: ids `0..4` are the four
//! constants, even ids `4 + 2m` enumerate `u0, v0, u1, v1, ...`, and odd ids
//! `5 + 2r` enumerate the remaining codes in increasing order. Without this
//! order the least ids would mention only a handful of atoms.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::boolean::{AlgebraElement, Atom, FinCofSet};

fn component_code(s: &FinCofSet) -> BigUint {
    let mut c = BigUint::zero();
    if s.is_cofinite() {
        c.set_bit(0, true);
    }
    for &i in s.support() {
        c.set_bit(i + 1, true);
    }
    c
}

fn component_of(c: &BigUint) -> FinCofSet {
    let support: BTreeSet<u64> = (1..c.bits()).filter(|&k| c.bit(k)).map(|k| k - 1).collect();
    if c.bit(0) {
        FinCofSet::cofinite(support)
    } else {
        FinCofSet::finite(support)
    }
}

pub fn element_code(x: &AlgebraElement) -> BigUint {
    let (l, r) = (component_code(&x.left), component_code(&x.right));
    let mut c = BigUint::zero();
    for k in 0..l.bits() {
        if l.bit(k) {
            c.set_bit(2 * k, true);
        }
    }
    for k in 0..r.bits() {
        if r.bit(k) {
            c.set_bit(2 * k + 1, true);
        }
    }
    c
}

pub fn element_of_code(c: &BigUint) -> AlgebraElement {
    let (mut l, mut r) = (BigUint::zero(), BigUint::zero());
    for k in 0..c.bits() {
        if c.bit(k) {
            if k % 2 == 0 {
                l.set_bit(k / 2, true);
            } else {
                r.set_bit(k / 2, true);
            }
        }
    }
    AlgebraElement::new(component_of(&l), component_of(&r))
}

fn is_power_of_two(c: &BigUint) -> bool {
    !c.is_zero() && c.trailing_zeros() == Some(c.bits() - 1)
}

/// Number of non-constant, non-atom codes in `[4, c]`, for `c >= 4`.
fn others_up_to(c: &BigUint) -> BigUint {
    c - BigUint::from(3u32) - BigUint::from(c.bits() - 2)
}

pub fn element_id(x: &AlgebraElement) -> BigUint {
    let c = element_code(x);
    if c < BigUint::from(4u32) {
        return c;
    }
    if is_power_of_two(&c) {
        let m = c.bits() - 1 - 2;
        return BigUint::from(4u32) + BigUint::from(2 * m);
    }
    let r = others_up_to(&c) - 1u32;
    BigUint::from(5u32) + r * 2u32
}

pub fn element_of(id: &BigUint) -> AlgebraElement {
    if id < &BigUint::from(4u32) {
        return element_of_code(id);
    }
    if !id.bit(0) {
        let m = ((id - 4u32) >> 1usize).to_u64().expect("atom index fits in u64");
        let atom = if m % 2 == 0 { Atom::U(m / 2) } else { Atom::V(m / 2) };
        return atom.element();
    }
    // The r-th other code is the least c with others_up_to(c) = r + 1. The
    // count grows by at most one per step, so stepping by the deficit never
    // overshoots.
    let want: BigUint = ((id - 5u32) >> 1usize) + 1u32;
    let mut c = &want + 3u32;
    loop {
        let have = others_up_to(&c);
        if have >= want {
            break;
        }
        c += &want - have;
    }
    element_of_code(&c)
}

/// Names the constants the way traces spell them.
pub fn constant_id(name: &str) -> Option<BigUint> {
    match name {
        "zero" => Some(BigUint::from(0u32)),
        "top0" => Some(BigUint::from(1u32)),
        "top1" => Some(BigUint::from(2u32)),
        "one" => Some(BigUint::from(3u32)),
        _ => None,
    }
}
