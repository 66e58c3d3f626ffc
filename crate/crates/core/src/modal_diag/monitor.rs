use std::fmt;

use num_bigint::BigUint;

use crate::adversary::{join_ids, modal_probe, ModalAdversaryView, ModalClient};
use crate::error::Result;

/// A monitoring condition witnessed at some stage; any of them proves the
/// adversary is not our algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonitorHit {
    /// (a): a Boolean or modal law fails on the listed elements.
    Axiom { law: &'static str, witnesses: Vec<BigUint> },
    /// (b): the two tops do not split `1`, or one of them is not sent to `1`.
    Tops { what: &'static str },
    /// (c): `x join y = T_k`, `x meet y = 0` and the modality misbehaves.
    Split { k: usize, x: BigUint, y: BigUint, bullet: u8 },
    /// (d): two disjoint elements below `T_k` both sent to `1`.
    DoubleOne { k: usize, x: BigUint, y: BigUint },
}

impl MonitorHit {
    pub fn condition(&self) -> &'static str {
        match self {
            MonitorHit::Axiom { .. } => "a",
            MonitorHit::Tops { .. } => "b",
            MonitorHit::Split { .. } => "c",
            MonitorHit::DoubleOne { .. } => "d",
        }
    }

    /// Whitespace-free description for trace records.
    pub fn detail(&self) -> String {
        match self {
            MonitorHit::Axiom { law, witnesses } => format!("{law}@{}", join_ids(witnesses)),
            MonitorHit::Tops { what } => what.to_string(),
            MonitorHit::Split { k, x, y, bullet } => format!("T{k}={x}+{y}#{bullet}"),
            MonitorHit::DoubleOne { k, x, y } => format!("T{k}>{x},{y}"),
        }
    }
}

impl fmt::Display for MonitorHit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", self.condition(), self.detail())
    }
}

/// Conditions (a)-(d) in order at stage `s`. Out-of-fuel queries surface as
/// errors for the caller to turn into a disqualification.
///
/// The law sweep of (a) is graded by cost: one-variable laws on all of `X`,
/// two-variable laws on the literals of `S`, three-variable laws on `S`.
pub fn monitoring_check(c: &mut ModalClient<'_>, s: u64) -> Result<Option<MonitorHit>> {
    let view = modal_probe(c, s)?;
    for check in [axioms, tops, splits, double_ones] {
        if let Some(hit) = check(c, &view)? {
            return Ok(Some(hit));
        }
    }
    Ok(None)
}

fn law(name: &'static str, holds: bool, witnesses: &[&BigUint]) -> Option<MonitorHit> {
    (!holds).then(|| MonitorHit::Axiom {
        law: name,
        witnesses: witnesses.iter().map(|&w| w.clone()).collect(),
    })
}

macro_rules! check {
    ($e:expr) => {
        if let Some(hit) = $e {
            return Ok(Some(hit));
        }
    };
}

fn axioms(c: &mut ModalClient<'_>, v: &ModalAdversaryView) -> Result<Option<MonitorHit>> {
    let (zero, one) = (&v.zero, &v.one);
    check!(law("normality", &c.f(zero)? == zero, &[zero]));
    for x in &v.closure {
        let cx = c.comp(x)?;
        check!(law("double-complement", &c.comp(&cx)? == x, &[x]));
        check!(law("complement-join", &c.join(x, &cx)? == one, &[x]));
        check!(law("complement-meet", &c.meet(x, &cx)? == zero, &[x]));
        check!(law("idempotence", &c.join(x, x)? == x && &c.meet(x, x)? == x, &[x]));
        check!(law("identity", &c.join(x, zero)? == x && &c.meet(x, one)? == x, &[x]));
        check!(law("bounds", &c.meet(x, zero)? == zero && &c.join(x, one)? == one, &[x]));
    }
    let mut lits: Vec<BigUint> = Vec::with_capacity(2 * v.probe.len());
    for x in &v.probe {
        lits.push(x.clone());
        lits.push(c.comp(x)?);
    }
    lits.sort();
    lits.dedup();
    for (i, x) in lits.iter().enumerate() {
        for y in &lits[i..] {
            let (j, m) = (c.join(x, y)?, c.meet(x, y)?);
            check!(law("commutativity", c.join(y, x)? == j && c.meet(y, x)? == m, &[x, y]));
            check!(law("absorption", &c.join(x, &m)? == x && &c.meet(x, &j)? == x, &[x, y]));
            let (cx, cy) = (c.comp(x)?, c.comp(y)?);
            check!(law("de-morgan", c.comp(&j)? == c.meet(&cx, &cy)?, &[x, y]));
            let (fx, fy) = (c.f(x)?, c.f(y)?);
            check!(law("additivity", c.f(&j)? == c.join(&fx, &fy)?, &[x, y]));
        }
    }
    let s = &v.probe;
    for x in s {
        for y in s {
            let (xy_j, xy_m) = (c.join(x, y)?, c.meet(x, y)?);
            for z in s {
                let (yz_j, yz_m) = (c.join(y, z)?, c.meet(y, z)?);
                check!(law(
                    "associativity",
                    c.join(&xy_j, z)? == c.join(x, &yz_j)? && c.meet(&xy_m, z)? == c.meet(x, &yz_m)?,
                    &[x, y, z]
                ));
                let xz_m = c.meet(x, z)?;
                check!(law("distributivity", c.meet(x, &yz_j)? == c.join(&xy_m, &xz_m)?, &[x, y, z]));
            }
        }
    }
    Ok(None)
}

fn tops(c: &mut ModalClient<'_>, v: &ModalAdversaryView) -> Result<Option<MonitorHit>> {
    let [t0, t1] = &v.top;
    let what = if &c.join(t0, t1)? != &v.one {
        "T0+T1!=1"
    } else if &c.meet(t0, t1)? != &v.zero {
        "T0*T1!=0"
    } else if &c.f(t0)? != &v.one {
        "f(T0)!=1"
    } else if &c.f(t1)? != &v.one {
        "f(T1)!=1"
    } else {
        return Ok(None);
    };
    Ok(Some(MonitorHit::Tops { what }))
}

fn splits(c: &mut ModalClient<'_>, v: &ModalAdversaryView) -> Result<Option<MonitorHit>> {
    let one = &v.one;
    for k in 0..2 {
        let t = &v.top[k];
        let cands: Vec<&BigUint> = v.probe.iter().filter(|&x| x != &v.zero && x != t).collect();
        for &x in &cands {
            for &y in &cands {
                if &c.join(x, y)? != t || c.meet(x, y)? != v.zero {
                    continue;
                }
                let (fx, fy) = (c.f(x)?, c.f(y)?);
                let bullet = if &fx != one && &fy != one {
                    1
                } else if &fx == one && &fy == y {
                    2
                } else if &fx == one && c.iterates(y, v.stage as u128)?.contains(one) {
                    3
                } else {
                    continue;
                };
                return Ok(Some(MonitorHit::Split {
                    k,
                    x: x.clone(),
                    y: y.clone(),
                    bullet,
                }));
            }
        }
    }
    Ok(None)
}

fn double_ones(c: &mut ModalClient<'_>, v: &ModalAdversaryView) -> Result<Option<MonitorHit>> {
    for k in 0..2 {
        let t = &v.top[k];
        let mut below: Vec<&BigUint> = Vec::new();
        for x in &v.probe {
            if c.leq(x, t)? && &c.f(x)? == &v.one {
                below.push(x);
            }
        }
        for (i, &x) in below.iter().enumerate() {
            for &y in &below[i + 1..] {
                if c.meet(x, y)? == v.zero {
                    return Ok(Some(MonitorHit::DoubleOne {
                        k,
                        x: x.clone(),
                        y: y.clone(),
                    }));
                }
            }
        }
    }
    Ok(None)
}
