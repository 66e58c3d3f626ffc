use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;

use super::{Meter, ModalAdversary, ModalOp, Outcome};
use crate::error::{Error, Result};

/// Memoizing query handle on a modal adversary with a fixed per-query budget.
pub struct ModalClient<'a> {
    adv: &'a ModalAdversary,
    budget: u64,
    pub meter: Meter,
    cache: HashMap<(ModalOp, Vec<BigUint>), BigUint>,
}

impl<'a> ModalClient<'a> {
    pub fn new(adv: &'a ModalAdversary, budget: u64) -> Self {
        ModalClient {
            adv,
            budget,
            meter: Meter::default(),
            cache: HashMap::new(),
        }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Answers already cached stay valid: adversaries are deterministic and
    /// a value found under a smaller budget is the value under any larger one.
    pub fn set_budget(&mut self, budget: u64) {
        self.budget = budget;
    }

    pub fn call(&mut self, op: ModalOp, args: &[BigUint]) -> Result<BigUint> {
        let key = (op, args.to_vec());
        if let Some(v) = self.cache.get(&key) {
            return Ok(v.clone());
        }
        let ev = self.adv.call(op, args, self.budget)?;
        self.meter.charge(ev.steps);
        match ev.outcome {
            Outcome::Value(v) => {
                self.cache.insert(key, v.clone());
                Ok(v)
            }
            Outcome::OutOfFuel => Err(Error::OutOfFuel {
                what: format!("{}({})", op.name(), join_ids(args)),
                budget: self.budget,
            }),
        }
    }

    pub fn zero(&mut self) -> Result<BigUint> {
        self.call(ModalOp::Zero, &[])
    }
    pub fn one(&mut self) -> Result<BigUint> {
        self.call(ModalOp::One, &[])
    }
    pub fn top(&mut self, k: usize) -> Result<BigUint> {
        self.call(if k == 0 { ModalOp::Top0 } else { ModalOp::Top1 }, &[])
    }
    pub fn join(&mut self, a: &BigUint, b: &BigUint) -> Result<BigUint> {
        self.call(ModalOp::Join, &[a.clone(), b.clone()])
    }
    pub fn meet(&mut self, a: &BigUint, b: &BigUint) -> Result<BigUint> {
        self.call(ModalOp::Meet, &[a.clone(), b.clone()])
    }
    pub fn comp(&mut self, a: &BigUint) -> Result<BigUint> {
        self.call(ModalOp::Comp, &[a.clone()])
    }
    pub fn f(&mut self, a: &BigUint) -> Result<BigUint> {
        self.call(ModalOp::F, &[a.clone()])
    }

    /// `a <= b` read as `a meet b = a`.
    pub fn leq(&mut self, a: &BigUint, b: &BigUint) -> Result<bool> {
        Ok(&self.meet(a, b)? == a)
    }

    /// `f^(0)(a), ..., f^(depth)(a)`.
    pub fn iterates(&mut self, a: &BigUint, depth: u128) -> Result<Vec<BigUint>> {
        let mut out = vec![a.clone()];
        let mut cur = a.clone();
        for _ in 0..depth {
            cur = self.f(&cur)?;
            out.push(cur.clone());
        }
        Ok(out)
    }
}

pub(crate) fn join_ids(ids: &[BigUint]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

/// What monitoring looks at in stage `s`: the probe set `S` (constants plus
/// every id up to `s`) and the candidate subalgebra `X` of epsilon-products.
///
/// `X` ranges over tuples from `S` of length at most two, not every length
/// up to `card(S)`; the full set is exponential in `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModalAdversaryView {
    pub stage: u64,
    pub zero: BigUint,
    pub one: BigUint,
    pub top: [BigUint; 2],
    pub probe: Vec<BigUint>,
    pub closure: Vec<BigUint>,
}

pub fn modal_probe(client: &mut ModalClient<'_>, s: u64) -> Result<ModalAdversaryView> {
    let zero = client.zero()?;
    let one = client.one()?;
    let top = [client.top(0)?, client.top(1)?];
    let mut probe: BTreeSet<BigUint> = (0..=s).map(BigUint::from).collect();
    probe.extend([zero.clone(), one.clone(), top[0].clone(), top[1].clone()]);
    let probe: Vec<BigUint> = probe.into_iter().collect();

    let mut closure = BTreeSet::new();
    let mut literals = Vec::with_capacity(2 * probe.len());
    for a in &probe {
        let c = client.comp(a)?;
        literals.push((a.clone(), c));
    }
    for (i, (a, ca)) in literals.iter().enumerate() {
        closure.insert(a.clone());
        closure.insert(ca.clone());
        for (b, cb) in &literals[i + 1..] {
            for x in [a, ca] {
                for y in [b, cb] {
                    closure.insert(client.meet(x, y)?);
                }
            }
        }
    }
    Ok(ModalAdversaryView {
        stage: s,
        zero,
        one,
        top,
        probe,
        closure: closure.into_iter().collect(),
    })
}
