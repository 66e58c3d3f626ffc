//! Opponents for the diagonalizers: fuel-bounded programs or scripted
//! fixtures, plus the finite views the strategies take of them.
//!
//! Every query is charged to a [`Meter`] and runs under the per-stage budget
//! of a [`FuelPolicy`]; running out of fuel is an ordinary outcome.

pub mod dsl;
pub mod encoding;
pub mod fixtures;
mod modal_view;
mod poset_view;

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

pub use dsl::{Evaluation, Function, Outcome, Program};
pub use fixtures::{ModalFixture, PosetFixture, SuccFixture};
pub use modal_view::{modal_probe, ModalAdversaryView, ModalClient};
pub(crate) use modal_view::join_ids;
pub use poset_view::{cell_by_cell, poset_approximation, ApproxOutcome, PosetApproximation};

use crate::error::{Error, Result};

/// Step budget granted to each adversary query at a given stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuelPolicy {
    /// `c * (s + 1)^2`.
    Quadratic { c: u64 },
    Constant(u64),
}

impl Default for FuelPolicy {
    fn default() -> Self {
        FuelPolicy::Quadratic { c: 1000 }
    }
}

impl FuelPolicy {
    pub fn budget(&self, stage: u64) -> u64 {
        match *self {
            FuelPolicy::Quadratic { c } => c.saturating_mul((stage + 1).saturating_mul(stage + 1)),
            FuelPolicy::Constant(b) => b,
        }
    }

    /// `quadratic:<c>` or `constant:<b>`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad fuel policy {text:?}"));
        let (kind, n) = text.split_once(':').ok_or_else(bad)?;
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "quadratic" => Ok(FuelPolicy::Quadratic { c: n }),
            "constant" => Ok(FuelPolicy::Constant(n)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for FuelPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FuelPolicy::Quadratic { c } => write!(f, "quadratic:{c}"),
            FuelPolicy::Constant(b) => write!(f, "constant:{b}"),
        }
    }
}

/// Queries issued and steps consumed, with the largest single charge.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Meter {
    pub queries: u64,
    pub steps: u64,
    pub max_steps: u64,
}

impl Meter {
    pub fn charge(&mut self, steps: u64) {
        self.queries += 1;
        self.steps += steps;
        self.max_steps = self.max_steps.max(steps);
    }

    pub fn absorb(&mut self, other: &Meter) {
        self.queries += other.queries;
        self.steps += other.steps;
        self.max_steps = self.max_steps.max(other.max_steps);
    }

    /// Budget isolation: no query ever exceeded its budget.
    pub fn within(&self, budget: u64) -> bool {
        self.steps <= budget.saturating_mul(self.queries) && self.max_steps <= budget
    }
}

/// A binary relation on `N` read as `x <= y` when it returns 1.
#[derive(Debug, Clone)]
pub enum PosetAdversary {
    Dsl { name: String, program: Program },
    Native(PosetFixture),
}

impl PosetAdversary {
    pub fn from_program(name: impl Into<String>, program: Program) -> Result<Self> {
        program.require(&[("leq", 2)])?;
        Ok(PosetAdversary::Dsl {
            name: name.into(),
            program,
        })
    }

    pub fn name(&self) -> String {
        match self {
            PosetAdversary::Dsl { name, .. } => name.clone(),
            PosetAdversary::Native(f) => f.name(),
        }
    }

    pub fn leq(&self, x: u64, y: u64, budget: u64) -> Result<Evaluation<u64>> {
        match self {
            PosetAdversary::Dsl { program, .. } => program.eval("leq", &[x, y], budget),
            PosetAdversary::Native(f) => Ok(Evaluation::value(f.leq(x, y) as u64, 1)),
        }
    }
}

/// The modal-algebra signature, constants first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModalOp {
    Zero,
    One,
    Top0,
    Top1,
    Join,
    Meet,
    Comp,
    F,
}

impl ModalOp {
    pub const ALL: [ModalOp; 8] = [
        ModalOp::Zero,
        ModalOp::One,
        ModalOp::Top0,
        ModalOp::Top1,
        ModalOp::Join,
        ModalOp::Meet,
        ModalOp::Comp,
        ModalOp::F,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModalOp::Zero => "zero",
            ModalOp::One => "one",
            ModalOp::Top0 => "top0",
            ModalOp::Top1 => "top1",
            ModalOp::Join => "join",
            ModalOp::Meet => "meet",
            ModalOp::Comp => "comp",
            ModalOp::F => "f",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            ModalOp::Zero | ModalOp::One | ModalOp::Top0 | ModalOp::Top1 => 0,
            ModalOp::Comp | ModalOp::F => 1,
            ModalOp::Join | ModalOp::Meet => 2,
        }
    }
}

/// A structure in the signature `{join, meet, comp, 0, 1, f, T0, T1}`.
///
/// Element ids are natural numbers of any size. Programs see them through
/// 64-bit registers, so larger ids saturate on the way in.
#[derive(Debug, Clone)]
pub enum ModalAdversary {
    Dsl { name: String, program: Program },
    Native(ModalFixture),
}

impl ModalAdversary {
    pub fn from_program(name: impl Into<String>, program: Program) -> Result<Self> {
        let sig: Vec<(&str, usize)> = ModalOp::ALL.iter().map(|op| (op.name(), op.arity())).collect();
        program.require(&sig)?;
        Ok(ModalAdversary::Dsl {
            name: name.into(),
            program,
        })
    }

    pub fn name(&self) -> String {
        match self {
            ModalAdversary::Dsl { name, .. } => name.clone(),
            ModalAdversary::Native(f) => f.name(),
        }
    }

    pub fn call(&self, op: ModalOp, args: &[BigUint], budget: u64) -> Result<Evaluation<BigUint>> {
        if args.len() != op.arity() {
            return Err(Error::LengthMismatch(op.arity(), args.len()));
        }
        match self {
            ModalAdversary::Dsl { program, .. } => {
                let regs: Vec<u64> = args.iter().map(|a| a.to_u64().unwrap_or(u64::MAX)).collect();
                let ev = program.eval(op.name(), &regs, budget)?;
                Ok(Evaluation {
                    outcome: match ev.outcome {
                        Outcome::Value(v) => Outcome::Value(BigUint::from(v)),
                        Outcome::OutOfFuel => Outcome::OutOfFuel,
                    },
                    steps: ev.steps,
                })
            }
            ModalAdversary::Native(f) => Ok(Evaluation::value(f.call(op, args)?, 1)),
        }
    }
}

/// A structure `(N, S1, S2, e, r)` meant to be a binary successor tree.
#[derive(Debug, Clone)]
pub enum SuccAdversary {
    Dsl { name: String, program: Program },
    Native(SuccFixture),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuccOp {
    S1,
    S2,
    Empty,
    Root,
}

impl SuccAdversary {
    pub fn from_program(name: impl Into<String>, program: Program) -> Result<Self> {
        program.require(&[("s1", 1), ("s2", 1), ("empty", 0), ("root", 0)])?;
        Ok(SuccAdversary::Dsl {
            name: name.into(),
            program,
        })
    }

    pub fn name(&self) -> String {
        match self {
            SuccAdversary::Dsl { name, .. } => name.clone(),
            SuccAdversary::Native(f) => f.name(),
        }
    }

    pub fn call(&self, op: SuccOp, arg: u64, budget: u64) -> Result<Evaluation<u64>> {
        match self {
            SuccAdversary::Dsl { program, .. } => match op {
                SuccOp::S1 => program.eval("s1", &[arg], budget),
                SuccOp::S2 => program.eval("s2", &[arg], budget),
                SuccOp::Empty => program.eval("empty", &[], budget),
                SuccOp::Root => program.eval("root", &[], budget),
            },
            SuccAdversary::Native(f) => Ok(Evaluation::value(f.call(op, arg), 1)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fuel_policy() {
        let p = FuelPolicy::default();
        assert_eq!(p.budget(0), 1000);
        assert_eq!(p.budget(3), 16_000);
        assert_eq!(FuelPolicy::parse("constant:7").unwrap(), FuelPolicy::Constant(7));
        assert_eq!(FuelPolicy::parse(&p.to_string()).unwrap(), p);
        assert!(FuelPolicy::parse("linear:3").is_err());
    }

    #[test]
    fn dsl_adversaries_need_their_signature() {
        let prog = Program::parse("def leq 2\n  set r2 1\n  ret r2\n").unwrap();
        assert!(PosetAdversary::from_program("one", prog.clone()).is_ok());
        assert!(ModalAdversary::from_program("one", prog).is_err());
    }

    #[test]
    fn modal_programs_saturate_large_ids() {
        let src = "def zero 0\nret r0\ndef one 0\nret r0\ndef top0 0\nret r0\ndef top1 0\nret r0\n\
                   def join 2\nret r0\ndef meet 2\nret r1\ndef comp 1\nret r0\ndef f 1\nret r0\n";
        let adv = ModalAdversary::from_program("echo", Program::parse(src).unwrap()).unwrap();
        let big = BigUint::from(u64::MAX) * 4u32;
        let ev = adv.call(ModalOp::F, &[big], 10).unwrap();
        assert_eq!(ev.outcome, Outcome::Value(BigUint::from(u64::MAX)));
        assert!(adv.call(ModalOp::Join, &[BigUint::from(1u32)], 10).is_err());
    }
}
