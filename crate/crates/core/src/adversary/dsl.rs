//! A small register machine whose only loops are `repeat <literal>` blocks
//! and whose jumps go forward, so every program halts.
//!
//! ```text
//! # comments run to the end of the line
//! def leq 2          # function name and arity; inputs arrive in r0, r1, ...
//!   lt r2 r1 r0      # r2 = (r1 < r0)
//!   eq r3 r0 r1
//!   add r2 r2 r3
//!   ret r2
//! ```
//!
//! Instructions: `set r v`, `mov r a`, `add|sub|mul|div|mod|eq|lt r a b`,
//! `if r goto L`, `label L`, `repeat k` ... `end`, `ret r`. Arithmetic
//! saturates, division by zero yields zero, and falling off the end of a
//! function returns 0. Every executed instruction costs one step.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub const REGISTERS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome<T> {
    Value(T),
    OutOfFuel,
}

impl<T> Outcome<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Outcome::Value(v) => Some(v),
            Outcome::OutOfFuel => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evaluation<T> {
    pub outcome: Outcome<T>,
    pub steps: u64,
}

impl<T> Evaluation<T> {
    pub fn value(v: T, steps: u64) -> Self {
        Evaluation {
            outcome: Outcome::Value(v),
            steps,
        }
    }

    pub fn out_of_fuel(steps: u64) -> Self {
        Evaluation {
            outcome: Outcome::OutOfFuel,
            steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Lt,
}

impl BinOp {
    fn apply(self, a: u64, b: u64) -> u64 {
        match self {
            BinOp::Add => a.saturating_add(b),
            BinOp::Sub => a.saturating_sub(b),
            BinOp::Mul => a.saturating_mul(b),
            BinOp::Div => a.checked_div(b).unwrap_or(0),
            BinOp::Mod => a.checked_rem(b).unwrap_or(0),
            BinOp::Eq => u64::from(a == b),
            BinOp::Lt => u64::from(a < b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Instr {
    Set(usize, u64),
    Mov(usize, usize),
    Bin(BinOp, usize, usize, usize),
    /// Jump to the instruction index when the register is non-zero.
    If(usize, usize),
    Repeat { count: u64, end: usize },
    End { start: usize },
    Ret(usize),
    Nop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub arity: usize,
    code: Vec<Instr>,
}

impl Function {
    pub fn eval(&self, inputs: &[u64], budget: u64) -> Result<Evaluation<u64>> {
        if inputs.len() != self.arity {
            return Err(Error::LengthMismatch(self.arity, inputs.len()));
        }
        Ok(self.run(inputs, budget))
    }

    fn run(&self, inputs: &[u64], budget: u64) -> Evaluation<u64> {
        let mut r = [0u64; REGISTERS];
        r[..inputs.len()].copy_from_slice(inputs);
        let mut loops: Vec<u64> = Vec::new();
        let mut pc = 0usize;
        let mut steps = 0u64;
        while pc < self.code.len() {
            let ins = &self.code[pc];
            if matches!(ins, Instr::Nop) {
                pc += 1;
                continue;
            }
            if steps == budget {
                return Evaluation::out_of_fuel(steps);
            }
            steps += 1;
            pc += 1;
            match *ins {
                Instr::Set(d, v) => r[d] = v,
                Instr::Mov(d, a) => r[d] = r[a],
                Instr::Bin(op, d, a, b) => r[d] = op.apply(r[a], r[b]),
                Instr::If(c, target) => {
                    if r[c] != 0 {
                        pc = target;
                    }
                }
                Instr::Repeat { count, end } => {
                    if count == 0 {
                        pc = end + 1;
                    } else {
                        loops.push(count);
                    }
                }
                Instr::End { start } => {
                    let left = loops.last_mut().expect("balanced at load");
                    *left -= 1;
                    if *left > 0 {
                        pc = start + 1;
                    } else {
                        loops.pop();
                    }
                }
                Instr::Ret(a) => return Evaluation::value(r[a], steps),
                Instr::Nop => unreachable!(),
            }
        }
        Evaluation::value(0, steps)
    }
}

/// A set of named functions loaded from one DSL source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    functions: BTreeMap<String, Function>,
}

impl Program {
    pub fn parse(src: &str) -> Result<Self> {
        let mut functions = BTreeMap::new();
        let mut current: Option<(String, usize, Vec<(usize, Vec<String>)>)> = None;
        let finish = |cur: Option<(String, usize, Vec<(usize, Vec<String>)>)>,
                          functions: &mut BTreeMap<String, Function>|
         -> Result<()> {
            if let Some((name, arity, body)) = cur {
                let f = compile(arity, &body)?;
                functions.insert(name, f);
            }
            Ok(())
        };
        for (i, raw) in src.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            if toks[0] == "def" {
                finish(current.take(), &mut functions)?;
                if toks.len() != 3 {
                    return Err(load_err(line_no, "expected `def <name> <arity>`"));
                }
                let arity: usize = toks[2].parse().map_err(|_| load_err(line_no, "arity must be a literal"))?;
                if arity > REGISTERS {
                    return Err(load_err(line_no, "arity exceeds the register file"));
                }
                if functions.contains_key(&toks[1]) {
                    return Err(load_err(line_no, format!("function {} defined twice", toks[1])));
                }
                current = Some((toks[1].clone(), arity, Vec::new()));
            } else {
                match current.as_mut() {
                    Some((_, _, body)) => body.push((line_no, toks)),
                    None => return Err(load_err(line_no, "instruction outside a `def` block")),
                }
            }
        }
        finish(current.take(), &mut functions)?;
        Ok(Program { functions })
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.get(name)
    }

    pub fn has(&self, name: &str, arity: usize) -> bool {
        self.functions.get(name).is_some_and(|f| f.arity == arity)
    }

    /// Fails unless every `(name, arity)` pair is defined.
    pub fn require(&self, signature: &[(&str, usize)]) -> Result<()> {
        for &(name, arity) in signature {
            match self.functions.get(name) {
                Some(f) if f.arity == arity => {}
                Some(f) => {
                    return Err(Error::Load {
                        line: 0,
                        msg: format!("function {name} has arity {} but {arity} is required", f.arity),
                    })
                }
                None => {
                    return Err(Error::Load {
                        line: 0,
                        msg: format!("missing function {name}/{arity}"),
                    })
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, name: &str, inputs: &[u64], budget: u64) -> Result<Evaluation<u64>> {
        self.functions
            .get(name)
            .ok_or_else(|| Error::Precondition(format!("no function named {name}")))?
            .eval(inputs, budget)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.functions.keys().map(String::as_str)
    }
}

fn load_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Load { line, msg: msg.into() }
}

fn reg(line: usize, tok: &str) -> Result<usize> {
    tok.strip_prefix('r')
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|&n| n < REGISTERS)
        .ok_or_else(|| load_err(line, format!("bad register {tok:?}")))
}

fn literal(line: usize, tok: &str, what: &str) -> Result<u64> {
    tok.parse::<u64>()
        .map_err(|_| load_err(line, format!("{what} must be a literal, found {tok:?}")))
}

fn compile(arity: usize, body: &[(usize, Vec<String>)]) -> Result<Function> {
    let mut code = Vec::with_capacity(body.len());
    // label name -> (instruction index, block id)
    let mut labels: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut gotos: Vec<(usize, usize, &str, usize)> = Vec::new();
    let mut open: Vec<(usize, usize)> = Vec::new(); // (repeat index, block id)
    let mut next_block = 1usize;
    let block = |open: &Vec<(usize, usize)>| open.last().map_or(0, |b| b.1);
    for (line, toks) in body {
        let line = *line;
        let args = &toks[1..];
        let want = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(load_err(line, format!("`{}` takes {n} operands", toks[0])))
            }
        };
        let ins = match toks[0].as_str() {
            "set" => {
                want(2)?;
                Instr::Set(reg(line, &args[0])?, literal(line, &args[1], "value")?)
            }
            "mov" => {
                want(2)?;
                Instr::Mov(reg(line, &args[0])?, reg(line, &args[1])?)
            }
            op @ ("add" | "sub" | "mul" | "div" | "mod" | "eq" | "lt") => {
                want(3)?;
                let op = match op {
                    "add" => BinOp::Add,
                    "sub" => BinOp::Sub,
                    "mul" => BinOp::Mul,
                    "div" => BinOp::Div,
                    "mod" => BinOp::Mod,
                    "eq" => BinOp::Eq,
                    _ => BinOp::Lt,
                };
                Instr::Bin(op, reg(line, &args[0])?, reg(line, &args[1])?, reg(line, &args[2])?)
            }
            "if" => {
                if args.len() != 3 || args[1] != "goto" {
                    return Err(load_err(line, "expected `if r goto L`"));
                }
                gotos.push((line, code.len(), args[2].as_str(), block(&open)));
                Instr::If(reg(line, &args[0])?, usize::MAX)
            }
            "label" => {
                want(1)?;
                if labels.insert(args[0].as_str(), (code.len(), block(&open))).is_some() {
                    return Err(load_err(line, format!("label {} defined twice", args[0])));
                }
                Instr::Nop
            }
            "repeat" => {
                want(1)?;
                let count = literal(line, &args[0], "loop bound")?;
                open.push((code.len(), next_block));
                next_block += 1;
                Instr::Repeat { count, end: usize::MAX }
            }
            "end" => {
                want(0)?;
                let (start, _) = open.pop().ok_or_else(|| load_err(line, "`end` without `repeat`"))?;
                let here = code.len();
                if let Instr::Repeat { end, .. } = &mut code[start] {
                    *end = here;
                }
                Instr::End { start }
            }
            "ret" => {
                want(1)?;
                Instr::Ret(reg(line, &args[0])?)
            }
            other => return Err(load_err(line, format!("unknown instruction {other:?}"))),
        };
        code.push(ins);
    }
    if let Some(&(start, _)) = open.last() {
        let line = body.iter().map(|(l, _)| *l).nth(start).unwrap_or(0);
        return Err(load_err(line, "`repeat` without `end`"));
    }
    for (line, at, name, blk) in gotos {
        let &(target, tblk) = labels
            .get(name)
            .ok_or_else(|| load_err(line, format!("unknown label {name}")))?;
        if target <= at {
            return Err(load_err(line, "jumps must go forward"));
        }
        if tblk != blk {
            return Err(load_err(line, "jumps must stay inside their loop body"));
        }
        code[at] = match code[at] {
            Instr::If(c, _) => Instr::If(c, target),
            ref other => other.clone(),
        };
    }
    Ok(Function { arity, code })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(src: &str) -> Function {
        let p = Program::parse(src).unwrap();
        let name = p.names().next().unwrap().to_string();
        p.function(&name).unwrap().clone()
    }

    #[test]
    fn constant_adder_and_fuel() {
        let c = one("def c 1\n set r1 1\n ret r1\n");
        assert_eq!(c.eval(&[7], 10).unwrap().outcome, Outcome::Value(1));
        let add = one("def add 2\n add r2 r0 r1\n ret r2\n");
        assert_eq!(add.eval(&[2, 3], 100).unwrap().outcome, Outcome::Value(5));
        let spin = one("def spin 0\n repeat 100\n add r1 r1 r1\n end\n ret r1\n");
        assert_eq!(spin.eval(&[], 10).unwrap().outcome, Outcome::OutOfFuel);
        assert!(matches!(spin.eval(&[], 1000).unwrap().outcome, Outcome::Value(_)));
    }

    #[test]
    fn larger_budget_agrees_on_terminated_runs() {
        let f = one("def f 1\n set r1 0\n repeat 5\n add r1 r1 r0\n end\n ret r1\n");
        let small = f.eval(&[3], 13).unwrap();
        let large = f.eval(&[3], 1_000_000).unwrap();
        assert_eq!(small, large);
        assert_eq!(small.outcome, Outcome::Value(15));
    }

    #[test]
    fn nested_loops_and_branches() {
        let src = "def f 1\n set r1 0\n set r2 1\n repeat 3\n repeat 4\n add r1 r1 r2\n end\n end\n \
                   eq r3 r0 r1\n if r3 goto yes\n ret r0\n label yes\n set r4 99\n ret r4\n";
        let f = one(src);
        assert_eq!(f.eval(&[12], 1000).unwrap().outcome, Outcome::Value(99));
        assert_eq!(f.eval(&[5], 1000).unwrap().outcome, Outcome::Value(5));
    }

    #[test]
    fn load_errors() {
        assert!(matches!(Program::parse("def f 0\n repeat r1\n end\n"), Err(Error::Load { line: 2, .. })));
        assert!(Program::parse("def f 0\n label a\n if r0 goto a\n").is_err());
        assert!(Program::parse("def f 0\n repeat 2\n label a\n end\n if r0 goto a\n").is_err());
        assert!(Program::parse("def f 0\n repeat 2\n").is_err());
        assert!(Program::parse("set r0 1\n").is_err());
        assert!(Program::parse("def f 0\n frob r0\n").is_err());
        assert!(Program::parse("def f 0\n set r16 1\n").is_err());
    }

    #[test]
    fn arithmetic_edges() {
        let f = one("def f 2\n div r2 r0 r1\n mod r3 r0 r1\n sub r4 r1 r0\n add r2 r2 r3\n add r2 r2 r4\n ret r2\n");
        assert_eq!(f.eval(&[7, 0], 100).unwrap().outcome, Outcome::Value(0));
        assert_eq!(f.eval(&[7, 2], 100).unwrap().outcome, Outcome::Value(4));
        assert!(f.eval(&[1], 100).is_err());
    }

    #[test]
    fn falling_off_returns_zero() {
        let f = one("def f 0\n set r1 5\n");
        assert_eq!(f.eval(&[], 10).unwrap(), Evaluation::value(0, 1));
    }
}
