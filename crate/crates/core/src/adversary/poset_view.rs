use super::{Meter, Outcome, PosetAdversary};
use crate::error::Result;
use crate::structures::{FinitePosetTree, NodeId, Violation};

/// The relation an adversary induces on `{0, ..., size-1}`, stored as
/// up-sets since the tables that matter are sparse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosetApproximation {
    size: usize,
    up: Vec<Vec<usize>>,
}

impl PosetApproximation {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.up[x].binary_search(&y).is_ok()
    }

    pub fn up_set(&self, x: usize) -> &[usize] {
        &self.up[x]
    }

    /// Restriction to `{0, ..., m-1}`.
    pub fn restrict(&self, m: usize) -> Self {
        assert!(m <= self.size);
        PosetApproximation {
            size: m,
            up: self.up[..m].iter().map(|u| u.iter().copied().filter(|&y| y < m).collect()).collect(),
        }
    }

    /// The table as a poset tree on the ids `0..size`, or the first clause it breaks.
    pub fn to_tree(&self) -> Result<FinitePosetTree, Violation> {
        let nodes: Vec<NodeId> = (0..self.size as NodeId).collect();
        FinitePosetTree::from_upsets(&nodes, self.up.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApproxOutcome {
    /// A poset tree on the ids `0..size`.
    Tree(FinitePosetTree),
    NotTree(Violation),
    /// The first cell, in row-major order, that ran out of fuel.
    NotTotal { x: u64, y: u64 },
}

impl From<Result<FinitePosetTree, Violation>> for ApproxOutcome {
    fn from(r: Result<FinitePosetTree, Violation>) -> Self {
        match r {
            Ok(t) => ApproxOutcome::Tree(t),
            Err(v) => ApproxOutcome::NotTree(v),
        }
    }
}

/// Evaluates the `size x size` table under `budget` steps per cell and
/// checks it is a poset tree. Native fixtures build the tree directly and
/// are charged one step per cell as if they had been asked.
pub fn poset_approximation(
    adv: &PosetAdversary,
    size: usize,
    budget: u64,
    meter: &mut Meter,
) -> Result<ApproxOutcome> {
    if let PosetAdversary::Native(f) = adv {
        let cells = (size * size) as u64;
        meter.queries += cells;
        meter.steps += cells;
        meter.max_steps = meter.max_steps.max(u64::from(size > 0));
        return Ok(f.approximation(size).into());
    }
    Ok(match cell_by_cell(adv, size, budget, meter)? {
        Ok(table) => table.to_tree().into(),
        Err((x, y)) => ApproxOutcome::NotTotal { x, y },
    })
}

/// The raw table, or the first cell that ran out of fuel.
pub fn cell_by_cell(
    adv: &PosetAdversary,
    size: usize,
    budget: u64,
    meter: &mut Meter,
) -> Result<std::result::Result<PosetApproximation, (u64, u64)>> {
    let mut up = vec![Vec::new(); size];
    for (x, row) in up.iter_mut().enumerate() {
        for y in 0..size {
            let ev = adv.leq(x as u64, y as u64, budget)?;
            meter.charge(ev.steps);
            match ev.outcome {
                Outcome::Value(1) => row.push(y),
                Outcome::Value(_) => {}
                Outcome::OutOfFuel => return Ok(Err((x as u64, y as u64))),
            }
        }
    }
    Ok(Ok(PosetApproximation { size, up }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{PosetFixture, Program};

    fn table(adv: &PosetAdversary, n: usize) -> PosetApproximation {
        cell_by_cell(adv, n, 10_000, &mut Meter::default()).unwrap().unwrap()
    }

    #[test]
    fn one_by_one() {
        let t = table(&PosetAdversary::Native(PosetFixture::Chain), 1);
        assert_eq!(t.size(), 1);
        assert!(t.leq(0, 0));
    }

    #[test]
    fn scripted_natural_order_is_a_chain() {
        // x <= y iff y <= x numerically: 0 is the root of a 5-chain.
        let prog = Program::parse("def leq 2\n  lt r2 r0 r1\n  set r3 1\n  sub r2 r3 r2\n  ret r2\n").unwrap();
        let adv = PosetAdversary::from_program("order", prog).unwrap();
        let t = table(&adv, 5).to_tree().unwrap();
        assert_eq!(t.root(), 0);
        assert_eq!(t.height(4), 5);
        assert_eq!(table(&adv, 5), table(&PosetAdversary::Native(PosetFixture::Chain), 5));
        let fast = poset_approximation(&PosetAdversary::Native(PosetFixture::Chain), 5, 1, &mut Meter::default());
        assert_eq!(fast.unwrap(), ApproxOutcome::Tree(t));
    }

    #[test]
    fn irreflexive_cell_is_reported_downstream() {
        let t = table(&PosetAdversary::Native(PosetFixture::AxiomViolator), 6);
        assert_eq!(t.to_tree().unwrap_err().clause, "reflexivity");
    }

    #[test]
    fn out_of_fuel_cell_is_not_total() {
        let prog = Program::parse("def leq 2\n  repeat 50\n    add r2 r2 r0\n  end\n  ret r2\n").unwrap();
        let adv = PosetAdversary::from_program("slow", prog).unwrap();
        let mut meter = Meter::default();
        let out = poset_approximation(&adv, 3, 20, &mut meter).unwrap();
        assert_eq!(out, ApproxOutcome::NotTotal { x: 0, y: 0 });
        assert!(meter.within(20));
    }
}
