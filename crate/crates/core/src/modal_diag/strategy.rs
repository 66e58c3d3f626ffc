use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;

use super::monitor::MonitorHit;
use crate::adversary::ModalClient;
use crate::error::{Error, Result};
use crate::modal::factorize;

/// `f^(0)(a), f^(1)(a), ...` followed up to depth `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitWalk {
    /// `f^(n)(a) = a` and the first `n` iterates are distinct.
    Closed { n: u128 },
    /// `f^(k)(a) = f^(r)(a)` for some `0 < r < k`: two distinct iterates
    /// share an image.
    NonInjective { r: u128, k: u128 },
    /// `L + 1` pairwise distinct iterates.
    Open,
    /// `1` occurs as `f^(j)(a)`.
    HitsOne { j: u128 },
    /// The depth exceeds the iterate cap and no repetition was seen below it.
    Capped,
}

pub fn walk_orbit(c: &mut ModalClient<'_>, a: &BigUint, one: &BigUint, depth: u128, cap: u128) -> Result<OrbitWalk> {
    let mut seen: HashMap<BigUint, u128> = HashMap::new();
    let mut cur = a.clone();
    let mut j = 0u128;
    loop {
        if &cur == one {
            return Ok(OrbitWalk::HitsOne { j });
        }
        if let Some(&r) = seen.get(&cur) {
            return Ok(if r == 0 {
                OrbitWalk::Closed { n: j }
            } else {
                OrbitWalk::NonInjective { r, k: j }
            });
        }
        if j == depth {
            return Ok(OrbitWalk::Open);
        }
        if j == cap {
            return Ok(OrbitWalk::Capped);
        }
        let next = c.f(&cur)?;
        seen.insert(cur, j);
        cur = next;
        j += 1;
    }
}

/// Why a closed orbit of size `n` cannot occur in our algebra, if it cannot:
/// a factor 2, a repeated factor, or a forbidden prime.
pub fn bad_orbit_size(n: u128, forbidden: &BTreeSet<u64>) -> Option<String> {
    for (q, e) in factorize(n) {
        if q == 2 {
            return Some("even".into());
        }
        if e >= 2 {
            return Some(format!("square-{q}"));
        }
        if forbidden.contains(&(q as u64)) {
            return Some(format!("forbidden-{q}"));
        }
    }
    None
}

/// Why a requirement stopped. The `Monitor` reasons and the cases of the two
/// strategies are non-isomorphism certificates; the rest disqualify the
/// adversary for exceeding what one stage may spend on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reason {
    Monitor(MonitorHit),
    /// (i.a): `f` folds two orbit points of `a` together.
    NotInjective { a: BigUint, r: u128, k: u128 },
    /// (i.b): a closed orbit whose size no element of ours has.
    OrbitSize { a: BigUint, n: u128, why: String },
    /// (i.e): `M + 1` disjoint witnesses all with small clean orbits.
    Exhausted { m: u128, sizes: Vec<u128> },
    /// (ii.a), bad factor: like (i.b) for the active witness.
    WitnessOrbit { n: u128, why: String },
    /// (ii.a), `p_s | N`: the prime `p_s` is kept out of our algebra.
    Forbade { prime: u64, n: u128 },
    /// The witness fails to be injective on its orbit, or reaches `1`.
    WitnessNotInjective { r: u128, k: u128 },
    P1Violation { a: BigUint },
    P2Violation { k: usize, x: BigUint, y: BigUint },
    Disqualified(&'static str),
}

impl Reason {
    pub fn tag(&self) -> String {
        match self {
            Reason::Monitor(h) => h.condition().to_string(),
            Reason::NotInjective { .. } => "i.a".into(),
            Reason::OrbitSize { .. } => "i.b".into(),
            Reason::Exhausted { .. } => "i.e".into(),
            Reason::WitnessOrbit { .. } => "ii.a".into(),
            Reason::Forbade { .. } => "forbid".into(),
            Reason::WitnessNotInjective { .. } => "non-injective".into(),
            Reason::P1Violation { .. } => "P.1-violation".into(),
            Reason::P2Violation { .. } => "P.2-violation".into(),
            Reason::Disqualified(why) => why.to_string(),
        }
    }

    pub fn is_disqualification(&self) -> bool {
        matches!(self, Reason::Disqualified(_))
    }

    pub fn detail(&self) -> String {
        match self {
            Reason::Monitor(h) => h.detail(),
            Reason::NotInjective { a, r, k } => format!("a={a}:f^{k}=f^{r}"),
            Reason::OrbitSize { a, n, why } => format!("a={a}:N={n}:{why}"),
            Reason::Exhausted { m, sizes } => {
                let s: BTreeSet<_> = sizes.iter().collect();
                format!("M={m}:N={}", s.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","))
            }
            Reason::WitnessOrbit { n, why } => format!("N={n}:{why}"),
            Reason::Forbade { prime, n } => format!("p={prime}:N={n}"),
            Reason::WitnessNotInjective { r, k } => format!("f^{k}=f^{r}"),
            Reason::P1Violation { a } => format!("a={a}"),
            Reason::P2Violation { k, x, y } => format!("T{k}>{x},{y}"),
            Reason::Disqualified(why) => why.to_string(),
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.tag(), self.detail())
    }
}

/// The numbers one stage works with.
#[derive(Debug, Clone)]
pub struct StageParams<'a> {
    pub stage: u64,
    /// `p_s`.
    pub prime: u64,
    /// `L`, the product of the first `s` odd primes.
    pub depth: u128,
    /// `M = card(D_s)`, `None` past the cap.
    pub m: Option<u128>,
    pub forbidden: &'a BTreeSet<u64>,
    pub iterate_cap: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlertOutcome {
    Deactivate(Reason),
    /// (i.c) or (i.d): `R_e` turns active with witness `c`.
    Activate { case: &'static str, c: BigUint, orbit: Option<u128> },
}

impl AlertOutcome {
    pub fn case(&self) -> String {
        match self {
            AlertOutcome::Deactivate(r) => r.tag(),
            AlertOutcome::Activate { case, .. } => case.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActiveOutcome {
    /// (ii.b) or the harmless half of (ii.a); `orbit` is `N` when closed.
    Stay { orbit: Option<u128> },
    Deactivate(Reason),
}

/// What the alert strategy looked at, for the trace.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlertScan {
    pub b_scanned: usize,
    pub atoms: usize,
    pub witnesses: Vec<BigUint>,
}

fn fuel_to_reason<T>(r: Result<T>) -> Result<std::result::Result<T, Reason>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(Error::OutOfFuel { .. }) => Ok(Err(Reason::Disqualified("fuel"))),
        Err(e) => Err(e),
    }
}

/// The alert strategy; an adversary running out of fuel is disqualified.
pub fn alert_strategy(c: &mut ModalClient<'_>, p: &StageParams<'_>) -> Result<(AlertOutcome, AlertScan)> {
    let mut scan = AlertScan::default();
    let out = fuel_to_reason(alert_inner(c, p, &mut scan))?;
    Ok((out.unwrap_or_else(AlertOutcome::Deactivate), scan))
}

fn alert_inner(c: &mut ModalClient<'_>, p: &StageParams<'_>, scan: &mut AlertScan) -> Result<AlertOutcome> {
    let Some(m) = p.m else {
        return Ok(AlertOutcome::Deactivate(Reason::Disqualified("budget")));
    };
    let (zero, one) = (c.zero()?, c.one()?);
    let tops = [c.top(0)?, c.top(1)?];
    let distinguished = [&zero, &one, &tops[0], &tops[1]];
    let want = m as usize + 1;
    let scan_limit = 4 * m as usize + 64;

    let mut atoms = vec![one.clone()];
    let mut next_id = 0u64;
    let mut generators: usize = 0;
    let mut b_needed = m as usize;
    refine(c, &mut atoms, &tops[0], &zero)?;
    refine(c, &mut atoms, &tops[1], &zero)?;
    let witnesses = loop {
        while generators < b_needed {
            let b = BigUint::from(next_id);
            next_id += 1;
            if distinguished.contains(&&b) {
                continue;
            }
            refine(c, &mut atoms, &b, &zero)?;
            generators += 1;
        }
        scan.b_scanned = generators;
        scan.atoms = atoms.len();
        // atoms of Q_s sent to 1, by cell: (P.2) allows one under each top
        let mut ones: [Option<&BigUint>; 2] = [None, None];
        let mut good: Vec<&BigUint> = Vec::new();
        for a in &atoms {
            if &c.f(a)? != &one {
                good.push(a);
                continue;
            }
            let k = if c.leq(a, &tops[0])? { 0 } else { 1 };
            if let Some(x) = ones[k] {
                let (x, y) = if x < a { (x, a) } else { (a, x) };
                return Ok(AlertOutcome::Deactivate(Reason::P2Violation {
                    k,
                    x: x.clone(),
                    y: y.clone(),
                }));
            }
            ones[k] = Some(a);
        }
        if good.len() >= want {
            good.sort();
            break good.into_iter().take(want).cloned().collect::<Vec<_>>();
        }
        if generators >= scan_limit {
            return Ok(AlertOutcome::Deactivate(Reason::Disqualified("scan")));
        }
        b_needed = (generators + want - good.len()).min(scan_limit);
    };
    scan.witnesses = witnesses.clone();

    let mut walks = Vec::with_capacity(witnesses.len());
    for a in &witnesses {
        let w = walk_orbit(c, a, &one, p.depth, p.iterate_cap)?;
        if &c.f(a)? == a || matches!(w, OrbitWalk::HitsOne { .. }) {
            return Ok(AlertOutcome::Deactivate(Reason::P1Violation { a: a.clone() }));
        }
        walks.push(w);
    }
    if walks.contains(&OrbitWalk::Capped) {
        return Ok(AlertOutcome::Deactivate(Reason::Disqualified("iterate-cap")));
    }
    for (a, w) in witnesses.iter().zip(&walks) {
        if let OrbitWalk::NonInjective { r, k } = *w {
            return Ok(AlertOutcome::Deactivate(Reason::NotInjective { a: a.clone(), r, k }));
        }
    }
    for (a, w) in witnesses.iter().zip(&walks) {
        if let OrbitWalk::Closed { n } = *w {
            if let Some(why) = bad_orbit_size(n, p.forbidden) {
                return Ok(AlertOutcome::Deactivate(Reason::OrbitSize { a: a.clone(), n, why }));
            }
        }
    }
    for (a, w) in witnesses.iter().zip(&walks) {
        if let OrbitWalk::Closed { n } = *w {
            if factorize(n).iter().any(|&(q, _)| q >= p.prime as u128) {
                return Ok(AlertOutcome::Activate {
                    case: "i.c",
                    c: a.clone(),
                    orbit: Some(n),
                });
            }
        }
    }
    for (a, w) in witnesses.iter().zip(&walks) {
        if *w == OrbitWalk::Open {
            return Ok(AlertOutcome::Activate {
                case: "i.d",
                c: a.clone(),
                orbit: None,
            });
        }
    }
    let sizes: Vec<u128> = walks
        .iter()
        .map(|w| match *w {
            OrbitWalk::Closed { n } => n,
            _ => unreachable!("every other walk was dispatched above"),
        })
        .collect();
    for &n in &sizes {
        let f = factorize(n);
        let clean = n <= p.depth && f.iter().all(|&(q, e)| e == 1 && q >= 3 && q < p.prime as u128);
        if !clean {
            return Err(Error::InvariantBreach(format!("case i.e reached with orbit size {n}")));
        }
    }
    Ok(AlertOutcome::Deactivate(Reason::Exhausted { m, sizes }))
}

/// Splits every atom `a` of the current partition into `a meet g` and
/// `a meet C(g)`, dropping zeros.
fn refine(c: &mut ModalClient<'_>, atoms: &mut Vec<BigUint>, g: &BigUint, zero: &BigUint) -> Result<()> {
    let mut cg: Option<BigUint> = None;
    let mut out = Vec::with_capacity(atoms.len() + 1);
    for a in atoms.drain(..) {
        let inside = c.meet(&a, g)?;
        if &inside == zero || inside == a {
            out.push(a);
            continue;
        }
        if cg.is_none() {
            cg = Some(c.comp(g)?);
        }
        let outside = c.meet(&a, cg.as_ref().unwrap())?;
        out.push(inside);
        if &outside != zero {
            out.push(outside);
        }
    }
    *atoms = out;
    Ok(())
}

/// The active strategy for witness `c_e`.
pub fn active_strategy(c: &mut ModalClient<'_>, witness: &BigUint, p: &StageParams<'_>) -> Result<ActiveOutcome> {
    let r = fuel_to_reason((|| {
        let one = c.one()?;
        walk_orbit(c, witness, &one, p.depth, p.iterate_cap)
    })())?;
    let walk = match r {
        Ok(w) => w,
        Err(reason) => return Ok(ActiveOutcome::Deactivate(reason)),
    };
    Ok(match walk {
        OrbitWalk::Open => ActiveOutcome::Stay { orbit: None },
        OrbitWalk::Closed { n } => {
            if let Some(why) = bad_orbit_size(n, p.forbidden) {
                ActiveOutcome::Deactivate(Reason::WitnessOrbit { n, why })
            } else if n % p.prime as u128 == 0 {
                ActiveOutcome::Deactivate(Reason::Forbade { prime: p.prime, n })
            } else {
                ActiveOutcome::Stay { orbit: Some(n) }
            }
        }
        OrbitWalk::NonInjective { r, k } => ActiveOutcome::Deactivate(Reason::WitnessNotInjective { r, k }),
        OrbitWalk::HitsOne { .. } => ActiveOutcome::Deactivate(Reason::P1Violation { a: witness.clone() }),
        OrbitWalk::Capped => ActiveOutcome::Deactivate(Reason::Disqualified("iterate-cap")),
    })
}

/// (†) for a closed witness orbit of size `n` at the end of stage `s`.
pub fn dagger_holds(n: u128, prime: u64) -> bool {
    let f = factorize(n);
    !f.is_empty() && f.iter().all(|&(q, e)| q > 2 && e == 1) && f.iter().any(|&(q, _)| q > prime as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{ModalAdversary, ModalFixture};
    use crate::modal::nth_odd_prime;

    fn params(stage: u64, m: u128, forbidden: &BTreeSet<u64>) -> StageParams<'_> {
        StageParams {
            stage,
            prime: nth_odd_prime(stage as usize),
            depth: (1..=stage as usize).map(|j| nth_odd_prime(j) as u128).product(),
            m: Some(m),
            forbidden,
            iterate_cap: 1 << 20,
        }
    }

    fn alert(f: ModalFixture, stage: u64, m: u128) -> AlertOutcome {
        let adv = ModalAdversary::Native(f);
        let mut c = ModalClient::new(&adv, 1000);
        let none = BTreeSet::new();
        alert_strategy(&mut c, &params(stage, m, &none)).unwrap().0
    }

    #[test]
    fn orbit_walks() {
        let adv = ModalAdversary::Native(ModalFixture::honest());
        let mut c = ModalClient::new(&adv, 1000);
        let one = BigUint::from(3u32);
        let u0 = BigUint::from(4u32);
        assert_eq!(walk_orbit(&mut c, &u0, &one, 3, 100).unwrap(), OrbitWalk::Closed { n: 3 });
        assert_eq!(walk_orbit(&mut c, &u0, &one, 2, 100).unwrap(), OrbitWalk::Open);
        assert_eq!(walk_orbit(&mut c, &u0, &one, 3, 1).unwrap(), OrbitWalk::Capped);
        assert_eq!(walk_orbit(&mut c, &BigUint::from(1u32), &one, 5, 100).unwrap(), OrbitWalk::HitsOne { j: 1 });
        let adv = ModalAdversary::Native(ModalFixture::non_injective());
        let mut c = ModalClient::new(&adv, 1000);
        // u0 -> v0 -> u1 -> v0
        assert_eq!(
            walk_orbit(&mut c, &u0, &one, 5, 100).unwrap(),
            OrbitWalk::NonInjective { r: 1, k: 3 }
        );
    }

    #[test]
    fn orbit_size_obstructions() {
        let none = BTreeSet::new();
        assert_eq!(bad_orbit_size(15, &none), None);
        assert_eq!(bad_orbit_size(9, &none).as_deref(), Some("square-3"));
        assert_eq!(bad_orbit_size(6, &none).as_deref(), Some("even"));
        assert_eq!(bad_orbit_size(35, &BTreeSet::from([7])).as_deref(), Some("forbidden-7"));
        assert!(dagger_holds(15, 3));
        assert!(!dagger_holds(15, 5));
        assert!(!dagger_holds(45, 3));
    }

    #[test]
    fn alert_cases() {
        assert!(matches!(alert(ModalFixture::non_injective(), 1, 4), AlertOutcome::Deactivate(Reason::NotInjective { .. })));
        assert!(matches!(alert(ModalFixture::orbit_nine(), 2, 32), AlertOutcome::Deactivate(Reason::OrbitSize { n: 9, .. })));
        assert_eq!(
            alert(ModalFixture::honest(), 1, 4),
            AlertOutcome::Activate {
                case: "i.c",
                c: BigUint::from(4u32),
                orbit: Some(3)
            }
        );
        assert_eq!(alert(ModalFixture::delayed_mirror(1), 1, 4).case(), "i.d");
        assert_eq!(alert(ModalFixture::all_threes(), 2, 32).case(), "i.e");
    }

    #[test]
    fn witnesses_are_disjoint_atoms_of_q() {
        let adv = ModalAdversary::Native(ModalFixture::honest());
        let mut c = ModalClient::new(&adv, 1000);
        let none = BTreeSet::new();
        let (_, scan) = alert_strategy(&mut c, &params(2, 32, &none)).unwrap();
        assert_eq!(scan.witnesses.len(), 33);
        let zero = BigUint::from(0u32);
        for (i, x) in scan.witnesses.iter().enumerate() {
            assert_ne!(x, &zero);
            for y in &scan.witnesses[i + 1..] {
                assert_eq!(c.meet(x, y).unwrap(), zero);
            }
        }
    }

    #[test]
    fn cap_and_fuel_disqualify() {
        let none = BTreeSet::new();
        let adv = ModalAdversary::Native(ModalFixture::honest());
        let mut c = ModalClient::new(&adv, 1000);
        let mut p = params(3, 0, &none);
        p.m = None;
        assert_eq!(alert_strategy(&mut c, &p).unwrap().0, AlertOutcome::Deactivate(Reason::Disqualified("budget")));
        let prog = crate::adversary::Program::parse(
            "def zero 0\n set r0 0\n ret r0\ndef one 0\n set r0 3\n ret r0\ndef top0 0\n set r0 1\n ret r0\n\
             def top1 0\n set r0 2\n ret r0\ndef join 2\n repeat 50\n add r3 r3 r3\n end\n ret r0\n\
             def meet 2\n repeat 50\n add r3 r3 r3\n end\n ret r0\ndef comp 1\n ret r0\ndef f 1\n ret r0\n",
        )
        .unwrap();
        let adv = ModalAdversary::from_program("slow", prog).unwrap();
        let mut c = ModalClient::new(&adv, 10);
        assert_eq!(
            alert_strategy(&mut c, &params(1, 4, &none)).unwrap().0,
            AlertOutcome::Deactivate(Reason::Disqualified("fuel"))
        );
    }

    #[test]
    fn active_cases() {
        let none = BTreeSet::new();
        let adv = ModalAdversary::Native(ModalFixture::big_cycle(35));
        let mut c = ModalClient::new(&adv, 1000);
        let u0 = BigUint::from(4u32);
        // depth 3: orbit of size 35 still open
        assert_eq!(active_strategy(&mut c, &u0, &params(1, 4, &none)).unwrap(), ActiveOutcome::Stay { orbit: None });
        // depth 105 at stage 3 (p_s = 7): 7 | 35
        assert_eq!(
            active_strategy(&mut c, &u0, &params(3, 4, &none)).unwrap(),
            ActiveOutcome::Deactivate(Reason::Forbade { prime: 7, n: 35 })
        );
        let adv = ModalAdversary::Native(ModalFixture::big_cycle(33));
        let mut c = ModalClient::new(&adv, 1000);
        // 33 = 3 * 11 at stage 3: some prime above 7 divides it, so it stays
        assert_eq!(active_strategy(&mut c, &u0, &params(3, 4, &none)).unwrap(), ActiveOutcome::Stay { orbit: Some(33) });
        assert!(dagger_holds(33, 7));
        let forb = BTreeSet::from([11]);
        assert!(matches!(
            active_strategy(&mut c, &u0, &params(3, 4, &forb)).unwrap(),
            ActiveOutcome::Deactivate(Reason::WitnessOrbit { n: 33, .. })
        ));
    }
}
