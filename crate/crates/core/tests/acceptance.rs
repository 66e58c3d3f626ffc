//! Acceptance suite: one pass/fail line per criterion.
//!
//! Each criterion is checked against oracles written here, independently of
//! the engines' own verifiers, and against a pinned wall-clock limit. The
//! process fails only when a criterion outside `EXPECTED_RED` fails; the
//! expected reds are genuinely out of reach at desk scale (see the README).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use punctual_core::adversary::{ModalAdversary, ModalFixture, PosetAdversary, PosetFixture, SuccAdversary, SuccOp};
use punctual_core::boolean::{generated_subalgebra, AlgebraElement, FinCofSet};
use punctual_core::copy::oracle::{DEFAULT_ORACLE_FUEL, DEFAULT_STEPS_PER_STAGE};
use punctual_core::copy::{
    run_ptime, BinString, CaseData, PathFixture, PathSource, PrefixConfig, PrefixCopier, PtimeConfig, PtimeCopier,
    PunctualConfig, PunctualCopier, SuccConfig, SuccDiagonalizer, TreeFixture, TreeSource,
};
use punctual_core::engine::{run, verify, RunConfig};
use punctual_core::lattice::{join_meet, LatticeExtension};
use punctual_core::modal::{ModalityTable, OrbitCase};
use punctual_core::modal_diag::{self, replay_deactivations, verify_run, ModalRunConfig};
use punctual_core::poset_diag::{PosetConstruction, PosetRunConfig, DEFAULT_NODE_BUDGET};
use punctual_core::structures::{isomorphic, FinitePosetTree, NodeId, RpoTree, Structure, SuccessorTree};
use punctual_core::trace::Trace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot pass at desk scale: the trees they ask for are
/// exponentially larger than any node budget.
const EXPECTED_RED: [u32; 2] = [3, 4];

const SEED: u64 = 0x5eed_0001;

struct Verdict {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }

    fn fail(detail: impl Into<String>) -> Self {
        Self::new(false, detail)
    }

    fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Verdict::fail(format!($($msg)+));
        }
    };
}

macro_rules! tryv {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Verdict::fail(format!("{}: {e}", stringify!($e))),
        }
    };
}

// ---------------------------------------------------------------- 1

/// Elements whose supports lie in `{0..POINTS-1}`: bit `k * (POINTS+1) + i`
/// is point `i` of side `k`, bit `k * (POINTS+1) + POINTS` the cofinite tail.
const POINTS: u32 = 5;
const SIDE_BITS: u32 = POINTS + 1;
const FULL: u16 = (1 << (2 * SIDE_BITS)) - 1;

fn side_of(bits: u16) -> FinCofSet {
    let pts = (0..POINTS as u64).filter(|&i| bits >> i & 1 == 1);
    if bits >> POINTS & 1 == 1 {
        let missing: Vec<u64> = (0..POINTS as u64).filter(|&i| bits >> i & 1 == 0).collect();
        FinCofSet::cofinite(missing)
    } else {
        FinCofSet::finite(pts)
    }
}

fn element_of_mask(m: u16) -> AlgebraElement {
    let side = (1u16 << SIDE_BITS) - 1;
    AlgebraElement::new(side_of(m & side), side_of(m >> SIDE_BITS & side))
}

fn mask_of_element(x: &AlgebraElement) -> u16 {
    let mut m = 0u16;
    for (k, s) in [&x.left, &x.right].into_iter().enumerate() {
        for i in 0..=POINTS {
            // point `POINTS` stands for the whole tail
            if s.contains(i as u64) {
                m |= 1 << (k as u32 * SIDE_BITS + i);
            }
        }
    }
    m
}

/// Closure under the Boolean operations: the bits split into classes by
/// which generators contain them, and the closure is every union of classes.
fn closure(gens: &[u16]) -> HashSet<u16> {
    let mut classes: BTreeMap<Vec<bool>, u16> = BTreeMap::new();
    for i in 0..2 * SIDE_BITS {
        let sig = gens.iter().map(|g| g >> i & 1 == 1).collect();
        *classes.entry(sig).or_default() |= 1 << i;
    }
    let classes: Vec<u16> = classes.into_values().collect();
    (0u32..1 << classes.len())
        .map(|pick| (0..classes.len()).filter(|&k| pick >> k & 1 == 1).fold(0, |m, k| m | classes[k]))
        .collect()
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut short = Vec::new();
    for trial in 0..200 {
        let n = trial % 9;
        let mut masks: Vec<u16> = Vec::new();
        while masks.len() < n + 1 {
            let m = rng.gen::<u16>() & FULL;
            if m != 0 && m != FULL && !masks.contains(&m) {
                masks.push(m);
            }
        }
        let gens: Vec<AlgebraElement> = masks.iter().map(|&m| element_of_mask(m)).collect();
        let sub = generated_subalgebra(&gens);
        if sub.atom_count() < n + 2 {
            short.push(format!("trial {trial}: {} atoms for {} generators", sub.atom_count(), n + 1));
        }
        let brute = closure(&masks);
        let listed: HashSet<u16> = sub.elements().iter().map(mask_of_element).collect();
        ensure!(listed == brute, "trial {trial}: atom joins and closure differ ({} vs {})", listed.len(), brute.len());
        for m in 0..=FULL {
            let x = element_of_mask(m);
            ensure!(sub.contains(&x) == brute.contains(&m), "trial {trial}: membership of {x} disagrees");
        }
    }
    if let Some(first) = short.first() {
        return Verdict::fail(format!("{} trials below n+2 atoms, first {first}", short.len()));
    }
    Verdict::new(true, "200 trials, n <= 8: atoms >= n+2, membership equals closure")
}

// ---------------------------------------------------------------- 2

fn brute_orbit(t: &ModalityTable, a: &AlgebraElement, cutoff: usize) -> Option<(usize, usize, bool)> {
    let mut seen: HashMap<AlgebraElement, usize> = HashMap::new();
    let mut cur = a.clone();
    let mut hits_one = false;
    for i in 0..cutoff {
        if let Some(&at) = seen.get(&cur) {
            return Some((i, at, hits_one));
        }
        hits_one |= cur.is_one();
        seen.insert(cur.clone(), i);
        cur = t.apply(&cur).ok()?;
    }
    None
}

fn criterion_2() -> Verdict {
    let primes = [3u64, 5, 7, 11];
    let mut t = ModalityTable::new();
    for p in primes {
        tryv!(t.add_p_cycle(p));
    }
    let mut atoms: Vec<AlgebraElement> = Vec::new();
    let (mut rest0, mut rest1) = (AlgebraElement::top0(), AlgebraElement::top1());
    let mut gens = vec![AlgebraElement::top0(), AlgebraElement::top1()];
    for c in t.cycles() {
        let (u, v) = (c.u_half(), c.v_half());
        rest0 = rest0.meet(&u.complement());
        rest1 = rest1.meet(&v.complement());
        gens.push(u.clone());
        gens.push(v.clone());
        atoms.push(u);
        atoms.push(v);
    }
    atoms.push(rest0);
    atoms.push(rest1);
    atoms.sort();
    let d = generated_subalgebra(&gens);
    ensure!(d.atoms == atoms, "D has {} atoms, expected {}", d.atom_count(), atoms.len());

    let cutoff = 1 + primes.iter().product::<u64>() as usize;
    let mut counts = [0usize; 3];
    for mask in 1u64..1 << atoms.len() {
        let x = d.element(mask);
        let case = tryv!(t.classify_orbit(&x));
        let orbit = tryv!(t.forward_orbit(&x, cutoff as u128));
        let Some((card, back, hits_one)) = brute_orbit(&t, &x, cutoff + 1) else {
            return Verdict::fail(format!("{x}: brute-force orbit did not close"));
        };
        ensure!(orbit.card() == Some(card), "{x}: forward orbit {:?} vs brute {card}", orbit.card());
        match case {
            OrbitCase::NonFrechet => {
                ensure!(!x.is_frechet() && hits_one, "{x}: non-Frechet case but orbit misses 1");
                counts[0] += 1;
            }
            OrbitCase::Fixed => {
                ensure!(card == 1, "{x}: fixed case but orbit size {card}");
                counts[1] += 1;
            }
            OrbitCase::Cycle { n, primes: ps } => {
                ensure!(card as u128 == n && back == 0 && !hits_one, "{x}: N={n}, brute orbit {card} back to {back}");
                let distinct: BTreeSet<u64> = ps.iter().copied().collect();
                ensure!(distinct.len() == ps.len(), "{x}: repeated prime in {ps:?}");
                ensure!(ps.iter().all(|p| primes.contains(p)), "{x}: uninstalled prime in {ps:?}");
                ensure!(ps.iter().map(|&p| p as u128).product::<u128>() == n, "{x}: N={n} is not the product of {ps:?}");
                counts[2] += 1;
            }
        }
    }
    Verdict::new(
        true,
        format!(
            "{} nonzero elements: {} non-Frechet, {} fixed, {} cycling",
            (1usize << atoms.len()) - 1,
            counts[0],
            counts[1],
            counts[2]
        ),
    )
}

// ---------------------------------------------------------------- 3, 4

fn poset_corpus() -> Vec<PosetAdversary> {
    let names = ["mirror:1", "mirror:2", "mirror:3", "mirror:4", "mirror:5", "chain", "non-tree", "axiom-violator"];
    names
        .iter()
        .map(|n| PosetAdversary::Native(PosetFixture::parse(n).unwrap()))
        .collect()
}

fn genuine(name: &str) -> bool {
    !matches!(name, "non-tree" | "axiom-violator")
}

fn up_set(t: &FinitePosetTree, x: NodeId) -> Vec<NodeId> {
    let mut out = vec![x];
    let mut cur = x;
    while let Some(p) = t.parent(cur) {
        out.push(p);
        cur = p;
    }
    out
}

fn subtree_size(t: &FinitePosetTree, x: NodeId) -> usize {
    let mut stack = vec![x];
    let mut n = 0;
    while let Some(y) = stack.pop() {
        n += 1;
        stack.extend_from_slice(t.children(y));
    }
    n
}

/// Unique branching, F-discipline, an open leaf, and frozen blocked subtrees.
fn poset_stage_checks(t: &FinitePosetTree, blocked: &BTreeSet<NodeId>, frozen: &mut BTreeMap<NodeId, usize>) -> Result<(), String> {
    let mut lengths = BTreeSet::new();
    for x in t.nodes() {
        if t.children(x).len() >= 2 && !lengths.insert(up_set(t, x).len()) {
            return Err(format!("branching length {} repeats", up_set(t, x).len()));
        }
    }
    let mut per_level: BTreeMap<usize, usize> = BTreeMap::new();
    for &b in blocked {
        let level = up_set(t, b)[1..].iter().filter(|&&a| t.children(a).len() >= 2).count();
        *per_level.entry(level).or_default() += 1;
    }
    if let Some((l, k)) = per_level.iter().find(|(&l, &k)| l == 0 || k > 1) {
        return Err(format!("{k} blocked nodes at level {l}"));
    }
    let open = t
        .nodes()
        .filter(|&x| t.children(x).is_empty())
        .any(|l| up_set(t, l).iter().all(|a| !blocked.contains(a)));
    if !open {
        return Err("no open leaf".into());
    }
    frozen.retain(|x, _| blocked.contains(x));
    for &b in blocked {
        let size = subtree_size(t, b);
        if *frozen.entry(b).or_insert(size) != size {
            return Err(format!("blocked subtree at {b} changed size"));
        }
    }
    Ok(())
}

fn criterion_3() -> Verdict {
    const HORIZON: u64 = 60;
    let advs = poset_corpus();
    let names: Vec<String> = advs.iter().map(|a| a.name()).collect();
    let mut c = PosetConstruction::new(
        advs,
        PosetRunConfig {
            horizon: HORIZON,
            ..Default::default()
        },
    );
    let mut frozen = BTreeMap::new();
    let mut settled_at = None;
    let mut stopped = None;
    for s in 1..=HORIZON {
        if let Err(e) = c.step() {
            stopped = Some(format!("stage {s}: {e}"));
            break;
        }
        if let Err(e) = poset_stage_checks(&c.tree, &c.blocked, &mut frozen) {
            return Verdict::fail(format!("stage {s}: {e}"));
        }
        let all = c
            .certificates()
            .iter()
            .zip(&names)
            .all(|(cert, n)| if genuine(n) { cert.is_non_iso() } else { cert.is_disqualification() });
        if all && settled_at.is_none() {
            settled_at = Some(s);
        }
    }
    let tags: Vec<&str> = c.certificates().iter().map(|x| x.tag()).collect();
    let reached = format!(
        "checks held through stage {} ({} nodes); certificates settled at stage {}: {}",
        c.stage,
        c.tree.len(),
        settled_at.map_or("-".into(), |s| s.to_string()),
        tags.join(",")
    );
    match stopped {
        Some(why) => Verdict::fail(format!("horizon {HORIZON} unreachable, {why}")).note(reached),
        None => {
            let ok = settled_at.is_some()
                && c.certificates()
                    .iter()
                    .zip(&names)
                    .all(|(cert, n)| if genuine(n) { cert.is_non_iso() } else { cert.is_disqualification() });
            Verdict::new(ok, reached)
        }
    }
}

fn brute_pairs(t: &FinitePosetTree) -> Result<usize, String> {
    let nodes: Vec<NodeId> = t.nodes().collect();
    let ups: HashMap<NodeId, HashSet<NodeId>> = nodes.iter().map(|&x| (x, up_set(t, x).into_iter().collect())).collect();
    let leq = |x: NodeId, y: NodeId| ups[&x].contains(&y);
    let mut pairs = 0;
    for &x in &nodes {
        for &y in &nodes {
            let common: Vec<NodeId> = up_set(t, x).into_iter().filter(|z| leq(y, *z)).collect();
            let lub = *common
                .iter()
                .find(|&&z| common.iter().all(|&w| leq(z, w)))
                .ok_or_else(|| format!("no lub for {x}, {y}"))?;
            let jm = join_meet(t, x, y).map_err(|e| e.to_string())?;
            if jm.join != lub || jm.meet_reversed != lub {
                return Err(format!("join_meet({x}, {y}) = {jm:?}, brute force {lub}"));
            }
            pairs += 1;
        }
    }
    // the extension: bottom 0, node x of T is x + 1
    let ext = LatticeExtension::new(t).map_err(|e| e.to_string())?;
    let elems: Vec<NodeId> = std::iter::once(0).chain(nodes.iter().map(|x| x + 1)).collect();
    let eleq = |a: NodeId, b: NodeId| a == 0 || (b != 0 && leq(a - 1, b - 1));
    let top = t.root() + 1;
    let least = |set: &[NodeId], le: &dyn Fn(NodeId, NodeId) -> bool| set.iter().copied().find(|&z| set.iter().all(|&w| le(z, w)));
    for &a in &elems {
        let ca = ext.complement(a).map_err(|e| e.to_string())?;
        for &b in &elems {
            let uppers: Vec<NodeId> = if a == 0 {
                up_set_ext(t, b)
            } else {
                up_set_ext(t, a).into_iter().filter(|&z| eleq(b, z)).collect()
            };
            let join = least(&uppers, &eleq).ok_or_else(|| format!("no join for {a}, {b}"))?;
            let lowers: Vec<NodeId> = elems.iter().copied().filter(|&z| eleq(z, a) && eleq(z, b)).collect();
            let meet = least(&lowers, &|z, w| eleq(w, z)).ok_or_else(|| format!("no meet for {a}, {b}"))?;
            if ext.join(a, b).ok() != Some(join) || ext.meet(a, b).ok() != Some(meet) {
                return Err(format!("extension join/meet of {a}, {b} differ from {join}/{meet}"));
            }
            pairs += 1;
        }
        let uppers: Vec<NodeId> = if a == 0 {
            up_set_ext(t, ca)
        } else {
            up_set_ext(t, a).into_iter().filter(|&z| eleq(ca, z)).collect()
        };
        let is_top = least(&uppers, &eleq) == Some(top);
        let meets_zero = elems.iter().all(|&z| !(eleq(z, a) && eleq(z, ca)) || z == 0);
        if !is_top || !meets_zero {
            return Err(format!("{ca} is not a complement of {a}"));
        }
    }
    Ok(pairs)
}

/// Upper bounds of `a` in the extension.
fn up_set_ext(t: &FinitePosetTree, a: NodeId) -> Vec<NodeId> {
    if a == 0 {
        std::iter::once(0).chain(t.nodes().map(|x| x + 1)).collect()
    } else {
        up_set(t, a - 1).into_iter().map(|x| x + 1).collect()
    }
}

fn corpus_tree(horizon: u64) -> Result<FinitePosetTree, String> {
    let mut c = PosetConstruction::new(
        poset_corpus(),
        PosetRunConfig {
            horizon,
            ..Default::default()
        },
    );
    for s in 1..=horizon {
        c.step().map_err(|e| format!("stage {s}: {e} (tree had {} nodes)", c.tree.len()))?;
    }
    Ok(c.tree)
}

fn criterion_4() -> Verdict {
    const HORIZON: u64 = 40;
    const SHADOW: u64 = 12;
    let shadow = match corpus_tree(SHADOW).map(|t| (brute_pairs(&t), t.len())) {
        Ok((Ok(pairs), n)) => format!("horizon-{SHADOW} tree ({n} nodes): {pairs} pairs agree, every complement verified"),
        Ok((Err(e), _)) | Err(e) => return Verdict::fail(format!("horizon-{SHADOW} tree: {e}")),
    };
    match corpus_tree(HORIZON) {
        Err(e) => Verdict::fail(format!("horizon-{HORIZON} tree not constructible within {DEFAULT_NODE_BUDGET} nodes, {e}")).note(shadow),
        Ok(t) => match brute_pairs(&t) {
            Ok(pairs) => Verdict::new(true, format!("{pairs} pairs agree, every complement verified")),
            Err(e) => Verdict::fail(e),
        },
    }
}

// ---------------------------------------------------------------- 5

fn largest_prime_factor(mut n: u128) -> u128 {
    let mut best = 1;
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            best = p;
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        n
    } else {
        best
    }
}

fn modal_run(names: &[&str], horizon: u64) -> Result<(Vec<String>, Vec<u64>), String> {
    let advs: Vec<ModalAdversary> = names
        .iter()
        .map(|n| ModalFixture::parse(n).map(ModalAdversary::Native).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let config = ModalRunConfig {
        horizon,
        ..Default::default()
    };
    let (trace, out) = modal_diag::run_construction(&advs, config).map_err(|e| e.to_string())?;
    let trace = Trace::parse(&trace.to_text()).map_err(|e| e.to_string())?;
    verify_run(&trace).map_err(|e| format!("{names:?}: {e}"))?;
    replay_deactivations(&trace, &advs, config.fuel, config.m_cap, config.iterate_cap).map_err(|e| format!("{names:?}: {e}"))?;
    // Property (#) and (†), read straight off the records
    let mut primes = BTreeSet::new();
    for r in trace.body() {
        match r.get("event") {
            Some("cycle") => {
                let p: u64 = r.get("p").and_then(|p| p.parse().ok()).ok_or("cycle without p")?;
                if !primes.insert(p) {
                    return Err(format!("{names:?}: two {p}-cycles"));
                }
            }
            Some("dagger") => {
                let (Some(n), Some(p)) = (r.get("orbit").and_then(|v| v.parse::<u128>().ok()), r.get("prime").and_then(|v| v.parse::<u128>().ok())) else {
                    continue;
                };
                if largest_prime_factor(n) <= p {
                    return Err(format!("{names:?}: active orbit {n} has no prime factor above {p}"));
                }
            }
            _ => {}
        }
    }
    Ok((out.tags(), out.primes))
}

fn criterion_5() -> Verdict {
    let runs: [(&[&str], u64, &[&str]); 6] = [
        (&["axiom-breaker", "shrunk-top", "fixed-point", "double-one"], 4, &["a", "b", "c", "d"]),
        (&["non-injective"], 2, &["i.a"]),
        (&["axiom-breaker", "orbit-nine"], 2, &["a", "i.b"]),
        (&["honest"], 4, &["forbid"]),
        (&["mirror:1"], 4, &["forbid"]),
        (&["axiom-breaker", "all-threes"], 3, &["a", "i.e"]),
    ];
    let mut seen = Vec::new();
    for (names, horizon, expected) in runs {
        let (tags, _) = tryv!(modal_run(names, horizon));
        ensure!(tags == expected, "{names:?}: tags {tags:?}, expected {expected:?}");
        seen.extend(tags);
    }
    let (_, primes) = tryv!(modal_run(&[], 15));
    let expected: Vec<u64> = vec![3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    ensure!(primes == expected, "empty list installed {primes:?}");
    Verdict::new(true, format!("tags {}; empty list: 15 cycles, primes 3..53", seen.join(",")))
}

// ---------------------------------------------------------------- 6

fn ptime_shadow(fixture: TreeFixture) -> Result<String, String> {
    const HORIZON: u64 = 200;
    let config = PtimeConfig {
        horizon: HORIZON,
        l: DEFAULT_STEPS_PER_STAGE,
        fuel: DEFAULT_ORACLE_FUEL,
        checked: true,
    };
    let mut c = PtimeCopier::new(TreeSource::Native(fixture), config);
    let mut reserved_max = BinString::empty();
    let mut checkpoints = Vec::new();
    let mut max_depth = 0;
    while c.stage < HORIZON {
        c.step().map_err(|e| e.to_string())?;
        let s = c.stage;
        if let Some(top) = c.reservoir().iter().max_by(|a, b| punctual_core::copy::length_lex_compare(a, b)) {
            if punctual_core::copy::length_lex_compare(top, &reserved_max).is_gt() {
                reserved_max = top.clone();
            }
        }
        let mut w = BinString::empty();
        while w != reserved_max {
            if !c.is_used(&w) {
                return Err(format!("stage {s}: {w} below the reserve is unused"));
            }
            w = w.next();
        }
        let a: Vec<&BinString> = c.reservoir().iter().collect();
        for (i, x) in a.iter().enumerate() {
            for y in &a[i + 1..] {
                if c.relation(x, y).related() || c.relation(y, x).related() {
                    return Err(format!("stage {s}: reservoir strings {x} and {y} are related"));
                }
            }
        }
        let t = c.target();
        let dom: RpoTree = t.restrict(|x| c.phi(x).is_some());
        let iso = |a: &RpoTree, b: &RpoTree| isomorphic(&Structure::Rpo(a.clone()), &Structure::Rpo(b.clone())).map(|w| w.is_some());
        if !iso(&dom, c.image()).map_err(|e| e.to_string())? {
            return Err(format!("stage {s}: the copy is not an embedding"));
        }
        if dom.len() == t.len() && iso(t, c.image()).map_err(|e| e.to_string())? {
            checkpoints.push(s);
        }
        max_depth = max_depth.max(t.max_depth());
    }
    if checkpoints != c.checkpoints {
        return Err(format!("copier claims {} checkpoints, oracle finds {}", c.checkpoints.len(), checkpoints.len()));
    }
    if checkpoints.len() < 20 {
        return Err(format!("only {} checkpoints", checkpoints.len()));
    }
    let (_, out) = run_ptime(TreeSource::Native(fixture), config).map_err(|e| e.to_string())?;
    let degree = out.degree().ok_or("no step-profile fit")?;
    if degree > 3 {
        return Err(format!("fitted degree {degree}"));
    }
    Ok(format!("{} {} checkpoints, depth {max_depth}, degree {degree}", fixture.name(), checkpoints.len()))
}

fn criterion_6() -> Verdict {
    let mut parts = Vec::new();
    for f in [TreeFixture::Chain, TreeFixture::BinaryGrowth, TreeFixture::Comb] {
        match ptime_shadow(f) {
            Ok(s) => parts.push(s),
            Err(e) => return Verdict::fail(format!("{}: {e}", f.name())),
        }
    }
    Verdict::new(true, parts.join("; "))
}

// ---------------------------------------------------------------- 7

/// Shape of `T^{<=depth}` from the root, `S1` on the left.
fn our_shape(t: &SuccessorTree, x: NodeId, depth: usize) -> String {
    if x == t.empty() {
        return ".".into();
    }
    if depth == 0 {
        return "*".into();
    }
    format!("({} {})", our_shape(t, t.s1(x), depth - 1), our_shape(t, t.s2(x), depth - 1))
}

/// The adversary read independently: `(shape above depth s-1, s-full)`, or
/// `None` when the fragment is not a binary successor tree.
fn their_view(adv: &SuccAdversary, s: usize, budget: u64) -> Option<(String, bool)> {
    let call = |op, x| adv.call(op, x, budget).ok()?.outcome.value();
    let (e, r) = (call(SuccOp::Empty, 0)?, call(SuccOp::Root, 0)?);
    if e == r || call(SuccOp::S1, e)? != e || call(SuccOp::S2, e)? != e {
        return None;
    }
    let mut seen = HashSet::from([r]);
    let mut layers = vec![vec![r]];
    let mut kids: HashMap<u64, (u64, u64)> = HashMap::new();
    for _ in 0..s {
        let mut next = Vec::new();
        for &x in layers.last().unwrap() {
            let (a, b) = (call(SuccOp::S1, x)?, call(SuccOp::S2, x)?);
            for c in [a, b] {
                if c != e {
                    if !seen.insert(c) {
                        return None;
                    }
                    next.push(c);
                }
            }
            kids.insert(x, (a, b));
        }
        layers.push(next);
    }
    fn shape(kids: &HashMap<u64, (u64, u64)>, e: u64, x: u64, depth: usize) -> String {
        if x == e {
            return ".".into();
        }
        if depth == 0 {
            return "*".into();
        }
        let (a, b) = kids[&x];
        format!("({} {})", shape(kids, e, a, depth - 1), shape(kids, e, b, depth - 1))
    }
    let full = layers[s - 1].iter().all(|x| kids[x].0 != e && kids[x].1 != e);
    Some((shape(&kids, e, r, s - 1), full))
}

fn succ_check() -> Result<String, String> {
    let path = fixture_dir().join("succ-corpus.toml");
    let cfg = RunConfig::load(&path).map_err(|e| e.to_string())?;
    let advs = cfg.succ_adversaries().map_err(|e| e.to_string())?;
    let config = SuccConfig {
        horizon: cfg.horizon,
        ..Default::default()
    };
    let mut d = SuccDiagonalizer::new(advs.clone(), config);
    let mut flips = 0;
    while d.stage < config.horizon {
        let s = d.stage as usize + 1;
        let before = d.tree().clone();
        let n = before.layers().last().unwrap().len();
        let flip = advs.get(s - 1).is_some_and(|adv| match their_view(adv, s, config.fuel.budget(s as u64)) {
            Some((shape, full)) => full && shape == our_shape(&before, before.root(), s - 1),
            None => false,
        });
        d.step().map_err(|e| e.to_string())?;
        let layers = d.tree().layers();
        let grown = layers.get(s).map_or(0, Vec::len);
        let expected = if flip { 2 * n - 1 } else { 2 * n };
        if grown != expected {
            return Err(format!("stage {s}: layer of {grown} nodes below {n}, expected {expected}"));
        }
        if flip {
            let ours_full = layers[s - 1].iter().all(|&x| d.tree().s1(x) != d.tree().empty() && d.tree().s2(x) != d.tree().empty());
            if ours_full {
                return Err(format!("stage {s}: both trees are {s}-full"));
            }
            flips += 1;
        }
    }
    if flips == 0 {
        return Err("no s-full adversary was met".into());
    }
    let sizes: Vec<String> = d.tree().layers().iter().map(|l| l.len().to_string()).collect();
    Ok(format!("succ layers {} with {flips} flip(s)", sizes.join(",")))
}

fn prefix_check() -> Result<String, String> {
    const HORIZON: u64 = 100;
    let mut c = PrefixCopier::new(
        PathSource::Native(PathFixture::BranchJump),
        PrefixConfig {
            horizon: HORIZON,
            l: 1,
            fuel: DEFAULT_ORACLE_FUEL,
        },
    );
    let mut jumps = 0;
    while c.stage < HORIZON {
        let before: BTreeSet<Vec<NodeId>> = c.target().paths().cloned().collect();
        c.step().map_err(|e| e.to_string())?;
        let s = c.stage;
        let after: BTreeSet<Vec<NodeId>> = c.target().paths().cloned().collect();
        if let Some(a) = after.difference(&before).max_by_key(|p| p.len()) {
            let m = (0..=a.len()).rev().find(|&k| before.contains(&a[..k])).unwrap_or(0);
            if a.len() >= m + 2 {
                jumps += 1;
                if c.waiting() != 0 {
                    return Err(format!("stage {s}: {} paths still wait after a jump", c.waiting()));
                }
            }
        }
        let mut images = BTreeSet::new();
        let mut phi = BTreeMap::new();
        for p in c.target().paths() {
            let Some(img) = p.iter().map(|&x| c.phi(x)).collect::<Option<Vec<NodeId>>>() else {
                continue;
            };
            for (&x, &y) in p.iter().zip(&img) {
                if *phi.entry(y).or_insert(x) != x {
                    return Err(format!("stage {s}: {y} is the image of two elements"));
                }
            }
            if !c.image().contains(&img) {
                return Err(format!("stage {s}: image of {p:?} missing"));
            }
            images.insert(img);
        }
        if images.len() != c.image().num_paths() {
            return Err(format!("stage {s}: the copy has paths outside the image"));
        }
    }
    if jumps == 0 {
        return Err("no jump of two or more seen".into());
    }
    Ok(format!("prefix: {jumps} jumps each emptied the queue"))
}

fn punctual_check(fixture: TreeFixture, case: CaseData) -> Result<String, String> {
    const HORIZON: u64 = 80;
    let config = PunctualConfig {
        horizon: HORIZON,
        l: DEFAULT_STEPS_PER_STAGE,
        fuel: DEFAULT_ORACLE_FUEL,
        case,
    };
    let mut c = PunctualCopier::new(TreeSource::Native(fixture), config).map_err(|e| e.to_string())?;
    let iso = |a: RpoTree, b: RpoTree| isomorphic(&Structure::Rpo(a), &Structure::Rpo(b)).map_err(|e| e.to_string());
    while c.stage < HORIZON {
        c.step().map_err(|e| e.to_string())?;
        let (dom, img) = c.fragments();
        if iso(dom, img)?.is_none() {
            return Err(format!("stage {}: copied fragment not isomorphic", c.stage));
        }
    }
    let (dom, img) = c.fragments();
    if dom.len() != c.target().len() || iso(c.target().clone(), img)?.is_none() {
        return Err(format!("{} nodes copied of {}", dom.len(), c.target().len()));
    }
    Ok(format!("{} case {}: {} nodes", fixture.name(), case.tag(), dom.len()))
}

fn criterion_7() -> Verdict {
    let checks = [
        succ_check(),
        prefix_check(),
        punctual_check(TreeFixture::StarOfPaths, CaseData::A { a: 0 }),
        punctual_check(TreeFixture::IntervalOmega, CaseData::B { a: 0, u0: 1, u1: 2 }),
        punctual_check(TreeFixture::IntervalZigzag, CaseData::B { a: 0, u0: 1, u1: 2 }),
    ];
    let mut parts = Vec::new();
    for c in checks {
        match c {
            Ok(s) => parts.push(s),
            Err(e) => return Verdict::fail(e),
        }
    }
    Verdict::new(true, parts.join("; "))
}

// ---------------------------------------------------------------- 8

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn criterion_8() -> Verdict {
    let mut configs: Vec<PathBuf> = tryv!(std::fs::read_dir(fixture_dir()))
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    configs.sort();
    for path in &configs {
        let name = path.file_name().unwrap().to_string_lossy();
        let cfg = tryv!(RunConfig::load(path));
        let (a, b) = (tryv!(run(&cfg)), tryv!(run(&cfg)));
        let text = a.trace.to_text();
        ensure!(text == b.trace.to_text(), "{name}: traces differ between runs");
        let parsed = tryv!(Trace::parse(&text));
        if let Err(e) = verify(&parsed) {
            return Verdict::fail(format!("{name}: verify failed: {e}"));
        }
    }
    Verdict::new(true, format!("{} configs byte-identical and verified", configs.len()))
}

// ---------------------------------------------------------------- harness

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Verdict); 8] = [
        (1, "generated subalgebras", Duration::from_secs(5), criterion_1),
        (2, "orbit length sweep", Duration::from_secs(30), criterion_2),
        (3, "poset diagonalizer, horizon 60", Duration::from_secs(60), criterion_3),
        (4, "join/meet and lattice extension, horizon-40 tree", Duration::from_secs(30), criterion_4),
        (5, "modal diagonalizer corpus", Duration::from_secs(60), criterion_5),
        (6, "P-TIME copies, horizon 200", Duration::from_secs(60), criterion_6),
        (7, "successor, prefix and punctual copies", Duration::from_secs(30), criterion_7),
        (8, "determinism of fixture configs", Duration::from_secs(120), criterion_8),
    ];
    let mut unexpected = Vec::new();
    for (n, name, limit, f) in criteria {
        let start = Instant::now();
        let mut v = f();
        let took = start.elapsed();
        if v.pass && took > limit {
            v = Verdict::fail(format!("{} (took {took:.1?}, limit {limit:?})", v.detail));
        }
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} [{status}] {name}: {} ({took:.2?})", v.detail);
        for note in &v.notes {
            println!("    {note}");
        }
        if v.pass == EXPECTED_RED.contains(&n) {
            unexpected.push(n);
        }
    }
    let surprises: Vec<u32> = unexpected.iter().copied().filter(|n| !EXPECTED_RED.contains(n)).collect();
    if !surprises.is_empty() {
        eprintln!("unexpected failures: {surprises:?}");
        std::process::exit(1);
    }
    for n in unexpected.iter().filter(|n| EXPECTED_RED.contains(n)) {
        println!("note: criterion {n} was expected to fail but passed");
    }
}
