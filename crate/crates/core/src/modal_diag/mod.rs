//! Builds the modal algebra `B(N) x B(N)` with `F_[g]`, adding one p-cycle
//! per stage unless an active requirement forbids the stage's prime.
//!
//! Requirement `R_e` watches adversary `e`. It passes through
//! inactive, alert, active and deactivated; at most one is on alert at a time.

mod monitor;
mod strategy;
mod verify;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;

use crate::adversary::{FuelPolicy, Meter, ModalAdversary, ModalClient};
use crate::error::{Error, Result};
use crate::modal::{nth_odd_prime, ModalityTable};
use crate::trace::{list, Record, Trace};

pub use monitor::{monitoring_check, MonitorHit};
pub use strategy::{
    active_strategy, alert_strategy, bad_orbit_size, dagger_holds, walk_orbit, ActiveOutcome, AlertOutcome, AlertScan,
    OrbitWalk, Reason, StageParams,
};
pub use verify::{replay_deactivations, verify_run, ModalReport};

pub const DEFAULT_M_CAP: u128 = 1024;
pub const DEFAULT_ITERATE_CAP: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReqState {
    Inactive,
    Alert,
    Active { witness: BigUint, since: u64, orbit: Option<u128> },
    Deactivated { stage: u64, reason: Reason },
}

impl ReqState {
    pub fn name(&self) -> &'static str {
        match self {
            ReqState::Inactive => "inactive",
            ReqState::Alert => "alert",
            ReqState::Active { .. } => "active",
            ReqState::Deactivated { .. } => "deactivated",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RequirementRecord {
    pub index: usize,
    pub name: String,
    pub state: ReqState,
    pub alerted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModalCertificate {
    /// The adversary was deactivated for a reason that separates it from ours.
    NonIso { stage: u64, reason: Reason },
    Disqualified { stage: u64, reason: Reason },
    Undecided { state: &'static str },
}

impl ModalCertificate {
    /// The deactivation reason's tag, or `undecided`.
    pub fn tag(&self) -> String {
        match self {
            ModalCertificate::NonIso { reason, .. } | ModalCertificate::Disqualified { reason, .. } => reason.tag(),
            ModalCertificate::Undecided { .. } => "undecided".into(),
        }
    }

    fn push_fields(&self, r: &mut Record) {
        match self {
            ModalCertificate::NonIso { stage, reason } | ModalCertificate::Disqualified { stage, reason } => {
                let kind = if matches!(self, ModalCertificate::NonIso { .. }) {
                    "non-iso"
                } else {
                    "disqualified"
                };
                r.push("cert", kind);
                r.push("reason", reason.tag());
                r.push("at", stage);
            }
            ModalCertificate::Undecided { state } => {
                r.push("cert", "undecided");
                r.push("reason", state);
            }
        }
    }
}

impl fmt::Display for ModalCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut r = Record::new();
        self.push_fields(&mut r);
        write!(f, "{r}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModalRunConfig {
    pub horizon: u64,
    pub fuel: FuelPolicy,
    /// Alert strategies with `M = card(D_s)` above this disqualify their
    /// adversary with reason `budget`.
    pub m_cap: u128,
    pub iterate_cap: u128,
}

impl Default for ModalRunConfig {
    fn default() -> Self {
        ModalRunConfig {
            horizon: 6,
            fuel: FuelPolicy::default(),
            m_cap: DEFAULT_M_CAP,
            iterate_cap: DEFAULT_ITERATE_CAP,
        }
    }
}

/// `p_1 * ... * p_s`, saturating.
pub fn orbit_depth(s: u64) -> u128 {
    (1..=s as usize).fold(1u128, |acc, j| acc.saturating_mul(nth_odd_prime(j) as u128))
}

/// `card(D_s) = 2^(2 + total cycle size)`, or `None` above `cap`.
pub fn card_d(table: &ModalityTable, cap: u128) -> Option<u128> {
    let e: u64 = 2 + table.cycles().iter().map(|c| c.size).sum::<u64>();
    (e < 127).then(|| 1u128 << e).filter(|&m| m <= cap)
}

pub struct ModalConstruction<'a> {
    pub table: ModalityTable,
    pub stage: u64,
    pub forbidden: BTreeSet<u64>,
    pub requirements: Vec<RequirementRecord>,
    pub trace: Trace,
    clients: Vec<ModalClient<'a>>,
    config: ModalRunConfig,
}

fn rec(stage: u64, req: impl fmt::Display, event: &str) -> Record {
    Record::new().with("stage", stage).with("req", req).with("event", event)
}

fn orbit_field(o: Option<u128>) -> String {
    o.map_or("open".into(), |n| n.to_string())
}

impl<'a> ModalConstruction<'a> {
    pub fn new(adversaries: &'a [ModalAdversary], config: ModalRunConfig) -> Self {
        let mut trace = Trace::new(
            Record::new()
                .with("engine", "modal-diag")
                .with("horizon", config.horizon)
                .with("adversaries", adversaries.len())
                .with("fuel", config.fuel)
                .with("mcap", config.m_cap)
                .with("itercap", config.iterate_cap),
        );
        let mut requirements = Vec::with_capacity(adversaries.len());
        for (index, a) in adversaries.iter().enumerate() {
            trace.push(rec(0, index, "adversary").with("name", a.name()));
            requirements.push(RequirementRecord {
                index,
                name: a.name(),
                state: ReqState::Inactive,
                alerted: false,
            });
        }
        let clients = adversaries
            .iter()
            .map(|a| ModalClient::new(a, config.fuel.budget(0)))
            .collect();
        let mut c = ModalConstruction {
            table: ModalityTable::new(),
            stage: 0,
            forbidden: BTreeSet::new(),
            requirements,
            trace,
            clients,
            config,
        };
        c.promote(0);
        c
    }

    pub fn config(&self) -> &ModalRunConfig {
        &self.config
    }

    /// Puts the least never-alerted, still live requirement on alert.
    fn promote(&mut self, s: u64) {
        if let Some(r) = self
            .requirements
            .iter_mut()
            .find(|r| !r.alerted && r.state == ReqState::Inactive)
        {
            r.state = ReqState::Alert;
            r.alerted = true;
            self.trace.push(rec(s, r.index, "promote"));
        }
    }

    fn deactivate(&mut self, s: u64, e: usize, reason: Reason) {
        self.trace.push(
            rec(s, e, "deactivate")
                .with("reason", reason.tag())
                .with("detail", reason.detail()),
        );
        self.requirements[e].state = ReqState::Deactivated { stage: s, reason };
    }

    fn live(&self, e: usize) -> bool {
        !matches!(self.requirements[e].state, ReqState::Deactivated { .. })
    }

    /// Runs stage `stage + 1`.
    pub fn step(&mut self) -> Result<()> {
        let s = self.stage + 1;
        let prime = nth_odd_prime(s as usize);
        let budget = self.config.fuel.budget(s);
        for c in &mut self.clients {
            c.set_budget(budget);
        }
        let n = self.requirements.len();

        for e in 0..n.min(s as usize + 1) {
            if !self.live(e) {
                continue;
            }
            match monitoring_check(&mut self.clients[e], s) {
                Ok(None) => self.trace.push(rec(s, e, "monitor").with("result", "pass")),
                Ok(Some(hit)) => {
                    self.trace.push(rec(s, e, "monitor").with("result", hit.condition()));
                    self.deactivate(s, e, Reason::Monitor(hit));
                }
                Err(Error::OutOfFuel { .. }) => {
                    self.trace.push(rec(s, e, "monitor").with("result", "fuel"));
                    self.deactivate(s, e, Reason::Disqualified("fuel"));
                }
                Err(err) => return Err(err),
            }
        }

        let forbidden = self.forbidden.clone();
        let params = StageParams {
            stage: s,
            prime,
            depth: orbit_depth(s),
            m: card_d(&self.table, self.config.m_cap),
            forbidden: &forbidden,
            iterate_cap: self.config.iterate_cap,
        };

        let alerts: Vec<usize> = (0..n).filter(|&e| self.requirements[e].state == ReqState::Alert).collect();
        if alerts.len() > 1 {
            return Err(Error::InvariantBreach(format!("requirements {alerts:?} are on alert together")));
        }
        if let Some(&e) = alerts.first() {
            let (out, scan) = alert_strategy(&mut self.clients[e], &params)?;
            let mut r = rec(s, e, "alert")
                .with("case", out.case())
                .with("M", params.m.map_or("over-cap".into(), |m| m.to_string()))
                .with("L", params.depth)
                .with("scanned", scan.b_scanned)
                .with("atoms", scan.atoms);
            match out {
                AlertOutcome::Deactivate(reason) => {
                    self.trace.push(r);
                    self.deactivate(s, e, reason);
                }
                AlertOutcome::Activate { c, orbit, .. } => {
                    r.push("witness", &c);
                    r.push("orbit", orbit_field(orbit));
                    self.trace.push(r);
                    self.requirements[e].state = ReqState::Active {
                        witness: c,
                        since: s,
                        orbit,
                    };
                }
            }
        }

        let mut forbade = false;
        for e in 0..n {
            let ReqState::Active { witness, since, .. } = self.requirements[e].state.clone() else {
                continue;
            };
            let out = active_strategy(&mut self.clients[e], &witness, &params)?;
            match out {
                ActiveOutcome::Stay { orbit } => {
                    self.trace.push(
                        rec(s, e, "active")
                            .with("witness", &witness)
                            .with("result", "stay")
                            .with("orbit", orbit_field(orbit)),
                    );
                    self.requirements[e].state = ReqState::Active { witness, since, orbit };
                }
                ActiveOutcome::Deactivate(reason) => {
                    self.trace.push(
                        rec(s, e, "active")
                            .with("witness", &witness)
                            .with("result", reason.tag()),
                    );
                    if let Reason::Forbade { prime: p, .. } = reason {
                        self.forbidden.insert(p);
                        forbade = true;
                        self.trace.push(rec(s, e, "forbid").with("prime", p));
                    }
                    self.deactivate(s, e, reason);
                }
            }
        }

        for e in 0..n {
            if let ReqState::Active { orbit, .. } = &self.requirements[e].state {
                let orbit = *orbit;
                if let Some(m) = orbit {
                    if !dagger_holds(m, prime) {
                        return Err(Error::InvariantBreach(format!(
                            "stage {s}: requirement {e} has orbit size {m} with no prime above {prime}"
                        )));
                    }
                }
                self.trace.push(
                    rec(s, e, "dagger")
                        .with("orbit", orbit_field(orbit))
                        .with("prime", prime),
                );
            }
        }

        if !forbade {
            let c = self.table.add_p_cycle(prime)?.clone();
            let k = c.k();
            let v = if k == 0 {
                "-".to_string()
            } else {
                format!("{}..{}", c.v_start, c.v_start + k - 1)
            };
            self.trace.push(
                rec(s, "-", "cycle")
                    .with("p", prime)
                    .with("u", format!("{}..{}", c.u_start, c.u_start + k))
                    .with("v", v),
            );
            self.promote(s);
        }
        self.stage = s;
        Ok(())
    }

    /// Runs stages `1..=horizon`.
    pub fn run(&mut self) -> Result<()> {
        while self.stage < self.config.horizon {
            self.step()?;
        }
        Ok(())
    }

    pub fn certificate(&self, e: usize) -> ModalCertificate {
        match &self.requirements[e].state {
            ReqState::Deactivated { stage, reason } if reason.is_disqualification() => ModalCertificate::Disqualified {
                stage: *stage,
                reason: reason.clone(),
            },
            ReqState::Deactivated { stage, reason } => ModalCertificate::NonIso {
                stage: *stage,
                reason: reason.clone(),
            },
            ReqState::Inactive => ModalCertificate::Undecided { state: "never-alerted" },
            other => ModalCertificate::Undecided { state: other.name() },
        }
    }

    pub fn certificates(&self) -> Vec<ModalCertificate> {
        (0..self.requirements.len()).map(|e| self.certificate(e)).collect()
    }

    pub fn meters(&self) -> Vec<Meter> {
        self.clients.iter().map(|c| c.meter).collect()
    }

    /// The trace with one certificate record per requirement appended.
    pub fn finish(mut self) -> (Trace, ModalOutcome) {
        let certificates = self.certificates();
        for (e, c) in certificates.iter().enumerate() {
            let mut r = rec(self.stage, e, "cert");
            c.push_fields(&mut r);
            self.trace.push(r);
        }
        let outcome = ModalOutcome {
            primes: self.table.cycles().iter().map(|c| c.size).collect(),
            meters: self.meters(),
            table: self.table,
            stage: self.stage,
            forbidden: self.forbidden,
            certificates,
        };
        (self.trace, outcome)
    }
}

#[derive(Debug, Clone)]
pub struct ModalOutcome {
    pub table: ModalityTable,
    pub stage: u64,
    pub primes: Vec<u64>,
    pub forbidden: BTreeSet<u64>,
    pub certificates: Vec<ModalCertificate>,
    pub meters: Vec<Meter>,
}

impl ModalOutcome {
    pub fn tags(&self) -> Vec<String> {
        self.certificates.iter().map(|c| c.tag()).collect()
    }
}

pub fn run_construction(adversaries: &[ModalAdversary], config: ModalRunConfig) -> Result<(Trace, ModalOutcome)> {
    if config.horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    let mut c = ModalConstruction::new(adversaries, config);
    c.run()?;
    Ok(c.finish())
}

/// Comma list of a trace's installed primes, for summaries.
pub fn prime_list(outcome: &ModalOutcome) -> String {
    list(&outcome.primes)
}
