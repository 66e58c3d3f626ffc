use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use super::{card_d, monitoring_check, orbit_depth, active_strategy, alert_strategy, ActiveOutcome, AlertOutcome, StageParams};
use crate::adversary::{FuelPolicy, ModalAdversary, ModalClient};
use crate::error::{Error, Result};
use crate::modal::{nth_odd_prime, ModalityTable};
use crate::trace::{Record, Trace};

use super::strategy::dagger_holds;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModalReport {
    pub stages: u64,
    pub primes: Vec<u64>,
    pub forbidden: Vec<u64>,
    pub deactivations: usize,
    /// Certificate kind and reason per requirement.
    pub certificates: Vec<String>,
}

fn breach(line: usize, msg: impl Into<String>) -> Error {
    Error::InvariantBreach(format!("trace line {line}: {}", msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum St {
    Inactive,
    Alert,
    Active,
    Dead,
}

/// Stage-level bookkeeping collected while scanning one stage.
#[derive(Default)]
struct StageLog {
    cycles: Vec<u64>,
    forbids: usize,
    promoted: bool,
    daggers: BTreeSet<usize>,
}

/// Replays a modal-diag trace: Property (#), one cycle or forbiddance per
/// stage with the stage's own prime, the requirement lifecycle with a single
/// alert at a time, promotion of the least never-alerted requirement after
/// each cycle, (†) for every active witness at each stage end, and
/// `cycles >= stages - deactivations`.
pub fn verify_run(trace: &Trace) -> Result<ModalReport> {
    if trace.engine() != Some("modal-diag") {
        return Err(Error::Precondition("not a modal-diag trace".into()));
    }
    let header = trace.header().expect("parsed traces have a header");
    let n: usize = header.num("adversaries", 1)?;
    let mut st = vec![St::Inactive; n];
    let mut alerted = vec![false; n];
    let mut table = ModalityTable::new();
    let mut forbidden: BTreeSet<u64> = BTreeSet::new();
    let mut deactivations = 0usize;
    let mut certificates = Vec::new();
    let mut stage = 0u64;
    let mut log = StageLog::default();
    let mut last_line = 1;

    for (line, r) in trace.numbered() {
        last_line = line;
        let s: u64 = r.num("stage", line)?;
        if s < stage {
            return Err(breach(line, "stages out of order"));
        }
        if s > stage {
            close_stage(line, stage, &log, &st)?;
            if s != stage + 1 {
                return Err(breach(line, format!("stage {} is missing", stage + 1)));
            }
            stage = s;
            log = StageLog::default();
        }
        let event = r.req("event", line)?;
        if event == "cycle" {
            let p: u64 = r.num("p", line)?;
            if s == 0 || p != nth_odd_prime(s as usize) {
                return Err(breach(line, format!("cycle of size {p} at stage {s}")));
            }
            let c = table.add_p_cycle(p).map_err(|e| breach(line, format!("Property (#): {e}")))?;
            let want = format!("{}..{}", c.u_start, c.u_start + c.k());
            if r.req("u", line)? != want {
                return Err(breach(line, "cycle atoms are not the least unused ones"));
            }
            log.cycles.push(p);
            continue;
        }
        let e: usize = r.num("req", line)?;
        if e >= n {
            return Err(breach(line, format!("requirement {e} does not exist")));
        }
        match event {
            "adversary" => {}
            "promote" => {
                let least = (0..n).find(|&i| !alerted[i] && st[i] == St::Inactive);
                if least != Some(e) {
                    return Err(breach(line, format!("promoted R{e}, expected {least:?}")));
                }
                if s > 0 && log.cycles.is_empty() {
                    return Err(breach(line, "promotion without a cycle"));
                }
                if st.contains(&St::Alert) {
                    return Err(breach(line, "two requirements on alert"));
                }
                st[e] = St::Alert;
                alerted[e] = true;
                log.promoted = true;
            }
            "monitor" => {
                if st[e] == St::Dead || e as u64 > s {
                    return Err(breach(line, format!("monitoring ran for R{e}")));
                }
            }
            "alert" => {
                if st[e] != St::Alert {
                    return Err(breach(line, format!("alert strategy for R{e} which is not on alert")));
                }
                let case = r.req("case", line)?;
                if case == "i.c" || case == "i.d" {
                    r.req("witness", line)?;
                    st[e] = St::Active;
                }
            }
            "active" => {
                if st[e] != St::Active {
                    return Err(breach(line, format!("active strategy for R{e} which is not active")));
                }
            }
            "forbid" => {
                let p: u64 = r.num("prime", line)?;
                if p != nth_odd_prime(s as usize) || st[e] != St::Active {
                    return Err(breach(line, format!("R{e} forbade {p} at stage {s}")));
                }
                forbidden.insert(p);
                log.forbids += 1;
            }
            "deactivate" => {
                if st[e] == St::Dead {
                    return Err(breach(line, format!("R{e} deactivated twice")));
                }
                st[e] = St::Dead;
                deactivations += 1;
            }
            "dagger" => {
                if st[e] != St::Active {
                    return Err(breach(line, format!("(†) record for R{e} which is not active")));
                }
                let orbit = r.req("orbit", line)?;
                if orbit != "open" {
                    let m: u128 = r.num("orbit", line)?;
                    if !dagger_holds(m, nth_odd_prime(s as usize)) {
                        return Err(breach(line, format!("(†) fails for R{e} with orbit size {m}")));
                    }
                }
                log.daggers.insert(e);
            }
            "cert" => certificates.push(cert_summary(line, r, st[e])?),
            other => return Err(breach(line, format!("unknown event {other:?}"))),
        }
    }
    close_stage(last_line, stage, &log, &st)?;
    if certificates.len() != n {
        return Err(Error::InvariantBreach(format!("{} certificates for {n} requirements", certificates.len())));
    }
    let primes: Vec<u64> = table.cycles().iter().map(|c| c.size).collect();
    if (primes.len() as u64) + (deactivations as u64) < stage {
        return Err(Error::InvariantBreach(format!(
            "{} cycles and {deactivations} deactivations over {stage} stages",
            primes.len()
        )));
    }
    Ok(ModalReport {
        stages: stage,
        primes,
        forbidden: forbidden.into_iter().collect(),
        deactivations,
        certificates,
    })
}

fn close_stage(line: usize, s: u64, log: &StageLog, st: &[St]) -> Result<()> {
    if s == 0 {
        return Ok(());
    }
    match (log.cycles.len(), log.forbids) {
        (1, 0) => {}
        (0, f) if f > 0 => {
            if log.promoted {
                return Err(breach(line, format!("stage {s} promoted on a forbiddance stage")));
            }
        }
        (c, f) => return Err(breach(line, format!("stage {s} has {c} cycles and {f} forbiddances"))),
    }
    for (e, &x) in st.iter().enumerate() {
        if x == St::Active && !log.daggers.contains(&e) {
            return Err(breach(line, format!("stage {s} ends without a (†) record for R{e}")));
        }
    }
    Ok(())
}

fn cert_summary(line: usize, r: &Record, st: St) -> Result<String> {
    let cert = r.req("cert", line)?;
    let reason = r.req("reason", line)?;
    let consistent = match cert {
        "non-iso" | "disqualified" => st == St::Dead,
        "undecided" => st != St::Dead,
        _ => false,
    };
    if !consistent {
        return Err(breach(line, format!("certificate {cert} contradicts the final state")));
    }
    Ok(format!("{cert}:{reason}"))
}

/// Re-derives every monitoring and strategy deactivation with fresh clients:
/// the recorded reason and detail must come out again exactly.
pub fn replay_deactivations(trace: &Trace, adversaries: &[ModalAdversary], fuel: FuelPolicy, m_cap: u128, iterate_cap: u128) -> Result<usize> {
    let mut table = ModalityTable::new();
    let mut forbidden: BTreeSet<u64> = BTreeSet::new();
    let mut witness: BTreeMap<usize, BigUint> = BTreeMap::new();
    // the forbidden set the stage's strategies ran with
    let mut stage_forbidden = forbidden.clone();
    let mut stage = 0;
    let mut pending: Option<(usize, Record)> = None;
    let mut checked = 0;
    for (line, r) in trace.numbered() {
        let s: u64 = r.num("stage", line)?;
        if s != stage {
            stage = s;
            stage_forbidden = forbidden.clone();
        }
        match r.req("event", line)? {
            "cycle" => {
                table.add_p_cycle(r.num("p", line)?)?;
            }
            "forbid" => {
                forbidden.insert(r.num("prime", line)?);
            }
            "alert" if r.get("witness").is_some() => {
                witness.insert(r.num("req", line)?, r.req("witness", line)?.parse().map_err(|_| breach(line, "bad witness"))?);
            }
            "monitor" | "alert" | "active" => pending = Some((line, r.clone())),
            "deactivate" => {
                let e: usize = r.num("req", line)?;
                let Some((from, cause)) = pending.take() else {
                    return Err(breach(line, "deactivation without a cause"));
                };
                let adv = adversaries
                    .get(e)
                    .ok_or_else(|| breach(line, format!("no adversary for R{e}")))?;
                let mut c = ModalClient::new(adv, fuel.budget(s));
                let params = StageParams {
                    stage: s,
                    prime: nth_odd_prime(s as usize),
                    depth: orbit_depth(s),
                    m: card_d(&table, m_cap),
                    forbidden: &stage_forbidden,
                    iterate_cap,
                };
                let got = match cause.req("event", from)? {
                    "monitor" => match monitoring_check(&mut c, s) {
                        Ok(Some(hit)) => (hit.condition().to_string(), hit.detail()),
                        Ok(None) => ("pass".into(), "-".into()),
                        Err(Error::OutOfFuel { .. }) => ("fuel".into(), "fuel".into()),
                        Err(err) => return Err(err),
                    },
                    "alert" => match alert_strategy(&mut c, &params)?.0 {
                        AlertOutcome::Deactivate(reason) => (reason.tag(), reason.detail()),
                        AlertOutcome::Activate { case, .. } => (case.to_string(), "-".into()),
                    },
                    _ => {
                        let w = witness
                            .get(&e)
                            .ok_or_else(|| breach(line, format!("R{e} has no witness")))?;
                        match active_strategy(&mut c, w, &params)? {
                            ActiveOutcome::Deactivate(reason) => (reason.tag(), reason.detail()),
                            ActiveOutcome::Stay { .. } => ("stay".into(), "-".into()),
                        }
                    }
                };
                let want = (r.req("reason", line)?.to_string(), r.req("detail", line)?.to_string());
                if got != want {
                    return Err(breach(line, format!("replay gives {} {}, trace says {} {}", got.0, got.1, want.0, want.1)));
                }
                checked += 1;
            }
            _ => {}
        }
    }
    Ok(checked)
}
