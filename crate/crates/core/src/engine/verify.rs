use super::config::EngineKind;
use crate::copy::{verify_prefix_copy, verify_ptime, verify_punctual, verify_succ_diag};
use crate::error::{Error, Result};
use crate::modal_diag::verify_run;
use crate::poset_diag::verify_trace;
use crate::trace::{list, Trace};

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub engine: EngineKind,
    /// One line per invariant suite that passed, then totals.
    pub lines: Vec<String>,
    pub csv: Option<String>,
}

/// Replays every suite relevant to the trace's engine. Any failed check is
/// an [`Error::InvariantBreach`].
pub fn verify(trace: &Trace) -> Result<VerifyReport> {
    let tag = trace.engine().unwrap_or_default();
    let engine = EngineKind::parse(tag).ok_or_else(|| Error::Parse {
        line: 1,
        msg: format!("unknown engine {tag:?}"),
    })?;
    let passed = |suites: &[&str]| suites.iter().map(|s| format!("{s}: passed")).collect::<Vec<_>>();
    let (mut lines, totals, csv) = match engine {
        EngineKind::PosetDiag => {
            let r = verify_trace(trace)?;
            (
                passed(&["unique branching", "F-discipline", "open leaf", "blocked-deficit persistence", "expansion replay"]),
                vec![
                    format!("stages: {}", r.stages),
                    format!("nodes: {}", r.nodes),
                    format!("certificates: {}", list(&r.certificates)),
                ],
                None,
            )
        }
        EngineKind::ModalDiag => {
            let r = verify_run(trace)?;
            (
                passed(&["property (#)", "one cycle or forbiddance per stage", "requirement lifecycle", "dagger condition"]),
                vec![
                    format!("stages: {}", r.stages),
                    format!("cycles: {}", list(&r.primes)),
                    format!("certificates: {}", list(&r.certificates)),
                ],
                None,
            )
        }
        EngineKind::RpoPtime => {
            let r = verify_ptime(trace)?;
            (
                passed(&["trigger rule", "reservoir neutrality", "domain coverage", "embedding", "checkpoints", "short/long discipline", "query replay"]),
                vec![
                    format!("stages: {}", r.stages),
                    format!("checkpoints: {}", r.checkpoints),
                    format!("queries: {}", r.queries),
                    format!("degree: {}", r.degree().map_or("-".into(), |d| d.to_string())),
                ],
                Some(r.profile.csv()),
            )
        }
        EngineKind::RpoPunctual => {
            let r = verify_punctual(trace)?;
            (
                passed(&["least unused numbers", "case discipline", "interval order", "embedding"]),
                vec![
                    format!("stages: {}", r.stages),
                    format!("case: {}", r.case),
                    format!("emitted: {}, connected: {}", r.emitted, r.connected),
                    format!("full copies: {}", r.full_stages),
                ],
                None,
            )
        }
        EngineKind::SuccDiag => {
            let r = verify_succ_diag(trace)?;
            (
                passed(&["2n/2n-1 growth", "fullness flip", "certificates"]),
                vec![
                    format!("layers: {}", list(&r.layers)),
                    format!("flips: {}, skips: {}", r.flips, r.skips),
                ],
                None,
            )
        }
        EngineKind::PrefixCopy => {
            let r = verify_prefix_copy(trace)?;
            (
                passed(&["queue/flush rule", "W empty after flush", "number choice", "declared negatives", "embedding"]),
                vec![
                    format!("stages: {}", r.stages),
                    format!("flushes: {}, idle stages: {}", r.flushes, r.idle),
                    format!("conflicts: {}", r.conflicts),
                ],
                None,
            )
        }
    };
    lines.extend(totals);
    Ok(VerifyReport { engine, lines, csv })
}
