use super::config::{EngineKind, RunConfig};
use crate::copy::{run_prefix_copy, run_ptime, run_punctual, run_succ_diag, PrefixConfig, PtimeConfig, PunctualConfig, SuccConfig};
use crate::error::{Error, Result};
use crate::modal_diag::{self, ModalRunConfig};
use crate::poset_diag::{self, PosetRunConfig};
use crate::trace::{list, Trace};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    /// Human-readable `key: value` lines.
    pub summary: Vec<String>,
    /// Step profile as `n,steps`, for engines that measure one.
    pub csv: Option<String>,
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Runs the configured engine to its horizon.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let h = config.horizon;
    let out = match config.engine {
        EngineKind::PosetDiag => {
            let cfg = PosetRunConfig {
                horizon: h,
                fuel: config.fuel,
                node_budget: config.node_budget,
            };
            let (trace, out) = poset_diag::run_construction(config.poset_adversaries()?, cfg)?;
            RunOutput {
                trace,
                summary: vec![
                    format!("stages: {}", out.stage),
                    format!("nodes: {}", out.tree.len()),
                    format!("certificates: {}", list(out.certificates.iter().map(|c| c.tag()))),
                ],
                csv: None,
            }
        }
        EngineKind::ModalDiag => {
            let cfg = ModalRunConfig {
                horizon: h,
                fuel: config.fuel,
                m_cap: config.m_cap,
                iterate_cap: config.iterate_cap,
            };
            let advs = config.modal_adversaries()?;
            let (trace, out) = modal_diag::run_construction(&advs, cfg)?;
            RunOutput {
                trace,
                summary: vec![
                    format!("stages: {}", out.stage),
                    format!("cycles: {}", modal_diag::prime_list(&out)),
                    format!("certificates: {}", list(out.tags())),
                ],
                csv: None,
            }
        }
        EngineKind::RpoPtime => {
            let cfg = PtimeConfig {
                horizon: h,
                l: config.steps_per_stage(),
                fuel: config.oracle_fuel(),
                checked: true,
            };
            let (trace, out) = run_ptime(config.tree_source()?, cfg)?;
            RunOutput {
                trace,
                summary: vec![
                    format!("stages: {}", out.stages),
                    format!("checkpoints: {}", out.checkpoints.len()),
                    format!("nodes: {} copied into {} strings", out.target_nodes, out.image_nodes),
                    format!("queries: {}", out.queries.len()),
                    format!("degree: {}", out.degree().map_or("-".into(), |d| d.to_string())),
                ],
                csv: Some(out.profile.csv()),
            }
        }
        EngineKind::RpoPunctual => {
            let case = config.case.ok_or_else(|| Error::Config("rpo-punctual needs a [case] section".into()))?;
            let cfg = PunctualConfig {
                horizon: h,
                l: config.steps_per_stage(),
                fuel: config.oracle_fuel(),
                case,
            };
            let (trace, out) = run_punctual(config.tree_source()?, cfg)?;
            RunOutput {
                trace,
                summary: vec![
                    format!("stages: {}", out.stages),
                    format!("case: {}", case.tag()),
                    format!("emitted: {}, connected: {}", out.emitted, out.connected),
                    format!("full copies: {}", out.full_stages.len()),
                    format!("isomorphic at horizon: {}", yes(out.horizon_iso)),
                ],
                csv: None,
            }
        }
        EngineKind::SuccDiag => {
            let cfg = SuccConfig {
                horizon: h,
                fuel: config.fuel,
                node_budget: config.node_budget,
            };
            let (trace, out) = run_succ_diag(config.succ_adversaries()?, cfg)?;
            RunOutput {
                trace,
                summary: vec![
                    format!("layers: {}", list(&out.layers)),
                    format!("certificates: {}", list(out.certificates.iter().map(|c| c.tag()))),
                ],
                csv: None,
            }
        }
        EngineKind::PrefixCopy => {
            let cfg = PrefixConfig {
                horizon: h,
                l: config.steps_per_stage(),
                fuel: config.oracle_fuel(),
            };
            let (trace, out) = run_prefix_copy(config.path_source()?, cfg)?;
            RunOutput {
                trace,
                summary: vec![
                    format!("stages: {}", out.stages),
                    format!("paths: {} known, {} copied, {} waiting", out.known_paths, out.copied_paths, out.waiting),
                    format!("flushes: {}", out.flushes),
                    format!("conflicts: {}", out.conflicts),
                    format!("holes: {}", out.holes),
                ],
                csv: None,
            }
        }
    };
    Ok(out)
}
