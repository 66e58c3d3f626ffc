//! Declarative run configuration, one TOML file per run.
//!
//! ```toml
//! engine = "poset-diag"
//! horizon = 12
//! fuel = "quadratic:1000"
//!
//! [[adversary]]
//! fixture = "mirror:2"
//!
//! [[adversary]]
//! file = "adversaries/chain.adv"
//! ```
//!
//! Relative file names are looked up next to the config file, then in the
//! directory named by `PUNCTUAL_FIXTURES`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::adversary::{FuelPolicy, ModalAdversary, ModalFixture, PosetAdversary, PosetFixture, Program, SuccAdversary, SuccFixture};
use crate::copy::oracle::{PathFixture, PathSource, TreeFixture, TreeSource, DEFAULT_ORACLE_FUEL, DEFAULT_STEPS_PER_STAGE};
use crate::copy::punctual::CaseData;
use crate::error::{Error, Result};
use crate::modal_diag::{DEFAULT_ITERATE_CAP, DEFAULT_M_CAP};
use crate::structures::DEFAULT_NODE_BUDGET;

pub const FIXTURES_ENV: &str = "PUNCTUAL_FIXTURES";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    PosetDiag,
    ModalDiag,
    RpoPtime,
    RpoPunctual,
    SuccDiag,
    PrefixCopy,
}

impl EngineKind {
    pub const ALL: [EngineKind; 6] = [
        EngineKind::PosetDiag,
        EngineKind::ModalDiag,
        EngineKind::RpoPtime,
        EngineKind::RpoPunctual,
        EngineKind::SuccDiag,
        EngineKind::PrefixCopy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EngineKind::PosetDiag => "poset-diag",
            EngineKind::ModalDiag => "modal-diag",
            EngineKind::RpoPtime => "rpo-ptime",
            EngineKind::RpoPunctual => "rpo-punctual",
            EngineKind::SuccDiag => "succ-diag",
            EngineKind::PrefixCopy => "prefix-copy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    fn uses_adversaries(self) -> bool {
        matches!(self, EngineKind::PosetDiag | EngineKind::ModalDiag | EngineKind::SuccDiag)
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A scripted fixture by name, or a DSL program file.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub fixture: Option<String>,
    pub file: Option<String>,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub fixture: Option<String>,
    pub file: Option<String>,
    pub name: Option<String>,
    /// Oracle steps per stage.
    pub l: Option<u64>,
    /// Step budget of a single oracle call.
    pub fuel: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    pub tag: String,
    pub a: u32,
    pub u0: Option<u32>,
    pub u1: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    engine: String,
    horizon: u64,
    fuel: Option<String>,
    node_budget: Option<usize>,
    m_cap: Option<u64>,
    iterate_cap: Option<u64>,
    /// prefix-copy: `infinite-branch` (default) or `infinitely-branching`.
    mode: Option<String>,
    #[serde(default)]
    adversary: Vec<SourceSpec>,
    oracle: Option<OracleSpec>,
    case: Option<CaseSpec>,
}

/// A validated configuration; file references are resolved but not loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub engine: EngineKind,
    pub horizon: u64,
    pub fuel: FuelPolicy,
    pub node_budget: usize,
    pub m_cap: u128,
    pub iterate_cap: u128,
    pub adversaries: Vec<SourceSpec>,
    pub oracle: Option<OracleSpec>,
    pub case: Option<CaseData>,
    /// Directory the config was read from.
    pub base: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Finds `name` next to the config, then under the fixture directory.
pub fn resolve(name: &str, base: Option<&Path>) -> Result<PathBuf> {
    let p = Path::new(name);
    if p.is_absolute() {
        return if p.exists() { Ok(p.to_path_buf()) } else { Err(config_err(format!("file {name} not found"))) };
    }
    let mut tried = Vec::new();
    let fixtures = std::env::var_os(FIXTURES_ENV).map(PathBuf::from);
    for dir in [base.map(Path::to_path_buf), Some(PathBuf::new()), fixtures].into_iter().flatten() {
        let candidate = dir.join(p);
        if candidate.exists() {
            return Ok(candidate);
        }
        tried.push(candidate.display().to_string());
    }
    Err(config_err(format!("file {name} not found (tried {})", tried.join(", "))))
}

impl RunConfig {
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        let engine = EngineKind::parse(&raw.engine).ok_or_else(|| config_err(format!("unknown engine {:?}", raw.engine)))?;
        if raw.horizon == 0 {
            return Err(config_err("horizon must be at least 1"));
        }
        let fuel = raw.fuel.as_deref().map(FuelPolicy::parse).transpose()?.unwrap_or_default();
        if !engine.uses_adversaries() && !raw.adversary.is_empty() {
            return Err(config_err(format!("{engine} takes an [oracle], not adversaries")));
        }
        let needs_oracle = !engine.uses_adversaries();
        if needs_oracle != raw.oracle.is_some() {
            return Err(config_err(if needs_oracle {
                format!("{engine} needs an [oracle] section")
            } else {
                format!("{engine} takes [[adversary]] entries, not an oracle")
            }));
        }
        let case = match (engine, &raw.case) {
            (EngineKind::RpoPunctual, Some(c)) => Some(case_data(c)?),
            (EngineKind::RpoPunctual, None) => return Err(config_err("rpo-punctual needs a [case] section: case detection is not computable")),
            (_, Some(_)) => return Err(config_err(format!("{engine} takes no [case] section"))),
            (_, None) => None,
        };
        match raw.mode.as_deref() {
            None | Some("infinite-branch") if engine == EngineKind::PrefixCopy => {}
            Some("infinitely-branching") if engine == EngineKind::PrefixCopy => {
                return Err(Error::Unsupported("the infinitely-branching prefix-tree mode is not implemented".into()))
            }
            None => {}
            Some(m) => return Err(config_err(format!("unknown mode {m:?} for {engine}"))),
        }
        let base = base.map(Path::to_path_buf);
        for spec in raw.adversary.iter().map(|s| (&s.fixture, &s.file)).chain(raw.oracle.iter().map(|o| (&o.fixture, &o.file))) {
            match spec {
                (Some(_), None) => {}
                (None, Some(f)) => {
                    resolve(f, base.as_deref())?;
                }
                _ => return Err(config_err("each source names exactly one of fixture or file")),
            }
        }
        Ok(RunConfig {
            engine,
            horizon: raw.horizon,
            fuel,
            node_budget: raw.node_budget.unwrap_or(DEFAULT_NODE_BUDGET),
            m_cap: raw.m_cap.map_or(DEFAULT_M_CAP, u128::from),
            iterate_cap: raw.iterate_cap.map_or(DEFAULT_ITERATE_CAP, u128::from),
            adversaries: raw.adversary,
            oracle: raw.oracle,
            case,
            base,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let found = if path.exists() { path.to_path_buf() } else { resolve(&path.to_string_lossy(), None)? };
        let text = std::fs::read_to_string(&found).map_err(|e| config_err(format!("{}: {e}", found.display())))?;
        Self::parse(&text, found.parent())
    }

    fn program(&self, file: &str) -> Result<Program> {
        let path = resolve(file, self.base.as_deref())?;
        let text = std::fs::read_to_string(&path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Program::parse(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
    }

    fn label(spec_name: &Option<String>, file: &str) -> String {
        spec_name.clone().unwrap_or_else(|| {
            Path::new(file)
                .file_stem()
                .map_or_else(|| file.to_string(), |s| s.to_string_lossy().into_owned())
        })
    }

    pub fn poset_adversaries(&self) -> Result<Vec<PosetAdversary>> {
        self.adversaries
            .iter()
            .map(|s| match (&s.fixture, &s.file) {
                (Some(f), _) => Ok(PosetAdversary::Native(PosetFixture::parse(f)?)),
                (_, Some(file)) => PosetAdversary::from_program(Self::label(&s.name, file), self.program(file)?),
                _ => unreachable!("checked at parse"),
            })
            .collect()
    }

    pub fn modal_adversaries(&self) -> Result<Vec<ModalAdversary>> {
        self.adversaries
            .iter()
            .map(|s| match (&s.fixture, &s.file) {
                (Some(f), _) => Ok(ModalAdversary::Native(ModalFixture::parse(f)?)),
                (_, Some(file)) => ModalAdversary::from_program(Self::label(&s.name, file), self.program(file)?),
                _ => unreachable!("checked at parse"),
            })
            .collect()
    }

    pub fn succ_adversaries(&self) -> Result<Vec<SuccAdversary>> {
        self.adversaries
            .iter()
            .map(|s| match (&s.fixture, &s.file) {
                (Some(f), _) => Ok(SuccAdversary::Native(SuccFixture::parse(f)?)),
                (_, Some(file)) => SuccAdversary::from_program(Self::label(&s.name, file), self.program(file)?),
                _ => unreachable!("checked at parse"),
            })
            .collect()
    }

    fn oracle_spec(&self) -> Result<&OracleSpec> {
        self.oracle.as_ref().ok_or_else(|| config_err(format!("{} needs an [oracle] section", self.engine)))
    }

    pub fn steps_per_stage(&self) -> u64 {
        self.oracle.as_ref().and_then(|o| o.l).unwrap_or(DEFAULT_STEPS_PER_STAGE)
    }

    pub fn oracle_fuel(&self) -> u64 {
        self.oracle.as_ref().and_then(|o| o.fuel).unwrap_or(DEFAULT_ORACLE_FUEL)
    }

    pub fn tree_source(&self) -> Result<TreeSource> {
        let o = self.oracle_spec()?;
        match (&o.fixture, &o.file) {
            (Some(f), _) => Ok(TreeSource::Native(TreeFixture::parse(f)?)),
            (_, Some(file)) => TreeSource::from_program(Self::label(&o.name, file), self.program(file)?),
            _ => unreachable!("checked at parse"),
        }
    }

    pub fn path_source(&self) -> Result<PathSource> {
        let o = self.oracle_spec()?;
        match (&o.fixture, &o.file) {
            (Some(f), _) => Ok(PathSource::Native(PathFixture::parse(f)?)),
            (_, Some(file)) => PathSource::from_program(Self::label(&o.name, file), self.program(file)?),
            _ => unreachable!("checked at parse"),
        }
    }
}

fn case_data(c: &CaseSpec) -> Result<CaseData> {
    match c.tag.as_str() {
        "A" => match (c.u0, c.u1) {
            (None, None) => Ok(CaseData::A { a: c.a }),
            _ => Err(config_err("case A takes only the node a")),
        },
        "B" => match (c.u0, c.u1) {
            (Some(u0), Some(u1)) => Ok(CaseData::B { a: c.a, u0, u1 }),
            _ => Err(config_err("case B needs a, u0 and u1")),
        },
        t => Err(config_err(format!("unknown case tag {t:?}"))),
    }
}
