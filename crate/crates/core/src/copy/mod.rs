//! Copy builders: P-TIME and punctual copies of computable trees, and the
//! successor-tree diagonalizer.

pub mod binstring;
pub mod oracle;
pub mod prefix_copy;
pub mod profile;
pub mod ptime;
pub mod punctual;
pub mod succ_diag;

pub use binstring::{length_lex_compare, BinString};
pub use oracle::{PathFixture, PathSource, PrefixOracle, Reveal, RpoOracle, TreeFixture, TreeSource};
pub use profile::StepProfile;
pub use ptime::{relation_query, run_ptime, verify_ptime, Label, PtimeConfig, PtimeCopier, PtimeOutcome, PtimeReport, Relation};
pub use punctual::{run_punctual, verify_punctual, CaseData, IntervalOrder, PunctualConfig, PunctualCopier, PunctualOutcome, PunctualReport};
pub use succ_diag::{probe, run_succ_diag, verify_succ_diag, Probe, SuccCertificate, SuccConfig, SuccDiagonalizer, SuccOutcome, SuccReport};
pub use prefix_copy::{run_prefix_copy, verify_prefix_copy, PrefixConfig, PrefixCopier, PrefixOutcome, PrefixReport};
