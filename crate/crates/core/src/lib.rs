//! Deterministic stage-based engines for online (punctual) and polynomial-time
//! presentations of trees and modal algebras.
//!
//! The crate is organised bottom-up:
//!
//! * [`structures`]: finite fragments of poset trees, r.p.o. trees, binary
//!   successor trees and prefix trees, with the combinatorics the engines need.
//! * [`adversary`]: fuel-bounded register-machine programs and scripted
//!   fixtures standing in for primitive recursive opponents.
//! * [`boolean`] and [`modal`]: exact arithmetic in `B(N) x B(N)` and the
//!   atom-driven modality built from p-cycles.
//! * [`poset_diag`], [`lattice`] and [`modal_diag`]: the two diagonalizers.
//! * [`copy`]: copy builders turning computable tree oracles into
//!   punctual or polynomial-time copies.
//! * [`engine`]: configuration, batch runs and trace verification.

pub mod adversary;
pub mod boolean;
pub mod copy;
pub mod engine;
pub mod error;
pub mod lattice;
pub mod modal;
pub mod modal_diag;
pub mod poset_diag;
pub mod structures;
pub mod trace;

pub use error::{Error, Result};
