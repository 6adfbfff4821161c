//! Numerical toolkit for Schatten-1 rigidity of Clifford point configurations.
//!
//! Operators are dense complex matrices ([`linalg::Operator`]). The crate
//! builds the canonical point configuration of a Clifford family, checks the
//! metric relations that characterize it, runs the constructive certification
//! back to near-anticommuting observables, measures group homomorphism
//! defects, and embeds near-orthogonal vectors as Schatten-1 point sets.

pub mod certify;
pub mod cli;
pub mod clifford;
pub mod embed;
pub mod error;
pub mod group;
pub mod linalg;
pub mod random;
pub mod report;
pub mod sweep;

pub use error::{Error, Result};
