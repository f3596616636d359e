//! Exact computational kernels for discretized incidence geometry and
//! additive combinatorics at a finite dyadic scale.
//!
//! Everything in this crate is exact: coordinates are dyadic rationals on a
//! `2^T`-adic grid, distances and angles are compared through integer
//! cross-multiplication, and every "within a constant" statement is exposed
//! as a measured constant rather than a hard-coded threshold. The crate is
//! `no_std` (with `alloc`); file formats, experiment sweeps and the CLI live
//! in the companion `flab` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod addcomb;
pub mod certify;
pub mod construct;
pub mod exact;
pub mod frame;
pub mod geom;
pub mod grid;
pub mod incidence;
pub mod moran;
pub mod oracles;
pub mod transform;

pub use exact::{PowerProduct, Q, R64};
pub use frame::{Convention, ScaleFrame};
pub use grid::{Domain1, Domain2, GridSet1D, GridSet2D};

use alloc::string::String;

/// Crate-wide error type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A scale parameter was not a power of two, or fell outside `[resolution, 1]`.
    InvalidScale(String),
    /// Frame construction parameters violate an invariant (`k*T <= 62`, conventions).
    InvalidFrame(String),
    /// An operation received an empty set where a nonempty one is required.
    EmptyInput(String),
    /// Operands live in different groups (additive vs multiplicative lattice).
    GroupMismatch,
    /// A domain precondition failed (e.g. multiplicative embedding outside `[1,2]`).
    DomainError(String),
    /// A generator pattern failed validation; carries the violated cell.
    PatternInvalid(String),
    /// A construction precondition failed (e.g. unregularized input).
    Precondition(String),
    /// A projective map hit a singular point; names the point.
    Singular(String),
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::InvalidScale(s) => write!(f, "invalid scale: {s}"),
            Error::InvalidFrame(s) => write!(f, "invalid frame: {s}"),
            Error::EmptyInput(s) => write!(f, "empty input: {s}"),
            Error::GroupMismatch => write!(f, "lattice group mismatch"),
            Error::DomainError(s) => write!(f, "domain error: {s}"),
            Error::PatternInvalid(s) => write!(f, "pattern invalid: {s}"),
            Error::Precondition(s) => write!(f, "precondition failed: {s}"),
            Error::Singular(s) => write!(f, "singular map: {s}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
