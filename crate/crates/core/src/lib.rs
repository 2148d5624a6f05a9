//! q-hypergeometric special functions, Jackson integrals and numerical
//! verification of the connection formulas relating them.
//!
//! Modules, bottom-up:
//! - [`qcore`]: nome, truncation policy, q-Pochhammer symbols, theta functions.
//! - [`jackson`]: Jackson integrals and the Riemann-Papperitz / Jordan-Pochhammer integrands.
//! - [`qdiff`]: q-difference operators and the Gupta-Masson recurrence.
//! - [`series`]: Kajihara's `W^{M,N}`, very-well-poised series, Bailey's formula.
//! - [`identities`]: coefficient constructors, residual checkers and the parameter sampler.
//! - [`cli`]: the `qconnect` command-line front end.

pub mod cli;
mod dd;
pub mod error;
pub mod identities;
pub mod jackson;
pub mod qcore;
pub mod qdiff;
pub mod report;
pub mod series;

pub use error::{QError, Result};
pub use qcore::{Nome, Scalar, TruncationPolicy};
pub use report::{IdentityReport, Status};
