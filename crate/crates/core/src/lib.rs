//! Long-term confidential storage over several QKD networks.
//!
//! A secret is shared twice. An outer polynomial `P` with `P(0) = S` is
//! spread across networks: the mother network (the one reachable over an
//! information-theoretically secure link) receives `P(1)`, daughter network
//! `i` receives the derivative value `P'(i)`. Inside each network an inner
//! Shamir polynomial spreads that value across nodes. Recovering the secret
//! needs the mother's value plus `deg(P)` daughter values, solved by
//! Birkhoff interpolation.
//!
//! Modules, bottom-up:
//!
//! - [`field`]: prime-field arithmetic and exact linear algebra.
//! - [`poly`]: polynomials, Lagrange and Birkhoff interpolation.
//! - [`sss`]: flat and two-rank hierarchical Shamir sharing, refresh deltas.
//! - [`multiss`]: the multi-network protocol, threshold analysis and the
//!   rank-based access oracle.
//! - [`simnet`]: deterministic owner/node/adversary simulation.

pub mod error;
pub mod field;
pub mod multiss;
pub mod poly;
pub mod simnet;
pub mod sss;

pub use error::{Error, Result};
pub use field::{FieldElement, Matrix, Modulus, Randomness};
pub use poly::{BirkhoffConstraint, Polynomial};
