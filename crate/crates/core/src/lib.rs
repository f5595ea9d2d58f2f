//! Orthogonal polynomials on the unit circle for q-Gamma weights, their
//! q-difference Lax pair, and the discrete Painlevé map it induces.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod continuum;
pub mod error;
pub mod laxpair;
pub mod linalg;
pub mod mp;
pub mod opuc;
pub mod painleve;
pub mod poly;
pub mod qseries;
pub mod verify;
pub mod weyl;

pub use error::{Error, Result};
pub use mp::Cx;
pub use poly::{CPoly, MatPoly2};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
