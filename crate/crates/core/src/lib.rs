//! Soft guessing under logarithmic loss with an error budget.
//!
//! The crate computes minimal guessing moments `M*(rho, D, eps)` and the
//! optimal strategies that reach them, the smooth Rényi entropies that bound
//! them, the matching optimal variable-length lossy code, and second-order
//! expansions for i.i.d. blocks. All logarithms are base 2.
//!
//! ```
//! use softguess::{guessing, pmf::Pmf};
//!
//! let p = Pmf::new(&[0.5, 0.25, 0.125, 0.125]).unwrap();
//! let r = guessing::min_moment(&p, 1.0, 1.0, 0.125).unwrap();
//! assert!((r.moment - 1.0).abs() < 1e-12);
//! ```

pub mod acceptance;
pub mod alloc;
pub mod asymptotics;
pub mod coding;
pub mod entropy;
pub mod error;
pub mod fmt;
pub mod guessing;
pub mod io;
pub mod oracle;
pub mod pmf;
pub mod side_info;

pub use error::{Error, Result};
pub use pmf::{JointPmf, ListSize, Pmf};
