//! Renormalized Hamiltonians of the 2D nearest-neighbor Ising model under the
//! 2×2 majority-rule block transformation, computed in lattice-gas variables.
//!
//! The pipeline is:
//!
//! 1. [`lattice`] enumerates site sets up to a size cutoff, one per symmetry
//!    class.
//! 2. [`engine`] computes constrained free energies `f(X)` by summing out the
//!    original spins one 2×2 block at a time, carrying a truncated boundary
//!    interaction.
//! 3. [`interaction`] inverts `f` on the subset lattice to get the exact
//!    lattice-gas coefficients `c(X)`, and changes basis to spin variables.
//! 4. [`spinfit`] extracts truncated spin coefficients with the partially exact
//!    and the uniformly close (minimax LP) methods.
//! 5. [`diagnostics`] measures coefficient decay, finite-volume error,
//!    dihedral symmetry breaking and cutoff convergence.
//!
//! [`oracle`] provides exhaustive enumeration and a Metropolis sampler used to
//! validate the engine, and [`cli`] drives everything as a batch tool.

pub mod cli;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod interaction;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod spinfit;
pub mod table;

pub use error::{Error, Result};
pub use lattice::{Site, SiteSet};

/// Version tag embedded in every emitted table.
pub const ENGINE_VERSION: &str = concat!("latgas-rg/", env!("CARGO_PKG_VERSION"));
