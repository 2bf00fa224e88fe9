//! Equitable partitions of complex matrices and the unitary block
//! triangularizations they induce.
//!
//! The crate is organized bottom-up:
//!
//! * [`reflector`]: elementary unitary matrices `H(x, β)` stored as rank-one
//!   updates of the identity.
//! * [`partition`]: partitions, weighted indicator matrices, equitability
//!   tests and color refinement.
//! * [`triangularize`]: generalized quotients, deviation matrices, the
//!   block-diagonal transform `H(W, V)`, the gathering permutation `Ω` and the
//!   resulting 2×2 block form.
//! * [`analysis`]: deviation norms, the minimality of the front quotient and
//!   the Weyl eigenvalue bound.
//! * [`rectangular`]: the SVD-driven extension to rectangular matrices.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod partition;
pub mod permutation;
pub mod rectangular;
pub mod reflector;
pub mod triangularize;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use partition::{Partition, Side, WeightedIndicator};
pub use permutation::Permutation;
pub use reflector::{ElementaryUnitary, Phase};
