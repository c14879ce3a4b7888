//! Parameter counting, operator bases and state reconstruction for
//! bilocally tomographic theories.
//!
//! A system with `N` perfectly distinguishable states carries `K` accessible
//! state parameters and `L` latent ones, visible only in joint measurements.
//! Composition follows `K_AB = K_A K_B + L_A L_B` and
//! `L_AB = K_A L_B + L_A K_B`, with `K = (N^r + N^s) / 2` and
//! `L = (N^r - N^s) / 2`. Complex quantum theory is `r = s = 2`; real
//! vector-space quantum theory is `r = 2, s = 1`.
//!
//! The crate is organised as:
//!
//! - [`counting`]: exact integer `K`/`L` arithmetic, profile fitting and the
//!   bilocal redundancy audit.
//! - [`operator`] and [`bases`]: Hermitian operators, the projector and
//!   sigma bases, even-`y` real products and the bilocal projector frame.
//! - [`tomography`] and [`witness`]: expectation values, frame
//!   reconstruction, the local-tomography failure witness and the
//!   four-rebit coefficient coincidence.
//! - [`ideality`]: exact rational derivation of the `n`-local ideality
//!   coefficients from a permutation-symmetric partition ansatz.
//!
//! ```
//! use bitomo::counting::{kl_multi, SystemDims, TheoryProfile};
//!
//! let rebits = SystemDims::new(vec![2, 2, 2]).unwrap();
//! let real_qm = TheoryProfile::new(2, 1, 1).unwrap();
//! let kl = kl_multi(&rebits, &real_qm).unwrap();
//! assert_eq!((kl.k, kl.l), (36, 28));
//! ```

pub mod bases;
pub mod counting;
mod error;
pub mod ideality;
pub mod json;
pub mod operator;
pub mod partition;
pub mod statefile;
pub mod tomography;
pub mod witness;

pub use error::{Error, Result};
pub use operator::{rank_tolerance, set_rank_tolerance, HermitianOp, Reality};
