//! Trace-norm quantities for linear maps on matrix algebras.
//!
//! Linear maps `Φ : M_n → M_m` are held by their Choi matrix
//! `J(Φ) = Σ_{a,b} Φ(E_{a,b}) ⊗ E_{a,b}` (output factor on the left). On top
//! of that representation the crate provides:
//!
//! * [`norms`]: induced trace norm, multiplicity norms `‖Φ ⊗ id_k‖₁`, the
//!   completely bounded trace norm (see-saw lower bounds and an interior-point
//!   SDP certificate), and the Hermitian-restricted norm.
//! * [`isometry`]: certification and constructive decomposition of complete
//!   trace-norm isometries `Φ(X) = U(X ⊗ σ)V*`.
//! * [`inflation`]: saturation of `‖Φ ⊗ id_k‖₁ ≤ k‖Φ‖₁` and the transpose
//!   factorization of maps with maximal cb-norm gap.
//! * [`game`]: single-shot channel discrimination games, the Werner-Holevo
//!   game and its uniqueness (construction and decomposition).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod channel;
pub mod error;
pub mod game;
pub mod inflation;
pub mod isometry;
pub mod linalg;
pub mod norms;
pub mod report;

pub use channel::{KrausSet, LinearMapRep};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, Factor, C64};
pub use report::{CertificationReport, Check};
