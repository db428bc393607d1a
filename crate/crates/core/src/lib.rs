//! Passive discrete-time linear systems with contractive block operator
//! matrices, with a focus on passive quasi-selfadjoint (pqs) systems.
//!
//! Every operator is a dense complex matrix ([`ComplexMatrix`]). A system
//! `h' = A h + B ξ`, `σ = C h + D ξ` is stored as the partitioned block
//! operator `T = [[D, C], [B, A]]` ([`sysmodel::PartitionedContraction`]).
//!
//! Module map:
//!
//! - [`opcore`]: defect operators, PSD square roots, pseudoinverses,
//!   subspace bases, Krylov spans and contraction predicates.
//! - [`sysmodel`]: classification, simulation, controllable/observable
//!   subspaces, minimal pqs reduction and stability.
//! - [`param`]: the `(A, M, K, X)` parametrization of block contractions.
//! - [`transfer`]: transfer and characteristic functions, defect identities,
//!   boundary values, inner tests and `S^qs` membership.
//! - [`realize`]: constructive realizations (spectral data, Blaschke form,
//!   bi-inner dilation, Jacobi matrices, unitary similarity).
//! - [`qfunc`]: Q-functions of quasi-selfadjoint contractions.
//! - [`json`]: the shared JSON file formats.

pub mod error;
pub mod json;
pub mod opcore;
pub mod param;
pub mod qfunc;
pub mod realize;
pub mod sampling;
pub mod sysmodel;
pub mod transfer;

pub use error::{Error, Result};
pub use opcore::{ComplexMatrix, ComplexVector, SubspaceBasis, Tolerances, C64};
pub use param::{ContractionParams, PqsParams};
pub use realize::JacobiRealization;
pub use sysmodel::{PartitionedContraction, SystemClass};
pub use transfer::{Atom, SqsFunctionData};
