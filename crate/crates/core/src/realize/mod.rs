//! Constructive realizations of `S^qs` functions by pqs systems.

mod chebyshev;
mod data;
mod dilation;
mod inner;
mod jacobi;
mod similarity;

pub use chebyshev::{
    chebyshev_data, chebyshev_example, chebyshev_q_identity, chebyshev_system, chebyshev_theta,
    chebyshev_w,
};
pub use data::{data_agreement, realize_from_data};
pub use dilation::{biinner_dilation, DilationBlocks, DilationReport};
pub use inner::{inner_canonical_form, InnerCanonicalForm};
pub use jacobi::{
    jacobi_from_data, jacobi_realize, lanczos, modified_chebyshev_coefficients, JacobiOutcome,
    JacobiRealization,
};
pub use similarity::{unitary_similarity, Similarity};
