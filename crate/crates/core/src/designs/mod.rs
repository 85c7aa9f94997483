//! Resolvable designs and the three-layer structure used by assignment.

pub mod factorize;
pub mod field;
pub mod layered;
pub mod resolvable;

pub use factorize::{eta_factorize, verify_factorization, EtaFactorization};
pub use layered::LayeredDesign;
pub use resolvable::{
    resolvable_decomposition, verify_decomposition, DesignReport, ResolvableDecomposition,
};
