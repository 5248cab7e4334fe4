//! Injective norms of Gaussian tensor series on `ℓ_p` spaces.
//!
//! The crate computes the injective norm `||T||_{I_p}` of real tensors, the
//! variance parameters that control `E ||sum_k g_k T_k||_{I_p}` for Gaussian
//! series, closed-form upper bounds in terms of those parameters, and Monte
//! Carlo experiments comparing measured norms with the bounds.

pub mod bounds;
pub mod checks;
pub mod error;
pub mod experiments;
pub mod lp;
pub mod models;
pub mod norm;
pub mod seed;
pub mod tensor;
pub mod variance;

pub use error::{Error, Result};
pub use lp::PExponent;
pub use norm::{NormEstimate, SolverConfig};
pub use tensor::{Tensor, TensorSeries};
