//! Lower bounds on the optimal global fidelity of deterministic
//! state-dependent cloning of `n` pure states (`M` originals to `N` copies)
//! and on the average correct-identification probability of state
//! estimation, together with the explicit cloner that attains them and an
//! independent numerical oracle that maximizes the true fidelity directly.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and parallel restarts live in the `clonebound` crate.
//!
//! Module map:
//!
//! - [`numerics`]: Hermitian Jacobi eigensolver, SVD, PSD square root and
//!   Gram factorization, trace-norm maximizing polar decomposition.
//! - [`states`]: state families, tensor-power Gram matrices, seeded random
//!   families and the explicit tensor-product check.
//! - [`bounds`]: sign-pattern enumeration, the auxiliary-fidelity bound,
//!   the bound-achieving cloner and the estimation bound.
//! - [`oracle`]: gradient ascent over the unitary group on the true
//!   fidelity, plus two-state closed forms.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod numerics;
pub mod oracle;
pub mod rng;
pub mod states;

pub use bounds::{
    clone_bound, enumerate_lambdas, estimation_bound, output_states, BoundReport, CloneTask,
    CopyCount, EstimationReport, SignPattern,
};
pub use numerics::{Mat, C64};
pub use oracle::{maximize_fidelity, OracleOptions, OracleResult};
pub use states::{
    family_from_gram, family_from_vectors, gram_power, random_family, tensor_power_check,
    PureStateFamily,
};
