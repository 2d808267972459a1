//! Effective-number measures of quantum measurement uncertainty.
//!
//! A distribution `p` over `N` outcomes is turned into counting weights
//! `w_i = N p_i`, and an effective number `𝒩 = Σ c(w_i)` counts how many
//! outcomes are effectively in play. The crate provides:
//!
//! * [`counting`]: counting functions, effective numbers, validation;
//! * [`state`]: μ-uncertainty of pure states w.r.t. orthogonal decompositions;
//! * [`entropy`]: μ-entropies, degree-of-freedom equivalents and densities;
//! * [`density`]: basis-independent effective numbers of density matrices,
//!   partial traces and μ-entanglement;
//! * [`continuum`]: Riemann-sum continuum limits on grids;
//! * [`measurement`]: seeded Born-rule sampling and plug-in estimates.
//!
//! All sums go through [`sum::fsum`], so results do not depend on input order.

#![forbid(unsafe_code)]

pub mod continuum;
pub mod counting;
pub mod density;
pub mod eigen;
pub mod entropy;
pub mod error;
pub mod fit;
pub mod measurement;
pub mod random;
pub mod state;
pub mod sum;

pub use counting::{
    concat, effnum, effnum_min, product, validate_counting_function, weights_from_probs, Alpha,
    CountingFunction, ProbabilityVector, WeightVector,
};
pub use density::{
    mu_entanglement, partial_trace, quantum_effnum, quantum_effnum_min, BipartiteStructure,
    DensityMatrix, Side,
};
pub use error::{Error, ErrorClass, Result};
pub use state::{
    mu_uncertainty, mu_uncertainty_min, subspace_probs, OrthogonalDecomposition,
    OrthonormalBasis, PureState,
};
