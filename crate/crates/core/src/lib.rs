//! Tensor-network contraction toolkit.
//!
//! The value of a closed tensor network with bond dimension `d` is
//! `chi(T) = sum_c prod_v M[v]_c`, the sum over all edge colorings of the
//! product of vertex tensor entries. This crate computes and estimates
//! `chi` three ways, plus the statistical-mechanics and root-structure
//! machinery needed to certify the estimates:
//!
//! * [`network::contract_reference`] — direct enumeration (the oracle);
//! * [`swallow`] — exact contraction by vertex swallowing, with the
//!   `Delta_1`/`Delta_2` norm certificates;
//! * [`barvinok`] — quasi-polynomial multiplicative approximation by Taylor
//!   interpolation of `ln chi` along a root-free strip;
//! * [`positive_mc`] — additive-error Monte Carlo for entrywise-nonnegative
//!   networks via a stochastic-matrix random walk;
//! * [`statmech`] — exact 2D Ising partition functions (brute force and
//!   Kaufman's closed form) that cross-check Gaussian ensemble moments;
//! * [`roots`] — interpolation-polynomial root finding, Jensen-formula
//!   validation, disk root counts, and root-free strip search.

// Convolution recurrences (`f[j] * g[k - j]`) and other multi-array index
// arithmetic dominate the series code; explicit indices are the readable
// form there.
#![allow(clippy::needless_range_loop)]

pub mod barvinok;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod network;
pub mod positive_mc;
pub mod roots;
pub mod statmech;
pub mod swallow;
pub mod tensor;
pub mod util;

pub use barvinok::{
    barvinok_estimate, barvinok_estimate_with_budget, choose_m, g_derivatives,
    g_taylor_coefficients, make_family, BarvinokEstimate, BarvinokParams, InterpolationFamily,
    PhiEmbedding, RegimeParams,
};
pub use error::{Error, Result};
pub use gaussian::{
    fill_gaussian, sample_gaussian_tn, sample_shifted_ones_tn, GaussianEnsembleSpec,
};
pub use network::{
    build_grid, build_random_regular, build_torus, contract_reference,
    contract_reference_with_budget, Edge, EdgeLabeling, PortRef, TensorNetwork,
    DEFAULT_LABELING_BUDGET,
};
pub use positive_mc::{
    mc_estimate, plan_trials, run_trial, stochastic_embed, McEstimate, StochasticEmbedding,
    TrialPlan,
};
pub use roots::{
    analyze_roots, corollary14_stats, count_in_disk, count_in_strip, extract_coefficients,
    find_rootfree_strip, find_roots, jensen_check, InterpPolynomial, JensenOutcome, RootFinding,
    RootReport, StripSpec,
};
pub use statmech::{
    ising_bruteforce, kaufman_ln_partition, kaufman_partition, second_moment_exact,
    second_moment_mc, IsingSpec, MomentParams, SecondMoment,
};
pub use swallow::{
    contract_exact, delta_norms, greedy_order, plan_swallowing, swallow_contract,
    swallow_contract_with_budget, DeltaNorms, SwallowingPlan, DEFAULT_STATE_BUDGET,
};
pub use tensor::{contract_pairs, tensor_product, Tensor};

pub use num_complex::Complex64;
