//! Random network ensembles with complex Gaussian entries.
//!
//! Entry convention: a sample of the standard complex Gaussian used here has
//! independent real and imaginary parts, each real-normal with variance 1/2,
//! so the total second moment is `E|X - mu|^2 = 1`. The per-component
//! standard deviation is exposed as [`COMPLEX_COMPONENT_STD`].
//!
//! Sampling is deterministic in the seed: vertex `v` draws from its own
//! counter-derived stream, so the network produced by a given
//! `(seed, topology)` never depends on iteration order or thread count.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::network::{build_torus, TensorNetwork};
use crate::tensor::Tensor;

/// Standard deviation of each real component of a unit complex Gaussian:
/// `1/sqrt(2)`, making `E|X - mu|^2 = 1`.
pub const COMPLEX_COMPONENT_STD: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Parameters of the shifted-Gaussian torus ensemble: i.i.d. entries
/// `mu + g` with `g` a unit complex Gaussian, on the `(l1, l2)` torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianEnsembleSpec {
    pub l1: usize,
    pub l2: usize,
    pub bond_dim: usize,
    pub mean: Complex64,
    pub seed: u64,
}

impl GaussianEnsembleSpec {
    pub fn num_vertices(&self) -> usize {
        self.l1 * self.l2
    }
}

/// RNG stream for one vertex of one sampled network.
///
/// `seed` selects the ensemble draw; the ChaCha stream number encodes the
/// vertex, so per-vertex fills are independent and order-insensitive.
fn vertex_rng(seed: u64, vertex: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(vertex as u64);
    rng
}

/// One unit complex Gaussian draw (components N(0, 1/2)).
pub fn sample_unit_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * COMPLEX_COMPONENT_STD, im * COMPLEX_COMPONENT_STD)
}

/// Replaces every tensor entry of `tn` with `mean + g`, `g` a unit complex
/// Gaussian, deterministically in `(seed, vertex)`.
pub fn fill_gaussian(tn: &mut TensorNetwork, mean: Complex64, seed: u64) {
    for v in 0..tn.num_vertices() {
        let mut rng = vertex_rng(seed, v);
        let rank = tn.tensor(v).rank();
        let d = tn.bond_dim();
        let entries: Vec<Complex64> = (0..d.pow(rank as u32))
            .map(|_| mean + sample_unit_complex(&mut rng))
            .collect();
        let t = Tensor::new(d, rank, entries).expect("shape preserved");
        tn.set_tensor(v, t).expect("rank preserved");
    }
}

/// Samples the shifted-Gaussian torus network described by `spec`.
pub fn sample_gaussian_tn(spec: &GaussianEnsembleSpec) -> Result<TensorNetwork> {
    let mut tn = build_torus(spec.l1, spec.l2, spec.bond_dim)?;
    fill_gaussian(&mut tn, spec.mean, spec.seed);
    Ok(tn)
}

/// Samples a torus network with entries `1 + w * a`, where `a` is a unit
/// complex Gaussian; the deviation tensors are scaled by an arbitrary
/// complex weight `w`. Used by moment checks that walk `w` along a path.
pub fn sample_shifted_ones_tn(
    l1: usize,
    l2: usize,
    bond_dim: usize,
    weight: Complex64,
    seed: u64,
) -> Result<TensorNetwork> {
    let mut tn = build_torus(l1, l2, bond_dim)?;
    for v in 0..tn.num_vertices() {
        let mut rng = vertex_rng(seed, v);
        let rank = tn.tensor(v).rank();
        let d = tn.bond_dim();
        let entries: Vec<Complex64> = (0..d.pow(rank as u32))
            .map(|_| Complex64::new(1.0, 0.0) + weight * sample_unit_complex(&mut rng))
            .collect();
        let t = Tensor::new(d, rank, entries)?;
        tn.set_tensor(v, t)?;
    }
    Ok(tn)
}
