//! Shared fixtures for the criterion benchmarks: deterministic networks and
//! interpolation families at a few sizes.

use num_complex::Complex64;

use tn_core::barvinok::{make_family, InterpolationFamily};
use tn_core::gaussian::{fill_gaussian, sample_shifted_ones_tn};
use tn_core::network::{build_torus, TensorNetwork};

/// Gaussian-filled torus with unit means.
pub fn gaussian_torus(l1: usize, l2: usize, d: usize, seed: u64) -> TensorNetwork {
    let mut tn = build_torus(l1, l2, d).expect("torus");
    fill_gaussian(&mut tn, Complex64::new(1.0, 0.0), seed);
    tn
}

/// Shifted-ones torus and its interpolation family at `z_end = d`.
pub fn shifted_family(l1: usize, l2: usize, d: usize, seed: u64) -> InterpolationFamily {
    let tn = sample_shifted_ones_tn(l1, l2, d, Complex64::new(0.5 * d as f64, 0.0), seed)
        .expect("ensemble sample");
    let means = vec![Complex64::ONE; l1 * l2];
    make_family(&tn, Some(&means), Complex64::new(d as f64, 0.0)).expect("family")
}
