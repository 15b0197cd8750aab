//! Quasi-polynomial multiplicative approximation of contraction values by
//! Taylor interpolation of the log-partition function.
//!
//! The pipeline, for a network with tensors `M^{[v]}`:
//!
//! 1. Normalize: pick nonzero means `mu_v` and a scale `z_end`, and write
//!    `mu_v^{-1} M^{[v]} = J + z_end * A^{[v]}` ([`make_family`]). The
//!    contraction value of the interpolated network `T_A(w)` (tensors
//!    `J + w A`) is a degree-`n` polynomial `g(w)` with
//!    `g(0) = d^{|E|}` and `chi(T) = prod_v mu_v * g(z_end)`.
//! 2. Differentiate at zero: `g^(k)(0)` by subset sums
//!    ([`derivatives::g_derivatives`]).
//! 3. Rescale to `G(z) = g(z * z_end)` and compose with the disk-to-strip
//!    embedding `phi_rho` ([`phi::PhiEmbedding`], [`series::compose_series`]).
//! 4. Truncate the Taylor series of `F = ln(G o phi)` at order `m` and
//!    return `chi_hat = prod_v mu_v * exp(P_m(1))`
//!    ([`barvinok_estimate`]).
//!
//! If `G` has no roots in the strip `T(1, 2 rho)` that `phi` maps into, the
//! truncation error is at most `n K / ((m+1) beta^m (beta - 1))`; the
//! estimate itself carries no root-free guarantee — pair it with the root
//! analysis in [`crate::roots`] for certification.

pub mod derivatives;
pub mod phi;
pub mod series;

pub use derivatives::{
    g_derivatives, g_derivatives_with_budget, g_taylor_coefficients,
    g_taylor_coefficients_with_budget, DEFAULT_SUBSET_BUDGET,
};
pub use phi::{choose_m, PhiEmbedding};
pub use series::{
    compose_derivatives, compose_series, exp_series, log_derivatives, log_series_tail,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::TensorNetwork;
use crate::swallow::DEFAULT_STATE_BUDGET;
use crate::tensor::Tensor;

/// A normalized interpolation family `mu_v^{-1} M^{[v]} = J + z_end A^{[v]}`.
#[derive(Debug, Clone)]
pub struct InterpolationFamily {
    network: TensorNetwork,
    means: Vec<Complex64>,
    z_end: Complex64,
    perturbations: Vec<Tensor>,
    prefactor: Complex64,
}

impl InterpolationFamily {
    pub fn bond_dim(&self) -> usize {
        self.network.bond_dim()
    }

    pub fn num_vertices(&self) -> usize {
        self.network.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.network.num_edges()
    }

    /// The original network (tensors `M^{[v]}`).
    pub fn network(&self) -> &TensorNetwork {
        &self.network
    }

    pub fn means(&self) -> &[Complex64] {
        &self.means
    }

    pub fn z_end(&self) -> Complex64 {
        self.z_end
    }

    /// The perturbation tensor `A^{[v]}`.
    pub fn perturbation(&self, vertex: usize) -> &Tensor {
        &self.perturbations[vertex]
    }

    /// `prod_v mu_v`, the global rescaling undone at the end.
    pub fn prefactor(&self) -> Complex64 {
        self.prefactor
    }

    /// The interpolated network `T_A(w)` with tensors `J + w A^{[v]}`.
    pub fn perturbed_network(&self, w: Complex64) -> Result<TensorNetwork> {
        let mut tn = self.network.clone();
        for v in 0..tn.num_vertices() {
            let a = &self.perturbations[v];
            let entries = a
                .entries()
                .iter()
                .map(|&x| Complex64::ONE + w * x)
                .collect();
            tn.set_tensor(v, Tensor::new(a.bond_dim(), a.rank(), entries)?)?;
        }
        Ok(tn)
    }

    /// Largest entrywise deviation of `mu_v^{-1} M^{[v]}` from
    /// `J + z_end A^{[v]}`; zero up to rounding by construction.
    pub fn reconstruction_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for v in 0..self.num_vertices() {
            let inv_mu = Complex64::ONE / self.means[v];
            for (m_entry, a_entry) in self
                .network
                .tensor(v)
                .entries()
                .iter()
                .zip(self.perturbations[v].entries())
            {
                let lhs = inv_mu * m_entry;
                let rhs = Complex64::ONE + self.z_end * a_entry;
                worst = worst.max((lhs - rhs).norm());
            }
        }
        worst
    }

    /// A family with every `A^{[v]}` multiplied by `factor` (same means and
    /// scale; the underlying `M` tensors are rebuilt so the reconstruction
    /// invariant keeps holding). Used for rotation/scaling equivariance
    /// analysis.
    pub fn scaled_perturbations(&self, factor: Complex64) -> Result<Self> {
        let mut network = self.network.clone();
        let mut perturbations = Vec::with_capacity(self.perturbations.len());
        for (v, a) in self.perturbations.iter().enumerate() {
            let scaled: Vec<Complex64> = a.entries().iter().map(|&x| factor * x).collect();
            let m_entries: Vec<Complex64> = scaled
                .iter()
                .map(|&x| self.means[v] * (Complex64::ONE + self.z_end * x))
                .collect();
            network.set_tensor(v, Tensor::new(a.bond_dim(), a.rank(), m_entries)?)?;
            perturbations.push(Tensor::new(a.bond_dim(), a.rank(), scaled)?);
        }
        Ok(Self {
            network,
            means: self.means.clone(),
            z_end: self.z_end,
            perturbations,
            prefactor: self.prefactor,
        })
    }
}

/// Builds the family from a network, per-vertex means (`None` = empirical
/// mean of each tensor's entries), and a nonzero scale `z_end`.
pub fn make_family(
    tn: &TensorNetwork,
    means: Option<&[Complex64]>,
    z_end: Complex64,
) -> Result<InterpolationFamily> {
    if z_end == Complex64::ZERO {
        return Err(Error::InvalidParam("z_end must be nonzero".into()));
    }
    let n = tn.num_vertices();
    let means: Vec<Complex64> = match means {
        Some(given) => {
            if given.len() != n {
                return Err(Error::InvalidParam(format!(
                    "got {} means for {n} vertices",
                    given.len()
                )));
            }
            given.to_vec()
        }
        None => (0..n)
            .map(|v| {
                let t = tn.tensor(v);
                t.entry_sum() / t.entries().len() as f64
            })
            .collect(),
    };
    if let Some(v) = means.iter().position(|m| *m == Complex64::ZERO) {
        return Err(Error::InvalidParam(format!(
            "mean normalizer for vertex {v} is zero"
        )));
    }

    let mut perturbations = Vec::with_capacity(n);
    for v in 0..n {
        let t = tn.tensor(v);
        let inv_mu = Complex64::ONE / means[v];
        let entries: Vec<Complex64> = t
            .entries()
            .iter()
            .map(|&m| (inv_mu * m - Complex64::ONE) / z_end)
            .collect();
        perturbations.push(Tensor::new(t.bond_dim(), t.rank(), entries)?);
    }
    let prefactor = means.iter().product();
    Ok(InterpolationFamily {
        network: tn.clone(),
        means,
        z_end,
        perturbations,
        prefactor,
    })
}

/// Estimator parameters: embedding strip parameter, family scale, Taylor
/// order, and target precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarvinokParams {
    pub rho: f64,
    pub z_end: Complex64,
    pub m: usize,
    pub eps: f64,
}

impl BarvinokParams {
    pub fn new(rho: f64, z_end: Complex64, m: usize, eps: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParam("Taylor order m must be >= 1".into()));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "precision eps must lie in (0, 1], got {eps}"
            )));
        }
        if z_end == Complex64::ZERO {
            return Err(Error::InvalidParam("z_end must be nonzero".into()));
        }
        PhiEmbedding::new(rho)?;
        Ok(Self { rho, z_end, m, eps })
    }

    /// Chooses the Taylor order from `(n, eps, rho)` via [`choose_m`].
    pub fn with_auto_order(n: usize, rho: f64, z_end: Complex64, eps: f64) -> Result<Self> {
        let m = choose_m(n, eps, rho)?;
        Self::new(rho, z_end, m, eps)
    }

    /// Width of the strip `T(1, 2 rho)` whose root-freeness certifies the
    /// tail bound.
    pub fn strip_width(&self) -> f64 {
        2.0 * self.rho
    }
}

/// The dilute-regime parameter bundle: `lambda` and density `c` with the
/// derived scale `z_end = d (1 - 2 lambda)`, strip parameter
/// `rho = pi lambda^4 / (4 (1 - 2 lambda))`, and the mean-size threshold
/// `1 / (d (1 - 2 lambda))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeParams {
    pub lambda: f64,
    pub c: f64,
}

impl RegimeParams {
    pub fn new(lambda: f64, c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "density parameter c must be positive, got {c}"
            )));
        }
        let cap = (1.0f64 / 80.0).min((-3.0 * c).exp() / 80.0);
        if !(lambda > 0.0 && lambda <= cap) {
            return Err(Error::InvalidParam(format!(
                "lambda must lie in (0, min(1/80, e^(-3c)/80)] = (0, {cap:.3e}], got {lambda}"
            )));
        }
        Ok(Self { lambda, c })
    }

    pub fn z_end(&self, bond_dim: usize) -> f64 {
        bond_dim as f64 * (1.0 - 2.0 * self.lambda)
    }

    pub fn rho(&self) -> f64 {
        std::f64::consts::PI * self.lambda.powi(4) / (4.0 * (1.0 - 2.0 * self.lambda))
    }

    /// Mean magnitudes at or above this threshold put an instance in the
    /// regime: `1 / (d (1 - 2 lambda))`.
    pub fn mean_threshold(&self, bond_dim: usize) -> f64 {
        1.0 / self.z_end(bond_dim)
    }

    /// Smallest bond dimension satisfying `d >= n / c`.
    pub fn min_bond_dim(&self, n: usize) -> usize {
        (n as f64 / self.c).ceil() as usize
    }
}

/// The estimate together with its diagnostics.
#[derive(Debug, Clone)]
pub struct BarvinokEstimate {
    /// `prod_v mu_v * exp(P_m(1))`.
    pub chi_hat: Complex64,
    /// Estimates from every truncation order `0..=m` (the last equals
    /// `chi_hat`).
    pub per_order: Vec<Complex64>,
    /// `n K / ((m+1) beta^m (beta-1))`: bounds `|ln chi - ln chi_hat|` when
    /// the strip is root-free.
    pub taylor_tail_bound: f64,
    pub m: usize,
    /// Embedding degree `K`.
    pub embedding_degree: u64,
    /// Embedding disk radius `beta`.
    pub beta: f64,
}

/// Runs the full estimator with default budgets.
pub fn barvinok_estimate(
    family: &InterpolationFamily,
    params: &BarvinokParams,
) -> Result<BarvinokEstimate> {
    barvinok_estimate_with_budget(family, params, DEFAULT_SUBSET_BUDGET, DEFAULT_STATE_BUDGET)
}

/// Runs the full estimator; budgets bound the derivative subset enumeration
/// and each sub-contraction's swallowing state.
pub fn barvinok_estimate_with_budget(
    family: &InterpolationFamily,
    params: &BarvinokParams,
    subset_budget: u64,
    state_budget: u64,
) -> Result<BarvinokEstimate> {
    if (params.z_end - family.z_end()).norm() > 1e-12 * family.z_end().norm().max(1.0) {
        return Err(Error::InvalidParam(format!(
            "params.z_end = {} does not match the family scale {}",
            params.z_end,
            family.z_end()
        )));
    }
    let n = family.num_vertices();
    let m = params.m;
    let embedding = PhiEmbedding::new(params.rho)?;

    // Taylor coefficients of G(z) = g(z * z_end).
    let g_coeffs = derivatives::g_taylor_coefficients_with_budget(
        family,
        m.min(n),
        subset_budget,
        state_budget,
    )?;
    let mut big_g = vec![Complex64::ZERO; m + 1];
    let mut z_pow = Complex64::ONE;
    for (k, coeff) in g_coeffs.iter().enumerate() {
        big_g[k] = coeff * z_pow;
        z_pow *= family.z_end();
    }

    // Compose with phi and take the series logarithm.
    let phi_coeffs: Vec<Complex64> = embedding
        .taylor_coefficients(m)
        .into_iter()
        .map(|c| Complex64::new(c, 0.0))
        .collect();
    let h = series::compose_series(&big_g, &phi_coeffs, m)?;
    let f_tail = series::log_series_tail(&h, m)?;
    let f0 = h[0].ln();

    // P_k(1) = F(0) + sum_{j<=k} f_j; one estimate per truncation order.
    let mut per_order = Vec::with_capacity(m + 1);
    let mut partial = f0;
    per_order.push(family.prefactor() * partial.exp());
    for fk in f_tail.iter().skip(1) {
        partial += fk;
        per_order.push(family.prefactor() * partial.exp());
    }
    let chi_hat = *per_order.last().expect("at least order zero");
    Ok(BarvinokEstimate {
        chi_hat,
        per_order,
        taylor_tail_bound: embedding.tail_bound(n, m),
        m,
        embedding_degree: embedding.num_terms(),
        beta: embedding.beta(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::sample_shifted_ones_tn;
    use crate::network::build_torus;
    use crate::swallow::contract_exact;

    #[test]
    fn all_ones_network_gives_zero_perturbation() {
        let tn = build_torus(2, 2, 3).unwrap();
        let family = make_family(&tn, None, Complex64::new(2.0, 0.0)).unwrap();
        for v in 0..4 {
            assert!(family
                .perturbation(v)
                .entries()
                .iter()
                .all(|x| *x == Complex64::ZERO));
            assert_eq!(family.means()[v], Complex64::ONE);
        }
        // g_A(z) is identically d^{|E|}.
        let g = g_derivatives(&family, 4).unwrap();
        assert_eq!(g[0], Complex64::new(3f64.powi(8), 0.0));
        for k in 1..=4 {
            assert_eq!(g[k], Complex64::ZERO);
        }
    }

    #[test]
    fn estimate_is_exact_for_trivial_family() {
        let mut tn = build_torus(2, 2, 2).unwrap();
        // M = 3 J: empirical means 3, A = 0, chi_hat = 3^4 * 2^8 for any m.
        tn.map_entries(|_, _, _| Complex64::new(3.0, 0.0));
        let family = make_family(&tn, None, Complex64::new(1.5, 0.0)).unwrap();
        let params = BarvinokParams::new(0.5, Complex64::new(1.5, 0.0), 7, 0.5).unwrap();
        let est = barvinok_estimate(&family, &params).unwrap();
        let expect = 3f64.powi(4) * 2f64.powi(8);
        assert!((est.chi_hat - Complex64::new(expect, 0.0)).norm() <= 1e-12 * expect);
        for e in &est.per_order {
            assert!((e - Complex64::new(expect, 0.0)).norm() <= 1e-12 * expect);
        }
    }

    #[test]
    fn shifted_gaussian_network_reconstructs() {
        // Tensors 1 + z_end * a with unit means: the recovered perturbation
        // is the Gaussian draw itself, and the residual is at rounding level.
        let z_end = Complex64::new(0.8, 0.0);
        let tn = sample_shifted_ones_tn(2, 3, 2, z_end, 99).unwrap();
        let means = vec![Complex64::ONE; 6];
        let family = make_family(&tn, Some(&means), z_end).unwrap();
        assert!(family.reconstruction_residual() <= 1e-12);
        // Entries of M match J + z_end A by construction.
        for v in 0..6 {
            for (m_entry, a_entry) in tn
                .tensor(v)
                .entries()
                .iter()
                .zip(family.perturbation(v).entries())
            {
                let back = Complex64::ONE + z_end * a_entry;
                assert!((back - m_entry).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn empirical_means_center_perturbations() {
        let tn = sample_shifted_ones_tn(2, 2, 3, Complex64::new(0.4, 0.1), 5).unwrap();
        let family = make_family(&tn, None, Complex64::ONE).unwrap();
        for v in 0..4 {
            let s = family.perturbation(v).entry_sum();
            assert!(s.norm() <= 1e-10, "vertex {v}: residual mean {s}");
        }
    }

    #[test]
    fn zero_mean_and_zero_scale_are_rejected() {
        let tn = build_torus(2, 2, 2).unwrap();
        assert!(make_family(&tn, None, Complex64::ZERO).is_err());
        let mut means = vec![Complex64::ONE; 4];
        means[2] = Complex64::ZERO;
        assert!(make_family(&tn, Some(&means), Complex64::ONE).is_err());
    }

    #[test]
    fn rescaling_leaves_estimates_unchanged() {
        // Families built from the same M with scales z and z/2 have
        // perturbations A and 2A; every G coefficient and the final estimate
        // agree.
        let z = Complex64::new(0.9, 0.2);
        let tn = sample_shifted_ones_tn(2, 2, 2, Complex64::new(0.3, 0.05), 21).unwrap();
        let fam_a = make_family(&tn, None, z).unwrap();
        let fam_b = make_family(&tn, None, z / 2.0).unwrap();
        let coeff_a = g_taylor_coefficients(&fam_a, 4).unwrap();
        let coeff_b = g_taylor_coefficients(&fam_b, 4).unwrap();
        let mut pow_a = Complex64::ONE;
        let mut pow_b = Complex64::ONE;
        for k in 0..=4usize {
            let ga = coeff_a[k] * pow_a;
            let gb = coeff_b[k] * pow_b;
            assert!(
                (ga - gb).norm() <= 1e-10 * ga.norm().max(1.0),
                "k={k}: {ga} vs {gb}"
            );
            pow_a *= z;
            pow_b *= z / 2.0;
        }
        let est_a =
            barvinok_estimate(&fam_a, &BarvinokParams::new(0.5, z, 6, 0.5).unwrap()).unwrap();
        let est_b =
            barvinok_estimate(&fam_b, &BarvinokParams::new(0.5, z / 2.0, 6, 0.5).unwrap()).unwrap();
        assert!(
            (est_a.chi_hat - est_b.chi_hat).norm() <= 1e-10 * est_a.chi_hat.norm(),
            "{} vs {}",
            est_a.chi_hat,
            est_b.chi_hat
        );
    }

    #[test]
    fn estimate_converges_to_exact_value_on_mild_instance() {
        // A well-separated instance: d = 4, mean 0.6 tensors on the (2,2)
        // torus. The error against exact contraction must shrink as the
        // truncation order grows and end below 1e-6 by m = 12.
        let d = 4;
        let z_end = Complex64::new(d as f64, 0.0);
        let tn = sample_shifted_ones_tn(2, 2, d, Complex64::new(0.25, 0.0), 7).unwrap();
        let family = make_family(&tn, None, z_end).unwrap();
        let exact = contract_exact(&tn, None).unwrap();
        let params = BarvinokParams::new(0.45, z_end, 90, 0.5).unwrap();
        let est = barvinok_estimate(&family, &params).unwrap();
        let rel_err = |e: Complex64| (e - exact).norm() / exact.norm();
        let late = rel_err(est.per_order[90]);
        assert!(
            late < 1e-8,
            "order-90 relative error {late:.3e} (exact {exact})"
        );
        // Geometric decay: each 30 extra orders cut the error by > 10x.
        for m in [30usize, 60, 90] {
            assert!(
                rel_err(est.per_order[m]) < rel_err(est.per_order[m - 30]) / 10.0,
                "stalled between orders {} and {m}",
                m - 30
            );
        }
    }

    #[test]
    fn mismatched_scale_is_rejected() {
        let tn = build_torus(2, 2, 2).unwrap();
        let family = make_family(&tn, None, Complex64::ONE).unwrap();
        let params = BarvinokParams::new(0.5, Complex64::new(2.0, 0.0), 3, 0.5).unwrap();
        assert!(barvinok_estimate(&family, &params).is_err());
    }

    #[test]
    fn regime_parameters() {
        // c = 1: cap is min(1/80, e^-3/80) = e^-3/80 ~ 6.22e-4.
        assert!(RegimeParams::new(1.0 / 80.0, 1.0).is_err());
        let p = RegimeParams::new(6e-4, 1.0).unwrap();
        assert!(p.rho() > 0.0 && p.rho() < 1.0);
        assert!((p.z_end(8) - 8.0 * (1.0 - 1.2e-3)).abs() < 1e-12);
        assert!((p.mean_threshold(8) - 1.0 / p.z_end(8)).abs() < 1e-15);
        assert_eq!(p.min_bond_dim(8), 8);
        // Small c loosens the cap toward (but never past) 1/80.
        assert!(RegimeParams::new(1.0 / 80.0, 0.01).is_err());
        let q = RegimeParams::new(0.012, 0.01).unwrap();
        assert_eq!(q.min_bond_dim(8), 800);
    }

    #[test]
    fn scaled_perturbations_rebuild_consistently() {
        let tn = sample_shifted_ones_tn(2, 2, 2, Complex64::new(0.3, 0.0), 31).unwrap();
        let family = make_family(&tn, None, Complex64::ONE).unwrap();
        let factor = Complex64::from_polar(1.0, 0.7);
        let rotated = family.scaled_perturbations(factor).unwrap();
        assert!(rotated.reconstruction_residual() <= 1e-12);
        for v in 0..4 {
            for (orig, rot) in family
                .perturbation(v)
                .entries()
                .iter()
                .zip(rotated.perturbation(v).entries())
            {
                assert!((rot - factor * orig).norm() <= 1e-15);
            }
        }
    }
}
