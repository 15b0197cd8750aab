//! 2D Ising partition functions and Gaussian-ensemble moment identities.
//!
//! The classical Ising model on the `L1 x L2` torus multigraph (a side of
//! length 2 carries doubled bonds, so `|E| = 2n` always) has
//!
//! ```text
//! Z = sum_{s in {-1,+1}^n} exp( betaJ * sum_{(v,w) in E} s_v s_w + betah * sum_v s_v )
//! ```
//!
//! [`ising_bruteforce`] evaluates this literally with a Gray-code sweep;
//! [`kaufman_partition`] evaluates Kaufman's exact closed form at zero field
//! and must agree to near machine precision.
//!
//! The bridge to tensor networks: for the ensemble with tensors `J + z d A`
//! (unit complex Gaussian `A`), the second moment of the contraction value is
//! an Ising partition function in disguise:
//!
//! ```text
//! E |chi|^2 = sum_s R(s) |z|^{2|s|} = d^{7n/2} |z|^n Z(betaJ = ln(d)/4, betah = ln|z|)
//! ```
//!
//! with `R(s) = prod_edges (d^2 if s_v = s_w else d^{3/2})` and `|s|` the
//! number of `-1` spins. [`second_moment_exact`] computes both sides and
//! insists they agree, so the Ising oracle and the Gaussian ensemble check
//! each other.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::sample_shifted_ones_tn;
use crate::network::build_torus;
use crate::swallow::{greedy_order, plan_swallowing, swallow_contract};
use crate::util::{ln_2cosh, ln_2sinh_abs, signed_log_sum_exp, splitmix64, NeumaierSum};

/// Largest spin count brute-force sweeps will accept (2^n configurations).
pub const MAX_BRUTEFORCE_SPINS: usize = 24;

/// Ising model on the torus multigraph; couplings are premultiplied by beta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingSpec {
    pub l1: usize,
    pub l2: usize,
    pub beta_j: f64,
    pub beta_h: f64,
}

impl IsingSpec {
    pub fn num_spins(&self) -> usize {
        self.l1 * self.l2
    }
}

/// Exact partition function by Gray-code enumeration of all 2^n spin
/// configurations, with incremental bond- and spin-sum updates. Parallel
/// edges are counted individually: the (2,2) torus has 8 bonds.
pub fn ising_bruteforce(spec: &IsingSpec) -> Result<f64> {
    let n = spec.num_spins();
    if spec.l1 < 2 || spec.l2 < 2 {
        return Err(Error::InvalidParam(format!(
            "torus sides must both be at least 2, got ({}, {})",
            spec.l1, spec.l2
        )));
    }
    if n > MAX_BRUTEFORCE_SPINS {
        return Err(Error::BudgetExceeded {
            task: "Ising brute force (spin enumeration)".into(),
            needed: 1u128 << n,
            budget: 1u128 << MAX_BRUTEFORCE_SPINS,
        });
    }
    // Neighbor lists with multiplicity from the torus multigraph.
    let tn = build_torus(spec.l1, spec.l2, 2)?;
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in tn.edges() {
        neighbors[e.a.vertex].push(e.b.vertex);
        neighbors[e.b.vertex].push(e.a.vertex);
    }

    let mut spins = vec![1i64; n];
    let mut bond_sum: i64 = tn.num_edges() as i64; // all spins +1
    let mut spin_sum: i64 = n as i64;
    let mut acc = NeumaierSum::new();
    acc.add((spec.beta_j * bond_sum as f64 + spec.beta_h * spin_sum as f64).exp());
    for k in 1u64..(1u64 << n) {
        let v = k.trailing_zeros() as usize;
        // Flipping s_v changes each incident bond term by -2 s_v s_w.
        let mut local: i64 = 0;
        for &w in &neighbors[v] {
            local += spins[w];
        }
        bond_sum -= 2 * spins[v] * local;
        spin_sum -= 2 * spins[v];
        spins[v] = -spins[v];
        acc.add((spec.beta_j * bond_sum as f64 + spec.beta_h * spin_sum as f64).exp());
    }
    Ok(acc.value())
}

/// The self-dual coupling `betaJ_c = asinh(1) / 2 = ln(1 + sqrt 2) / 2`.
pub fn critical_coupling() -> f64 {
    1.0f64.asinh() / 2.0
}

/// Natural log of Kaufman's closed-form zero-field partition function on the
/// `L1 x L2` torus.
///
/// With `tanh(Hstar) = exp(-2 betaJ)` and, for `j = 1..2*L2`,
///
/// ```text
/// cosh(gamma_j) = cosh(2 Hstar) cosh(2 betaJ)
///               - sinh(2 Hstar) sinh(2 betaJ) cos(j pi / L2)
/// ```
///
/// every `gamma_j >= 0` except `j = 2 L2`, which is negative exactly when
/// `betaJ` lies below the critical coupling. Then, with products over
/// `r = 1..L2`,
///
/// ```text
/// Z = (1/2) (2 sinh 2betaJ)^{n/2} [ prod 2cosh(L1 gamma_{2r} / 2)
///   + prod 2sinh(L1 gamma_{2r} / 2) + prod 2cosh(L1 gamma_{2r-1} / 2)
///   + prod 2sinh(L1 gamma_{2r-1} / 2) ].
/// ```
///
/// The per-site bond sum counts both lattice directions, so a side of length
/// 2 contributes doubled bonds — the same multigraph convention as
/// [`ising_bruteforce`]. Everything is accumulated in log space so large
/// lattices cannot overflow.
pub fn kaufman_ln_partition(l1: usize, l2: usize, beta_j: f64) -> Result<f64> {
    if l1 < 2 || l2 < 2 {
        return Err(Error::InvalidParam(format!(
            "torus sides must both be at least 2, got ({l1}, {l2})"
        )));
    }
    if !l2.is_multiple_of(2) {
        return Err(Error::InvalidParam(format!(
            "Kaufman's formula requires even L2, got {l2}"
        )));
    }
    if !beta_j.is_finite() || beta_j <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "kaufman_partition requires betaJ > 0, got {beta_j}"
        )));
    }
    let n = (l1 * l2) as f64;
    // tanh Hstar = exp(-2 betaJ); betaJ > 0 keeps the argument in (0, 1).
    let hstar = (-2.0 * beta_j).exp().atanh();
    let (c2h, s2h) = ((2.0 * hstar).cosh(), (2.0 * hstar).sinh());
    let (c2b, s2b) = ((2.0 * beta_j).cosh(), (2.0 * beta_j).sinh());

    let gamma = |j: usize| -> f64 {
        let cosh_g = c2h * c2b - s2h * s2b * (j as f64 * std::f64::consts::PI / l2 as f64).cos();
        let g = cosh_g.max(1.0).acosh();
        if j == 2 * l2 && beta_j < critical_coupling() {
            -g
        } else {
            g
        }
    };

    // Signed log products of 2cosh / 2sinh over even and odd gamma indices.
    let mut ln_even_cosh = NeumaierSum::new();
    let mut ln_odd_cosh = NeumaierSum::new();
    let mut ln_even_sinh = NeumaierSum::new();
    let mut ln_odd_sinh = NeumaierSum::new();
    let mut sign_even_sinh = 1.0f64;
    let mut sign_odd_sinh = 1.0f64;
    for r in 1..=l2 {
        let ge = l1 as f64 / 2.0 * gamma(2 * r);
        let go = l1 as f64 / 2.0 * gamma(2 * r - 1);
        ln_even_cosh.add(ln_2cosh(ge));
        ln_odd_cosh.add(ln_2cosh(go));
        ln_even_sinh.add(ln_2sinh_abs(ge));
        ln_odd_sinh.add(ln_2sinh_abs(go));
        if ge < 0.0 {
            sign_even_sinh = -sign_even_sinh;
        } else if ge == 0.0 {
            sign_even_sinh = 0.0;
        }
        if go < 0.0 {
            sign_odd_sinh = -sign_odd_sinh;
        } else if go == 0.0 {
            sign_odd_sinh = 0.0;
        }
    }
    let (sign, ln_bracket) = signed_log_sum_exp(&[
        (1.0, ln_even_cosh.value()),
        (sign_even_sinh, ln_even_sinh.value()),
        (1.0, ln_odd_cosh.value()),
        (sign_odd_sinh, ln_odd_sinh.value()),
    ]);
    if sign <= 0.0 {
        return Err(Error::NoConvergence(
            "Kaufman bracket collapsed to a non-positive value".into(),
        ));
    }
    Ok(n / 2.0 * (2.0 * s2b).ln() - std::f64::consts::LN_2 + ln_bracket)
}

/// Kaufman's closed-form zero-field partition function as a plain value.
/// See [`kaufman_ln_partition`].
pub fn kaufman_partition(l1: usize, l2: usize, beta_j: f64) -> Result<f64> {
    Ok(kaufman_ln_partition(l1, l2, beta_j)?.exp())
}

/// Parameters of a second-moment evaluation for the ensemble with tensors
/// `J + z d A` on the `(l1, l2)` torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentParams {
    pub l1: usize,
    pub l2: usize,
    pub bond_dim: usize,
    pub z: Complex64,
}

impl MomentParams {
    /// Chooses torus sides for a requested vertex count via [`torus_dims`].
    pub fn from_vertex_count(n: usize, bond_dim: usize, z: Complex64) -> Result<Self> {
        let (l1, l2) = torus_dims(n)?;
        Ok(Self {
            l1,
            l2,
            bond_dim,
            z,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.l1 * self.l2
    }
}

/// Factors `n` into torus sides `(l1, l2)`, both at least 2, preferring the
/// smallest `l1` whose complement `l2 = n/l1` is even (Kaufman-compatible),
/// then any admissible factorization. Elongated tori contract cheaply.
pub fn torus_dims(n: usize) -> Result<(usize, usize)> {
    let mut fallback = None;
    for l1 in 2..=n / 2 {
        if n.is_multiple_of(l1) && n / l1 >= 2 {
            if (n / l1).is_multiple_of(2) {
                return Ok((l1, n / l1));
            }
            if fallback.is_none() {
                fallback = Some((l1, n / l1));
            }
        }
    }
    fallback.ok_or_else(|| {
        Error::InvalidParam(format!(
            "vertex count {n} does not factor into torus sides both >= 2"
        ))
    })
}

/// Both exact forms of the ensemble second moment `E |chi|^2`.
#[derive(Debug, Clone, Copy)]
pub struct SecondMoment {
    /// Direct spin sum `sum_s R(s) |z|^{2|s|}`.
    pub spin_sum: f64,
    /// Equivalent Ising form `d^{7n/2} |z|^n Z(ln(d)/4, ln|z|)`.
    pub ising_form: f64,
}

/// Evaluates `E |chi|^2` both ways and insists the two forms agree to 1e-9
/// relative; returns both.
pub fn second_moment_exact(params: &MomentParams) -> Result<SecondMoment> {
    let n = params.num_vertices();
    if n > MAX_BRUTEFORCE_SPINS {
        return Err(Error::BudgetExceeded {
            task: "second-moment spin enumeration".into(),
            needed: 1u128 << n,
            budget: 1u128 << MAX_BRUTEFORCE_SPINS,
        });
    }
    if params.bond_dim < 2 {
        return Err(Error::InvalidParam(
            "bond dimension must be at least 2".into(),
        ));
    }
    let d = params.bond_dim as f64;
    let z_abs = params.z.norm();
    let num_edges = 2 * n;
    if z_abs == 0.0 {
        // Only the all-(+1) configuration survives: R = (d^2)^{2n} = d^{4n}.
        let value = d.powi(4 * n as i32);
        return Ok(SecondMoment {
            spin_sum: value,
            ising_form: value,
        });
    }

    // Spin-sum form: R(s) = d^{2|E|} * d^{-u(s)/2} with u = # unequal-spin
    // edges; each -1 spin carries |z|^2.
    let tn = build_torus(params.l1, params.l2, params.bond_dim)?;
    let ln_d = d.ln();
    let ln_z = z_abs.ln();
    let mut acc = NeumaierSum::new();
    for cfg in 0u64..(1u64 << n) {
        let mut unequal = 0u32;
        for e in tn.edges() {
            let sa = cfg >> e.a.vertex & 1;
            let sb = cfg >> e.b.vertex & 1;
            if sa != sb {
                unequal += 1;
            }
        }
        let minus = cfg.count_ones();
        let ln_term =
            ln_d * (2.0 * num_edges as f64 - 0.5 * unequal as f64) + 2.0 * minus as f64 * ln_z;
        acc.add(ln_term.exp());
    }
    let spin_sum = acc.value();

    // Ising form.
    let z_ising = ising_bruteforce(&IsingSpec {
        l1: params.l1,
        l2: params.l2,
        beta_j: ln_d / 4.0,
        beta_h: ln_z,
    })?;
    let ising_form = d.powf(3.5 * n as f64) * z_abs.powi(n as i32) * z_ising;

    let rel = (spin_sum - ising_form).abs() / spin_sum.abs().max(ising_form.abs());
    if rel > 1e-9 {
        return Err(Error::NoConvergence(format!(
            "second-moment forms disagree: spin sum {spin_sum}, Ising form {ising_form} (rel {rel:.3e})"
        )));
    }
    Ok(SecondMoment {
        spin_sum,
        ising_form,
    })
}

/// Monte Carlo estimate of the same second moment.
#[derive(Debug, Clone, Copy)]
pub struct MomentMc {
    pub mean: f64,
    pub std_err: f64,
    pub num_samples: usize,
}

/// Samples `num_samples` networks with tensors `J + z d A` and averages
/// `|chi|^2` (exact swallowing per sample). Deterministic in `seed` and
/// thread count: sample `k` draws from the stream derived from `(seed, k)`,
/// and the average is reduced in sample order.
pub fn second_moment_mc(params: &MomentParams, num_samples: usize, seed: u64) -> Result<MomentMc> {
    if num_samples < 2 {
        return Err(Error::InvalidParam("need at least 2 samples".into()));
    }
    let weight = params.z * params.bond_dim as f64;
    let base = build_torus(params.l1, params.l2, params.bond_dim)?;
    let order = greedy_order(&base);
    let plan = plan_swallowing(&base, &order)?;
    let values: Vec<f64> = (0..num_samples)
        .into_par_iter()
        .map(|k| {
            let sample_seed = splitmix64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let tn =
                sample_shifted_ones_tn(params.l1, params.l2, params.bond_dim, weight, sample_seed)
                    .expect("torus shape is valid");
            let chi = swallow_contract(&tn, &plan).expect("within budget");
            chi.norm_sqr()
        })
        .collect();
    let mut sum = NeumaierSum::new();
    for &v in &values {
        sum.add(v);
    }
    let mean = sum.value() / num_samples as f64;
    let mut var = NeumaierSum::new();
    for &v in &values {
        var.add((v - mean) * (v - mean));
    }
    let std_err = (var.value() / (num_samples as f64 * (num_samples as f64 - 1.0))).sqrt();
    Ok(MomentMc {
        mean,
        std_err,
        num_samples,
    })
}

/// The analytic envelope for `E |chi|^2` in the dilute regime.
#[derive(Debug, Clone, Copy)]
pub struct VarianceBounds {
    /// Valid for `|z| <= rho`: `d^{4n} (1 + 2 rho^2 e^{3c})`.
    pub upper_small_z: f64,
    /// Valid for `|z| <= 1`: `2 e^{3c} d^{4n}`.
    pub upper_unit: f64,
    /// Valid for all z: `d^{4n} (1 + |z|^2 / d^2)^n`.
    pub lower: f64,
}

/// Evaluates the dilute-regime second-moment envelope for `n` vertices,
/// bond dimension `d`, density parameter `c >= n/d`, and radius `rho`.
pub fn variance_bounds(n: usize, d: usize, z_abs: f64, c: f64, rho: f64) -> VarianceBounds {
    let d4n = (d as f64).powi(4 * n as i32);
    VarianceBounds {
        upper_small_z: d4n * (1.0 + 2.0 * rho * rho * (3.0 * c).exp()),
        upper_unit: 2.0 * (3.0 * c).exp() * d4n,
        lower: d4n * (1.0 + z_abs * z_abs / (d as f64 * d as f64)).powi(n as i32),
    }
}
