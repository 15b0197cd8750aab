//! Root structure of the interpolation polynomial.
//!
//! For an interpolation family with perturbations `A` and bond dimension
//! `d`, the rescaled polynomial `h(z) = g(z * d)` has constant term
//! `d^{|E|}` (`= d^{2n}` on a torus) and degree at most `n`. This module
//! extracts its coefficients exactly, finds all complex roots by the
//! Aberth–Ehrlich simultaneous iteration, counts roots in disks and in
//! rotated strips, verifies each instance against Jensen's formula
//!
//! `sum_{|z_j| <= r} ln(r / |z_j|) + ln|h(0)| = (1/2pi) ∫ ln|h(r e^{i t})| dt`,
//!
//! gathers small-disk/large-disk root statistics over the shifted Gaussian
//! ensemble, and searches a fan of `M = (1/lambda)^3` rotated sector strips
//! of half-width `pi * lambda^4 / 2` for one containing no roots.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::barvinok::{
    g_taylor_coefficients_with_budget, make_family, InterpolationFamily, DEFAULT_SUBSET_BUDGET,
};
use crate::error::{Error, Result};
use crate::gaussian::sample_shifted_ones_tn;
use crate::swallow::DEFAULT_STATE_BUDGET;
use crate::util::{splitmix64, NeumaierSum};

/// Quadrature nodes used by Jensen checks unless overridden.
pub const DEFAULT_JENSEN_NODES: usize = 4096;

/// Relative threshold below which leading/trailing coefficients are treated
/// as zero by the root finder.
pub const COEFF_TRIM_THRESHOLD: f64 = 1e-14;

/// The rescaled interpolation polynomial `h(z) = g(z * d)` in coefficient
/// form, `h(z) = sum_k c_k z^k` with `c_k = d^k * g^{(k)}(0) / k!`.
#[derive(Debug, Clone)]
pub struct InterpPolynomial {
    bond_dim: usize,
    coeffs: Vec<Complex64>,
}

impl InterpPolynomial {
    /// Wraps explicit coefficients `c_0..c_n` (ascending powers).
    pub fn new(bond_dim: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if bond_dim < 2 {
            return Err(Error::InvalidParam(format!(
                "bond dimension must be at least 2, got {bond_dim}"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidParam(
                "polynomial needs at least a constant coefficient".to_string(),
            ));
        }
        if let Some(c) = coeffs
            .iter()
            .find(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidParam(format!("non-finite coefficient {c}")));
        }
        Ok(InterpPolynomial { bond_dim, coeffs })
    }

    /// Bond dimension the `z -> z * d` rescaling used.
    pub fn bond_dim(&self) -> usize {
        self.bond_dim
    }

    /// Coefficients `c_0..c_n`, ascending powers.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Nominal degree (index of the last stored coefficient).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut p = Complex64::ZERO;
        for &c in self.coeffs.iter().rev() {
            p = p * z + c;
        }
        p
    }
}

/// Exact coefficients of `h(z) = g(z * d)` for `family`, with default
/// budgets. The prefactor `prod_v mu_v` is *not* folded in: for unit means
/// the polynomial value is the contraction itself, otherwise it is
/// `chi / prefactor`.
pub fn extract_coefficients(family: &InterpolationFamily) -> Result<InterpPolynomial> {
    extract_coefficients_with_budget(family, DEFAULT_SUBSET_BUDGET, DEFAULT_STATE_BUDGET)
}

/// Exact coefficients with explicit subset/state budgets.
pub fn extract_coefficients_with_budget(
    family: &InterpolationFamily,
    subset_budget: u64,
    state_budget: u64,
) -> Result<InterpPolynomial> {
    let n = family.num_vertices();
    let g = g_taylor_coefficients_with_budget(family, n, subset_budget, state_budget)?;
    let d = family.bond_dim() as f64;
    let mut scale = 1.0f64;
    let coeffs = g
        .iter()
        .map(|&gk| {
            let c = gk * scale;
            scale *= d;
            c
        })
        .collect();
    InterpPolynomial::new(family.bond_dim(), coeffs)
}

/// All roots of a polynomial, with per-root diagnostics.
#[derive(Debug, Clone)]
pub struct RootFinding {
    /// Roots sorted by real then imaginary part.
    pub roots: Vec<Complex64>,
    /// `|p(root)| / max_k |c_k|`, aligned with `roots`.
    pub residuals: Vec<f64>,
    /// Whether the final Aberth step for the root met the tolerance.
    pub converged: Vec<bool>,
    /// Simultaneous-iteration sweeps performed.
    pub iterations: usize,
}

impl RootFinding {
    /// True iff every root converged.
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    /// Largest reported residual (0 for an empty root list).
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, &b| a.max(b))
    }
}

fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::ZERO;
    let mut dp = Complex64::ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Finds all complex roots by Aberth–Ehrlich simultaneous iteration.
///
/// Coefficients are scaled by `max_k |c_k|`; leading coefficients below
/// `1e-14` of that scale are trimmed, trailing ones below it contribute
/// exact roots at the origin. Iteration starts on a perturbed circle of
/// radius `(|c_low| / |c_deg|)^{1/N}` and stops when every step is at most
/// `1e-12 * (1 + |root|)` or after 500 sweeps; per-root convergence flags
/// are always reported, never silently dropped. A constant polynomial
/// yields an empty root list.
pub fn find_roots(p: &InterpPolynomial) -> Result<RootFinding> {
    let max_coeff = p.coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if max_coeff == 0.0 {
        return Err(Error::InvalidParam(
            "the zero polynomial has no well-defined roots".to_string(),
        ));
    }
    let scaled: Vec<Complex64> = p.coeffs.iter().map(|&c| c / max_coeff).collect();

    // Trim negligible leading coefficients; count exact origin roots.
    let mut deg = scaled.len() - 1;
    while deg > 0 && scaled[deg].norm() <= COEFF_TRIM_THRESHOLD {
        deg -= 1;
    }
    let mut low = 0usize;
    while low < deg && scaled[low].norm() <= COEFF_TRIM_THRESHOLD {
        low += 1;
    }

    let mut roots: Vec<Complex64> = vec![Complex64::ZERO; low];
    let mut converged: Vec<bool> = vec![true; low];
    let mut iterations = 0usize;

    let reduced = &scaled[low..=deg];
    let nroots = deg - low;
    if nroots > 0 {
        let mut radius = (reduced[0].norm() / reduced[nroots].norm()).powf(1.0 / nroots as f64);
        if !radius.is_finite() || radius == 0.0 {
            radius = 1.0;
        }
        let mut z: Vec<Complex64> = (0..nroots)
            .map(|j| {
                let angle = 2.0 * std::f64::consts::PI * j as f64 / nroots as f64 + 0.4;
                let wobble =
                    1.0 + 0.01 * ((j.wrapping_mul(2_654_435_761) % 1000) as f64 / 1000.0 - 0.5);
                Complex64::from_polar(radius * wobble, angle)
            })
            .collect();
        let mut last_step = vec![f64::INFINITY; nroots];
        for iter in 1..=500 {
            iterations = iter;
            let mut max_rel = 0.0f64;
            for j in 0..nroots {
                let (pv, dpv) = horner_with_derivative(reduced, z[j]);
                if pv == Complex64::ZERO {
                    last_step[j] = 0.0;
                    continue;
                }
                if dpv == Complex64::ZERO {
                    // Stationary point: nudge and keep iterating.
                    z[j] *= Complex64::new(1.0 + 1e-6, 1e-6);
                    last_step[j] = f64::INFINITY;
                    max_rel = f64::INFINITY;
                    continue;
                }
                let newton = pv / dpv;
                let mut repulsion = Complex64::ZERO;
                for k in 0..nroots {
                    if k == j {
                        continue;
                    }
                    let mut diff = z[j] - z[k];
                    if diff == Complex64::ZERO {
                        diff = Complex64::new(1e-12 * (1.0 + z[j].norm()), 0.0);
                    }
                    repulsion += Complex64::ONE / diff;
                }
                let denom = Complex64::ONE - newton * repulsion;
                let correction = if denom == Complex64::ZERO {
                    newton
                } else {
                    newton / denom
                };
                z[j] -= correction;
                let step = correction.norm();
                last_step[j] = step;
                max_rel = max_rel.max(step / (1.0 + z[j].norm()));
            }
            if max_rel <= 1e-12 {
                break;
            }
        }
        for j in 0..nroots {
            roots.push(z[j]);
            converged.push(last_step[j] <= 1e-12 * (1.0 + z[j].norm()));
        }
    }

    let mut order: Vec<usize> = (0..roots.len()).collect();
    order.sort_by(|&a, &b| {
        roots[a]
            .re
            .total_cmp(&roots[b].re)
            .then(roots[a].im.total_cmp(&roots[b].im))
    });
    let roots: Vec<Complex64> = order.iter().map(|&i| roots[i]).collect();
    let converged: Vec<bool> = order.iter().map(|&i| converged[i]).collect();
    let residuals: Vec<f64> = roots
        .iter()
        .map(|&r| {
            let (pv, _) = horner_with_derivative(&scaled, r);
            pv.norm()
        })
        .collect();
    Ok(RootFinding {
        roots,
        residuals,
        converged,
        iterations,
    })
}

/// Number of roots in the closed disk `|z| <= r` (boundary counts as
/// inside).
pub fn count_in_disk(roots: &[Complex64], r: f64) -> usize {
    roots.iter().filter(|z| z.norm() <= r).count()
}

/// A strip of half-width `w` around the segment from the origin to
/// `r e^{i theta}`: all `z` with `-w <= Re(z e^{-i theta}) <= r + w` and
/// `|Im(z e^{-i theta})| <= w`.
#[derive(Debug, Clone, Copy)]
pub struct StripSpec {
    endpoint: Complex64,
    half_width: f64,
}

impl StripSpec {
    /// Strip toward `endpoint = r e^{i theta}` with half-width `w > 0`.
    pub fn new(endpoint: Complex64, half_width: f64) -> Result<Self> {
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "strip half-width must be positive, got {half_width}"
            )));
        }
        if !endpoint.re.is_finite() || !endpoint.im.is_finite() {
            return Err(Error::InvalidParam(format!(
                "non-finite strip endpoint {endpoint}"
            )));
        }
        Ok(StripSpec {
            endpoint,
            half_width,
        })
    }

    /// Strip toward `r e^{i theta}`.
    pub fn from_polar(r: f64, theta: f64, half_width: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(r, theta), half_width)
    }

    /// The strip's far endpoint `r e^{i theta}`.
    pub fn endpoint(&self) -> Complex64 {
        self.endpoint
    }

    /// Half-width `w`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Segment length `r = |endpoint|`.
    pub fn radius(&self) -> f64 {
        self.endpoint.norm()
    }

    /// Closed-region membership; boundary points count as inside.
    pub fn contains(&self, z: Complex64) -> bool {
        let r = self.radius();
        let aligned = if r == 0.0 {
            z
        } else {
            z * self.endpoint.conj() / r
        };
        -self.half_width <= aligned.re
            && aligned.re <= r + self.half_width
            && aligned.im.abs() <= self.half_width
    }
}

/// Number of roots inside the closed strip.
pub fn count_in_strip(roots: &[Complex64], strip: &StripSpec) -> usize {
    roots.iter().filter(|&&z| strip.contains(z)).count()
}

/// Outcome of a Jensen-formula verification.
#[derive(Debug, Clone, Copy)]
pub enum JensenOutcome {
    /// `|LHS - RHS|` of Jensen's formula at the requested radius.
    Residual(f64),
    /// A root lies within `1e-8` of the circle `|z| = r`, where the
    /// quadrature degrades; the check is skipped rather than reported badly.
    SkippedNearCircle { root: Complex64, distance: f64 },
}

impl JensenOutcome {
    /// The residual, if the check ran.
    pub fn residual(&self) -> Option<f64> {
        match self {
            JensenOutcome::Residual(r) => Some(*r),
            JensenOutcome::SkippedNearCircle { .. } => None,
        }
    }
}

/// Checks Jensen's formula for `p` on the circle of radius `r` with an
/// `nodes`-point trapezoid rule:
/// `sum_{|z_j| <= r} ln(r/|z_j|) + ln|p(0)| = mean_t ln|p(r e^{i t})|`.
///
/// Errors if `p(0) = 0` or the root finder fails to converge; returns
/// [`JensenOutcome::SkippedNearCircle`] when a root sits within `1e-8` of
/// the circle. A residual at most ~1e-6 simultaneously validates the root
/// list's completeness inside the disk.
pub fn jensen_check(p: &InterpPolynomial, r: f64, nodes: usize) -> Result<JensenOutcome> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "Jensen radius must be positive, got {r}"
        )));
    }
    if nodes == 0 {
        return Err(Error::InvalidParam(
            "quadrature needs at least one node".to_string(),
        ));
    }
    if p.coefficients()[0] == Complex64::ZERO {
        return Err(Error::InvalidParam(
            "Jensen's formula requires p(0) != 0".to_string(),
        ));
    }
    let finding = find_roots(p)?;
    if !finding.all_converged() {
        return Err(Error::NoConvergence(
            "root finding did not converge; Jensen check would be unreliable".to_string(),
        ));
    }
    for &root in &finding.roots {
        let distance = (root.norm() - r).abs();
        if distance <= 1e-8 {
            return Ok(JensenOutcome::SkippedNearCircle { root, distance });
        }
    }
    let mut lhs = NeumaierSum::new();
    for &root in &finding.roots {
        if root.norm() <= r {
            lhs.add((r / root.norm()).ln());
        }
    }
    lhs.add(p.coefficients()[0].norm().ln());

    let mut rhs = NeumaierSum::new();
    for k in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
        let value = p.eval(Complex64::from_polar(r, theta)).norm();
        rhs.add(value.ln());
    }
    let residual = (lhs.value() - rhs.value() / nodes as f64).abs();
    Ok(JensenOutcome::Residual(residual))
}

/// Searches the fan of `sectors` strips
/// `T((1 - 2 lambda) e^{i k theta}, pi lambda^4 / 2)`, `theta = 2 pi /
/// sectors`, for the smallest sector index containing no roots. `None` if
/// all sectors are occupied.
pub fn find_rootfree_strip_with_sectors(
    roots: &[Complex64],
    lambda: f64,
    sectors: u64,
) -> Result<Option<u64>> {
    validate_lambda(lambda)?;
    if sectors == 0 {
        return Err(Error::InvalidParam(
            "sector count must be positive".to_string(),
        ));
    }
    let w = std::f64::consts::PI * lambda.powi(4) / 2.0;
    let r = 1.0 - 2.0 * lambda;
    let theta = 2.0 * std::f64::consts::PI / sectors as f64;
    for k in 0..sectors {
        let strip = StripSpec::from_polar(r, theta * k as f64, w)?;
        if count_in_strip(roots, &strip) == 0 {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// [`find_rootfree_strip_with_sectors`] with the default fan of
/// `(1/lambda)^3` sectors.
pub fn find_rootfree_strip(roots: &[Complex64], lambda: f64) -> Result<Option<u64>> {
    let inv = validate_lambda(lambda)?;
    let sectors = inv.checked_pow(3).ok_or_else(|| {
        Error::InvalidParam(format!(
            "sector count (1/lambda)^3 overflows for lambda = {lambda}"
        ))
    })?;
    find_rootfree_strip_with_sectors(roots, lambda, sectors)
}

/// Requires `lambda = 1/q` for an integer `q >= 3` (so that `1 - 2 lambda >
/// 0`); returns `q`.
fn validate_lambda(lambda: f64) -> Result<u64> {
    if !(lambda > 0.0 && lambda < 0.5) || !lambda.is_finite() {
        return Err(Error::InvalidParam(format!(
            "lambda must lie in (0, 1/2), got {lambda}"
        )));
    }
    let inv = 1.0 / lambda;
    let rounded = inv.round();
    if (inv - rounded).abs() > 1e-9 * inv {
        return Err(Error::InvalidParam(format!(
            "1/lambda must be an integer, got 1/{lambda} = {inv}"
        )));
    }
    Ok(rounded as u64)
}

/// Full per-instance root analysis, bundling diagnostics the CLI reports.
#[derive(Debug, Clone)]
pub struct RootReport {
    /// Nominal polynomial degree.
    pub degree: usize,
    /// Roots sorted by real then imaginary part.
    pub roots: Vec<Complex64>,
    /// `|p(root)| / max|c_k|` per root.
    pub residuals: Vec<f64>,
    /// Per-root convergence flags.
    pub converged: Vec<bool>,
    /// `(r, N(r))` for each requested radius.
    pub disk_counts: Vec<(f64, usize)>,
    /// Radius the Jensen check ran at.
    pub jensen_radius: f64,
    /// Jensen residual, `None` when skipped because a root hugs the circle.
    pub jensen_residual: Option<f64>,
    /// Sector search parameter, when requested.
    pub lambda: Option<f64>,
    /// Smallest root-free sector index, when `lambda` was given and some
    /// sector is root-free.
    pub rootfree_sector: Option<u64>,
}

/// Runs the full analysis: root finding, disk counts for `radii`, a Jensen
/// check on a circle comfortably enclosing all roots, and (when `lambda` is
/// given) the rotated-sector root-free search.
pub fn analyze_roots(
    p: &InterpPolynomial,
    radii: &[f64],
    lambda: Option<f64>,
) -> Result<RootReport> {
    let finding = find_roots(p)?;
    let disk_counts = radii
        .iter()
        .map(|&r| (r, count_in_disk(&finding.roots, r)))
        .collect();
    let max_root = finding.roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let jensen_radius = if max_root > 0.0 { 1.5 * max_root } else { 1.0 };
    let jensen_residual = if p.coefficients()[0] == Complex64::ZERO {
        None
    } else {
        jensen_check(p, jensen_radius, DEFAULT_JENSEN_NODES)?.residual()
    };
    let rootfree_sector = match lambda {
        Some(l) => find_rootfree_strip(&finding.roots, l)?,
        None => None,
    };
    Ok(RootReport {
        degree: p.degree(),
        roots: finding.roots,
        residuals: finding.residuals,
        converged: finding.converged,
        disk_counts,
        jensen_radius,
        jensen_residual,
        lambda,
        rootfree_sector,
    })
}

/// Torus ensemble for root statistics: entries `1 + amplitude * d * a` with
/// `a` unit complex Gaussian, normalized with unit means at scale
/// `z_end = d`, so the family perturbation is exactly `amplitude * a`.
#[derive(Debug, Clone, Copy)]
pub struct RootEnsembleSpec {
    pub l1: usize,
    pub l2: usize,
    pub bond_dim: usize,
    /// Perturbation amplitude; 1 is the unit Gaussian ensemble, 0 the
    /// degenerate (constant polynomial) one.
    pub amplitude: f64,
    pub seed: u64,
}

/// Small-disk / large-disk root statistics over the Gaussian ensemble, with
/// the reference bounds they are compared against.
#[derive(Debug, Clone, Copy)]
pub struct DiskCountStats {
    pub num_samples: usize,
    pub lambda: f64,
    /// `c = n / d` for the sampled shape.
    pub c: f64,
    /// Empirical frequency of `N(lambda) = 0`.
    pub frac_zero_small_disk: f64,
    /// Binomial standard error of that frequency.
    pub frac_zero_sigma: f64,
    /// Empirical mean of `N(1 - lambda)`.
    pub mean_count_big_disk: f64,
    /// Standard error of that mean.
    pub mean_count_sigma: f64,
    /// Reference bound `8 lambda e^{3c}` on `Pr[N(lambda) >= 1]`.
    pub prob_nonzero_bound: f64,
    /// Reference bound `(1 / 2 lambda) ln(2 e^{3c})` on `E[N(1 - lambda)]`.
    pub mean_bound: f64,
}

/// Samples `num_samples` networks, extracts each interpolation polynomial,
/// and reports how often the small disk `|z| <= lambda` is root-free and the
/// mean root count in `|z| <= 1 - lambda`, next to the ensemble-level
/// reference bounds for `c = n / d`.
///
/// Per-sample seeds derive from `spec.seed` and the sample index, and
/// samples are aggregated in index order, so results are independent of the
/// thread count.
pub fn corollary14_stats(
    spec: &RootEnsembleSpec,
    lambda: f64,
    num_samples: usize,
) -> Result<DiskCountStats> {
    if num_samples == 0 {
        return Err(Error::InvalidParam("need at least one sample".to_string()));
    }
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(Error::InvalidParam(format!(
            "lambda must lie in (0, 1/2), got {lambda}"
        )));
    }
    let n = spec.l1 * spec.l2;
    let d = spec.bond_dim;
    let weight = Complex64::new(spec.amplitude * d as f64, 0.0);
    let z_end = Complex64::new(d as f64, 0.0);
    let means = vec![Complex64::ONE; n];
    let counts: Result<Vec<(bool, usize)>> = (0..num_samples)
        .into_par_iter()
        .map(|k| {
            let sample_seed =
                splitmix64(spec.seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let tn = sample_shifted_ones_tn(spec.l1, spec.l2, d, weight, sample_seed)?;
            let family = make_family(&tn, Some(&means), z_end)?;
            let p = extract_coefficients(&family)?;
            let finding = find_roots(&p)?;
            if !finding.all_converged() {
                return Err(Error::NoConvergence(format!(
                    "root finding stalled on ensemble sample {k}"
                )));
            }
            let small = count_in_disk(&finding.roots, lambda);
            let big = count_in_disk(&finding.roots, 1.0 - lambda);
            Ok((small == 0, big))
        })
        .collect();
    let counts = counts?;

    let zero_hits = counts.iter().filter(|(zero, _)| *zero).count();
    let frac = zero_hits as f64 / num_samples as f64;
    let frac_sigma = (frac * (1.0 - frac) / num_samples as f64).sqrt();
    let mut sum = NeumaierSum::new();
    for &(_, big) in &counts {
        sum.add(big as f64);
    }
    let mean = sum.value() / num_samples as f64;
    let mut sq = NeumaierSum::new();
    for &(_, big) in &counts {
        sq.add((big as f64 - mean) * (big as f64 - mean));
    }
    let variance = if num_samples > 1 {
        sq.value() / (num_samples - 1) as f64
    } else {
        0.0
    };
    let c = n as f64 / d as f64;
    Ok(DiskCountStats {
        num_samples,
        lambda,
        c,
        frac_zero_small_disk: frac,
        frac_zero_sigma: frac_sigma,
        mean_count_big_disk: mean,
        mean_count_sigma: (variance / num_samples as f64).sqrt(),
        prob_nonzero_bound: 8.0 * lambda * (3.0 * c).exp(),
        mean_bound: (2.0 * lambda).recip() * (2.0 * (3.0 * c).exp()).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::sample_gaussian_tn;
    use crate::gaussian::GaussianEnsembleSpec;
    use crate::swallow::contract_exact;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poly(coeffs: &[(f64, f64)]) -> InterpPolynomial {
        let c = coeffs
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect();
        InterpPolynomial::new(2, c).unwrap()
    }

    /// Expands prod (z - r_j) into ascending coefficients.
    fn expand_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        let mut coeffs = vec![Complex64::ONE];
        for &r in roots {
            let mut next = vec![Complex64::ZERO; coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            coeffs = next;
        }
        coeffs
    }

    fn match_roots(found: &[Complex64], expected: &[Complex64], tol: f64) {
        assert_eq!(found.len(), expected.len());
        for &e in expected {
            let best = found
                .iter()
                .map(|&f| (f - e).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best <= tol, "no root within {tol} of {e}; best {best}");
        }
    }

    #[test]
    fn constant_polynomial_has_no_roots() {
        let p = poly(&[(5.0, 0.0)]);
        let f = find_roots(&p).unwrap();
        assert!(f.roots.is_empty());
        assert!(f.all_converged());
    }

    #[test]
    fn quadratic_z2_plus_1() {
        let p = poly(&[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let f = find_roots(&p).unwrap();
        match_roots(
            &f.roots,
            &[Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)],
            1e-10,
        );
        assert!(f.all_converged());
        assert!(f.max_residual() <= 1e-10);
    }

    #[test]
    fn cubic_with_integer_roots() {
        // (z - 2)(z - 3)(z + 1) = z^3 - 4 z^2 + z + 6.
        let p = poly(&[(6.0, 0.0), (1.0, 0.0), (-4.0, 0.0), (1.0, 0.0)]);
        let f = find_roots(&p).unwrap();
        match_roots(
            &f.roots,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(-1.0, 0.0),
            ],
            1e-10,
        );
    }

    #[test]
    fn degree_eight_constructed_roots() {
        let expected = [
            Complex64::new(2.0, 0.0),
            Complex64::new(-1.5, 0.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(1.0, -1.0),
            Complex64::new(-0.5, -2.0),
            Complex64::new(-0.5, 2.0),
            Complex64::new(0.0, 3.0),
            Complex64::new(0.25, 0.0),
        ];
        let coeffs = expand_from_roots(&expected);
        let p = InterpPolynomial::new(2, coeffs).unwrap();
        let f = find_roots(&p).unwrap();
        assert!(f.all_converged());
        match_roots(&f.roots, &expected, 1e-8);
        assert!(f.max_residual() <= 1e-8);
    }

    #[test]
    fn trailing_zeros_give_exact_origin_roots() {
        // z^2 (z - 1).
        let p = poly(&[(0.0, 0.0), (0.0, 0.0), (-1.0, 0.0), (1.0, 0.0)]);
        let f = find_roots(&p).unwrap();
        assert_eq!(f.roots.len(), 3);
        assert_eq!(f.roots.iter().filter(|z| z.norm() == 0.0).count(), 2);
        match_roots(&f.roots[2..], &[Complex64::ONE], 1e-10);
    }

    #[test]
    fn tiny_leading_coefficient_is_trimmed() {
        // Effectively (z - 2) with a 1e-20-size quadratic term.
        let p = poly(&[(-2.0, 0.0), (1.0, 0.0), (1e-20, 0.0)]);
        let f = find_roots(&p).unwrap();
        assert_eq!(f.roots.len(), 1);
        assert_relative_eq!(f.roots[0].re, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn disk_counts_with_boundary_inside() {
        let roots = [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
        assert_eq!(count_in_disk(&roots, 0.5), 0);
        assert_eq!(count_in_disk(&roots, 1.0), 2);
        assert_eq!(count_in_disk(&roots, 2.0), 2);
    }

    #[test]
    fn strip_counts() {
        let strip = StripSpec::from_polar(1.0, 0.0, 0.1).unwrap();
        assert_eq!(count_in_strip(&[Complex64::new(0.5, 0.0)], &strip), 1);
        assert_eq!(count_in_strip(&[Complex64::new(0.5, 0.2)], &strip), 0);
        // Boundary tie: at the half-width exactly.
        assert_eq!(count_in_strip(&[Complex64::new(0.5, 0.1)], &strip), 1);

        let quarter = std::f64::consts::FRAC_PI_4;
        let rotated = StripSpec::from_polar(1.0, quarter, 0.01).unwrap();
        let on_axis = Complex64::from_polar(0.5, quarter);
        assert_eq!(count_in_strip(&[on_axis], &rotated), 1);
        assert_eq!(count_in_strip(&[Complex64::new(0.5, 0.0)], &rotated), 0);
    }

    #[test]
    fn strip_rejects_nonpositive_width() {
        assert!(StripSpec::from_polar(1.0, 0.0, 0.0).is_err());
        assert!(StripSpec::from_polar(1.0, 0.0, -0.5).is_err());
    }

    #[test]
    fn jensen_on_constant_polynomial() {
        let p = poly(&[(1.0, 0.0)]);
        let out = jensen_check(&p, 1.0, 64).unwrap();
        assert!(out.residual().unwrap() <= 1e-12);
    }

    #[test]
    fn jensen_mean_value_property_for_linear() {
        // p = z - 2 at r = 1: both sides equal ln 2.
        let p = poly(&[(-2.0, 0.0), (1.0, 0.0)]);
        let out = jensen_check(&p, 1.0, DEFAULT_JENSEN_NODES).unwrap();
        assert!(out.residual().unwrap() <= 1e-8);
    }

    #[test]
    fn jensen_random_degree_six() {
        let expected = [
            Complex64::new(0.3, 0.4),
            Complex64::new(-0.8, 0.1),
            Complex64::new(1.2, -0.5),
            Complex64::new(-2.0, 0.7),
            Complex64::new(0.1, -2.2),
            Complex64::new(2.4, 1.9),
        ];
        let p = InterpPolynomial::new(2, expand_from_roots(&expected)).unwrap();
        let out = jensen_check(&p, 1.6, DEFAULT_JENSEN_NODES).unwrap();
        assert!(
            out.residual().unwrap() <= 1e-6,
            "residual {:?}",
            out.residual()
        );
    }

    #[test]
    fn jensen_skips_near_circle_roots() {
        let p = poly(&[(-1.0, 0.0), (1.0, 0.0)]); // root at 1
        match jensen_check(&p, 1.0 + 1e-9, 128).unwrap() {
            JensenOutcome::SkippedNearCircle { distance, .. } => {
                assert!(distance <= 1e-8);
            }
            JensenOutcome::Residual(r) => panic!("expected skip, got residual {r}"),
        }
    }

    #[test]
    fn jensen_rejects_vanishing_constant_term() {
        let p = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!(jensen_check(&p, 1.0, 64).is_err());
    }

    #[test]
    fn rootfree_strip_trivial_and_constructed() {
        // No roots: sector 0 is free.
        assert_eq!(find_rootfree_strip(&[], 0.25).unwrap(), Some(0));

        // One root on the sector-0 axis: sector 0 occupied, sector 1 free.
        let lambda = 0.25;
        let root = Complex64::new(0.5 * (1.0 - 2.0 * lambda), 0.0);
        assert_eq!(find_rootfree_strip(&[root], lambda).unwrap(), Some(1));
    }

    #[test]
    fn rootfree_strip_requires_integer_reciprocal() {
        assert!(find_rootfree_strip(&[], 0.3).is_err());
        assert!(find_rootfree_strip(&[], 0.0).is_err());
        assert!(find_rootfree_strip(&[], 0.75).is_err());
    }

    #[test]
    fn sector_strips_clipped_to_annulus_are_disjoint() {
        // lambda = 1/4: 64 sectors of half-width pi/512. Random points of
        // the annulus lambda <= |z| <= 1 - lambda lie in at most one strip.
        let lambda = 0.25f64;
        let sectors = 64u64;
        let w = std::f64::consts::PI * lambda.powi(4) / 2.0;
        let r = 1.0 - 2.0 * lambda;
        let theta = 2.0 * std::f64::consts::PI / sectors as f64;
        let strips: Vec<StripSpec> = (0..sectors)
            .map(|k| StripSpec::from_polar(r, theta * k as f64, w).unwrap())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut in_some_strip = 0;
        for _ in 0..5000 {
            let radius = lambda + (1.0 - 2.0 * lambda) * rng.gen::<f64>();
            let angle = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            let z = Complex64::from_polar(radius, angle);
            let hits = strips.iter().filter(|s| s.contains(z)).count();
            assert!(hits <= 1, "point {z} lies in {hits} strips");
            in_some_strip += hits;
        }
        assert!(in_some_strip > 0, "sampler never landed in any strip");
    }

    fn unit_gaussian_family(seed: u64) -> InterpolationFamily {
        let tn = sample_shifted_ones_tn(2, 2, 2, Complex64::new(2.0, 0.0), seed).unwrap();
        let means = vec![Complex64::ONE; 4];
        make_family(&tn, Some(&means), Complex64::new(2.0, 0.0)).unwrap()
    }

    #[test]
    fn coefficients_constant_term_is_d_to_2n() {
        let family = unit_gaussian_family(3);
        let p = extract_coefficients(&family).unwrap();
        assert_eq!(p.degree(), 4);
        assert_relative_eq!(p.coefficients()[0].re, 256.0, max_relative = 1e-12);
        assert!(p.coefficients()[0].im.abs() <= 1e-9);
    }

    #[test]
    fn degenerate_family_gives_constant_polynomial() {
        let tn = sample_shifted_ones_tn(2, 2, 2, Complex64::ZERO, 5).unwrap();
        let means = vec![Complex64::ONE; 4];
        let family = make_family(&tn, Some(&means), Complex64::new(2.0, 0.0)).unwrap();
        let p = extract_coefficients(&family).unwrap();
        for k in 1..=p.degree() {
            assert_eq!(p.coefficients()[k], Complex64::ZERO);
        }
        let f = find_roots(&p).unwrap();
        assert!(f.roots.is_empty());
    }

    #[test]
    fn polynomial_matches_contraction_of_rescaled_network() {
        // p(z*) equals the exact contraction of the family network at
        // w = z* d, for unit means (prefactor 1).
        let family = unit_gaussian_family(17);
        let p = extract_coefficients(&family).unwrap();
        let d = Complex64::new(2.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let z = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let direct = contract_exact(&family.perturbed_network(z * d).unwrap(), None).unwrap();
            let via_poly = p.eval(z);
            assert_relative_eq!(via_poly.re, direct.re, max_relative = 1e-8);
            assert_relative_eq!(via_poly.im, direct.im, max_relative = 1e-8, epsilon = 1e-8);
        }
    }

    #[test]
    fn coefficients_are_rotation_equivariant() {
        // Scaling every perturbation by e^{i t} multiplies c_k by e^{i k t},
        // so the root set rotates by e^{-i t}.
        let spec = GaussianEnsembleSpec {
            l1: 2,
            l2: 2,
            bond_dim: 2,
            mean: Complex64::ONE,
            seed: 31,
        };
        let tn = sample_gaussian_tn(&spec).unwrap();
        let means = vec![Complex64::ONE; 4];
        let family = make_family(&tn, Some(&means), Complex64::new(2.0, 0.0)).unwrap();
        let theta = 0.7;
        let factor = Complex64::from_polar(1.0, theta);
        let rotated = family.scaled_perturbations(factor).unwrap();

        let p = extract_coefficients(&family).unwrap();
        let q = extract_coefficients(&rotated).unwrap();
        let mut phase = Complex64::ONE;
        for k in 0..=p.degree() {
            let want = p.coefficients()[k] * phase;
            let got = q.coefficients()[k];
            assert!(
                (want - got).norm() <= 1e-10 * (1.0 + want.norm()),
                "coefficient {k}: {got} vs {want}"
            );
            phase *= factor;
        }

        let max_c = q
            .coefficients()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        for &root in &find_roots(&p).unwrap().roots {
            let rotated_root = root / factor;
            assert!(q.eval(rotated_root).norm() <= 1e-6 * max_c);
        }
    }

    #[test]
    fn analyze_roots_reports_counts_and_jensen() {
        let family = unit_gaussian_family(8);
        let p = extract_coefficients(&family).unwrap();
        let report = analyze_roots(&p, &[0.25, 1.0, 10.0], Some(0.25)).unwrap();
        assert_eq!(report.disk_counts.len(), 3);
        assert!(report.disk_counts[2].1 >= report.disk_counts[0].1);
        for (i, &res) in report.residuals.iter().enumerate() {
            assert!(res <= 1e-8, "root {i} residual {res}");
            assert!(report.converged[i]);
        }
        if let Some(res) = report.jensen_residual {
            assert!(res <= 1e-6, "Jensen residual {res}");
        }
        assert!(report.rootfree_sector.is_some());
    }

    #[test]
    fn degenerate_ensemble_statistics() {
        let spec = RootEnsembleSpec {
            l1: 2,
            l2: 2,
            bond_dim: 2,
            amplitude: 0.0,
            seed: 1,
        };
        let stats = corollary14_stats(&spec, 0.25, 20).unwrap();
        assert_eq!(stats.frac_zero_small_disk, 1.0);
        assert_eq!(stats.mean_count_big_disk, 0.0);
        assert_relative_eq!(stats.c, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn gaussian_ensemble_statistics_are_deterministic_and_bounded() {
        let spec = RootEnsembleSpec {
            l1: 2,
            l2: 2,
            bond_dim: 2,
            amplitude: 1.0,
            seed: 7,
        };
        let a = corollary14_stats(&spec, 0.25, 30).unwrap();
        let b = corollary14_stats(&spec, 0.25, 30).unwrap();
        assert_eq!(
            a.frac_zero_small_disk.to_bits(),
            b.frac_zero_small_disk.to_bits()
        );
        assert_eq!(
            a.mean_count_big_disk.to_bits(),
            b.mean_count_big_disk.to_bits()
        );
        // Degree-4 polynomials: at most 4 roots anywhere.
        assert!(a.mean_count_big_disk <= 4.0);
        assert!(a.frac_zero_small_disk >= 0.0 && a.frac_zero_small_disk <= 1.0);
        assert!(a.prob_nonzero_bound > 0.0);
        assert!(a.mean_bound > 0.0);
    }
}
