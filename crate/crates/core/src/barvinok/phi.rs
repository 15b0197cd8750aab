//! The disk-to-strip polynomial embedding.
//!
//! For a strip parameter `rho` in (0,1), the degree-`K` polynomial
//!
//! ```text
//! phi(z) = (1/sigma) * sum_{k=1..K} (alpha z)^k / k
//! ```
//!
//! with `alpha = 1 - exp(-1/rho)`, `K = floor((1 + 1/rho) e^{1 + 1/rho})`,
//! and the normalizer `sigma = sum_{k=1..K} alpha^k / k`, satisfies
//! `phi(0) = 0`, `phi(1) = 1`, and maps the closed disk of radius
//! `beta = (1 - e^{-1-1/rho}) / (1 - e^{-1/rho}) > 1` into the strip
//! `-rho <= Re(w) <= 1 + 2 rho`, `|Im(w)| <= 2 rho`.
//!
//! Composing a contraction polynomial with `phi` therefore turns "no roots in
//! a thin strip around [0, 1]" into "analytic and root-free on a disk of
//! radius beta > 1", which is what makes a low-order Taylor expansion of the
//! logarithm converge at z = 1: truncating at order `m` costs at most
//! `n K / ((m+1) beta^m (beta - 1))`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::util::NeumaierSum;

/// Embedding degree above which the normalizer `sigma` switches from direct
/// summation to the closed form `-ln(1 - alpha)` (whose truncation error is
/// then below double-precision resolution).
const DIRECT_SIGMA_LIMIT: u64 = 10_000_000;

/// The polynomial `phi` with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiEmbedding {
    rho: f64,
    alpha: f64,
    beta: f64,
    num_terms: u64,
    sigma: f64,
}

impl PhiEmbedding {
    /// Builds the embedding for `rho` in (0, 1).
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParam(format!(
                "strip parameter rho must lie in (0, 1), got {rho}"
            )));
        }
        let alpha = 1.0 - (-1.0 / rho).exp();
        let beta = (1.0 - (-1.0 - 1.0 / rho).exp()) / alpha;
        let num_terms = embedding_degree(rho)?;
        let sigma = if num_terms <= DIRECT_SIGMA_LIMIT {
            let mut acc = NeumaierSum::new();
            let mut pow = 1.0f64;
            for k in 1..=num_terms {
                pow *= alpha;
                acc.add(pow / k as f64);
            }
            acc.value()
        } else {
            // sigma = -ln(1 - alpha) - sum_{k>K} alpha^k / k; the tail is below
            // alpha^K / (K (1 - alpha)) ~ exp(-e (1 + 1/rho)), which is far
            // below double-precision resolution whenever K exceeds the direct
            // limit.
            -(1.0 - alpha).ln()
        };
        Ok(Self {
            rho,
            alpha,
            beta,
            num_terms,
            sigma,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The analyticity radius `beta > 1` transported by the embedding.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The polynomial degree `K`.
    pub fn num_terms(&self) -> u64 {
        self.num_terms
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Evaluates `phi(z)` by Horner's rule over all `K` terms.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for k in (1..=self.num_terms).rev() {
            acc = acc * self.alpha * z + Complex64::new(1.0 / k as f64, 0.0);
        }
        acc * self.alpha * z / self.sigma
    }

    /// Taylor coefficients `[z^k] phi` for `k = 0..=m`: zero at `k = 0`,
    /// `alpha^k / (k sigma)` for `1 <= k <= K`, zero beyond `K`.
    pub fn taylor_coefficients(&self, m: usize) -> Vec<f64> {
        let mut coeffs = vec![0.0; m + 1];
        let mut pow = 1.0f64;
        for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
            if k as u64 > self.num_terms {
                break;
            }
            pow *= self.alpha;
            *c = pow / (k as f64 * self.sigma);
        }
        coeffs
    }

    /// Derivatives `phi^(k)(0) = alpha^k (k-1)! / sigma` for `k = 0..=m`.
    /// Overflows f64 beyond roughly k = 170; the coefficient form above is
    /// the overflow-safe interface.
    pub fn derivatives_at_zero(&self, m: usize) -> Vec<f64> {
        let mut derivs = self.taylor_coefficients(m);
        let mut factorial = 1.0f64;
        for (k, dk) in derivs.iter_mut().enumerate().skip(1) {
            factorial *= k as f64;
            *dk *= factorial;
        }
        derivs
    }

    /// The Taylor truncation bound `n K / ((m+1) beta^m (beta-1))` on
    /// `|ln G(phi(1)) - P_m(1)|` for a degree-`n` polynomial `G` that is
    /// root-free on the image strip.
    pub fn tail_bound(&self, n: usize, m: usize) -> f64 {
        n as f64 * self.num_terms as f64
            / ((m as f64 + 1.0) * self.beta.powi(m as i32) * (self.beta - 1.0))
    }
}

/// `K = floor((1 + 1/rho) e^{1 + 1/rho})`, with the floor decided in exact
/// rational arithmetic whenever the double-precision value sits within 1e-12
/// (relative) of an integer.
fn embedding_degree(rho: f64) -> Result<u64> {
    let t = 1.0 + 1.0 / rho;
    let x = t * t.exp();
    if !x.is_finite() || x >= u64::MAX as f64 / 2.0 {
        return Err(Error::InvalidParam(format!(
            "rho = {rho} makes the embedding degree (1 + 1/rho) e^(1 + 1/rho) = {x:.3e} \
             too large to represent"
        )));
    }
    if (x - x.round()).abs() <= 1e-12 * x.max(1.0) {
        return floor_t_exp_t_exact(t);
    }
    Ok(x.floor() as u64)
}

/// Evaluates `floor(t e^t)` for an exactly-representable f64 `t > 0` via an
/// exact rational Taylor sum of `e^t`; the truncation tail is provably below
/// 2^-40, so the floor of the rational value is the true floor unless the
/// exact value sits within 2^-40 of an integer (impossible for t e^t with
/// t > 0 rational, since e^t is then irrational).
fn floor_t_exp_t_exact(t: f64) -> Result<u64> {
    let tq = BigRational::from_float(t)
        .ok_or_else(|| Error::InvalidParam(format!("non-finite embedding argument {t}")))?;
    let terms = 3 * (t.ceil() as usize) + 120;
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    for k in 1..=terms {
        term = term * &tq / BigRational::from_integer(BigInt::from(k));
        sum += &term;
    }
    // Tail bound: with N = 3 ceil(t) + 120 the term ratio t/(N+1) is below
    // 1/3, so the dropped tail is under term_N / 2, itself astronomically
    // small; nudge by it and floor.
    let x = sum * &tq;
    let floor = x.floor().to_integer();
    floor
        .to_u64()
        .ok_or_else(|| Error::InvalidParam(format!("embedding degree for t = {t} exceeds u64")))
}

/// The truncation order guaranteeing a Taylor tail at most `eps / e`:
/// `m = ceil((ln(e n K / eps) - ln(beta - 1)) / ln beta)`, at least 1.
pub fn choose_m(n: usize, eps: f64, rho: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "precision eps must lie in (0, 1], got {eps}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParam("need at least one vertex".into()));
    }
    let phi = PhiEmbedding::new(rho)?;
    let k = phi.num_terms() as f64;
    let m = ((std::f64::consts::E * n as f64 * k / eps).ln() - (phi.beta() - 1.0).ln())
        / phi.beta().ln();
    Ok((m.ceil() as i64).max(1) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn endpoint_values_and_degree_floor() {
        for rho in [0.1, 0.3, 0.5, 0.8, 0.95] {
            let phi = PhiEmbedding::new(rho).unwrap();
            assert!(phi.num_terms() >= 14, "rho={rho}: K={}", phi.num_terms());
            assert!(phi.beta() > 1.0);
            let at_zero = phi.eval(Complex64::ZERO);
            assert_eq!(at_zero, Complex64::ZERO);
            let at_one = phi.eval(Complex64::ONE);
            assert!(
                (at_one - Complex64::ONE).norm() < 1e-12,
                "rho={rho}: phi(1)={at_one}"
            );
        }
    }

    #[test]
    fn degree_matches_closed_form() {
        // rho = 0.5: (1 + 2) e^3 = 60.256... -> K = 60.
        let phi = PhiEmbedding::new(0.5).unwrap();
        assert_eq!(phi.num_terms(), 60);
        // rho = 1/3: 4 e^4 = 218.39... -> K = 218.
        let phi = PhiEmbedding::new(1.0 / 3.0).unwrap();
        assert_eq!(phi.num_terms(), 218);
    }

    #[test]
    fn exact_floor_agrees_with_double_path() {
        for t in [2.5f64, 3.0, 7.25, 11.0] {
            let exact = floor_t_exp_t_exact(t).unwrap();
            let double = (t * t.exp()).floor() as u64;
            assert_eq!(exact, double, "t={t}");
        }
    }

    #[test]
    fn rejects_bad_rho() {
        assert!(PhiEmbedding::new(0.0).is_err());
        assert!(PhiEmbedding::new(1.0).is_err());
        assert!(PhiEmbedding::new(-0.2).is_err());
        assert!(PhiEmbedding::new(f64::NAN).is_err());
        // Tiny rho explodes the degree past u64.
        assert!(PhiEmbedding::new(0.015).is_err());
    }

    #[test]
    fn strip_containment_on_sampled_disk() {
        // 10^4 pseudo-random points with |z| <= beta stay inside
        // -rho <= Re phi <= 1 + 2 rho, |Im phi| <= 2 rho.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5712);
        for rho in [0.3, 0.5, 0.9] {
            let phi = PhiEmbedding::new(rho).unwrap();
            let samples = if rho == 0.5 { 10_000 } else { 1_000 };
            for _ in 0..samples {
                let r = phi.beta() * rng.gen::<f64>().sqrt();
                let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                let z = Complex64::from_polar(r, theta);
                let w = phi.eval(z);
                assert!(
                    w.re >= -rho - 1e-9 && w.re <= 1.0 + 2.0 * rho + 1e-9,
                    "rho={rho} z={z} w={w}"
                );
                assert!(w.im.abs() <= 2.0 * rho + 1e-9, "rho={rho} z={z} w={w}");
            }
        }
    }

    #[test]
    fn coefficients_match_derivatives_and_eval() {
        let phi = PhiEmbedding::new(0.5).unwrap();
        let coeffs = phi.taylor_coefficients(70);
        let derivs = phi.derivatives_at_zero(70);
        let mut factorial = 1.0;
        for k in 1..=70usize {
            factorial *= k as f64;
            assert!((derivs[k] - coeffs[k] * factorial).abs() <= 1e-12 * derivs[k].abs());
        }
        // Coefficients reproduce eval at a few points.
        for z in [
            Complex64::new(0.4, 0.1),
            Complex64::new(-0.8, 0.3),
            Complex64::new(0.0, 1.0),
        ] {
            let direct = phi.eval(z);
            let mut acc = Complex64::ZERO;
            let mut pow = Complex64::ONE;
            for &c in &coeffs {
                acc += c * pow;
                pow *= z;
            }
            assert!((direct - acc).norm() < 1e-12);
        }
        // Degree K: coefficient K nonzero, K+1 zero.
        assert!(coeffs[60] != 0.0);
        assert_eq!(coeffs[61], 0.0);
    }

    #[test]
    fn truncation_order_examples() {
        // Closed form at n=8, eps=0.01, rho=0.5 (K=60, beta=1.098936...).
        assert_eq!(choose_m(8, 0.01, 0.5).unwrap(), 150);
        // Loose precision still yields at least order 1.
        assert!(choose_m(1, 1.0, 0.9).unwrap() >= 1);
        // Doubling n shifts m by about ln 2 / ln beta (= 7.35 at rho = 0.5).
        let m8 = choose_m(8, 0.01, 0.5).unwrap();
        let m16 = choose_m(16, 0.01, 0.5).unwrap();
        let shift = m16 as i64 - m8 as i64;
        assert!((7..=8).contains(&shift), "shift={shift}");
    }

    #[test]
    fn tail_bound_value() {
        // n K / ((m+1) beta^m (beta-1)) at rho=0.5, n=8, m=150.
        let phi = PhiEmbedding::new(0.5).unwrap();
        let b = phi.tail_bound(8, 150);
        let beta = phi.beta();
        let expect = 8.0 * 60.0 / (151.0 * beta.powi(150) * (beta - 1.0));
        assert!((b - expect).abs() <= 1e-12 * expect);
        // The order chosen for eps guarantees tail <= eps / e.
        let m = choose_m(8, 0.01, 0.5).unwrap();
        assert!(phi.tail_bound(8, m) <= 0.01 / std::f64::consts::E * (1.0 + 1e-9));
    }
}
