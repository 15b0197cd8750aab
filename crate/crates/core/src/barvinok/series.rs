//! Truncated-series engines: composition via partial ordinary Bell
//! polynomials (Faà di Bruno in coefficient form), logarithm and exponential
//! of series, and derivative-list wrappers.
//!
//! Everything here works on *Taylor coefficients* (`a_k = f^{(k)}(0) / k!`),
//! which keeps magnitudes tame at high order; the `*_derivatives` wrappers
//! convert from and to raw derivative lists and are the only places
//! factorials are materialized (f64 factorials overflow past order 170).
//!
//! All core routines are generic over the scalar, so the same code runs in
//! `Complex64` for production and in exact `BigRational` for the
//! correctness tests.

use num_complex::Complex64;
use num_traits::{FromPrimitive, Num, NumAssignOps, Zero};

use crate::error::{Error, Result};

/// Scalar requirements for the series engines: a commutative ring with
/// division and embeddings of small integers.
pub trait SeriesScalar: Clone + Num + NumAssignOps + FromPrimitive {}
impl<T: Clone + Num + NumAssignOps + FromPrimitive> SeriesScalar for T {}

fn small_int<T: SeriesScalar>(k: usize) -> T {
    T::from_usize(k).expect("small integer embeds into the scalar type")
}

/// Partial ordinary Bell table for an inner series with zero constant term:
/// `table[l][i] = [z^i] (sum_{j>=1} y_j z^j)^l` for `l = 0..=max_parts`,
/// `i = 0..=m`, computed by the recurrence
/// `B(i, l) = sum_{j=1..=i-l+1} y_j B(i-j, l-1)` with `B(0,0) = 1`.
pub fn ordinary_bell_table<T: SeriesScalar>(y: &[T], m: usize, max_parts: usize) -> Vec<Vec<T>> {
    let mut table: Vec<Vec<T>> = Vec::with_capacity(max_parts + 1);
    let mut row0 = vec![T::zero(); m + 1];
    row0[0] = T::one();
    table.push(row0);
    for l in 1..=max_parts {
        let mut row = vec![T::zero(); m + 1];
        for i in l..=m {
            let mut acc = T::zero();
            for j in 1..=(i - l + 1) {
                let yj = match y.get(j) {
                    Some(v) => v.clone(),
                    None => break,
                };
                acc += yj * table[l - 1][i - j].clone();
            }
            row[i] = acc;
        }
        table.push(row);
    }
    table
}

/// Coefficients of `outer(inner(z))` through order `m`; `inner` must have
/// zero constant term (exact zero, enforced).
pub fn compose_series<T: SeriesScalar>(outer: &[T], inner: &[T], m: usize) -> Result<Vec<T>> {
    if outer.is_empty() {
        return Err(Error::InvalidParam("outer series is empty".into()));
    }
    if inner.first().is_some_and(|c| !c.is_zero()) {
        return Err(Error::InvalidParam(
            "inner series must vanish at the origin".into(),
        ));
    }
    let max_parts = m.min(outer.len() - 1);
    let bell = ordinary_bell_table(inner, m, max_parts);
    let mut h = vec![T::zero(); m + 1];
    h[0] = outer[0].clone();
    for (k, hk) in h.iter_mut().enumerate().skip(1) {
        let mut acc = T::zero();
        for (l, outer_l) in outer.iter().enumerate().take(max_parts + 1).skip(1) {
            if l > k {
                break;
            }
            acc += outer_l.clone() * bell[l][k].clone();
        }
        *hk = acc;
    }
    Ok(h)
}

/// Coefficients of `ln(g(z) / g(0))` through order `m` (constant term zero),
/// via `f_k = g_k/g_0 - (1/k) sum_{j=1..k-1} j f_j g_{k-j}/g_0`.
pub fn log_series_tail<T: SeriesScalar>(g: &[T], m: usize) -> Result<Vec<T>> {
    let g0 = g
        .first()
        .cloned()
        .ok_or_else(|| Error::InvalidParam("series is empty".into()))?;
    if g0.is_zero() {
        return Err(Error::InvalidParam(
            "series has zero constant term; logarithm undefined".into(),
        ));
    }
    let norm = |k: usize| -> T { g.get(k).map_or_else(T::zero, |c| c.clone() / g0.clone()) };
    let mut f = vec![T::zero(); m + 1];
    for k in 1..=m {
        let mut acc = norm(k);
        for j in 1..k {
            let term = small_int::<T>(j) * f[j].clone() * norm(k - j) / small_int::<T>(k);
            acc -= term;
        }
        f[k] = acc;
    }
    Ok(f)
}

/// Coefficients of `exp(f(z))` through order `m`; `f` must have zero constant
/// term. Inverse of [`log_series_tail`] on its image.
pub fn exp_series<T: SeriesScalar>(f: &[T], m: usize) -> Result<Vec<T>> {
    if f.first().is_some_and(|c| !c.is_zero()) {
        return Err(Error::InvalidParam(
            "exponent series must vanish at the origin".into(),
        ));
    }
    let fj = |j: usize| f.get(j).cloned().unwrap_or_else(T::zero);
    let mut e = vec![T::zero(); m + 1];
    e[0] = T::one();
    for k in 1..=m {
        let mut acc = T::zero();
        for j in 1..=k {
            acc += small_int::<T>(j) * fj(j) * e[k - j].clone();
        }
        e[k] = acc / small_int::<T>(k);
    }
    Ok(e)
}

/// Exponential partial Bell polynomial `B_{k,r}(x_1, ..., x_{k-r+1})`,
/// obtained from the ordinary table by `B_{k,r} = (k!/r!) Bhat_{k,r}` with
/// `y_j = x_j / j!`.
pub fn partial_bell_exponential<T: SeriesScalar>(k: usize, r: usize, x: &[T]) -> T {
    if r > k {
        return T::zero();
    }
    if k == 0 {
        return T::one();
    }
    let mut y = vec![T::zero(); k + 1];
    let mut factorial = T::one();
    for j in 1..=k {
        factorial *= small_int::<T>(j);
        y[j] = x.get(j - 1).cloned().unwrap_or_else(T::zero) / factorial.clone();
    }
    let table = ordinary_bell_table(&y, k, r);
    let mut scale = T::one(); // k! / r!
    for j in (r + 1)..=k {
        scale *= small_int::<T>(j);
    }
    scale * table[r][k].clone()
}

fn factorials_f64(m: usize) -> Result<Vec<f64>> {
    let mut f = vec![1.0f64; m + 1];
    for k in 1..=m {
        f[k] = f[k - 1] * k as f64;
        if !f[k].is_finite() {
            return Err(Error::InvalidParam(format!(
                "derivative order {k} overflows f64 factorials; use the coefficient-space API"
            )));
        }
    }
    Ok(f)
}

/// Derivatives of `G(phi(z))` at 0 from derivative lists of `G` and `phi`
/// (index k = k-th derivative); requires `phi(0) = 0`.
pub fn compose_derivatives(
    outer: &[Complex64],
    inner: &[Complex64],
    m: usize,
) -> Result<Vec<Complex64>> {
    if inner.first().is_none_or(|c| !c.is_zero()) {
        return Err(Error::InvalidParam(
            "inner function must vanish at the origin".into(),
        ));
    }
    let fact = factorials_f64(m.max(outer.len()).max(inner.len()))?;
    let outer_c: Vec<Complex64> = outer.iter().enumerate().map(|(k, d)| d / fact[k]).collect();
    let inner_c: Vec<Complex64> = inner.iter().enumerate().map(|(k, d)| d / fact[k]).collect();
    let h = compose_series(&outer_c, &inner_c, m)?;
    Ok(h.into_iter()
        .enumerate()
        .map(|(k, c)| c * fact[k])
        .collect())
}

/// Derivatives of `F = ln G` at 0 from derivatives of `G`; `F(0)` uses the
/// principal branch (real whenever `G(0)` is a positive real). Solves the
/// convolution `G^{(k)} = sum_{j=1..k} C(k-1, j-1) F^{(j)} G^{(k-j)}` for
/// `F^{(k)}`, in coefficient space.
pub fn log_derivatives(g: &[Complex64]) -> Result<Vec<Complex64>> {
    let g0 = *g
        .first()
        .ok_or_else(|| Error::InvalidParam("derivative list is empty".into()))?;
    if g0 == Complex64::ZERO {
        return Err(Error::InvalidParam("G(0) = 0; logarithm undefined".into()));
    }
    let m = g.len() - 1;
    let fact = factorials_f64(m)?;
    let g_c: Vec<Complex64> = g.iter().enumerate().map(|(k, d)| d / fact[k]).collect();
    let f_c = log_series_tail(&g_c, m)?;
    let mut out: Vec<Complex64> = f_c
        .into_iter()
        .enumerate()
        .map(|(k, c)| c * fact[k])
        .collect();
    out[0] = g0.ln();
    Ok(out)
}
