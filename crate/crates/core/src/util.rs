//! Small numeric helpers shared across modules.

/// Compensated (Neumaier) summation accumulator for f64.
///
/// Used wherever many terms of mixed magnitude are combined and the result
/// must be reproducible and accurate: block reductions, Taylor partial sums,
/// quadrature averages.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums a slice with compensation.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// `ln(2 cosh x)` without overflow for large |x|.
pub fn ln_2cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// `ln(2 |sinh x|)` without overflow; `-inf` at x = 0.
pub fn ln_2sinh_abs(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        f64::NEG_INFINITY
    } else {
        a + (-(-2.0 * a).exp()).ln_1p()
    }
}

/// Signed log-sum-exp: combines terms given as (sign, ln|term|) into
/// (sign, ln|sum|). Signs are -1.0, 0.0, or 1.0.
pub fn signed_log_sum_exp(terms: &[(f64, f64)]) -> (f64, f64) {
    let m = terms
        .iter()
        .filter(|(s, _)| *s != 0.0)
        .map(|&(_, l)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return (0.0, f64::NEG_INFINITY);
    }
    let mut acc = NeumaierSum::new();
    for &(s, l) in terms {
        if s != 0.0 {
            acc.add(s * (l - m).exp());
        }
    }
    let total = acc.value();
    if total == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else {
        (total.signum(), m + total.abs().ln())
    }
}

/// SplitMix64 finalizer: a bijective 64-bit mixer used to derive independent
/// stream seeds from (seed, index) pairs.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ln of the binomial coefficient C(n, k).
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    let mut acc = 0.0f64;
    for i in 0..k {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    acc
}

/// Binomial coefficient as f64 (exact for small arguments, monotone otherwise).
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}
