//! Additive Monte Carlo contraction of entrywise-nonnegative networks.
//!
//! Each swallowing step's matricization `M_i` (nonnegative, `d^{|L|} x
//! d^{|K|}`) is normalized by its maximum column sum and embedded into a
//! column-stochastic matrix with twice the rows: the first block holds
//! `M_i / ||M_i||_1`, and every column's residual mass sits on a single
//! designated slack row (the first row of the second block). A trial runs the
//! resulting Markov chain — sample a row index from the column picked by the
//! current coloring, thread untouched frontier edges through, record one
//! ancilla bit marking whether a slack row was hit — and succeeds iff every
//! ancilla bit is zero. The success probability is exactly
//! `chi(T) / Delta_1`, so with `K = ceil(10 / eps^2)` trials the estimator
//! `chi_hat = (#successes / K) * Delta_1` lands within `eps * Delta_1` of
//! `chi(T)` with probability at least 3/4 (Chebyshev).
//!
//! Where the residual mass sits inside the slack block is immaterial: a trial
//! only tests *whether* the sampled row fell outside the first block, so any
//! completion of the stochastic matrix yields byte-identical trial outcomes
//! for the same RNG stream.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::TensorNetwork;
use crate::swallow::{
    greedy_order, plan_swallowing, step_matricization, SwallowingPlan, DEFAULT_STATE_BUDGET,
};

/// Column-stochastic embedding of a nonnegative matrix.
///
/// For a nonnegative `m x n` matrix `M` with maximum column sum
/// `||M||_1 > 0`, the embedding is the `2m x n` column-stochastic matrix
/// whose first `m` rows equal `M / ||M||_1` and whose row `m` (the designated
/// slack row) carries each column's residual mass. Rows `m+1 .. 2m` are zero.
#[derive(Debug, Clone)]
pub struct StochasticEmbedding {
    source_rows: usize,
    cols: usize,
    one_norm: f64,
    /// Row-major `2 * source_rows x cols`.
    matrix: Vec<f64>,
}

impl StochasticEmbedding {
    /// Rows of the source matrix (`m`).
    pub fn source_rows(&self) -> usize {
        self.source_rows
    }

    /// Rows of the stochastic matrix (`2m`).
    pub fn num_rows(&self) -> usize {
        2 * self.source_rows
    }

    /// Columns (`n`).
    pub fn num_cols(&self) -> usize {
        self.cols
    }

    /// Maximum column sum of the source matrix.
    pub fn one_norm(&self) -> f64 {
        self.one_norm
    }

    /// Entry `(r, c)` of the stochastic matrix, `r < 2m`.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.cols + col]
    }

    /// Largest deviation of a column sum from 1.
    pub fn max_column_sum_deviation(&self) -> f64 {
        (0..self.cols)
            .map(|c| {
                let s: f64 = (0..self.num_rows()).map(|r| self.entry(r, c)).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Embeds a nonnegative `rows x cols` matrix (row-major) into a
/// column-stochastic `2*rows x cols` matrix whose first block is
/// `M / ||M||_1`.
///
/// Errors on an all-zero matrix and on any negative entry. Columns that sum
/// to zero map deterministically to the slack row.
pub fn stochastic_embed(entries: &[f64], rows: usize, cols: usize) -> Result<StochasticEmbedding> {
    if rows == 0 || cols == 0 || entries.len() != rows * cols {
        return Err(Error::InvalidParam(format!(
            "matrix shape {rows}x{cols} does not match {} entries",
            entries.len()
        )));
    }
    if let Some(e) = entries.iter().find(|e| !e.is_finite() || **e < 0.0) {
        return Err(Error::InvalidParam(format!(
            "stochastic embedding requires finite nonnegative entries, found {e}"
        )));
    }
    let mut one_norm = 0.0f64;
    for c in 0..cols {
        let col_sum: f64 = (0..rows).map(|r| entries[r * cols + c]).sum();
        one_norm = one_norm.max(col_sum);
    }
    if one_norm == 0.0 {
        return Err(Error::InvalidParam(
            "cannot embed the zero matrix".to_string(),
        ));
    }
    let mut matrix = vec![0.0f64; 2 * rows * cols];
    for c in 0..cols {
        let mut col_sum = 0.0f64;
        for r in 0..rows {
            let p = entries[r * cols + c] / one_norm;
            matrix[r * cols + c] = p;
            col_sum += p;
        }
        // All residual mass on the first slack row.
        matrix[rows * cols + c] = (1.0 - col_sum).max(0.0);
    }
    Ok(StochasticEmbedding {
        source_rows: rows,
        cols,
        one_norm,
        matrix,
    })
}

/// Per-step sampling table: inverse-CDF prefix sums of the first block of the
/// step's stochastic embedding, stored column-major for contiguous lookup.
#[derive(Debug, Clone)]
struct StepSampler {
    block_rows: usize,
    cols: usize,
    /// `cdf[c * block_rows + r]` = sum of first-block probabilities of rows
    /// `0..=r` in column `c`; the slack row owns the remaining mass.
    cdf: Vec<f64>,
}

impl StepSampler {
    fn from_embedding(emb: &StochasticEmbedding) -> Self {
        let block_rows = emb.source_rows();
        let cols = emb.num_cols();
        let mut cdf = vec![0.0f64; block_rows * cols];
        for c in 0..cols {
            let mut acc = 0.0f64;
            for r in 0..block_rows {
                acc += emb.entry(r, c);
                cdf[c * block_rows + r] = acc;
            }
        }
        StepSampler {
            block_rows,
            cols,
            cdf,
        }
    }

    /// Samples a first-block row for `col`, or `None` when the slack row is
    /// hit (ancilla bit 1).
    fn sample(&self, col: usize, u: f64) -> Option<usize> {
        let slice = &self.cdf[col * self.block_rows..(col + 1) * self.block_rows];
        let row = slice.partition_point(|&p| p <= u);
        if row < self.block_rows {
            Some(row)
        } else {
            None
        }
    }

    /// Probability of first-block row `r` in column `c`.
    fn probability(&self, row: usize, col: usize) -> f64 {
        let base = col * self.block_rows;
        let lo = if row == 0 {
            0.0
        } else {
            self.cdf[base + row - 1]
        };
        (self.cdf[base + row] - lo).max(0.0)
    }
}

/// State of one random-walk trial: how many steps have been absorbed, the
/// coloring of the current frontier edges, and the ancilla bits drawn so far.
#[derive(Debug, Clone)]
pub struct WalkState {
    /// Steps completed.
    pub step: usize,
    /// `colors[e]` is the value carried by edge `e`, `usize::MAX` while the
    /// edge is not on the frontier.
    pub colors: Vec<usize>,
    /// One bit per completed step; `true` marks a slack-row (failure) draw.
    pub ancilla: Vec<bool>,
}

impl WalkState {
    fn new(num_edges: usize, num_steps: usize) -> Self {
        WalkState {
            step: 0,
            colors: vec![usize::MAX; num_edges],
            ancilla: Vec::with_capacity(num_steps),
        }
    }

    /// True iff no slack row has been hit.
    pub fn clean(&self) -> bool {
        self.ancilla.iter().all(|w| !w)
    }
}

/// Precomputed trial machinery for one network and one swallowing order.
#[derive(Debug, Clone)]
pub struct TrialPlan {
    plan: SwallowingPlan,
    bond_dim: usize,
    num_edges: usize,
    delta1: f64,
    samplers: Vec<StepSampler>,
    zero_step: Option<usize>,
}

impl TrialPlan {
    /// The underlying swallowing schedule.
    pub fn plan(&self) -> &SwallowingPlan {
        &self.plan
    }

    /// Product of per-step maximum column sums.
    pub fn delta1(&self) -> f64 {
        self.delta1
    }

    /// Index of the first step whose matricization is identically zero, if
    /// any; such a network contracts to exactly zero.
    pub fn zero_step(&self) -> Option<usize> {
        self.zero_step
    }
}

fn real_nonnegative_entries(step_index: usize, entries: &[Complex64]) -> Result<Vec<f64>> {
    entries
        .iter()
        .map(|e| {
            if e.im != 0.0 || !e.re.is_finite() || e.re < 0.0 {
                Err(Error::InvalidParam(format!(
                    "step {step_index} matricization has entry {e} outside the \
                     nonnegative reals"
                )))
            } else {
                Ok(e.re)
            }
        })
        .collect()
}

/// Builds the sampling tables for `tn` along `order` (greedy order when
/// `None`).
///
/// Errors if any tensor entry is negative or has a nonzero imaginary part.
/// An all-zero step matricization is not an error here: it is recorded as
/// [`TrialPlan::zero_step`], certifying `chi(T) = 0`.
pub fn plan_trials(tn: &TensorNetwork, order: Option<&[usize]>) -> Result<TrialPlan> {
    let order_vec;
    let order = match order {
        Some(o) => o,
        None => {
            order_vec = greedy_order(tn);
            &order_vec
        }
    };
    let plan = plan_swallowing(tn, order)?;
    let mut samplers = Vec::with_capacity(plan.steps.len());
    let mut delta1 = 1.0f64;
    let mut zero_step = None;
    for (i, step) in plan.steps.iter().enumerate() {
        let (m, rows, cols) = step_matricization(tn, step)?;
        let entries = real_nonnegative_entries(i, &m)?;
        let nonzero = entries.iter().any(|&e| e > 0.0);
        if !nonzero {
            if zero_step.is_none() {
                zero_step = Some(i);
            }
            delta1 = 0.0;
            continue;
        }
        let emb = stochastic_embed(&entries, rows, cols)?;
        delta1 *= emb.one_norm();
        if zero_step.is_none() {
            samplers.push(StepSampler::from_embedding(&emb));
        }
    }
    Ok(TrialPlan {
        plan,
        bond_dim: tn.bond_dim(),
        num_edges: tn.num_edges(),
        delta1,
        samplers,
        zero_step,
    })
}

/// Runs one random-walk trial; `true` means every ancilla bit was zero.
///
/// The success probability equals `chi(T) / Delta_1` exactly. Errors if the
/// plan certified `chi(T) = 0` (no stochastic embedding exists there);
/// callers should short-circuit on [`TrialPlan::zero_step`] instead.
pub fn run_trial(plan: &TrialPlan, rng: &mut impl Rng) -> Result<bool> {
    if let Some(step) = plan.zero_step {
        return Err(Error::InvalidParam(format!(
            "step {step} matricization is zero, so chi = 0; no trial to run"
        )));
    }
    let d = plan.bond_dim;
    let mut state = WalkState::new(plan.num_edges, plan.plan.steps.len());
    for (step, sampler) in plan.plan.steps.iter().zip(&plan.samplers) {
        let mut col = 0usize;
        for &e in &step.k_edges {
            col = col * d + state.colors[e];
        }
        debug_assert!(col < sampler.cols);
        let u: f64 = rng.gen();
        match sampler.sample(col, u) {
            None => {
                state.ancilla.push(true);
                return Ok(false);
            }
            Some(row) => {
                state.ancilla.push(false);
                let mut rem = row;
                for &e in step.l_edges.iter().rev() {
                    state.colors[e] = rem % d;
                    rem /= d;
                }
            }
        }
        state.step += 1;
    }
    Ok(state.clean())
}

/// Monte Carlo contraction estimate.
#[derive(Debug, Clone)]
pub struct McEstimate {
    /// `(successes / num_trials) * delta1`.
    pub chi_hat: f64,
    /// Product of per-step maximum column sums for the plan used.
    pub delta1: f64,
    /// Number of trials, `ceil(10 / eps^2)`.
    pub num_trials: u64,
    /// Trials whose ancilla string was all zeros.
    pub successes: u64,
    /// Seed the trial streams were derived from.
    pub seed: u64,
    /// True when the estimate is exact because some step matricization was
    /// identically zero (then `chi = 0` with certainty, and no trials ran).
    pub certain: bool,
}

/// Estimates `chi(T)` of a nonnegative network to additive error
/// `eps * Delta_1` with probability at least 3/4, using
/// `K = ceil(10 / eps^2)` independent trials.
///
/// Trial `k` draws from stream `k` of a ChaCha generator seeded with `seed`,
/// so results are byte-identical across thread counts.
pub fn mc_estimate(plan: &TrialPlan, eps: f64, seed: u64) -> Result<McEstimate> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "eps must lie in (0, 1], got {eps}"
        )));
    }
    let num_trials = (10.0 / (eps * eps)).ceil() as u64;
    if plan.zero_step.is_some() {
        return Ok(McEstimate {
            chi_hat: 0.0,
            delta1: plan.delta1,
            num_trials,
            successes: 0,
            seed,
            certain: true,
        });
    }
    let successes: u64 = (0..num_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            match run_trial(plan, &mut rng) {
                Ok(true) => 1u64,
                _ => 0u64,
            }
        })
        .sum();
    Ok(McEstimate {
        chi_hat: successes as f64 / num_trials as f64 * plan.delta1,
        delta1: plan.delta1,
        num_trials,
        successes,
        seed,
        certain: false,
    })
}

/// Exact success probability of one trial, by dense propagation of the
/// stochastic update over frontier colorings.
///
/// This walks the same per-column tables the sampler uses, so it checks the
/// trial machinery itself; for any nonnegative network it must equal
/// `chi(T) / Delta_1`.
pub fn exact_success_probability(plan: &TrialPlan) -> Result<f64> {
    if plan.zero_step.is_some() {
        return Err(Error::InvalidParam(
            "zero matricization: success probability undefined (chi = 0)".to_string(),
        ));
    }
    let d = plan.bond_dim;
    if plan.plan.peak_state_entries(d) > DEFAULT_STATE_BUDGET as u128 {
        return Err(Error::BudgetExceeded {
            task: "dense propagation of trial distribution".to_string(),
            needed: plan.plan.peak_state_entries(d),
            budget: DEFAULT_STATE_BUDGET as u128,
        });
    }
    let mut probs = vec![1.0f64];
    for (step, sampler) in plan.plan.steps.iter().zip(&plan.samplers) {
        let fb = &step.frontier_before;
        let fa = &step.frontier_after;
        let pos_before = |e: usize| fb.binary_search(&e).expect("edge on frontier");
        let pos_after = |e: usize| fa.binary_search(&e).expect("edge on frontier");
        let k_pos: Vec<usize> = step.k_edges.iter().map(|&e| pos_before(e)).collect();
        let j_edges: Vec<usize> = fb
            .iter()
            .copied()
            .filter(|e| !step.k_edges.contains(e))
            .collect();
        let j_pos_b: Vec<usize> = j_edges.iter().map(|&e| pos_before(e)).collect();
        let j_pos_a: Vec<usize> = j_edges.iter().map(|&e| pos_after(e)).collect();
        let l_pos_a: Vec<usize> = step.l_edges.iter().map(|&e| pos_after(e)).collect();
        let mut next = vec![0.0f64; d.pow(fa.len() as u32)];
        for (x, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            // Digits of x over frontier_before, first edge slowest.
            let mut digits = vec![0usize; fb.len()];
            let mut rem = x;
            for t in (0..fb.len()).rev() {
                digits[t] = rem % d;
                rem /= d;
            }
            let mut col = 0usize;
            for &t in &k_pos {
                col = col * d + digits[t];
            }
            for row in 0..sampler.block_rows {
                let q = sampler.probability(row, col);
                if q == 0.0 {
                    continue;
                }
                let mut out = vec![0usize; fa.len()];
                for (&s, &t) in j_pos_a.iter().zip(&j_pos_b) {
                    out[s] = digits[t];
                }
                let mut rrem = row;
                for &s in l_pos_a.iter().rev() {
                    out[s] = rrem % d;
                    rrem /= d;
                }
                let mut y = 0usize;
                for &v in &out {
                    y = y * d + v;
                }
                next[y] += p * q;
            }
        }
        probs = next;
    }
    debug_assert_eq!(probs.len(), 1);
    Ok(probs[0])
}
