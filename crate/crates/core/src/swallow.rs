//! Exact contraction by vertex swallowing.
//!
//! Vertices are absorbed one at a time in a chosen order. After swallowing
//! the first `i` vertices, the partial contraction is a dense amplitude
//! vector indexed by the colorings of the *frontier* — the edges joining the
//! swallowed set to the rest — with frontier edges listed in ascending edge
//! id and the first edge as the slowest (row-major) index.
//!
//! Swallowing vertex `v` splits its incident edges into
//!
//! * `K`: edges into the already-swallowed set (consumed),
//! * `L`: edges toward not-yet-swallowed vertices (introduced),
//! * self-loops at `v`, traced out inside the vertex tensor first.
//!
//! The vertex tensor, with loops traced, is matricized into a
//! `d^{|L|} x d^{|K|}` matrix (rows run over `L` ports in ascending port
//! order, columns over `K` ports in ascending port order). Edges of the
//! frontier not incident to `v` pass through unchanged; the update is the
//! identity on them tensored with the matricization, applied without ever
//! materializing that product.
//!
//! The per-step matricizations also carry the norm certificates: `Delta_1` is
//! the product of maximum-absolute-column-sum norms, `Delta_2` the product of
//! largest singular values, and `|chi| <= Delta_2` always, while for
//! entrywise-nonnegative networks `chi <= Delta_1`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::TensorNetwork;
use crate::tensor::{checked_len, contract_pairs, increment_odometer, Tensor};

/// One step of a swallowing schedule.
#[derive(Debug, Clone)]
pub struct SwallowStep {
    pub vertex: usize,
    /// Self-loop port pairs at `vertex`, traced before matricization.
    pub loop_pairs: Vec<(usize, usize)>,
    /// Ports of `vertex` (ascending) whose edges run into the swallowed set.
    pub k_ports: Vec<usize>,
    /// Edge ids attached at `k_ports`, aligned with it.
    pub k_edges: Vec<usize>,
    /// Ports of `vertex` (ascending) whose edges are newly introduced.
    pub l_ports: Vec<usize>,
    /// Edge ids attached at `l_ports`, aligned with it.
    pub l_edges: Vec<usize>,
    /// Frontier (sorted edge ids) before this step.
    pub frontier_before: Vec<usize>,
    /// Frontier (sorted edge ids) after this step.
    pub frontier_after: Vec<usize>,
}

/// A validated swallowing schedule for a specific network topology.
#[derive(Debug, Clone)]
pub struct SwallowingPlan {
    pub order: Vec<usize>,
    pub steps: Vec<SwallowStep>,
    /// Largest frontier size `max_i |F_i|`.
    pub peak_cut: usize,
}

impl SwallowingPlan {
    /// Sizes `|K_i|` per step.
    pub fn k_sizes(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.k_ports.len()).collect()
    }

    /// Entries of the largest amplitude state, `d^{peak_cut}`.
    pub fn peak_state_entries(&self, bond_dim: usize) -> u128 {
        (bond_dim as u128).pow(self.peak_cut as u32)
    }

    /// Rough multiply count: `sum_i d^{|F_{i+1}| + |K_i|}`.
    pub fn flop_estimate(&self, bond_dim: usize) -> u128 {
        let d = bond_dim as u128;
        self.steps
            .iter()
            .map(|s| d.saturating_pow((s.frontier_after.len() + s.k_ports.len()) as u32))
            .fold(0u128, u128::saturating_add)
    }
}

/// Builds the swallowing schedule for `order`, which must visit every vertex
/// exactly once.
pub fn plan_swallowing(tn: &TensorNetwork, order: &[usize]) -> Result<SwallowingPlan> {
    let n = tn.num_vertices();
    if order.len() != n {
        return Err(Error::InvalidParam(format!(
            "order visits {} vertices, network has {n}",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n {
            return Err(Error::InvalidParam(format!(
                "order names vertex {v} out of range"
            )));
        }
        if seen[v] {
            return Err(Error::InvalidParam(format!(
                "order visits vertex {v} twice"
            )));
        }
        seen[v] = true;
    }

    let mut swallowed = vec![false; n];
    let mut frontier: Vec<usize> = Vec::new(); // sorted edge ids
    let mut steps = Vec::with_capacity(n);
    let mut peak_cut = 0usize;
    for &v in order {
        let frontier_before = frontier.clone();
        let mut loop_pairs = Vec::new();
        let mut k_ports = Vec::new();
        let mut k_edges = Vec::new();
        let mut l_ports = Vec::new();
        let mut l_edges = Vec::new();
        for (p, &e) in tn.incident_edges(v).iter().enumerate() {
            let edge = tn.edges()[e];
            if edge.is_self_loop() {
                // Record each loop once, at its lower port.
                if edge.a.port.min(edge.b.port) == p {
                    loop_pairs.push((edge.a.port.min(edge.b.port), edge.a.port.max(edge.b.port)));
                }
                continue;
            }
            let other = if edge.a.vertex == v {
                edge.b.vertex
            } else {
                edge.a.vertex
            };
            if swallowed[other] {
                k_ports.push(p);
                k_edges.push(e);
            } else {
                l_ports.push(p);
                l_edges.push(e);
            }
        }
        // Frontier update: drop K, insert L.
        for &e in &k_edges {
            match frontier.binary_search(&e) {
                Ok(pos) => {
                    frontier.remove(pos);
                }
                Err(_) => {
                    return Err(Error::InvalidParam(format!(
                        "edge {e} consumed at vertex {v} but absent from frontier"
                    )))
                }
            }
        }
        for &e in &l_edges {
            match frontier.binary_search(&e) {
                Ok(_) => {
                    return Err(Error::InvalidParam(format!(
                        "edge {e} introduced twice (vertex {v})"
                    )))
                }
                Err(pos) => frontier.insert(pos, e),
            }
        }
        peak_cut = peak_cut.max(frontier.len());
        steps.push(SwallowStep {
            vertex: v,
            loop_pairs,
            k_ports,
            k_edges,
            l_ports,
            l_edges,
            frontier_before,
            frontier_after: frontier.clone(),
        });
        swallowed[v] = true;
    }
    if !frontier.is_empty() {
        return Err(Error::InvalidParam(format!(
            "schedule left {} edges unconsumed",
            frontier.len()
        )));
    }
    Ok(SwallowingPlan {
        order: order.to_vec(),
        steps,
        peak_cut,
    })
}

/// Greedy swallowing order: repeatedly take the vertex that minimizes the
/// next frontier size (ties broken toward the smallest vertex id).
/// Deterministic; usually close to the best sweep order on lattices.
pub fn greedy_order(tn: &TensorNetwork) -> Vec<usize> {
    let n = tn.num_vertices();
    let mut swallowed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut frontier_size = 0isize;
    for _ in 0..n {
        let mut best: Option<(isize, usize)> = None;
        for v in 0..n {
            if swallowed[v] {
                continue;
            }
            let mut delta = 0isize;
            for &e in tn.incident_edges(v) {
                let edge = tn.edges()[e];
                if edge.is_self_loop() {
                    continue;
                }
                let other = if edge.a.vertex == v {
                    edge.b.vertex
                } else {
                    edge.a.vertex
                };
                if swallowed[other] {
                    delta -= 1;
                } else {
                    delta += 1;
                }
            }
            let next = frontier_size + delta;
            if best.is_none_or(|(b, _)| next < b) {
                best = Some((next, v));
            }
        }
        let (next, v) = best.expect("unswallowed vertex exists");
        swallowed[v] = true;
        order.push(v);
        frontier_size = next;
    }
    order
}

/// The matricized vertex operator of one step: a dense `rows x cols` matrix
/// with `rows = d^{|L|}`, `cols = d^{|K|}` (self-loops already traced out).
pub(crate) fn step_matricization(
    tn: &TensorNetwork,
    step: &SwallowStep,
) -> Result<(Vec<Complex64>, usize, usize)> {
    let d = tn.bond_dim();
    let mut t: Tensor = tn.tensor(step.vertex).clone();
    let mut k_pos = step.k_ports.clone();
    let mut l_pos = step.l_ports.clone();
    if !step.loop_pairs.is_empty() {
        t = contract_pairs(&t, &step.loop_pairs)?;
        // Remap original port numbers to positions among surviving ports.
        let mut in_loop = vec![false; tn.tensor(step.vertex).rank()];
        for &(a, b) in &step.loop_pairs {
            in_loop[a] = true;
            in_loop[b] = true;
        }
        let mut new_pos = vec![usize::MAX; in_loop.len()];
        let mut next = 0usize;
        for (p, &dropped) in in_loop.iter().enumerate() {
            if !dropped {
                new_pos[p] = next;
                next += 1;
            }
        }
        for p in k_pos.iter_mut().chain(l_pos.iter_mut()) {
            *p = new_pos[*p];
        }
    }
    let rank = t.rank();
    debug_assert_eq!(rank, k_pos.len() + l_pos.len());
    let rows = checked_len(d, l_pos.len())?;
    let cols = checked_len(d, k_pos.len())?;
    let strides = t.strides();
    let mut m = vec![Complex64::new(0.0, 0.0); rows * cols];
    let mut index = vec![0usize; rank];
    for &value in t.entries() {
        let mut row = 0usize;
        for &p in &l_pos {
            row = row * d + index[p];
        }
        let mut col = 0usize;
        for &p in &k_pos {
            col = col * d + index[p];
        }
        m[row * cols + col] = value;
        increment_odometer(&mut index, d);
    }
    debug_assert_eq!(strides.len(), rank);
    Ok((m, rows, cols))
}

/// Offsets of every digit string over `edges` (first edge slowest) inside a
/// state keyed by `frontier` (sorted edge ids, first slowest).
fn offsets_in(frontier: &[usize], edges: &[usize], d: usize) -> Vec<usize> {
    let m = frontier.len();
    let stride_of = |e: usize| -> usize {
        let pos = frontier.binary_search(&e).expect("edge in frontier");
        d.pow((m - 1 - pos) as u32)
    };
    let strides: Vec<usize> = edges.iter().map(|&e| stride_of(e)).collect();
    let total = d.pow(edges.len() as u32);
    let mut offsets = Vec::with_capacity(total);
    let mut digits = vec![0usize; edges.len()];
    loop {
        let off: usize = digits.iter().zip(&strides).map(|(&v, &s)| v * s).sum();
        offsets.push(off);
        if !increment_odometer(&mut digits, d) {
            break;
        }
    }
    offsets
}

/// Default cap on amplitude-state entries (and matricization entries).
pub const DEFAULT_STATE_BUDGET: u64 = 100_000_000;

/// Contracts the network exactly along `plan`.
///
/// Work and memory scale with `d^{peak_cut}`; the contraction refuses to start
/// if the largest state or matricization would exceed `budget` entries.
pub fn swallow_contract_with_budget(
    tn: &TensorNetwork,
    plan: &SwallowingPlan,
    budget: u64,
) -> Result<Complex64> {
    let d = tn.bond_dim();
    let peak = plan.peak_state_entries(d);
    if peak > budget as u128 {
        return Err(Error::BudgetExceeded {
            task: "swallowing amplitude state".into(),
            needed: peak,
            budget: budget as u128,
        });
    }
    for step in &plan.steps {
        let rank = tn.tensor(step.vertex).rank() as u32;
        let t_entries = (d as u128).pow(rank);
        if t_entries > budget as u128 {
            return Err(Error::BudgetExceeded {
                task: format!("matricization of vertex {}", step.vertex),
                needed: t_entries,
                budget: budget as u128,
            });
        }
    }

    let mut state = vec![Complex64::new(1.0, 0.0)];
    for step in &plan.steps {
        let (m, _rows, cols) = step_matricization(tn, step)?;
        // J = frontier edges untouched by this vertex.
        let j_edges: Vec<usize> = step
            .frontier_before
            .iter()
            .copied()
            .filter(|e| !step.k_edges.contains(e))
            .collect();
        let off_j_old = offsets_in(&step.frontier_before, &j_edges, d);
        let off_j_new = offsets_in(&step.frontier_after, &j_edges, d);
        let off_k_old = offsets_in(&step.frontier_before, &step.k_edges, d);
        let off_l_new = offsets_in(&step.frontier_after, &step.l_edges, d);

        let new_len = checked_len(d, step.frontier_after.len())?;
        let mut next = vec![Complex64::new(0.0, 0.0); new_len];
        for (j_old, j_new) in off_j_old.iter().zip(&off_j_new) {
            for (l, l_new) in off_l_new.iter().enumerate() {
                let row = &m[l * cols..(l + 1) * cols];
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, k_old) in off_k_old.iter().enumerate() {
                    acc += row[k] * state[j_old + k_old];
                }
                next[j_new + l_new] = acc;
            }
        }
        state = next;
    }
    debug_assert_eq!(state.len(), 1);
    Ok(state[0])
}

/// [`swallow_contract_with_budget`] with the default budget.
pub fn swallow_contract(tn: &TensorNetwork, plan: &SwallowingPlan) -> Result<Complex64> {
    swallow_contract_with_budget(tn, plan, DEFAULT_STATE_BUDGET)
}

/// Convenience: plan along `order` (or the greedy order) and contract.
pub fn contract_exact(tn: &TensorNetwork, order: Option<&[usize]>) -> Result<Complex64> {
    let order_vec;
    let order = match order {
        Some(o) => o,
        None => {
            order_vec = greedy_order(tn);
            &order_vec
        }
    };
    let plan = plan_swallowing(tn, order)?;
    swallow_contract(tn, &plan)
}

/// Norm certificates of a swallowing schedule.
#[derive(Debug, Clone)]
pub struct DeltaNorms {
    /// Product of per-step maximum absolute column sums.
    pub delta1: f64,
    /// Product of per-step largest singular values.
    pub delta2: f64,
    pub per_step_1: Vec<f64>,
    pub per_step_2: Vec<f64>,
}

/// Computes the per-step matricization norms and their products.
pub fn delta_norms(tn: &TensorNetwork, plan: &SwallowingPlan) -> Result<DeltaNorms> {
    let mut per_step_1 = Vec::with_capacity(plan.steps.len());
    let mut per_step_2 = Vec::with_capacity(plan.steps.len());
    for step in &plan.steps {
        let (m, rows, cols) = step_matricization(tn, step)?;
        let mut one_norm = 0.0f64;
        for c in 0..cols {
            let col_sum: f64 = (0..rows).map(|r| m[r * cols + c].norm()).sum();
            one_norm = one_norm.max(col_sum);
        }
        per_step_1.push(one_norm);
        let mat = DMatrix::from_fn(rows, cols, |r, c| m[r * cols + c]);
        let sv = mat.singular_values();
        per_step_2.push(sv.iter().fold(0.0f64, |a, &b| a.max(b)));
    }
    Ok(DeltaNorms {
        delta1: per_step_1.iter().product(),
        delta2: per_step_2.iter().product(),
        per_step_1,
        per_step_2,
    })
}
