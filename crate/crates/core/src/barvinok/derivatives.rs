//! Derivatives of the interpolation polynomial at zero by subset sums.
//!
//! With `g(w) = chi(T_A(w))` (vertex tensors `J + w A`), the product rule
//! gives
//!
//! ```text
//! g^(k)(0) = k! * sum_{|S| = k} chi_S,
//! ```
//!
//! where `chi_S` is the contraction of the network with `A` substituted at
//! the vertices of `S` and `J` everywhere else. Because `J` is a product of
//! all-ones vectors, that value factorizes: every edge with no endpoint in
//! `S` contributes a plain factor `d`, boundary edges sum the corresponding
//! index of the adjacent `A` tensor, and only edges inside `S` need real
//! contraction. Disconnected parts of `S` factorize further, so each
//! connected component is contracted independently (after marginalizing its
//! boundary ports) by the swallowing engine.

use itertools::Itertools;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::TensorNetwork;
use crate::swallow::{
    greedy_order, plan_swallowing, swallow_contract_with_budget, DEFAULT_STATE_BUDGET,
};
use crate::tensor::Tensor;
use crate::util::NeumaierSum;

use super::InterpolationFamily;

/// Default cap on the number of subset contractions `sum_{k<=m} C(n,k)`.
pub const DEFAULT_SUBSET_BUDGET: u64 = 4_000_000;

/// Taylor coefficients `[w^k] g = g^(k)(0) / k!` for `k = 0..=m` (zeros
/// beyond order `n`), with default budgets.
pub fn g_taylor_coefficients(family: &InterpolationFamily, m: usize) -> Result<Vec<Complex64>> {
    g_taylor_coefficients_with_budget(family, m, DEFAULT_SUBSET_BUDGET, DEFAULT_STATE_BUDGET)
}

/// Derivative list `[g(0), g'(0), ..., g^(m)(0)]` with default budgets.
pub fn g_derivatives(family: &InterpolationFamily, m: usize) -> Result<Vec<Complex64>> {
    g_derivatives_with_budget(family, m, DEFAULT_SUBSET_BUDGET, DEFAULT_STATE_BUDGET)
}

/// Derivative list with explicit budgets: `subset_budget` caps the total
/// number of subset contractions, `state_budget` the swallowing state of
/// each one.
pub fn g_derivatives_with_budget(
    family: &InterpolationFamily,
    m: usize,
    subset_budget: u64,
    state_budget: u64,
) -> Result<Vec<Complex64>> {
    let mut out = g_taylor_coefficients_with_budget(family, m, subset_budget, state_budget)?;
    let mut factorial = 1.0f64;
    for (k, c) in out.iter_mut().enumerate().skip(1) {
        factorial *= k as f64;
        *c *= factorial;
    }
    Ok(out)
}

/// Coefficient-space core: `coeff[k] = sum_{|S| = k} chi_S`.
pub fn g_taylor_coefficients_with_budget(
    family: &InterpolationFamily,
    m: usize,
    subset_budget: u64,
    state_budget: u64,
) -> Result<Vec<Complex64>> {
    let n = family.num_vertices();
    let k_max = m.min(n);
    let needed = subset_count(n, k_max);
    if needed > subset_budget as u128 {
        return Err(Error::BudgetExceeded {
            task: format!("derivative subset enumeration (orders 0..={k_max} of {n} vertices)"),
            needed,
            budget: subset_budget as u128,
        });
    }

    let d = family.bond_dim() as f64;
    let mut coeffs = vec![Complex64::ZERO; m + 1];
    coeffs[0] = Complex64::new(d.powi(family.num_edges() as i32), 0.0);
    for (k, out) in coeffs.iter_mut().enumerate().take(k_max + 1).skip(1) {
        let subsets: Vec<Vec<usize>> = (0..n).combinations(k).collect();
        let values: Result<Vec<Complex64>> = subsets
            .par_iter()
            .map(|s| subset_value(family, s, state_budget))
            .collect();
        let values = values?;
        let mut re = NeumaierSum::new();
        let mut im = NeumaierSum::new();
        for v in values {
            re.add(v.re);
            im.add(v.im);
        }
        *out = Complex64::new(re.value(), im.value());
    }
    Ok(coeffs)
}

/// `sum_{k=0..=k_max} C(n, k)` in saturating u128 arithmetic.
fn subset_count(n: usize, k_max: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1; // C(n, 0)
    for k in 0..=k_max {
        total = total.saturating_add(binom);
        if k < k_max {
            binom = match binom
                .checked_mul((n - k) as u128)
                .map(|b| b / (k as u128 + 1))
            {
                Some(b) => b,
                None => return u128::MAX,
            };
        }
    }
    total
}

/// `chi_S`: the contraction value with `A` at the vertices of `s` (sorted)
/// and all-ones tensors elsewhere.
fn subset_value(family: &InterpolationFamily, s: &[usize], state_budget: u64) -> Result<Complex64> {
    let network = family.network();
    let d = network.bond_dim() as f64;
    let in_s = {
        let mut mask = vec![false; network.num_vertices()];
        for &v in s {
            mask[v] = true;
        }
        mask
    };

    // Edges fully outside S contribute a factor d each; union-find over
    // internal edges splits S into independently contractable components.
    let mut uf = UnionFind::new(s.len());
    let pos = |v: usize| s.binary_search(&v).expect("vertex in subset");
    let mut outside_edges = 0usize;
    for e in network.edges() {
        match (in_s[e.a.vertex], in_s[e.b.vertex]) {
            (true, true) => uf.union(pos(e.a.vertex), pos(e.b.vertex)),
            (false, false) => outside_edges += 1,
            _ => {}
        }
    }

    let mut value = Complex64::new(d.powi(outside_edges as i32), 0.0);
    for component in uf.groups() {
        let members: Vec<usize> = component.into_iter().map(|i| s[i]).collect();
        value *= component_value(family, &members, state_budget)?;
    }
    Ok(value)
}

/// Contracts one connected component of `S`: each member keeps its `A`
/// tensor with all boundary ports (edges leaving the component) summed out,
/// and the surviving internal edges are contracted by swallowing.
fn component_value(
    family: &InterpolationFamily,
    members: &[usize],
    state_budget: u64,
) -> Result<Complex64> {
    let network = family.network();
    let mut in_c = vec![false; network.num_vertices()];
    for &v in members {
        in_c[v] = true;
    }
    let index_of = |v: usize| members.binary_search(&v).expect("member vertex");

    // Per member, mark which ports face inside the component.
    let mut keep_ports: Vec<Vec<bool>> = members
        .iter()
        .map(|&v| vec![false; network.degree(v)])
        .collect();
    let mut internal = Vec::new();
    for e in network.edges() {
        if in_c[e.a.vertex] && in_c[e.b.vertex] {
            keep_ports[index_of(e.a.vertex)][e.a.port] = true;
            keep_ports[index_of(e.b.vertex)][e.b.port] = true;
            internal.push(*e);
        }
    }

    let mut tensors = Vec::with_capacity(members.len());
    let mut new_port: Vec<Vec<usize>> = Vec::with_capacity(members.len());
    for (i, &v) in members.iter().enumerate() {
        let keep = &keep_ports[i];
        tensors.push(sum_out_ports(family.perturbation(v), keep)?);
        let mut map = vec![usize::MAX; keep.len()];
        let mut next = 0;
        for (p, &k) in keep.iter().enumerate() {
            if k {
                map[p] = next;
                next += 1;
            }
        }
        new_port.push(map);
    }

    let edges = internal
        .iter()
        .map(|e| {
            let a = crate::network::PortRef::new(
                index_of(e.a.vertex),
                new_port[index_of(e.a.vertex)][e.a.port],
            );
            let b = crate::network::PortRef::new(
                index_of(e.b.vertex),
                new_port[index_of(e.b.vertex)][e.b.port],
            );
            crate::network::Edge::new(a, b)
        })
        .collect();
    let sub = TensorNetwork::new(network.bond_dim(), edges, tensors)?;
    let order = greedy_order(&sub);
    let plan = plan_swallowing(&sub, &order)?;
    swallow_contract_with_budget(&sub, &plan, state_budget)
}

/// Sums a tensor over every port not marked `keep`, preserving the relative
/// order of the kept ports.
fn sum_out_ports(t: &Tensor, keep: &[bool]) -> Result<Tensor> {
    debug_assert_eq!(keep.len(), t.rank());
    let d = t.bond_dim();
    let kept: Vec<usize> = (0..t.rank()).filter(|&p| keep[p]).collect();
    let mut out = Tensor::constant(d, kept.len(), Complex64::ZERO)?;
    let kept_strides = out.strides();
    let mut digits = vec![0usize; t.rank()];
    for &value in t.entries() {
        let mut reduced = 0usize;
        for (j, &p) in kept.iter().enumerate() {
            reduced += digits[p] * kept_strides[j];
        }
        out.entries_mut()[reduced] += value;
        // Advance the full-index odometer (last digit fastest).
        let mut pos = t.rank();
        while pos > 0 {
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < d {
                break;
            }
            digits[pos] = 0;
        }
    }
    Ok(out)
}

/// Minimal union-find with path halving.
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Member lists grouped by root, each ascending, ordered by smallest
    /// member.
    fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for x in 0..n {
            let r = self.find(x);
            by_root[r].push(x);
        }
        by_root.into_iter().filter(|g| !g.is_empty()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barvinok::make_family;
    use crate::gaussian::sample_shifted_ones_tn;
    use crate::network::contract_reference;

    fn random_family(l1: usize, l2: usize, d: usize, seed: u64) -> InterpolationFamily {
        let z_end = Complex64::new(0.7, 0.0);
        let tn = sample_shifted_ones_tn(l1, l2, d, z_end * 0.9, seed).unwrap();
        make_family(&tn, None, z_end).unwrap()
    }

    #[test]
    fn order_zero_counts_edge_labelings() {
        let family = random_family(2, 2, 3, 5);
        let g = g_derivatives(&family, 0).unwrap();
        assert_eq!(g[0], Complex64::new(3f64.powi(8), 0.0));
    }

    #[test]
    fn first_derivative_matches_entry_sums_and_finite_differences() {
        let family = random_family(2, 2, 2, 42);
        let g = g_derivatives(&family, 1).unwrap();
        // Closed form: each single vertex contributes its entry sum, every
        // one of the 2n - 4 untouched edges a factor d.
        let n = family.num_vertices();
        let d = family.bond_dim() as f64;
        let mut expect = Complex64::ZERO;
        for v in 0..n {
            expect += family.perturbation(v).entry_sum();
        }
        expect *= d.powi(2 * n as i32 - 4);
        assert!(
            (g[1] - expect).norm() <= 1e-10 * expect.norm(),
            "{} vs {expect}",
            g[1]
        );
        // Central finite difference of the exact contraction at w = 1e-4.
        let h = 1e-4;
        let plus =
            contract_reference(&family.perturbed_network(Complex64::new(h, 0.0)).unwrap()).unwrap();
        let minus = contract_reference(&family.perturbed_network(Complex64::new(-h, 0.0)).unwrap())
            .unwrap();
        let fd = (plus - minus) / (2.0 * h);
        assert!(
            (g[1] - fd).norm() <= 1e-5 * expect.norm().max(1.0),
            "{} vs fd {fd}",
            g[1]
        );
    }

    #[test]
    fn coefficients_match_vandermonde_fit() {
        // Fit chi(T_A(w)) on n+1 roots of unity scaled by 0.6: the inverse
        // DFT recovers the polynomial coefficients exactly.
        for (d, seed) in [(2usize, 3u64), (3, 4)] {
            let family = random_family(2, 2, d, seed);
            let n = family.num_vertices();
            let coeffs = g_taylor_coefficients(&family, n).unwrap();
            let nodes = n + 1;
            let radius = 0.6;
            let mut samples = Vec::with_capacity(nodes);
            for j in 0..nodes {
                let w =
                    Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / nodes as f64);
                samples.push(contract_reference(&family.perturbed_network(w).unwrap()).unwrap());
            }
            let max_coeff = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for k in 0..=n {
                let mut acc = Complex64::ZERO;
                for (j, s) in samples.iter().enumerate() {
                    let angle = -std::f64::consts::TAU * (j * k) as f64 / nodes as f64;
                    acc += s * Complex64::from_polar(1.0, angle);
                }
                let fitted = acc / nodes as f64 / radius.powi(k as i32);
                let tol = 1e-8 * max_coeff.max(1.0);
                assert!(
                    (coeffs[k] - fitted).norm() <= tol,
                    "d={d} k={k}: {} vs {fitted}",
                    coeffs[k]
                );
            }
        }
    }

    #[test]
    fn orders_beyond_vertex_count_vanish() {
        let family = random_family(2, 2, 2, 9);
        let g = g_derivatives(&family, 7).unwrap();
        assert_eq!(g.len(), 8);
        for k in 5..=7 {
            assert_eq!(g[k], Complex64::ZERO);
        }
    }

    #[test]
    fn disconnected_pair_factorizes() {
        // On the (2,2) torus, vertices 0 and 3 share no edge, so chi_{0,3}
        // must equal entry_sum(A_0) * entry_sum(A_3) (all 8 edges touch S).
        let family = random_family(2, 2, 2, 11);
        let direct = subset_value(&family, &[0, 3], DEFAULT_STATE_BUDGET).unwrap();
        let expect = family.perturbation(0).entry_sum() * family.perturbation(3).entry_sum();
        assert!((direct - expect).norm() <= 1e-12 * expect.norm().max(1.0));
    }

    #[test]
    fn subset_budget_is_enforced() {
        let family = random_family(2, 2, 2, 13);
        let err = g_derivatives_with_budget(&family, 3, 10, DEFAULT_STATE_BUDGET).unwrap_err();
        match err {
            Error::BudgetExceeded { needed, budget, .. } => {
                assert_eq!(needed, 1 + 4 + 6 + 4);
                assert_eq!(budget, 10);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn sum_out_all_ports_gives_entry_sum() {
        let family = random_family(2, 2, 3, 17);
        let t = family.perturbation(2);
        let reduced = sum_out_ports(t, &[false; 4]).unwrap();
        assert_eq!(reduced.rank(), 0);
        assert!((reduced.entries()[0] - t.entry_sum()).norm() < 1e-12);
    }
}
