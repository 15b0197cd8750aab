//! Closed tensor networks on multigraphs.
//!
//! A network is a multigraph (self-loops and parallel edges allowed) with a
//! tensor on every vertex. Each edge end is attached to a specific *port* of
//! its vertex, every port is attached to exactly one edge end, and all ports
//! share one bond dimension `d`. The contraction value is
//!
//! ```text
//! chi(T) = sum over edge colorings c in [d]^{|E|} of prod_v M[v]_c
//! ```
//!
//! where each vertex factor reads the colors of its incident edges through its
//! port list. [`contract_reference`] evaluates this sum literally and serves
//! as the ground-truth oracle for every other contraction routine.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{checked_len, increment_odometer, Tensor};
use crate::util::NeumaierSum;

/// One end of an edge: a (vertex, port) attachment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PortRef {
    pub vertex: usize,
    pub port: usize,
}

impl PortRef {
    pub fn new(vertex: usize, port: usize) -> Self {
        Self { vertex, port }
    }
}

/// An undirected edge between two port attachments (possibly on one vertex).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: PortRef,
    pub b: PortRef,
}

impl Edge {
    pub fn new(a: PortRef, b: PortRef) -> Self {
        Self { a, b }
    }

    pub fn is_self_loop(&self) -> bool {
        self.a.vertex == self.b.vertex
    }

    /// The two ends touching `vertex` (0, 1, or 2 entries).
    pub fn ends_at(&self, vertex: usize) -> impl Iterator<Item = PortRef> + '_ {
        [self.a, self.b]
            .into_iter()
            .filter(move |end| end.vertex == vertex)
    }
}

/// An assignment of a color in `[d]` to every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLabeling(pub Vec<usize>);

/// A closed tensor network over a shared bond dimension.
#[derive(Debug, Clone)]
pub struct TensorNetwork {
    bond_dim: usize,
    edges: Vec<Edge>,
    tensors: Vec<Tensor>,
    /// Per vertex, per port: the id of the edge attached there.
    port_edges: Vec<Vec<usize>>,
}

impl TensorNetwork {
    /// Validates and assembles a closed network.
    ///
    /// Every tensor's rank is its vertex degree; each (vertex, port) must be
    /// attached to exactly one edge end.
    pub fn new(bond_dim: usize, edges: Vec<Edge>, tensors: Vec<Tensor>) -> Result<Self> {
        if bond_dim < 2 {
            return Err(Error::InvalidParam(format!(
                "bond dimension must be at least 2, got {bond_dim}"
            )));
        }
        let num_vertices = tensors.len();
        for (v, t) in tensors.iter().enumerate() {
            if t.bond_dim() != bond_dim {
                return Err(Error::BondMismatch {
                    vertex: v,
                    got: t.bond_dim(),
                    expected: bond_dim,
                });
            }
        }
        let mut port_edges: Vec<Vec<Option<usize>>> =
            tensors.iter().map(|t| vec![None; t.rank()]).collect();
        for (e, edge) in edges.iter().enumerate() {
            for end in [edge.a, edge.b] {
                if end.vertex >= num_vertices {
                    return Err(Error::Schema {
                        location: format!("edges[{e}]"),
                        message: format!(
                            "vertex {} out of range (network has {num_vertices} vertices)",
                            end.vertex
                        ),
                    });
                }
                if end.port >= tensors[end.vertex].rank() {
                    return Err(Error::PortOutOfRange {
                        vertex: end.vertex,
                        port: end.port,
                        rank: tensors[end.vertex].rank(),
                    });
                }
                let slot = &mut port_edges[end.vertex][end.port];
                if slot.is_some() {
                    return Err(Error::DuplicatePort {
                        vertex: end.vertex,
                        port: end.port,
                    });
                }
                *slot = Some(e);
            }
        }
        let mut resolved = Vec::with_capacity(num_vertices);
        for (v, ports) in port_edges.into_iter().enumerate() {
            let mut row = Vec::with_capacity(ports.len());
            for (p, slot) in ports.into_iter().enumerate() {
                match slot {
                    Some(e) => row.push(e),
                    None => return Err(Error::DanglingPort { vertex: v, port: p }),
                }
            }
            resolved.push(row);
        }
        Ok(Self {
            bond_dim,
            edges,
            tensors,
            port_edges: resolved,
        })
    }

    pub fn bond_dim(&self) -> usize {
        self.bond_dim
    }

    pub fn num_vertices(&self) -> usize {
        self.tensors.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn tensor(&self, vertex: usize) -> &Tensor {
        &self.tensors[vertex]
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.tensors[vertex].rank()
    }

    /// Edge id attached at (vertex, port).
    pub fn edge_at(&self, vertex: usize, port: usize) -> usize {
        self.port_edges[vertex][port]
    }

    /// Edge ids incident to `vertex` in port order (self-loops appear twice).
    pub fn incident_edges(&self, vertex: usize) -> &[usize] {
        &self.port_edges[vertex]
    }

    /// Replaces the tensor on `vertex`, keeping rank and bond dimension fixed.
    pub fn set_tensor(&mut self, vertex: usize, tensor: Tensor) -> Result<()> {
        if vertex >= self.tensors.len() {
            return Err(Error::InvalidParam(format!("vertex {vertex} out of range")));
        }
        if tensor.bond_dim() != self.bond_dim {
            return Err(Error::BondMismatch {
                vertex,
                got: tensor.bond_dim(),
                expected: self.bond_dim,
            });
        }
        if tensor.rank() != self.tensors[vertex].rank() {
            return Err(Error::InvalidParam(format!(
                "vertex {vertex} has degree {}, replacement tensor has rank {}",
                self.tensors[vertex].rank(),
                tensor.rank()
            )));
        }
        self.tensors[vertex] = tensor;
        Ok(())
    }

    /// Applies `f` to every tensor entry; `f(vertex, flat_index, value)`.
    pub fn map_entries(&mut self, mut f: impl FnMut(usize, usize, Complex64) -> Complex64) {
        for (v, t) in self.tensors.iter_mut().enumerate() {
            for (k, e) in t.entries_mut().iter_mut().enumerate() {
                *e = f(v, k, *e);
            }
        }
    }

    /// The vertex factor for a full edge labeling.
    pub fn vertex_factor(&self, vertex: usize, labeling: &EdgeLabeling) -> Complex64 {
        let t = &self.tensors[vertex];
        let mut flat = 0usize;
        for &e in &self.port_edges[vertex] {
            flat = flat * self.bond_dim + labeling.0[e];
        }
        t.entries()[flat]
    }

    /// Number of labelings `d^{|E|}` as a u128, or an error on overflow.
    pub fn labeling_count(&self) -> Result<u128> {
        let mut count: u128 = 1;
        for _ in 0..self.edges.len() {
            count = count
                .checked_mul(self.bond_dim as u128)
                .ok_or_else(|| Error::InvalidParam("labeling count overflows u128".to_string()))?;
        }
        Ok(count)
    }
}

/// Default cap on the number of labelings [`contract_reference`] will visit.
pub const DEFAULT_LABELING_BUDGET: u64 = 100_000_000;

/// Ground-truth contraction by direct enumeration of all `d^{|E|}` edge
/// labelings, refusing to start past `budget` labelings.
///
/// The sum is split into fixed-size blocks of the labeling range; block
/// partial sums are computed independently (in parallel when available) and
/// then combined in block order with compensated summation, so the result is
/// bit-identical for any thread count.
pub fn contract_reference_with_budget(tn: &TensorNetwork, budget: u64) -> Result<Complex64> {
    let total = tn.labeling_count()?;
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            task: "reference contraction (edge-labeling enumeration)".into(),
            needed: total,
            budget: budget as u128,
        });
    }
    let total = total as u64;
    const BLOCK: u64 = 1 << 16;
    let num_blocks = total.div_ceil(BLOCK);
    let partials: Vec<Complex64> = (0..num_blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(total);
            labeling_block_sum(tn, lo, hi)
        })
        .collect();
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for p in partials {
        re.add(p.re);
        im.add(p.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// [`contract_reference_with_budget`] with the default budget.
pub fn contract_reference(tn: &TensorNetwork) -> Result<Complex64> {
    contract_reference_with_budget(tn, DEFAULT_LABELING_BUDGET)
}

/// Sequential sum over the labeling indices `[lo, hi)`.
///
/// Labeling index encodes edge colors base `d` with edge 0 the slowest digit,
/// i.e. the last edge varies fastest.
fn labeling_block_sum(tn: &TensorNetwork, lo: u64, hi: u64) -> Complex64 {
    let d = tn.bond_dim();
    let ne = tn.num_edges();
    let nv = tn.num_vertices();
    // Decode the starting labeling.
    let mut colors = vec![0usize; ne];
    let mut rem = lo;
    for e in (0..ne).rev() {
        colors[e] = (rem % d as u64) as usize;
        rem /= d as u64;
    }
    // Per-vertex strides of each incident port, and current flat indices.
    let strides: Vec<Vec<usize>> = (0..nv).map(|v| tn.tensor(v).strides()).collect();
    let mut flat = vec![0usize; nv];
    for v in 0..nv {
        for (p, &e) in tn.incident_edges(v).iter().enumerate() {
            flat[v] += colors[e] * strides[v][p];
        }
    }
    // Per-edge list of (vertex, stride) increments for a color bump.
    let edge_touch: Vec<Vec<(usize, usize)>> = (0..ne)
        .map(|e| {
            let edge = tn.edges()[e];
            let mut touch = Vec::new();
            for end in [edge.a, edge.b] {
                touch.push((end.vertex, strides[end.vertex][end.port]));
            }
            touch
        })
        .collect();

    let mut acc = Complex64::new(0.0, 0.0);
    let mut k = lo;
    loop {
        let mut prod = Complex64::new(1.0, 0.0);
        for v in 0..nv {
            prod *= tn.tensor(v).entries()[flat[v]];
        }
        acc += prod;
        k += 1;
        if k >= hi {
            break;
        }
        // Odometer step on the colors, updating incident vertex offsets.
        for e in (0..ne).rev() {
            if colors[e] + 1 < d {
                colors[e] += 1;
                for &(v, s) in &edge_touch[e] {
                    flat[v] += s;
                }
                break;
            }
            for &(v, s) in &edge_touch[e] {
                flat[v] -= colors[e] * s;
            }
            colors[e] = 0;
        }
    }
    acc
}

/// Enumerates all labelings (within budget) and calls `f(labeling, factor)`.
/// Used by tests to cross-check bookkeeping; not performance sensitive.
pub fn for_each_labeling(
    tn: &TensorNetwork,
    budget: u64,
    mut f: impl FnMut(&EdgeLabeling, Complex64),
) -> Result<()> {
    let total = tn.labeling_count()?;
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            task: "labeling enumeration".into(),
            needed: total,
            budget: budget as u128,
        });
    }
    let mut labeling = EdgeLabeling(vec![0usize; tn.num_edges()]);
    loop {
        let mut prod = Complex64::new(1.0, 0.0);
        for v in 0..tn.num_vertices() {
            prod *= tn.vertex_factor(v, &labeling);
        }
        f(&labeling, prod);
        if !increment_odometer(&mut labeling.0, tn.bond_dim()) {
            return Ok(());
        }
    }
}

/// Builds the `L1 x L2` periodic square lattice with all-ones tensors.
///
/// Vertices are numbered row-major: `(i, j) -> i * L2 + j`. Every vertex has
/// degree 4 with the port convention
///
/// * port 0: edge toward `(i-1, j)` (negative axis 1)
/// * port 1: edge toward `(i+1, j)` (positive axis 1)
/// * port 2: edge toward `(i, j-1)` (negative axis 2)
/// * port 3: edge toward `(i, j+1)` (positive axis 2)
///
/// so the edge from `(i, j)` to `(i+1, j)` uses port 1 at the first vertex and
/// port 0 at the second. Wraparound at length 2 produces honest parallel
/// edges. Side lengths below 2 are rejected as degenerate.
pub fn build_torus(l1: usize, l2: usize, bond_dim: usize) -> Result<TensorNetwork> {
    if l1 < 2 || l2 < 2 {
        return Err(Error::InvalidParam(format!(
            "torus sides must both be at least 2, got ({l1}, {l2})"
        )));
    }
    let n = l1
        .checked_mul(l2)
        .ok_or_else(|| Error::InvalidParam("torus size overflows usize".to_string()))?;
    let id = |i: usize, j: usize| i * l2 + j;
    let mut edges = Vec::with_capacity(2 * n);
    for i in 0..l1 {
        for j in 0..l2 {
            // Axis 1: (i, j) -> (i+1, j), ports 1 -> 0.
            edges.push(Edge::new(
                PortRef::new(id(i, j), 1),
                PortRef::new(id((i + 1) % l1, j), 0),
            ));
            // Axis 2: (i, j) -> (i, j+1), ports 3 -> 2.
            edges.push(Edge::new(
                PortRef::new(id(i, j), 3),
                PortRef::new(id(i, (j + 1) % l2), 2),
            ));
        }
    }
    let tensors = (0..n)
        .map(|_| Tensor::ones(bond_dim, 4))
        .collect::<Result<Vec<_>>>()?;
    TensorNetwork::new(bond_dim, edges, tensors)
}

/// Builds the open-boundary `L1 x L2` grid with all-ones tensors.
///
/// Vertex numbering is row-major as in [`build_torus`]. Ports at each vertex
/// enumerate its present neighbors in the fixed direction order
/// (up, down, left, right) compacted to `0..degree`.
pub fn build_grid(l1: usize, l2: usize, bond_dim: usize) -> Result<TensorNetwork> {
    if l1 < 1 || l2 < 1 || l1 * l2 < 2 {
        return Err(Error::InvalidParam(format!(
            "grid must contain at least 2 vertices, got ({l1}, {l2})"
        )));
    }
    let id = |i: usize, j: usize| i * l2 + j;
    let n = l1 * l2;
    // Port index of the edge toward (di, dj) at vertex (i, j).
    let port_of = |i: usize, j: usize, dir: usize| -> usize {
        // dir: 0 = up (i-1), 1 = down (i+1), 2 = left (j-1), 3 = right (j+1)
        let present = [i > 0, i + 1 < l1, j > 0, j + 1 < l2];
        present[..dir].iter().filter(|&&p| p).count()
    };
    let mut edges = Vec::new();
    for i in 0..l1 {
        for j in 0..l2 {
            if i + 1 < l1 {
                edges.push(Edge::new(
                    PortRef::new(id(i, j), port_of(i, j, 1)),
                    PortRef::new(id(i + 1, j), port_of(i + 1, j, 0)),
                ));
            }
            if j + 1 < l2 {
                edges.push(Edge::new(
                    PortRef::new(id(i, j), port_of(i, j, 3)),
                    PortRef::new(id(i, j + 1), port_of(i, j + 1, 2)),
                ));
            }
        }
    }
    let mut tensors = Vec::with_capacity(n);
    for i in 0..l1 {
        for j in 0..l2 {
            let degree = [i > 0, i + 1 < l1, j > 0, j + 1 < l2]
                .iter()
                .filter(|&&p| p)
                .count();
            tensors.push(Tensor::ones(bond_dim, degree)?);
        }
    }
    TensorNetwork::new(bond_dim, edges, tensors)
}

/// Builds a random `degree`-regular multigraph on `num_vertices` vertices by
/// the configuration model: every vertex exposes `degree` stubs, the stub
/// list is shuffled (deterministically in `seed`), and consecutive stubs are
/// paired into edges. Self-loops and parallel edges arise naturally and are
/// kept. Tensors start as all ones.
pub fn build_random_regular(
    num_vertices: usize,
    degree: usize,
    bond_dim: usize,
    seed: u64,
) -> Result<TensorNetwork> {
    if num_vertices < 1 || degree < 1 {
        return Err(Error::InvalidParam(format!(
            "need at least one vertex and positive degree, got ({num_vertices}, {degree})"
        )));
    }
    if !(num_vertices * degree).is_multiple_of(2) {
        return Err(Error::InvalidParam(format!(
            "{num_vertices} vertices of degree {degree} leave an unpaired stub"
        )));
    }
    checked_len(bond_dim, degree)?;
    let mut stubs: Vec<PortRef> = (0..num_vertices)
        .flat_map(|v| (0..degree).map(move |p| PortRef::new(v, p)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    stubs.shuffle(&mut rng);
    let edges = stubs
        .chunks_exact(2)
        .map(|pair| Edge::new(pair[0], pair[1]))
        .collect();
    let tensors = (0..num_vertices)
        .map(|_| Tensor::ones(bond_dim, degree))
        .collect::<Result<Vec<_>>>()?;
    TensorNetwork::new(bond_dim, edges, tensors)
}
