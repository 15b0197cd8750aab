//! Dense complex tensors with a fixed bond dimension on every port.
//!
//! Entries are stored row-major over the port list: port 0 is the slowest
//! index, the last port the fastest. All ports share one bond dimension `d`,
//! so a rank-`r` tensor holds `d^r` entries.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Checked `d^r` for shape arithmetic; errors instead of overflowing.
pub(crate) fn checked_len(bond_dim: usize, rank: usize) -> Result<usize> {
    let mut len: usize = 1;
    for _ in 0..rank {
        len = len.checked_mul(bond_dim).ok_or_else(|| {
            Error::InvalidParam(format!("tensor shape {bond_dim}^{rank} overflows usize"))
        })?;
    }
    Ok(len)
}

/// A dense tensor over `[d]^rank` with complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    bond_dim: usize,
    rank: usize,
    entries: Vec<Complex64>,
}

impl Tensor {
    /// Builds a tensor from a row-major entry buffer of length `bond_dim^rank`.
    pub fn new(bond_dim: usize, rank: usize, entries: Vec<Complex64>) -> Result<Self> {
        if bond_dim < 2 {
            return Err(Error::InvalidParam(format!(
                "bond dimension must be at least 2, got {bond_dim}"
            )));
        }
        let expected = checked_len(bond_dim, rank)?;
        if entries.len() != expected {
            return Err(Error::EntryLength {
                got: entries.len(),
                expected,
                bond_dim,
                rank,
            });
        }
        Ok(Self {
            bond_dim,
            rank,
            entries,
        })
    }

    /// Tensor with every entry equal to `value`.
    pub fn constant(bond_dim: usize, rank: usize, value: Complex64) -> Result<Self> {
        let len = checked_len(bond_dim, rank)?;
        Self::new(bond_dim, rank, vec![value; len])
    }

    /// The all-ones tensor of the given shape.
    pub fn ones(bond_dim: usize, rank: usize) -> Result<Self> {
        Self::constant(bond_dim, rank, Complex64::new(1.0, 0.0))
    }

    pub fn bond_dim(&self) -> usize {
        self.bond_dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    /// Row-major flat offset of a multi-index (port 0 slowest).
    pub fn flat_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.rank {
            return Err(Error::InvalidParam(format!(
                "index has {} components, tensor has rank {}",
                index.len(),
                self.rank
            )));
        }
        let mut flat = 0usize;
        for (port, &i) in index.iter().enumerate() {
            if i >= self.bond_dim {
                return Err(Error::InvalidParam(format!(
                    "index component {i} at port {port} exceeds bond dimension {}",
                    self.bond_dim
                )));
            }
            flat = flat * self.bond_dim + i;
        }
        Ok(flat)
    }

    pub fn get(&self, index: &[usize]) -> Result<Complex64> {
        Ok(self.entries[self.flat_index(index)?])
    }

    pub fn set(&mut self, index: &[usize], value: Complex64) -> Result<()> {
        let flat = self.flat_index(index)?;
        self.entries[flat] = value;
        Ok(())
    }

    /// Stride of each port in the row-major layout: `stride[p] = d^(rank-1-p)`.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.rank];
        for p in (0..self.rank.saturating_sub(1)).rev() {
            strides[p] = strides[p + 1] * self.bond_dim;
        }
        strides
    }

    /// Sum of all entries (the full contraction against all-ones vectors).
    pub fn entry_sum(&self) -> Complex64 {
        self.entries.iter().sum()
    }
}

/// Outer product: ports of `a` first, then ports of `b`, entries row-major
/// over the concatenated port list.
pub fn tensor_product(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.bond_dim != b.bond_dim {
        return Err(Error::InvalidParam(format!(
            "tensor product requires equal bond dimensions, got {} and {}",
            a.bond_dim, b.bond_dim
        )));
    }
    let rank = a
        .rank
        .checked_add(b.rank)
        .ok_or_else(|| Error::InvalidParam("tensor product rank overflows usize".to_string()))?;
    let len = checked_len(a.bond_dim, rank)?;
    let mut entries = Vec::with_capacity(len);
    for &av in &a.entries {
        for &bv in &b.entries {
            entries.push(av * bv);
        }
    }
    Tensor::new(a.bond_dim, rank, entries)
}

/// Contracts the listed port pairs of a single tensor (partial trace).
///
/// Every port may appear in at most one pair. Surviving ports keep their
/// original relative order. The summation runs in a fixed order (pairs sorted
/// by their smaller port, pair values in one ascending odometer), so the
/// result is bit-identical no matter how the pair list is permuted.
pub fn contract_pairs(t: &Tensor, pairs: &[(usize, usize)]) -> Result<Tensor> {
    let d = t.bond_dim;
    let mut seen = vec![false; t.rank];
    for &(a, b) in pairs {
        for port in [a, b] {
            if port >= t.rank {
                return Err(Error::PortOutOfRange {
                    vertex: 0,
                    port,
                    rank: t.rank,
                });
            }
            if seen[port] {
                return Err(Error::InvalidParam(format!(
                    "port {port} appears in more than one contraction pair"
                )));
            }
            seen[port] = true;
        }
    }
    let mut pairs: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    pairs.sort_unstable();

    let strides = t.strides();
    let surviving: Vec<usize> = (0..t.rank).filter(|p| !seen[*p]).collect();
    let out_rank = surviving.len();
    let out_len = checked_len(d, out_rank)?;
    let pair_strides: Vec<usize> = pairs
        .iter()
        .map(|&(a, b)| strides[a] + strides[b])
        .collect();

    let mut entries = vec![Complex64::new(0.0, 0.0); out_len];
    let mut out_index = vec![0usize; out_rank];
    for entry in entries.iter_mut() {
        let base: usize = out_index
            .iter()
            .zip(&surviving)
            .map(|(&i, &p)| i * strides[p])
            .sum();
        let mut pair_vals = vec![0usize; pairs.len()];
        let mut acc = Complex64::new(0.0, 0.0);
        loop {
            let offset: usize = pair_vals
                .iter()
                .zip(&pair_strides)
                .map(|(&v, &s)| v * s)
                .sum();
            acc += t.entries[base + offset];
            if !increment_odometer(&mut pair_vals, d) {
                break;
            }
        }
        *entry = acc;
        increment_odometer(&mut out_index, d);
    }
    Tensor::new(d, out_rank, entries)
}

/// Advances a little-endian-in-last-digit odometer; returns false on wrap.
/// The last digit is the fastest, matching row-major entry order.
pub(crate) fn increment_odometer(digits: &mut [usize], base: usize) -> bool {
    for slot in digits.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}
