//! Linear algebra over GF(2).
//!
//! [`BinaryMatrix`] stores each row as a sorted list of the column indices that
//! hold a one. Parity checks in this crate are row-sparse, so that is the
//! canonical form; elimination routines build a dense, word-packed mirror
//! ([`BitVector`] rows) on demand and work on 64 columns at a time.
//!
//! Elimination always pivots on the first available row with a set bit in the
//! current column, scanning columns left to right. Kernels and solutions are
//! therefore reproducible run to run.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A fixed-length, word-packed vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_ones(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.toggle(i);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_ones(bits.len(), bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    pub fn ones(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    /// Concatenation `[self | other]`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    pub fn slice(&self, start: usize, end: usize) -> BitVector {
        BitVector::from_ones(
            end - start,
            self.iter_ones().filter(|&i| i >= start && i < end).map(|i| i - start),
        )
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A sparse matrix over GF(2) with immutable shape.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<usize>>,
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row_vector(r))?;
        }
        Ok(())
    }
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Vec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            entries: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// Builds a matrix from per-row column lists. Repeated indices cancel in pairs.
    pub fn from_rows(rows: usize, cols: usize, entries: Vec<Vec<usize>>) -> Result<Self> {
        if entries.len() != rows {
            return Err(Error::Dimension(format!("expected {rows} rows, got {}", entries.len())));
        }
        let entries = entries
            .into_iter()
            .map(|row| {
                if let Some(&bad) = row.iter().find(|&&c| c >= cols) {
                    return Err(Error::Dimension(format!(
                        "column index {bad} out of range for {cols} columns"
                    )));
                }
                Ok(normalize_row(row))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows, cols, entries })
    }

    pub fn from_bit_rows(cols: usize, rows: &[BitVector]) -> Self {
        Self {
            rows: rows.len(),
            cols,
            entries: rows
                .iter()
                .map(|r| {
                    debug_assert_eq!(r.len(), cols);
                    r.ones()
                })
                .collect(),
        }
    }

    /// The `ℓ × ℓ` cyclic shift: ones at `(i, (i + 1) mod ℓ)`.
    pub fn cyclic_shift(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidParameter(
                "cyclic shift dimension must be at least 1".into(),
            ));
        }
        Ok(Self {
            rows: l,
            cols: l,
            entries: (0..l).map(|i| vec![(i + 1) % l]).collect(),
        })
    }

    /// The `(n − k) × n` check matrix whose row `i` has ones at `i`, `i + 1`
    /// and `i + k`: the first `n − k` shifts of `1 + x + x^k`, without
    /// wraparound.
    ///
    /// With `k = 1` the polynomial degenerates to the two terms `{0, 1}` and
    /// the result is the repetition-code check.
    pub fn circulant_rectangular(n: usize, k: usize) -> Result<Self> {
        if k < 1 || k >= n {
            return Err(Error::InvalidParameter(format!(
                "seed requires 1 <= k < n, got n={n}, k={k}"
            )));
        }
        let entries = (0..n - k)
            .map(|i| {
                let mut row = vec![i, i + 1, i + k];
                row.dedup();
                row
            })
            .collect();
        Self::from_rows(n - k, n, entries)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Sorted column indices of the ones in row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> &[usize] {
        &self.entries[r]
    }

    pub fn row_vector(&self, r: usize) -> BitVector {
        BitVector::from_ones(self.cols, self.entries[r].iter().copied())
    }

    pub fn dense_rows(&self) -> Vec<BitVector> {
        (0..self.rows).map(|r| self.row_vector(r)).collect()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.entries[r].binary_search(&c).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Vec::is_empty)
    }

    pub fn max_row_weight(&self) -> usize {
        self.entries.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for row in &self.entries {
            for &c in row {
                w[c] += 1;
            }
        }
        w
    }

    pub fn transpose(&self) -> Self {
        let mut entries = vec![Vec::new(); self.cols];
        for (r, row) in self.entries.iter().enumerate() {
            for &c in row {
                entries[c].push(r);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| {
                let mut row: Vec<usize> = a.iter().chain(b).copied().collect();
                row.sort_unstable();
                normalize_row(row)
            })
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .map(|row| {
                let mut acc = BitVector::zeros(other.cols);
                for &k in row {
                    for &c in &other.entries[k] {
                        acc.toggle(c);
                    }
                }
                acc.ones()
            })
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    pub fn pow(&self, e: usize) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Dimension("matrix power needs a square matrix".into()));
        }
        let mut out = Self::identity(self.rows);
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// `M · v` for a column vector `v` of length `cols`.
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut out = BitVector::zeros(self.rows);
        for (r, row) in self.entries.iter().enumerate() {
            if row.iter().filter(|&&c| v.get(c)).count() % 2 == 1 {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    /// Kronecker product: `(A ⊗ B)[(i·p + k), (j·q + l)] = A[i,j]·B[k,l]`.
    pub fn kronecker(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut entries = Vec::with_capacity(rows);
        for a_row in &self.entries {
            for b_row in &other.entries {
                let mut row = Vec::with_capacity(a_row.len() * b_row.len());
                for &j in a_row {
                    for &l in b_row {
                        row.push(j * other.cols + l);
                    }
                }
                row.sort_unstable();
                entries.push(row);
            }
        }
        Self { rows, cols, entries }
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Dimension("hstack needs equal row counts".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.iter().copied().chain(b.iter().map(|c| c + self.cols)).collect())
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols + other.cols,
            entries,
        })
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::Dimension("vstack needs equal column counts".into()));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.dense_rows();
        row_reduce(&mut rows, self.cols).len()
    }

    /// Basis of the right null space `{v : M·v = 0}`.
    pub fn kernel_basis(&self) -> Vec<BitVector> {
        let mut rows = self.dense_rows();
        let pivots = row_reduce(&mut rows, self.cols);
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let basis: Vec<BitVector> = (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = BitVector::zeros(self.cols);
                v.set(free, true);
                for (r, &p) in pivots.iter().enumerate() {
                    if rows[r].get(free) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect();
        debug_assert!(basis
            .iter()
            .all(|v| self.mul_vec(v).map(|s| s.is_zero()).unwrap_or(false)));
        basis
    }

    /// Finds `c` with `M·c = target`, or `None` when `target` is outside the
    /// column space. Free variables are set to zero.
    pub fn solve_in_span(&self, target: &BitVector) -> Result<Option<BitVector>> {
        if target.len() != self.rows {
            return Err(Error::Dimension(format!(
                "target of length {} against {} rows",
                target.len(),
                self.rows
            )));
        }
        let mut rows: Vec<BitVector> = (0..self.rows)
            .map(|r| {
                let mut v = BitVector::zeros(self.cols + 1);
                for &c in &self.entries[r] {
                    v.set(c, true);
                }
                v.set(self.cols, target.get(r));
                v
            })
            .collect();
        let pivots = row_reduce(&mut rows, self.cols + 1);
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut c = BitVector::zeros(self.cols);
        for (r, &p) in pivots.iter().enumerate() {
            if rows[r].get(self.cols) {
                c.set(p, true);
            }
        }
        Ok(Some(c))
    }

    /// Writes the plain-text form: `rows cols`, then one line per row with the
    /// one-based column indices of its set bits.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.rows, self.cols)?;
        for row in &self.entries {
            let line: Vec<String> = row.iter().map(|c| (c + 1).to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))??;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header {header:?}"))))
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(Error::Parse(format!("bad header {header:?}")));
        };
        let mut entries = Vec::with_capacity(rows);
        for _ in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("matrix file ended early".into()))??;
            let row = line
                .split_whitespace()
                .map(|t| match t.parse::<usize>() {
                    Ok(i) if i >= 1 => Ok(i - 1),
                    _ => Err(Error::Parse(format!("bad column index {t:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            entries.push(row);
        }
        Self::from_rows(rows, cols, entries)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read_text(text.as_bytes())
    }
}

fn normalize_row(mut row: Vec<usize>) -> Vec<usize> {
    row.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(row.len());
    for c in row {
        if out.last() == Some(&c) {
            out.pop();
        } else {
            out.push(c);
        }
    }
    out
}

/// Reduces `rows` in place to reduced row echelon form over the first `cols`
/// columns. Returns the pivot column of each leading row; rows past the rank
/// are left zero.
pub fn row_reduce(rows: &mut [BitVector], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for c in 0..cols {
        if next == rows.len() {
            break;
        }
        let Some(found) = (next..rows.len()).find(|&r| rows[r].get(c)) else {
            continue;
        };
        rows.swap(next, found);
        let pivot_row = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != next && row.get(c) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(c);
        next += 1;
    }
    pivots
}

/// An incrementally built row space, kept in echelon form.
///
/// Each stored vector has a distinct leading bit that is clear in every vector
/// inserted after it, so reducing in insertion order is exact.
#[derive(Clone, Debug, Default)]
pub struct RowSpan {
    len: usize,
    basis: Vec<(usize, BitVector)>,
}

impl RowSpan {
    pub fn new(len: usize) -> Self {
        Self { len, basis: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut v = v.clone();
        for (lead, b) in &self.basis {
            if v.get(*lead) {
                v.xor_assign(b);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` if it is independent of the span; returns whether it was added.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        debug_assert_eq!(v.len(), self.len);
        let r = self.reduce(v);
        match r.first_one() {
            Some(lead) => {
                self.basis.push((lead, r));
                true
            }
            None => false,
        }
    }
}
