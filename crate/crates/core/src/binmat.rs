//! Dense GF(2) matrices with packed rows, canonical right-pivot reduction,
//! null spaces and the generalized Plotkin decomposition.

use crate::error::{Error, Result};
use std::fmt;

/// Largest supported matrix side.
pub const MAX_SIZE: usize = 1 << 20;

/// Dense binary matrix, row-major, 64 columns per word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

#[inline]
pub(crate) fn words_for(cols: usize) -> usize {
    cols.div_ceil(64)
}

/// Index of the highest set bit of a packed row.
#[inline]
pub(crate) fn last_one(row: &[u64]) -> Option<usize> {
    row.iter()
        .enumerate()
        .rev()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
}

#[inline]
pub(crate) fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

#[inline]
pub(crate) fn get_bit(row: &[u64], j: usize) -> bool {
    (row[j / 64] >> (j % 64)) & 1 == 1
}

/// Iterates the set bit positions of a packed row in increasing order.
pub fn ones(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + t)
            }
        })
    })
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = words_for(cols);
        BitMatrix {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds from rows of 0/1 values; all rows must have length `cols`.
    pub fn from_rows<R: AsRef<[u8]>>(cols: usize, rows: &[R]) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            for (j, &b) in r.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        Ok(m)
    }

    /// Parses rows written as strings of `0`/`1`; whitespace is ignored.
    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let parsed: Vec<Vec<u8>> = rows
            .iter()
            .map(|s| {
                s.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        _ => Err(Error::Invalid(format!("bad matrix character {c:?}"))),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let cols = parsed.first().map_or(0, Vec::len);
        Self::from_rows(cols, &parsed)
    }

    /// Stacks packed rows of width `cols`.
    pub fn from_packed_rows(cols: usize, rows: Vec<Vec<u64>>) -> Self {
        let words = words_for(cols);
        let mut data = Vec::with_capacity(rows.len() * words);
        let n = rows.len();
        for r in rows {
            assert_eq!(r.len(), words);
            data.extend_from_slice(&r);
        }
        BitMatrix {
            rows: n,
            cols,
            words,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        get_bit(self.row(i), j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        debug_assert!(i < self.rows && j < self.cols);
        let w = &mut self.data[i * self.words + j / 64];
        if v {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.words..(i + 1) * self.words]
    }

    /// Row `i` as a 0/1 vector.
    pub fn row_bits(&self, i: usize) -> Vec<u8> {
        (0..self.cols).map(|j| self.get(i, j) as u8).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|i| self.row_bits(i)).collect()
    }

    pub fn row_weight(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_rows(&mut self, dst: usize, src: usize) {
        assert_ne!(dst, src);
        let w = self.words;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * w);
            (&mut lo[dst * w..(dst + 1) * w], &hi[..w])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * w);
            (&mut hi[..w], &lo[src * w..(src + 1) * w])
        };
        xor_into(a, b);
    }

    pub fn push_row(&mut self, row: &[u64]) {
        assert_eq!(row.len(), self.words);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn push_bits(&mut self, bits: &[u8]) {
        assert_eq!(bits.len(), self.cols);
        let mut row = vec![0u64; self.words];
        for (j, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                row[j / 64] |= 1 << (j % 64);
            }
        }
        self.push_row(&row);
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in ones(self.row(i)) {
                t.set(j, i, true);
            }
        }
        t
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let w = out.words;
            let dst = &mut out.data[i * w..(i + 1) * w];
            for k in ones(self.row(i)) {
                xor_into(dst, other.row(k));
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn mul_vec(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.rows);
        let mut acc = vec![0u64; self.words];
        for (i, &b) in x.iter().enumerate() {
            if b & 1 == 1 {
                xor_into(&mut acc, self.row(i));
            }
        }
        (0..self.cols).map(|j| get_bit(&acc, j) as u8).collect()
    }

    /// Columns `start..end` as a new matrix.
    pub fn col_range(&self, start: usize, end: usize) -> BitMatrix {
        assert!(start <= end && end <= self.cols);
        let mut out = BitMatrix::zeros(self.rows, end - start);
        for i in 0..self.rows {
            for j in ones(self.row(i)) {
                if j >= start && j < end {
                    out.set(i, j - start, true);
                }
            }
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(0, self.cols);
        for &i in idx {
            out.push_row(self.row(i));
        }
        out
    }

    /// `(self | other)` side by side.
    pub fn hconcat(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension("hconcat row counts differ".into()));
        }
        let mut out = BitMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in ones(self.row(i)) {
                out.set(i, j, true);
            }
            for j in ones(other.row(i)) {
                out.set(i, self.cols + j, true);
            }
        }
        Ok(out)
    }

    /// `self` on top of `other`.
    pub fn vconcat(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension("vconcat column counts differ".into()));
        }
        let mut out = self.clone();
        out.data.extend_from_slice(&other.data);
        out.rows += other.rows;
        Ok(out)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let s: String = (0..self.cols)
                .map(|j| if self.get(i, j) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

/// `F^{⊗m}` by the standard Kronecker recursion.
pub fn kronecker_power(f: &BitMatrix, m: u32) -> Result<BitMatrix> {
    let l = f.rows();
    if f.cols() != l || l == 0 {
        return Err(Error::Dimension("kernel must be square and nonempty".into()));
    }
    if m == 0 {
        return Err(Error::Invalid("kronecker power needs m >= 1".into()));
    }
    let size = (l as u128).checked_pow(m).filter(|&s| s <= MAX_SIZE as u128);
    let Some(size) = size else {
        return Err(Error::TooLarge(l.saturating_pow(m)));
    };
    let size = size as usize;
    let mut cur = f.clone();
    while cur.rows() < size {
        let s = cur.rows();
        let mut next = BitMatrix::zeros(s * l, s * l);
        for a in 0..l {
            for b in 0..l {
                if !f.get(a, b) {
                    continue;
                }
                for i in 0..s {
                    for j in ones(cur.row(i)) {
                        next.set(a * s + i, b * s + j, true);
                    }
                }
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Digit reversal `π(Σ i_j l^j) = Σ i_j l^{m-1-j}` on `0..l^m`.
pub fn digit_reversal(l: usize, m: u32) -> Vec<usize> {
    assert!(l >= 2);
    let n = l.pow(m);
    (0..n)
        .map(|mut i| {
            let mut r = 0;
            for _ in 0..m {
                r = r * l + i % l;
                i /= l;
            }
            r
        })
        .collect()
}

/// Canonical right-pivot form: rows sorted by ascending pivot (last nonzero
/// column), each pivot column holds a single one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: BitMatrix,
    pub pivots: Vec<usize>,
}

/// Incremental echelon basis keyed by highest set bit.
pub(crate) struct Echelon {
    cols: usize,
    rows: Vec<Vec<u64>>,
    by_pivot: Vec<usize>,
}

impl Echelon {
    pub(crate) fn new(cols: usize) -> Self {
        Echelon {
            cols,
            rows: Vec::new(),
            by_pivot: vec![usize::MAX; cols],
        }
    }

    /// Clears every pivot bit of `row`, recording the basis indices used.
    pub(crate) fn reduce(&self, row: &mut [u64], mut used: Option<&mut Vec<usize>>) {
        let mut hi = last_one(row);
        while let Some(p) = hi {
            let r = self.by_pivot[p];
            if r != usize::MAX {
                xor_into(row, &self.rows[r]);
                if let Some(u) = used.as_deref_mut() {
                    u.push(r);
                }
            }
            hi = (0..p).rev().find(|&q| get_bit(row, q));
        }
    }

    /// Adds `row` to the basis. Returns its index, or `None` if dependent.
    pub(crate) fn insert(&mut self, mut row: Vec<u64>) -> Option<usize> {
        loop {
            let p = last_one(&row)?;
            let r = self.by_pivot[p];
            if r == usize::MAX {
                self.by_pivot[p] = self.rows.len();
                self.rows.push(row);
                return Some(self.rows.len() - 1);
            }
            xor_into(&mut row, &self.rows[r]);
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.rows.len()
    }

    pub(crate) fn into_rref(self) -> Rref {
        let cols = self.cols;
        let mut pivots: Vec<(usize, Vec<u64>)> = self
            .rows
            .into_iter()
            .map(|r| (last_one(&r).unwrap(), r))
            .collect();
        pivots.sort_by_key(|(p, _)| *p);
        // Ascending sweep: once row t is clear of lower pivots it can clear
        // its own pivot from every higher row without reintroducing them.
        for t in 0..pivots.len() {
            for s in 0..t {
                let ps = pivots[s].0;
                if get_bit(&pivots[t].1, ps) {
                    let (lo, hi) = pivots.split_at_mut(t);
                    xor_into(&mut hi[0].1, &lo[s].1);
                }
            }
        }
        let piv: Vec<usize> = pivots.iter().map(|(p, _)| *p).collect();
        let matrix = BitMatrix::from_packed_rows(cols, pivots.into_iter().map(|(_, r)| r).collect());
        Rref {
            matrix,
            pivots: piv,
        }
    }
}

/// Canonical fully reduced right-pivot form of the row space of `m`.
pub fn right_rref(m: &BitMatrix) -> Rref {
    let mut e = Echelon::new(m.cols());
    for i in 0..m.rows() {
        e.insert(m.row(i).to_vec());
    }
    e.into_rref()
}

pub fn rank(m: &BitMatrix) -> usize {
    let mut e = Echelon::new(m.cols());
    for i in 0..m.rows() {
        e.insert(m.row(i).to_vec());
    }
    e.len()
}

/// Basis of `{x : M x^T = 0}`, one row per non-pivot column in increasing order.
///
/// Row for free column `f` has a one at `f` and at every pivot column whose
/// reduced row contains `f`.
pub fn null_space(m: &BitMatrix) -> BitMatrix {
    let rr = right_rref(m);
    null_space_of_rref(&rr, m.cols())
}

pub(crate) fn null_space_of_rref(rr: &Rref, cols: usize) -> BitMatrix {
    let mut is_pivot = vec![false; cols];
    for &p in &rr.pivots {
        is_pivot[p] = true;
    }
    let mut free_index = vec![usize::MAX; cols];
    let mut nfree = 0;
    for j in 0..cols {
        if !is_pivot[j] {
            free_index[j] = nfree;
            nfree += 1;
        }
    }
    let mut out = BitMatrix::zeros(nfree, cols);
    for j in 0..cols {
        if !is_pivot[j] {
            out.set(free_index[j], j, true);
        }
    }
    for (i, &p) in rr.pivots.iter().enumerate() {
        for f in ones(rr.matrix.row(i)) {
            if f != p {
                out.set(free_index[f], p, true);
            }
        }
    }
    out
}

/// True iff both matrices span the same row space.
pub fn row_space_equal(a: &BitMatrix, b: &BitMatrix) -> bool {
    a.cols() == b.cols() && right_rref(a) == right_rref(b)
}

/// Generalized Plotkin decomposition of a `k × 2n` generator matrix.
///
/// The code is spanned by `(G1_i | 0)` for `i < k1 - k3`,
/// `(G1_{k1-k3+j} + G3_j | G3_j)` for `j < k3`, and `(G2 | G2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gpd {
    pub g1: BitMatrix,
    pub g2: BitMatrix,
    pub g3: BitMatrix,
}

impl Gpd {
    pub fn k1(&self) -> usize {
        self.g1.rows()
    }
    pub fn k2(&self) -> usize {
        self.g2.rows()
    }
    pub fn k3(&self) -> usize {
        self.g3.rows()
    }

    /// Generator matrix assembled from the three factors.
    pub fn reconstruct(&self) -> BitMatrix {
        let n = self.g1.cols().max(self.g2.cols()).max(self.g3.cols());
        let mut out = BitMatrix::zeros(0, 2 * n);
        let (k1, k3) = (self.k1(), self.k3());
        for i in 0..k1 {
            let mut row = BitMatrix::zeros(1, 2 * n);
            for j in ones(self.g1.row(i)) {
                row.set(0, j, true);
            }
            if i >= k1 - k3 {
                for j in ones(self.g3.row(i - (k1 - k3))) {
                    row.set(0, j, !row.get(0, j));
                    row.set(0, n + j, true);
                }
            }
            out.push_row(row.row(0));
        }
        for i in 0..self.k2() {
            let mut row = BitMatrix::zeros(1, 2 * n);
            for j in ones(self.g2.row(i)) {
                row.set(0, j, true);
                row.set(0, n + j, true);
            }
            out.push_row(row.row(0));
        }
        out
    }
}

/// Decomposes `G = (G' | G'')`: `G1` spans `G' + G''`, `G2` spans the halves
/// of codewords with equal halves, and `G3` collects second-half residues of
/// the remaining rows that fall outside the span of `G2`.
pub fn gpd(g: &BitMatrix) -> Result<Gpd> {
    if g.cols() % 2 != 0 {
        return Err(Error::Dimension("gpd needs an even number of columns".into()));
    }
    let k = g.rows();
    let r = rank(g);
    if r < k {
        return Err(Error::DependentRows { rank: r, rows: k });
    }
    let n = g.cols() / 2;
    let first = g.col_range(0, n);
    let second = g.col_range(n, 2 * n);

    // Row-reduce S = G' + G'' while carrying the second half along.
    let mut s_basis = Echelon::new(n);
    let mut tops: Vec<(Vec<u64>, Vec<u64>)> = Vec::new();
    let mut twins = BitMatrix::zeros(0, n);
    let mut carried: Vec<Vec<u64>> = Vec::new();
    for i in 0..k {
        let mut s = first.row(i).to_vec();
        xor_into(&mut s, second.row(i));
        let mut b = second.row(i).to_vec();
        // Reduce s against previous top rows, mirroring the XORs on b.
        let mut used = Vec::new();
        s_basis.reduce(&mut s, Some(&mut used));
        for u in used {
            xor_into(&mut b, &carried[u]);
        }
        if s.iter().all(|&w| w == 0) {
            twins.push_row(&b);
        } else {
            let idx = s_basis.insert(s.clone()).unwrap();
            debug_assert_eq!(idx, carried.len());
            carried.push(b.clone());
            // Keep the original (unreduced) top row for the decomposition.
            let mut s0 = first.row(i).to_vec();
            xor_into(&mut s0, second.row(i));
            tops.push((s0, second.row(i).to_vec()));
        }
    }

    // Second halves of top rows are reduced modulo span(G2) and earlier G3 rows.
    let mut span = Echelon::new(n);
    // For G3 entries: a combination (s, second half) of code rows of the form
    // (s + b | b) whose second half equals the stored residue modulo span(G2).
    let mut combos: Vec<Option<(Vec<u64>, Vec<u64>)>> = Vec::new();
    for i in 0..twins.rows() {
        if span.insert(twins.row(i).to_vec()).is_some() {
            combos.push(None);
        }
    }
    let mut group1 = Vec::new();
    let mut linked = Vec::new();
    let mut g3_rows = Vec::new();
    for (s, b) in tops {
        let mut residue = b.clone();
        let mut used = Vec::new();
        span.reduce(&mut residue, Some(&mut used));
        let mut cs = s.clone();
        let mut cb = b.clone();
        for u in used {
            if let Some((su, bu)) = &combos[u] {
                xor_into(&mut cs, su);
                xor_into(&mut cb, bu);
            }
        }
        if residue.iter().all(|&w| w == 0) {
            // The combination's second half lies in span(G2) and cancels
            // against (g | g), leaving (cs | 0).
            group1.push(cs);
        } else {
            span.insert(residue).unwrap();
            linked.push(s);
            g3_rows.push(b);
            combos.push(Some((cs, cb)));
        }
    }
    let g1 = BitMatrix::from_packed_rows(n, group1.into_iter().chain(linked).collect());
    let g3 = BitMatrix::from_packed_rows(n, g3_rows);
    Ok(Gpd {
        g1,
        g2: twins,
        g3,
    })
}
