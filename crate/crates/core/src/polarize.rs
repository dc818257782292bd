//! Kernels, the polarizing transform `A = B_{l,m} F_l^{⊗m}`, dynamic freezing
//! constraints and subchannel reliability profiles.

use crate::binmat::{digit_reversal, kronecker_power, ones, right_rref, BitMatrix, Rref};
use crate::error::{Error, Result};
use crate::galois::{cyclotomic_cosets, make_field, minimal_polynomial, Field, Gf2Poly};
use crate::parentcodes::ParentCode;
use crate::simulate::ChannelSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Arikan,
    Ebch,
    ReedSolomon,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Arikan => "arikan",
            KernelKind::Ebch => "ebch",
            KernelKind::ReedSolomon => "rs",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arikan" => Ok(KernelKind::Arikan),
            "ebch" => Ok(KernelKind::Ebch),
            "rs" | "reed-solomon" => Ok(KernelKind::ReedSolomon),
            _ => Err(Error::Invalid(format!("unknown kernel kind {s:?}"))),
        }
    }
}

/// An `l × l` polarization kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    pub kind: KernelKind,
    pub l: usize,
    /// Binary kernels only.
    pub matrix: Option<BitMatrix>,
    /// Reed-Solomon kernels: entries in GF(q), row-major.
    pub symbols: Option<Vec<Vec<u32>>>,
    pub field: Option<Field>,
}

impl Kernel {
    pub fn arikan() -> Kernel {
        Kernel {
            kind: KernelKind::Arikan,
            l: 2,
            matrix: Some(BitMatrix::from_strs(&["10", "11"]).unwrap()),
            symbols: None,
            field: None,
        }
    }

    pub fn is_binary(&self) -> bool {
        self.matrix.is_some()
    }

    /// Rows of a binary kernel as bitmasks (bit `t` = column `t`).
    fn row_masks(&self) -> Result<Vec<u64>> {
        let f = self
            .matrix
            .as_ref()
            .ok_or_else(|| Error::Unsupported("kernel is not binary".into()))?;
        Ok((0..self.l).map(|i| f.row(i)[0]).collect())
    }

    /// Symbol matrix; binary kernels are returned as 0/1 symbols.
    fn symbol_matrix(&self) -> Vec<Vec<u32>> {
        match (&self.symbols, &self.matrix) {
            (Some(s), _) => s.clone(),
            (None, Some(m)) => (0..self.l)
                .map(|i| (0..self.l).map(|j| m.get(i, j) as u32).collect())
                .collect(),
            _ => unreachable!("kernel without entries"),
        }
    }

    /// Field order of the kernel alphabet.
    pub fn alphabet(&self) -> u32 {
        if self.is_binary() {
            2
        } else {
            self.field.as_ref().map_or(2, Field::order)
        }
    }
}

/// Builds a kernel. `field` selects GF(2^µ) for EBCH (default field of degree
/// `log2 l`) and the alphabet for Reed-Solomon kernels.
pub fn make_kernel(kind: KernelKind, l: usize, field: Option<&Field>) -> Result<Kernel> {
    match kind {
        KernelKind::Arikan => {
            if l != 2 {
                return Err(Error::Invalid(format!("Arikan kernel has l = 2, got {l}")));
            }
            Ok(Kernel::arikan())
        }
        KernelKind::Ebch => ebch_kernel(l, field),
        KernelKind::ReedSolomon => rs_kernel(l, field),
    }
}

fn ebch_kernel(l: usize, field: Option<&Field>) -> Result<Kernel> {
    if l < 2 || !l.is_power_of_two() || l > 64 {
        return Err(Error::Invalid(format!(
            "EBCH kernel size must be a power of two in 2..=64, got {l}"
        )));
    }
    let mu = l.trailing_zeros();
    let field = match field {
        Some(f) if f.m() == mu => f.clone(),
        Some(f) => {
            return Err(Error::Invalid(format!(
                "EBCH kernel of size {l} needs GF(2^{mu}), got GF(2^{})",
                f.m()
            )))
        }
        None => make_field(mu)?,
    };
    // Generator polynomials of the narrow-sense BCH codes of length l-1 by degree.
    let cosets = cyclotomic_cosets(mu);
    let mut gens: Vec<Gf2Poly> = vec![Gf2Poly::ONE];
    let mut g = Gf2Poly::ONE;
    let mut covered = vec![false; l - 1];
    for delta in 1..l - 1 {
        // add the minimal polynomial of α^delta if not yet a root
        if !covered[delta % (l - 1)] {
            let c = cosets
                .iter()
                .find(|c| c.members.contains(&((delta % (l - 1)) as u32)))
                .unwrap();
            for &x in &c.members {
                covered[x as usize] = true;
            }
            g = g.mul(minimal_polynomial(&field, c));
            gens.push(g);
        }
    }
    let mut f = BitMatrix::zeros(l, l);
    f.set(0, 0, true);
    for i in 0..l - 1 {
        let gi = gens
            .iter()
            .rev()
            .find(|p| p.degree().unwrap() as usize <= i)
            .unwrap();
        let shift = i - gi.degree().unwrap() as usize;
        let row = Gf2Poly(gi.0 << shift);
        let mut parity = false;
        for p in 0..l - 1 {
            if row.coeff(p as u32) == 1 {
                f.set(i + 1, p + 1, true);
                parity = !parity;
            }
        }
        f.set(i + 1, 0, parity);
    }
    Ok(Kernel {
        kind: KernelKind::Ebch,
        l,
        matrix: Some(f),
        symbols: None,
        field: Some(field),
    })
}

fn rs_kernel(l: usize, field: Option<&Field>) -> Result<Kernel> {
    let field = field
        .cloned()
        .ok_or_else(|| Error::Invalid("Reed-Solomon kernel needs a field".into()))?;
    if l < 2 || l > field.order() as usize {
        return Err(Error::Invalid(format!(
            "Reed-Solomon kernel size {l} must be in 2..={}",
            field.order()
        )));
    }
    // (F)_{i,j} = β_j^{l-1-i} with β_j the element with integer representation j.
    let symbols: Vec<Vec<u32>> = (0..l)
        .map(|i| (0..l as u32).map(|b| field.pow(b, (l - 1 - i) as u64)).collect())
        .collect();
    Ok(Kernel {
        kind: KernelKind::ReedSolomon,
        l,
        matrix: None,
        symbols: Some(symbols),
        field: Some(field),
    })
}

/// Rank of a matrix over GF(2^m).
pub(crate) fn rank_gf(field: &Field, rows: &[Vec<u32>]) -> usize {
    let mut a: Vec<Vec<u32>> = rows.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, p);
        let inv = field.inv(a[r][c]).unwrap();
        let pivot: Vec<u32> = a[r].iter().map(|&x| field.mul(x, inv)).collect();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (x, &p) in row.iter_mut().zip(&pivot) {
                    *x ^= field.mul(f, p);
                }
            }
        }
        a[r] = pivot;
        r += 1;
    }
    r
}

/// True iff the kernel matrix is invertible over its alphabet.
pub fn kernel_invertible(k: &Kernel) -> bool {
    match (&k.matrix, &k.symbols, &k.field) {
        (Some(m), _, _) => crate::binmat::rank(m) == k.l,
        (None, Some(s), Some(f)) => rank_gf(f, s) == k.l,
        _ => false,
    }
}

/// Applies `v ↦ v F^{⊗m}` in place, for a binary kernel given as row masks.
fn kron_apply(v: &mut [u8], rows: &[u64], l: usize) {
    let n = v.len();
    let mut stride = 1;
    let mut x = vec![0u8; l];
    while stride < n {
        for base in (0..n).step_by(stride * l) {
            for off in 0..stride {
                let mut acc = 0u64;
                for (a, &r) in rows.iter().enumerate() {
                    if v[base + off + a * stride] & 1 == 1 {
                        acc ^= r;
                    }
                }
                for (t, xt) in x.iter_mut().enumerate() {
                    *xt = ((acc >> t) & 1) as u8;
                }
                for t in 0..l {
                    v[base + off + t * stride] = x[t];
                }
            }
        }
        stride *= l;
    }
}

/// In-place `v ↦ v F_2^{⊗m}` (natural order).
pub fn arikan_transform(v: &mut [u8]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for b in (0..n).step_by(2 * h) {
            let (lo, hi) = v[b..b + 2 * h].split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter()) {
                *x ^= *y;
            }
        }
        h *= 2;
    }
}

/// Number of levels `m` with `l^m = n`, if any.
pub fn levels(l: usize, n: usize) -> Option<u32> {
    let mut size = 1usize;
    let mut m = 0;
    while size < n {
        size = size.checked_mul(l)?;
        m += 1;
    }
    (size == n).then_some(m)
}

/// `c = u A` with `A = B_{l,m} F_l^{⊗m}` for a binary kernel.
pub fn transform_encode(u: &[u8], kernel: &Kernel, m: u32) -> Result<Vec<u8>> {
    let n = kernel.l.pow(m);
    if u.len() != n {
        return Err(Error::Dimension(format!(
            "input has length {}, transform needs {n}",
            u.len()
        )));
    }
    let perm = digit_reversal(kernel.l, m);
    let mut v = vec![0u8; n];
    for (i, &b) in u.iter().enumerate() {
        v[perm[i]] = b & 1;
    }
    if kernel.kind == KernelKind::Arikan {
        arikan_transform(&mut v);
    } else {
        kron_apply(&mut v, &kernel.row_masks()?, kernel.l);
    }
    Ok(v)
}

/// Explicit `A = B_{l,m} F_l^{⊗m}` for a binary kernel.
pub fn polarizing_matrix(kernel: &Kernel, m: u32) -> Result<BitMatrix> {
    let f = kernel
        .matrix
        .as_ref()
        .ok_or_else(|| Error::Unsupported("kernel is not binary".into()))?;
    let k = kronecker_power(f, m)?;
    let perm = digit_reversal(kernel.l, m);
    // Row i of B·K is row π(i) of K.
    Ok(k.select_rows(&perm))
}

/// Symbol-level transform over GF(q) for nonbinary kernels.
pub(crate) fn transform_encode_symbols(u: &[u32], kernel: &Kernel, m: u32) -> Vec<u32> {
    let l = kernel.l;
    let n = l.pow(m);
    assert_eq!(u.len(), n);
    let f = kernel.symbol_matrix();
    let field = kernel.field.clone().unwrap_or_else(|| make_field(1).unwrap());
    let perm = digit_reversal(l, m);
    let mut v = vec![0u32; n];
    for (i, &b) in u.iter().enumerate() {
        v[perm[i]] = b;
    }
    let mut stride = 1;
    let mut x = vec![0u32; l];
    while stride < n {
        for base in (0..n).step_by(stride * l) {
            for off in 0..stride {
                for (t, xt) in x.iter_mut().enumerate() {
                    *xt = (0..l).fold(0, |acc, a| {
                        acc ^ field.mul(v[base + off + a * stride], f[a][t])
                    });
                }
                for t in 0..l {
                    v[base + off + t * stride] = x[t];
                }
            }
        }
        stride *= l;
    }
    v
}

/// Dynamic freezing constraints `u_{j_i} = Σ_{s<j_i} u_s V_{i,s}`.
///
/// Canonical form: frozen indices sorted, every source index is non-frozen
/// and sources are sorted. An empty source list is a static freeze.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    n: usize,
    frozen: Vec<usize>,
    rows: Vec<Vec<usize>>,
    slot: Vec<u32>,
}

const NOT_FROZEN: u32 = u32::MAX;

impl ConstraintSystem {
    pub fn empty(n: usize) -> Self {
        ConstraintSystem {
            n,
            frozen: Vec::new(),
            rows: Vec::new(),
            slot: vec![NOT_FROZEN; n],
        }
    }

    /// All-static system freezing `indices`.
    pub fn static_frozen(n: usize, indices: &[usize]) -> Result<Self> {
        Self::from_rows(n, indices.iter().map(|&j| (j, Vec::new())).collect())
    }

    /// Builds a system from `(j, sources)` rows and brings it to canonical form.
    ///
    /// Sources may reference other frozen indices; they are substituted away.
    pub fn from_rows(n: usize, mut rows: Vec<(usize, Vec<usize>)>) -> Result<Self> {
        rows.sort_by_key(|r| r.0);
        let mut slot = vec![NOT_FROZEN; n];
        for (t, (j, srcs)) in rows.iter().enumerate() {
            if *j >= n {
                return Err(Error::Invalid(format!("frozen index {j} out of range 0..{n}")));
            }
            if slot[*j] != NOT_FROZEN {
                return Err(Error::Invalid(format!("frozen index {j} listed twice")));
            }
            slot[*j] = t as u32;
            if let Some(&s) = srcs.iter().find(|&&s| s >= *j) {
                return Err(Error::Invalid(format!(
                    "source {s} of frozen index {j} is not smaller than it"
                )));
            }
        }
        // Rows are triangular, so ascending substitution yields canonical rows.
        let mut mark = vec![false; n];
        let mut canon: Vec<Vec<usize>> = Vec::with_capacity(rows.len());
        for (_, srcs) in &rows {
            let mut touched: Vec<usize> = Vec::new();
            for &s in srcs {
                if slot[s] == NOT_FROZEN {
                    mark[s] = !mark[s];
                    touched.push(s);
                } else {
                    for &t in &canon[slot[s] as usize] {
                        mark[t] = !mark[t];
                        touched.push(t);
                    }
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let row: Vec<usize> = touched.into_iter().filter(|&t| mark[t]).collect();
            for &t in &row {
                mark[t] = false;
            }
            canon.push(row);
        }
        Ok(ConstraintSystem {
            n,
            frozen: rows.iter().map(|r| r.0).collect(),
            rows: canon,
            slot,
        })
    }

    /// Canonical system for the row space of `v`.
    pub fn from_matrix(v: &BitMatrix) -> Self {
        Self::from_rref(&right_rref(v), v.cols())
    }

    pub(crate) fn from_rref(rr: &Rref, n: usize) -> Self {
        let mut slot = vec![NOT_FROZEN; n];
        let mut rows = Vec::with_capacity(rr.pivots.len());
        for (t, &p) in rr.pivots.iter().enumerate() {
            slot[p] = t as u32;
            rows.push(ones(rr.matrix.row(t)).filter(|&s| s != p).collect());
        }
        ConstraintSystem {
            n,
            frozen: rr.pivots.clone(),
            rows,
            slot,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.n - self.frozen.len()
    }

    pub fn frozen(&self) -> &[usize] {
        &self.frozen
    }

    pub fn non_frozen(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.is_frozen(i)).collect()
    }

    #[inline]
    pub fn is_frozen(&self, i: usize) -> bool {
        self.slot[i] != NOT_FROZEN
    }

    pub fn sources(&self, i: usize) -> Result<&[usize]> {
        match self.slot.get(i) {
            Some(&t) if t != NOT_FROZEN => Ok(&self.rows[t as usize]),
            _ => Err(Error::NotFrozen(i)),
        }
    }

    /// `(j, sources)` pairs in ascending `j`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.frozen.iter().copied().zip(self.rows.iter().map(Vec::as_slice))
    }

    /// Number of rows with at least one source.
    pub fn nontrivial_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_empty()).count()
    }

    /// Total number of source terms over all rows.
    pub fn total_terms(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Dense `V`, one row per frozen index with its pivot set.
    pub fn to_matrix(&self) -> BitMatrix {
        let mut v = BitMatrix::zeros(self.frozen.len(), self.n);
        for (t, (j, srcs)) in self.rows().enumerate() {
            v.set(t, j, true);
            for &s in srcs {
                v.set(t, s, true);
            }
        }
        v
    }

    /// Adds static freezes, keeping the system canonical.
    pub fn with_static(&self, extra: &[usize]) -> Result<Self> {
        let mut rows: Vec<(usize, Vec<usize>)> =
            self.rows().map(|(j, s)| (j, s.to_vec())).collect();
        for &j in extra {
            if j < self.n && self.is_frozen(j) {
                return Err(Error::Invalid(format!("index {j} is already frozen")));
            }
            rows.push((j, Vec::new()));
        }
        Self::from_rows(self.n, rows)
    }

    /// Overwrites every frozen position of `u` with its constraint value.
    pub fn fill_frozen(&self, u: &mut [u8]) {
        assert_eq!(u.len(), self.n);
        for (j, srcs) in self.rows() {
            u[j] = srcs.iter().fold(0, |acc, &s| acc ^ (u[s] & 1));
        }
    }

    /// True iff `u` satisfies every row.
    pub fn satisfied_by(&self, u: &[u8]) -> bool {
        self.rows()
            .all(|(j, srcs)| srcs.iter().fold(u[j] & 1, |acc, &s| acc ^ (u[s] & 1)) == 0)
    }
}

/// Canonical constraints `right_rref(H A^T)` of `parent` under the given kernel.
pub fn derive_constraints(parent: &ParentCode, kernel: &Kernel, m: u32) -> Result<ConstraintSystem> {
    let n = kernel.l.pow(m);
    if parent.n != n {
        return Err(Error::Dimension(format!(
            "parent length {} differs from l^m = {n}",
            parent.n
        )));
    }
    let masks = kernel.row_masks()?;
    // Row r of H A^T is (B (F^T)^{⊗m}-image of h_r): h (F^T)^{⊗m}, then permuted.
    let l = kernel.l;
    let transposed: Vec<u64> = (0..l)
        .map(|a| (0..l).fold(0u64, |acc, b| acc | (((masks[b] >> a) & 1) << b)))
        .collect();
    let perm = digit_reversal(l, m);
    let mut v = BitMatrix::zeros(0, n);
    let mut w = vec![0u8; n];
    for r in 0..parent.h.rows() {
        w.iter_mut().for_each(|x| *x = 0);
        for j in ones(parent.h.row(r)) {
            w[j] = 1;
        }
        kron_apply(&mut w, &transposed, l);
        let row: Vec<u8> = (0..n).map(|i| w[perm[i]]).collect();
        v.push_bits(&row);
    }
    Ok(ConstraintSystem::from_rref(&right_rref(&v), n))
}

/// Decision value of frozen symbol `i` given the decided prefix `u_0 … u_{i-1}`.
pub fn eval_frozen(cs: &ConstraintSystem, prefix: &[u8], i: usize) -> Result<u8> {
    let srcs = cs.sources(i)?;
    if prefix.len() < i {
        return Err(Error::Dimension(format!(
            "prefix of length {} does not cover index {i}",
            prefix.len()
        )));
    }
    Ok(srcs.iter().fold(0, |acc, &s| acc ^ (prefix[s] & 1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    /// Bhattacharyya parameters `Z_i`.
    Bhattacharyya,
    /// Bit (or symbol) error probabilities `P_i`.
    ErrorProb,
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::Bhattacharyya => "Z",
            ProfileKind::ErrorProb => "P",
        })
    }
}

/// Per-subchannel reliability in the input-vector (`u`) order.
#[derive(Clone, Debug, PartialEq)]
pub struct ReliabilityProfile {
    pub kind: ProfileKind,
    pub values: Vec<f64>,
    pub channel: String,
}

impl ReliabilityProfile {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Error probabilities under the BEC tie rule, `P_i = Z_i / 2`.
    pub fn bec_error_probs(&self) -> ReliabilityProfile {
        match self.kind {
            ProfileKind::ErrorProb => self.clone(),
            ProfileKind::Bhattacharyya => ReliabilityProfile {
                kind: ProfileKind::ErrorProb,
                values: self.values.iter().map(|z| z / 2.0).collect(),
                channel: self.channel.clone(),
            },
        }
    }

    /// CSV with header `index,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{i},{v:e}\n"));
        }
        s
    }

    pub fn from_csv(text: &str, kind: ProfileKind, channel: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if ln == 0 {
                if line != "index,value" {
                    return Err(Error::Parse {
                        line: 1,
                        msg: "expected header index,value".into(),
                    });
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse {
                line: ln + 1,
                msg: msg.into(),
            };
            let (i, v) = line.split_once(',').ok_or_else(|| err("expected two fields"))?;
            let i: usize = i.trim().parse().map_err(|_| err("bad index"))?;
            let v: f64 = v.trim().parse().map_err(|_| err("bad value"))?;
            if i != values.len() {
                return Err(err("indices must be consecutive from 0"));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(err("value outside [0, 1]"));
            }
            values.push(v);
        }
        Ok(ReliabilityProfile {
            kind,
            values,
            channel: channel.into(),
        })
    }
}

/// Exact BEC Bhattacharyya parameters: `Z_{2i} = 2z - z²`, `Z_{2i+1} = z²`.
pub fn bec_reliability(m: u32, z0: f64) -> ReliabilityProfile {
    let mut z = vec![z0];
    for _ in 0..m {
        z = z.iter().flat_map(|&x| [2.0 * x - x * x, x * x]).collect();
    }
    ReliabilityProfile {
        kind: ProfileKind::Bhattacharyya,
        values: z,
        channel: format!("bec({z0})"),
    }
}

/// `ln φ(x)` for the two-regime Gaussian-approximation function.
fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 10.0 {
        -0.4527 * x.powf(0.86) + 0.0218
    } else {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

/// Smallest `x` (to 1e-9 relative) with `ln φ(x) ≤ target`, by bisection.
fn ln_phi_inverse(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while ln_phi(hi) > target {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Mean LLR of the degraded child: `φ^{-1}(1 - (1 - φ(x))²)`.
fn ga_bad(x: f64) -> f64 {
    let lp = ln_phi(x);
    let phi = lp.exp();
    // ln(1 - (1-φ)^2) = ln φ + ln(2 - φ)
    let target = if phi < 1.0 { lp + (2.0 - phi).ln() } else { 0.0 };
    ln_phi_inverse(target).min(x)
}

/// `Q(x)`, the standard normal tail.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Gaussian-approximation error probabilities for BPSK over AWGN with noise
/// standard deviation `sigma` (unit symbol energy).
pub fn ga_reliability(m: u32, sigma: f64) -> ReliabilityProfile {
    let mut mean = vec![2.0 / (sigma * sigma)];
    for _ in 0..m {
        mean = mean.iter().flat_map(|&x| [ga_bad(x), 2.0 * x]).collect();
    }
    ReliabilityProfile {
        kind: ProfileKind::ErrorProb,
        values: mean.iter().map(|&x| q_function((x / 2.0).sqrt())).collect(),
        channel: format!("awgn(sigma={sigma})"),
    }
}

/// Genie-aided Monte Carlo estimate of per-phase error probabilities.
///
/// Each trial draws a uniform input vector from its own counter-based stream
/// `(seed, trial)`, transmits its image, and decodes every phase with all
/// earlier inputs set to their true values. Ties decide the smallest symbol.
pub fn mc_reliability(
    kernel: &Kernel,
    m: u32,
    channel: &ChannelSpec,
    trials: u64,
    seed: u64,
) -> Result<ReliabilityProfile> {
    let n = kernel.l.pow(m);
    let q = kernel.alphabet();
    if kernel.kind != KernelKind::Arikan {
        let work = (q as f64).powi(kernel.l as i32 - 1);
        if work > 65536.0 {
            return Err(Error::Unsupported(format!(
                "genie estimation for a {}x{} kernel over GF({q})",
                kernel.l, kernel.l
            )));
        }
    }
    let bits_per_symbol = q.trailing_zeros() as usize;
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; n],
            |mut acc, t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t);
                let errs = if kernel.kind == KernelKind::Arikan {
                    let u: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
                    let c = transform_encode(&u, kernel, m).unwrap();
                    let llr = channel.llrs(&c, &mut rng);
                    crate::decode::genie_errors(&llr, &u)
                } else {
                    let u: Vec<u32> = (0..n).map(|_| rng.gen_range(0..q)).collect();
                    let c = transform_encode_symbols(&u, kernel, m);
                    let bits: Vec<u8> = c
                        .iter()
                        .flat_map(|&s| (0..bits_per_symbol).map(move |b| ((s >> b) & 1) as u8))
                        .collect();
                    let llr = channel.llrs(&bits, &mut rng);
                    genie_generic(kernel, m, &llr, &u)
                };
                for (a, e) in acc.iter_mut().zip(errs) {
                    *a += e as u64;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(ReliabilityProfile {
        kind: ProfileKind::ErrorProb,
        values: counts.iter().map(|&c| c as f64 / trials as f64).collect(),
        channel: channel.label(),
    })
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln σ(x) = -ln(1 + e^{-x})`.
fn ln_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Genie-aided phase errors for a small kernel over GF(q), by exhaustive
/// marginalization over the undecided symbols of each kernel block.
fn genie_generic(kernel: &Kernel, m: u32, bit_llrs: &[f64], u: &[u32]) -> Vec<bool> {
    let q = kernel.alphabet() as usize;
    let b = q.trailing_zeros() as usize;
    // Symbol log-likelihoods from the binary image.
    let ch: Vec<Vec<f64>> = bit_llrs
        .chunks(b.max(1))
        .map(|chunk| {
            (0..q)
                .map(|a| {
                    chunk
                        .iter()
                        .enumerate()
                        .map(|(t, &l)| if (a >> t) & 1 == 0 { ln_sigmoid(l) } else { ln_sigmoid(-l) })
                        .sum()
                })
                .collect()
        })
        .collect();
    let field = kernel.field.clone().unwrap_or_else(|| make_field(1).unwrap());
    let f = kernel.symbol_matrix();
    let ll = genie_rec(&field, &f, kernel.l, m, &ch, u);
    ll.iter()
        .zip(u)
        .map(|(v, &truth)| {
            let mut best = 0;
            for a in 1..q {
                if v[a] > v[best] {
                    best = a;
                }
            }
            best as u32 != truth
        })
        .collect()
}

/// Per-phase log-likelihood vectors of `u_i` given the channel and the true prefix.
fn genie_rec(
    field: &Field,
    f: &[Vec<u32>],
    l: usize,
    m: u32,
    ch: &[Vec<f64>],
    u: &[u32],
) -> Vec<Vec<f64>> {
    if m == 0 {
        return vec![ch[0].clone()];
    }
    let q = ch[0].len();
    let n = u.len();
    let sub = n / l;
    let mul_row = |g: &[u32], t: usize| g.iter().enumerate().fold(0, |acc, (a, &x)| acc ^ field.mul(x, f[a][t]));
    // Inner inputs v^{(t)}_{i'} = (u_{l i' .. l i' + l - 1} F)_t.
    let inner: Vec<Vec<Vec<f64>>> = (0..l)
        .map(|t| {
            let v: Vec<u32> = (0..sub).map(|ip| mul_row(&u[l * ip..l * ip + l], t)).collect();
            genie_rec(field, f, l, m - 1, &ch[t * sub..(t + 1) * sub], &v)
        })
        .collect();
    let mut out = vec![vec![0.0; q]; n];
    let mut g = vec![0u32; l];
    for ip in 0..sub {
        for j in 0..l {
            g[..j].copy_from_slice(&u[l * ip..l * ip + j]);
            let free = l - 1 - j;
            for a in 0..q {
                g[j] = a as u32;
                let mut acc = f64::NEG_INFINITY;
                for suffix in 0..q.pow(free as u32) {
                    let mut s = suffix;
                    for x in g.iter_mut().skip(j + 1) {
                        *x = (s % q) as u32;
                        s /= q;
                    }
                    let term: f64 = (0..l).map(|t| inner[t][ip][mul_row(&g, t) as usize]).sum();
                    acc = log_sum_exp(acc, term);
                }
                out[l * ip + j][a] = acc;
            }
        }
    }
    out
}

/// SC error probability bound `1 - Π_{i ∉ F} (1 - P_i)`.
pub fn sc_error_prob(profile: &ReliabilityProfile, cs: &ConstraintSystem) -> Result<f64> {
    if profile.kind != ProfileKind::ErrorProb {
        return Err(Error::ProfileKind {
            expected: ProfileKind::ErrorProb.to_string(),
            got: profile.kind.to_string(),
        });
    }
    if profile.n() != cs.n() {
        return Err(Error::Dimension(format!(
            "profile length {} differs from code length {}",
            profile.n(),
            cs.n()
        )));
    }
    let log_ok: f64 = (0..cs.n())
        .filter(|&i| !cs.is_frozen(i))
        .map(|i| (-profile.values[i]).ln_1p())
        .sum();
    Ok(-log_ok.exp_m1())
}
