//! Successive cancellation and list decoders for Arikan-kernel codes with
//! dynamic frozen symbols, plus an exhaustive maximum-likelihood reference.
//!
//! LLRs are positive in favour of bit 0. Internally the decoders work on
//! `v = u F^{⊗m}` in natural order: since `c = u B F^{⊗m} = (u F^{⊗m}) B`,
//! `v_y = c_{rev(y)}`.

use crate::binmat::{digit_reversal, ones, right_rref, BitMatrix};
use crate::construct::CodeSpec;
use crate::error::{Error, Result};
use crate::polarize::{arikan_transform, KernelKind};

/// Channel LLRs are clamped to this magnitude so that infinities stay finite.
pub const LLR_CLAMP: f64 = 1e12;

/// Largest dimension accepted by [`ml_oracle`].
pub const ML_MAX_K: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    /// Values of the non-frozen inputs in increasing index order.
    pub info_bits: Vec<u8>,
    pub u_hat: Vec<u8>,
    pub codeword: Vec<u8>,
    /// `-ln P(u_hat | y)` up to a constant: the sum of `ln(1 + e^{∓L})` over all decisions.
    pub metric: f64,
    pub list_rank: usize,
}

/// `2 atanh(tanh(a/2) tanh(b/2))` in the numerically stable Jacobian form.
#[inline]
pub fn f_op(a: f64, b: f64) -> f64 {
    let (aa, ab) = (a.abs(), b.abs());
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let sum = aa + ab;
    let diff = (aa - ab).abs();
    let mut r = aa.min(ab);
    // ln(1 + e^{-x}) < 5e-18 beyond 40
    if diff < 40.0 {
        let ed = (-diff).exp();
        r += if sum < 40.0 {
            ((1.0 + (-sum).exp()) / (1.0 + ed)).ln()
        } else {
            -ed.ln_1p()
        };
    }
    sign * r.max(0.0)
}

/// LLR of the second half given the first-half bit `u`.
#[inline]
pub fn g_op(a: f64, b: f64, u: u8) -> f64 {
    if u == 0 {
        b + a
    } else {
        b - a
    }
}

/// `ln(1 + e^{x})`.
#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Cost of deciding `u` on a subchannel with LLR `l`.
#[inline]
pub fn penalty(l: f64, u: u8) -> f64 {
    softplus(if u == 0 { -l } else { l })
}

#[inline]
fn hard(l: f64) -> u8 {
    (l < 0.0) as u8
}

fn check_arikan(spec: &CodeSpec) -> Result<u32> {
    if spec.kernel != KernelKind::Arikan {
        return Err(Error::Unsupported(format!(
            "successive cancellation decoding needs the Arikan kernel, got {}",
            spec.kernel
        )));
    }
    Ok(spec.m)
}

/// Permutes channel LLRs into the natural-order tree layout.
fn load_channel(rev: &[usize], llrs: &[f64], ch: &mut [f64]) -> Result<()> {
    if llrs.len() != ch.len() {
        return Err(Error::Dimension(format!(
            "{} LLRs for a code of length {}",
            llrs.len(),
            ch.len()
        )));
    }
    for (y, c) in ch.iter_mut().enumerate() {
        let l = llrs[rev[y]];
        *c = if l.is_nan() { 0.0 } else { l.clamp(-LLR_CLAMP, LLR_CLAMP) };
    }
    Ok(())
}

/// Codeword in transmission order from the natural-order tree codeword.
fn unload_codeword(rev: &[usize], v: &[u8]) -> Vec<u8> {
    let mut c = vec![0u8; v.len()];
    for (y, &b) in v.iter().enumerate() {
        c[rev[y]] = b;
    }
    c
}

/// Single-path SC state: one LLR array and one left-codeword array per layer.
struct ScCore {
    n: usize,
    m: usize,
    rev: Vec<usize>,
    ch: Vec<f64>,
    // llr[s] has length 2^s, s < m
    llr: Vec<Vec<f64>>,
    // left[t] has length 2^t, t <= m
    left: Vec<Vec<u8>>,
}

impl ScCore {
    fn new(m: u32) -> Self {
        let m = m as usize;
        let n = 1usize << m;
        ScCore {
            n,
            m,
            rev: digit_reversal(2, m as u32),
            ch: vec![0.0; n],
            llr: (0..m).map(|s| vec![0.0; 1 << s]).collect(),
            left: (0..=m).map(|s| vec![0u8; 1 << s]).collect(),
        }
    }

    /// LLR of `u_phi` given the bits written so far.
    fn phase_llr(&mut self, phi: usize) -> f64 {
        if self.m == 0 {
            return self.ch[0];
        }
        let top = if phi == 0 {
            self.m - 1
        } else {
            phi.trailing_zeros() as usize
        };
        for s in (0..=top).rev() {
            let h = 1usize << s;
            let (lo, hi) = self.llr.split_at_mut(s + 1);
            let dst = &mut lo[s];
            let src: &[f64] = if s + 1 == self.m { &self.ch } else { &hi[0] };
            if s == top && phi != 0 {
                let c = &self.left[s];
                for j in 0..h {
                    dst[j] = g_op(src[j], src[j + h], c[j]);
                }
            } else {
                for j in 0..h {
                    dst[j] = f_op(src[j], src[j + h]);
                }
            }
        }
        self.llr[0][0]
    }

    /// Folds decision `u` at `phi` into the left-codeword arrays.
    fn push_bit(&mut self, phi: usize, u: u8) {
        let t = (phi.trailing_ones() as usize).min(self.m);
        let size = 1usize << t;
        let (lo, hi) = self.left.split_at_mut(t);
        let dst = &mut hi[0];
        dst[size - 1] = u;
        for s in 0..t {
            let h = 1usize << s;
            let base = size - 2 * h;
            let c = &lo[s];
            for j in 0..h {
                dst[base + j] = c[j] ^ dst[base + h + j];
            }
        }
    }

    fn codeword(&self) -> Vec<u8> {
        unload_codeword(&self.rev, &self.left[self.m])
    }
}

/// Reusable successive cancellation decoder.
pub struct ScDecoder {
    core: ScCore,
    frozen: Vec<Option<Vec<usize>>>,
    info: Vec<usize>,
    u: Vec<u8>,
}

impl ScDecoder {
    pub fn new(spec: &CodeSpec) -> Result<Self> {
        let m = check_arikan(spec)?;
        let cs = &spec.constraints;
        let frozen = (0..spec.n)
            .map(|i| cs.sources(i).ok().map(<[usize]>::to_vec))
            .collect();
        Ok(ScDecoder {
            core: ScCore::new(m),
            frozen,
            info: cs.non_frozen(),
            u: vec![0; spec.n],
        })
    }

    pub fn decode(&mut self, llrs: &[f64]) -> Result<DecodeResult> {
        load_channel(&self.core.rev, llrs, &mut self.core.ch)?;
        let mut metric = 0.0;
        for phi in 0..self.core.n {
            let l = self.core.phase_llr(phi);
            let u = match &self.frozen[phi] {
                None => hard(l),
                Some(srcs) => srcs.iter().fold(0, |acc, &s| acc ^ self.u[s]),
            };
            metric += penalty(l, u);
            self.u[phi] = u;
            self.core.push_bit(phi, u);
        }
        Ok(DecodeResult {
            info_bits: self.info.iter().map(|&i| self.u[i]).collect(),
            u_hat: self.u.clone(),
            codeword: self.core.codeword(),
            metric,
            list_rank: 0,
        })
    }
}

/// Successive cancellation decoding with the dynamic-freezing decision rule.
pub fn sc_decode(spec: &CodeSpec, llrs: &[f64]) -> Result<DecodeResult> {
    ScDecoder::new(spec)?.decode(llrs)
}

/// Genie-aided SC: per-phase hard-decision errors when every earlier input
/// is set to its true value. Ties decide 0.
pub fn genie_errors(llrs: &[f64], u_true: &[u8]) -> Vec<bool> {
    let n = u_true.len();
    let m = n.trailing_zeros();
    assert!(n.is_power_of_two());
    let mut core = ScCore::new(m);
    load_channel(&core.rev, llrs, &mut core.ch).expect("length mismatch");
    (0..n)
        .map(|phi| {
            let l = core.phase_llr(phi);
            let u = u_true[phi] & 1;
            core.push_bit(phi, u);
            hard(l) != u
        })
        .collect()
}

const UNFROZEN: i32 = -1;
const STATIC: i32 = -2;

/// Pool of equal-length arrays with reference counts.
struct Pool<T> {
    len: usize,
    data: Vec<T>,
    refs: Vec<u32>,
    free: Vec<u32>,
}

impl<T: Copy + Default> Pool<T> {
    fn new(len: usize, count: usize) -> Self {
        Pool {
            len,
            data: vec![T::default(); len * count],
            refs: vec![0; count],
            free: (0..count as u32).rev().collect(),
        }
    }

    fn reset(&mut self) {
        self.refs.iter_mut().for_each(|r| *r = 0);
        self.free.clear();
        self.free.extend((0..self.refs.len() as u32).rev());
    }

    fn alloc(&mut self) -> u32 {
        let a = self.free.pop().expect("array pool exhausted");
        self.refs[a as usize] = 1;
        a
    }

    fn retain(&mut self, a: u32) {
        self.refs[a as usize] += 1;
    }

    fn release(&mut self, a: u32) {
        let r = &mut self.refs[a as usize];
        *r -= 1;
        if *r == 0 {
            self.free.push(a);
        }
    }

    /// Returns an exclusively owned array in place of `a`; contents are not preserved.
    fn make_unique(&mut self, a: u32) -> u32 {
        if self.refs[a as usize] == 1 {
            a
        } else {
            self.release(a);
            self.alloc()
        }
    }

    fn get(&self, a: u32) -> &[T] {
        &self.data[a as usize * self.len..(a as usize + 1) * self.len]
    }

    fn get_mut(&mut self, a: u32) -> &mut [T] {
        &mut self.data[a as usize * self.len..(a as usize + 1) * self.len]
    }
}

/// List SC decoder with lazy copying of intermediate arrays.
///
/// Paths live in slots; `live` lists the active slots in creation order,
/// which breaks ties between equal metrics.
pub struct ListDecoder {
    n: usize,
    m: usize,
    cap: usize,
    rev: Vec<usize>,
    kind: Vec<i32>,
    // CSR map from a non-frozen index to the dynamic rows that use it.
    users_start: Vec<u32>,
    users: Vec<u32>,
    acc_words: usize,
    info: Vec<usize>,
    ch: Vec<f64>,
    llr: Vec<Pool<f64>>,
    bits: Vec<Pool<u8>>,
    // per-slot rows
    path_llr: Vec<u32>,
    path_bits: Vec<u32>,
    acc: Vec<u64>,
    metric: Vec<f64>,
    hist: Vec<u32>,
    decided: Vec<u8>,
    leaf: Vec<f64>,
    keep: Vec<u8>,
    cand_metric: Vec<[f64; 2]>,
    live: Vec<usize>,
    free_slots: Vec<usize>,
    hist_parent: Vec<u32>,
    hist_bit: Vec<u8>,
    cand: Vec<(f64, u32)>,
}

impl ListDecoder {
    pub fn new(spec: &CodeSpec, list_size: usize) -> Result<Self> {
        let m = check_arikan(spec)? as usize;
        if list_size == 0 {
            return Err(Error::Invalid("list size must be at least 1".into()));
        }
        let n = spec.n;
        let cs = &spec.constraints;
        let mut kind = vec![UNFROZEN; n];
        let mut users_of: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut dyn_rows = 0u32;
        for (j, srcs) in cs.rows() {
            if srcs.is_empty() {
                kind[j] = STATIC;
            } else {
                kind[j] = dyn_rows as i32;
                for &s in srcs {
                    users_of[s].push(dyn_rows);
                }
                dyn_rows += 1;
            }
        }
        let mut users_start = Vec::with_capacity(n + 1);
        let mut users = Vec::new();
        for u in &users_of {
            users_start.push(users.len() as u32);
            users.extend_from_slice(u);
        }
        users_start.push(users.len() as u32);
        let cap = list_size;
        let acc_words = (dyn_rows as usize).div_ceil(64);
        Ok(ListDecoder {
            n,
            m,
            cap,
            rev: digit_reversal(2, m as u32),
            kind,
            users_start,
            users,
            acc_words,
            info: cs.non_frozen(),
            ch: vec![0.0; n],
            llr: (0..m).map(|s| Pool::new(1 << s, cap)).collect(),
            bits: (0..=m).map(|s| Pool::new(1 << s, cap)).collect(),
            path_llr: vec![0; cap * m],
            path_bits: vec![0; cap * (m + 1)],
            acc: vec![0; cap * acc_words],
            metric: vec![0.0; cap],
            hist: vec![0; cap],
            decided: vec![0; cap],
            leaf: vec![0.0; cap],
            keep: vec![0; cap],
            cand_metric: vec![[0.0; 2]; cap],
            live: Vec::with_capacity(cap),
            free_slots: Vec::with_capacity(cap),
            hist_parent: Vec::with_capacity(n * cap),
            hist_bit: Vec::with_capacity(n * cap),
            cand: Vec::with_capacity(2 * cap),
        })
    }

    pub fn list_size(&self) -> usize {
        self.cap
    }

    fn reset(&mut self) {
        for p in &mut self.llr {
            p.reset();
        }
        for p in &mut self.bits {
            p.reset();
        }
        let m = self.m;
        self.free_slots.clear();
        self.free_slots.extend((1..self.cap).rev());
        self.live.clear();
        self.live.push(0);
        for s in 0..m {
            self.path_llr[s] = self.llr[s].alloc();
        }
        for t in 0..=m {
            self.path_bits[t] = self.bits[t].alloc();
        }
        self.acc[..self.acc_words].fill(0);
        self.metric[0] = 0.0;
        self.hist[0] = u32::MAX;
        self.hist_parent.clear();
        self.hist_bit.clear();
    }

    fn compute_leaf(&mut self, p: usize, phi: usize) -> f64 {
        let m = self.m;
        if m == 0 {
            return self.ch[0];
        }
        let top = if phi == 0 { m - 1 } else { phi.trailing_zeros() as usize };
        for s in (0..=top).rev() {
            let h = 1usize << s;
            let slot = p * m + s;
            let dst_id = self.llr[s].make_unique(self.path_llr[slot]);
            self.path_llr[slot] = dst_id;
            let (lo, hi) = self.llr.split_at_mut(s + 1);
            let dst = lo[s].get_mut(dst_id);
            let src: &[f64] = if s + 1 == m {
                &self.ch
            } else {
                hi[0].get(self.path_llr[slot + 1])
            };
            let (a, b) = src.split_at(h);
            if s == top && phi != 0 {
                let c = self.bits[s].get(self.path_bits[p * (m + 1) + s]);
                for (((d, &x), &y), &u) in dst.iter_mut().zip(a).zip(b).zip(c) {
                    *d = g_op(x, y, u);
                }
            } else {
                for ((d, &x), &y) in dst.iter_mut().zip(a).zip(b) {
                    *d = f_op(x, y);
                }
            }
        }
        self.llr[0].get(self.path_llr[p * m])[0]
    }

    fn push_bit(&mut self, p: usize, phi: usize, u: u8) {
        let m = self.m;
        let t = (phi.trailing_ones() as usize).min(m);
        let size = 1usize << t;
        let slot = p * (m + 1) + t;
        let id = self.bits[t].make_unique(self.path_bits[slot]);
        self.path_bits[slot] = id;
        let (lo, hi) = self.bits.split_at_mut(t);
        let dst = hi[0].get_mut(id);
        dst[size - 1] = u;
        for s in 0..t {
            let h = 1usize << s;
            let (left, right) = dst[size - 2 * h..size].split_at_mut(h);
            let c = lo[s].get(self.path_bits[p * (m + 1) + s]);
            for ((d, &x), &y) in left.iter_mut().zip(c).zip(right.iter()) {
                *d = x ^ y;
            }
        }
        self.hist_parent.push(self.hist[p]);
        self.hist_bit.push(u);
        self.hist[p] = (self.hist_bit.len() - 1) as u32;
        if u == 1 && self.kind[phi] == UNFROZEN {
            let w = self.acc_words;
            let (a, b) = (self.users_start[phi] as usize, self.users_start[phi + 1] as usize);
            for &r in &self.users[a..b] {
                self.acc[p * w + r as usize / 64] ^= 1u64 << (r % 64);
            }
        }
    }

    fn release_path(&mut self, p: usize) {
        let m = self.m;
        for s in 0..m {
            self.llr[s].release(self.path_llr[p * m + s]);
        }
        for t in 0..=m {
            self.bits[t].release(self.path_bits[p * (m + 1) + t]);
        }
    }

    fn clone_path(&mut self, p: usize, q: usize) {
        let (m, w) = (self.m, self.acc_words);
        for s in 0..m {
            let a = self.path_llr[p * m + s];
            self.llr[s].retain(a);
            self.path_llr[q * m + s] = a;
        }
        for t in 0..=m {
            let a = self.path_bits[p * (m + 1) + t];
            self.bits[t].retain(a);
            self.path_bits[q * (m + 1) + t] = a;
        }
        self.acc.copy_within(p * w..(p + 1) * w, q * w);
        self.hist[q] = self.hist[p];
    }

    /// Keeps the best `cap` of the candidate extensions. Ties prefer earlier
    /// paths, then the hard decision.
    fn fork_and_prune(&mut self) {
        self.cand.clear();
        for (pos, &p) in self.live.iter().enumerate() {
            let l = self.leaf[p];
            let h = hard(l);
            for b in 0..2u8 {
                let key = (2 * pos as u32) | (b ^ h) as u32;
                self.cand.push((self.metric[p] + penalty(l, b), key));
            }
        }
        if self.cand.len() > self.cap {
            self.cand.select_nth_unstable_by(self.cap - 1, |a, b| {
                a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
            });
            self.cand.truncate(self.cap);
        }
        for &p in &self.live {
            self.keep[p] = 0;
        }
        for &(metric, key) in &self.cand {
            let p = self.live[(key >> 1) as usize];
            let b = (key & 1) as u8 ^ hard(self.leaf[p]);
            self.keep[p] |= 1 << b;
            self.cand_metric[p][b as usize] = metric;
        }
        for i in 0..self.live.len() {
            let p = self.live[i];
            if self.keep[p] == 0 {
                self.release_path(p);
                self.free_slots.push(p);
            }
        }
        let keep = &self.keep;
        self.live.retain(|&p| keep[p] != 0);
        for i in 0..self.live.len() {
            let p = self.live[i];
            match self.keep[p] {
                1 | 2 => {
                    let b = self.keep[p] >> 1;
                    self.decided[p] = b;
                    self.metric[p] = self.cand_metric[p][b as usize];
                }
                _ => {
                    let q = self.free_slots.pop().expect("slot available");
                    self.clone_path(p, q);
                    self.decided[p] = 0;
                    self.metric[p] = self.cand_metric[p][0];
                    self.decided[q] = 1;
                    self.metric[q] = self.cand_metric[p][1];
                    self.live.push(q);
                }
            }
        }
    }

    /// Runs the decoder; afterwards `live` holds the final survivors.
    fn run(&mut self, llrs: &[f64]) -> Result<()> {
        load_channel(&self.rev, llrs, &mut self.ch)?;
        self.reset();
        for phi in 0..self.n {
            for i in 0..self.live.len() {
                let p = self.live[i];
                self.leaf[p] = self.compute_leaf(p, phi);
            }
            let kind = self.kind[phi];
            if kind == UNFROZEN {
                self.fork_and_prune();
            } else {
                let w = self.acc_words;
                for &p in &self.live {
                    let u = if kind == STATIC {
                        0
                    } else {
                        let r = kind as usize;
                        ((self.acc[p * w + r / 64] >> (r % 64)) & 1) as u8
                    };
                    self.metric[p] += penalty(self.leaf[p], u);
                    self.decided[p] = u;
                }
            }
            for i in 0..self.live.len() {
                let p = self.live[i];
                self.push_bit(p, phi, self.decided[p]);
            }
        }
        Ok(())
    }

    /// Live slots ordered by metric, ties by creation order.
    fn ranking(&self) -> Vec<usize> {
        let mut order = self.live.clone();
        order.sort_by(|&a, &b| self.metric[a].total_cmp(&self.metric[b]));
        order
    }

    fn u_hat(&self, p: usize) -> Vec<u8> {
        let mut u = vec![0u8; self.n];
        let mut node = self.hist[p];
        for phi in (0..self.n).rev() {
            u[phi] = self.hist_bit[node as usize];
            node = self.hist_parent[node as usize];
        }
        u
    }

    fn tree_codeword(&self, p: usize) -> &[u8] {
        self.bits[self.m].get(self.path_bits[p * (self.m + 1) + self.m])
    }

    fn result(&self, p: usize, rank: usize) -> DecodeResult {
        let u = self.u_hat(p);
        DecodeResult {
            info_bits: self.info.iter().map(|&i| u[i]).collect(),
            codeword: unload_codeword(&self.rev, self.tree_codeword(p)),
            u_hat: u,
            metric: self.metric[p],
            list_rank: rank,
        }
    }

    /// All final survivors sorted by metric.
    pub fn decode(&mut self, llrs: &[f64]) -> Result<Vec<DecodeResult>> {
        self.run(llrs)?;
        Ok(self
            .ranking()
            .into_iter()
            .enumerate()
            .map(|(rank, p)| self.result(p, rank))
            .collect())
    }

    /// Writes the best survivor's codeword into `out`.
    pub fn decode_best_codeword(&mut self, llrs: &[f64], out: &mut Vec<u8>) -> Result<()> {
        self.run(llrs)?;
        let p = self.ranking()[0];
        let v = self.tree_codeword(p);
        out.clear();
        out.resize(self.n, 0);
        for (y, &b) in v.iter().enumerate() {
            out[self.rev[y]] = b;
        }
        Ok(())
    }
}

/// List SC decoding with list size `list_size`; survivors sorted by metric.
pub fn list_sc_decode(spec: &CodeSpec, llrs: &[f64], list_size: usize) -> Result<Vec<DecodeResult>> {
    ListDecoder::new(spec, list_size)?.decode(llrs)
}

/// Exhaustive maximum-likelihood decoding over the code spanned by `g`.
///
/// Maximizes the correlation `Σ (1 - 2c_x) L_x`; ties go to the
/// lexicographically smallest codeword. `info_bits` are the coefficients with
/// respect to the reduced basis of `g`; `u_hat` is `c A` when the length is a
/// power of two (the Arikan transform is an involution) and empty otherwise.
pub fn ml_oracle(g: &BitMatrix, llrs: &[f64]) -> Result<DecodeResult> {
    let basis = right_rref(g).matrix;
    let k = basis.rows();
    let n = g.cols();
    if k > ML_MAX_K {
        return Err(Error::EnumerationTooLarge { k, limit: ML_MAX_K });
    }
    if llrs.len() != n {
        return Err(Error::Dimension(format!("{} LLRs for length {n}", llrs.len())));
    }
    let words = n.div_ceil(64);
    let mut cw = vec![0u64; words];
    let mut best_cw = cw.clone();
    let mut best_x = 0u64;
    // Minimizing Σ_{c_x = 1} L_x is equivalent to maximizing the correlation.
    let mut best_cost = 0.0;
    let mut x = 0u64;
    for step in 1u64..1 << k {
        let bit = step.trailing_zeros() as usize;
        x ^= 1 << bit;
        crate::binmat::xor_into(&mut cw, basis.row(bit));
        let cost: f64 = ones(&cw).map(|j| llrs[j]).sum();
        let better = cost < best_cost
            || (cost == best_cost && lex_less(&cw, &best_cw, n));
        if better {
            best_cost = cost;
            best_cw.copy_from_slice(&cw);
            best_x = x;
        }
    }
    let codeword: Vec<u8> = (0..n)
        .map(|j| ((best_cw[j / 64] >> (j % 64)) & 1) as u8)
        .collect();
    let metric = codeword.iter().zip(llrs).map(|(&c, &l)| penalty(l, c)).sum();
    let u_hat = if n.is_power_of_two() {
        let rev = digit_reversal(2, n.trailing_zeros());
        let mut v: Vec<u8> = (0..n).map(|i| codeword[rev[i]]).collect();
        arikan_transform(&mut v);
        v
    } else {
        Vec::new()
    };
    Ok(DecodeResult {
        info_bits: (0..k).map(|i| ((best_x >> i) & 1) as u8).collect(),
        u_hat,
        codeword,
        metric,
        list_rank: 0,
    })
}

/// Lexicographic comparison with index 0 most significant.
fn lex_less(a: &[u64], b: &[u64], n: usize) -> bool {
    for j in 0..n {
        let (x, y) = ((a[j / 64] >> (j % 64)) & 1, (b[j / 64] >> (j % 64)) & 1);
        if x != y {
            return x < y;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_polar_subcode, tests::example3_spec, CodeSpec};
    use crate::polarize::{bec_reliability, transform_encode, ConstraintSystem, Kernel};
    use crate::simulate::ChannelSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ebch16_spec() -> CodeSpec {
        let cs = crate::polarize::tests::example2_system();
        CodeSpec::arikan(cs, "ebch(m=4,d=6)", "none")
    }

    fn random_codeword(spec: &CodeSpec, rng: &mut impl Rng) -> (Vec<u8>, Vec<u8>) {
        let mut u = vec![0u8; spec.n];
        for i in spec.constraints.non_frozen() {
            u[i] = rng.gen_range(0..2);
        }
        spec.constraints.fill_frozen(&mut u);
        let c = transform_encode(&u, &Kernel::arikan(), spec.m).unwrap();
        (u, c)
    }

    #[test]
    fn f_op_matches_atanh() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let a: f64 = rng.gen_range(-20.0..20.0);
            let b: f64 = rng.gen_range(-20.0..20.0);
            let exact = 2.0 * ((a / 2.0).tanh() * (b / 2.0).tanh()).atanh();
            assert!((f_op(a, b) - exact).abs() < 1e-9 * (1.0 + exact.abs()), "{a} {b}");
        }
        assert_eq!(f_op(0.0, 5.0), 0.0);
        assert!((f_op(1e12, -1e12) + 1e12 - 2f64.ln()).abs() < 1e-3);
        assert_eq!(g_op(1.0, 2.0, 0), 3.0);
        assert_eq!(g_op(1.0, 2.0, 1), 1.0);
    }

    #[test]
    fn noiseless_round_trip() {
        let spec = ebch16_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let (u, c) = random_codeword(&spec, &mut rng);
            let llr: Vec<f64> = c.iter().map(|&b| if b == 0 { f64::INFINITY } else { f64::NEG_INFINITY }).collect();
            let r = sc_decode(&spec, &llr).unwrap();
            assert_eq!(r.u_hat, u);
            assert_eq!(r.codeword, c);
            assert_eq!(r.metric, 0.0);
            let l = list_sc_decode(&spec, &llr, 4).unwrap();
            assert_eq!(l[0].u_hat, u);
        }
    }

    #[test]
    fn all_erased_decodes_zero_information() {
        let spec = ebch16_spec();
        let r = sc_decode(&spec, &[0.0; 16]).unwrap();
        assert!(r.info_bits.iter().all(|&b| b == 0));
        assert!(r.codeword.iter().all(|&b| b == 0));
        assert!(spec.constraints.satisfied_by(&r.u_hat));
    }

    #[test]
    fn rejects_bad_input() {
        let spec = ebch16_spec();
        assert!(matches!(sc_decode(&spec, &[0.0; 8]), Err(Error::Dimension(_))));
        let mut other = spec.clone();
        other.kernel = KernelKind::Ebch;
        assert!(matches!(sc_decode(&other, &[0.0; 16]), Err(Error::Unsupported(_))));
        assert!(list_sc_decode(&spec, &[0.0; 16], 0).is_err());
    }

    #[test]
    fn list_one_equals_sc() {
        let f = crate::galois::make_field(6).unwrap();
        let parent = crate::parentcodes::ebch_check_matrix(&f, 8, &crate::galois::Basis::polynomial(&f)).unwrap();
        let pcs = crate::polarize::derive_constraints(&parent, &Kernel::arikan(), 6).unwrap();
        let prof = crate::polarize::ga_reliability(6, 0.9);
        let spec = build_polar_subcode(&pcs, &prof, 30).unwrap();
        let ch = ChannelSpec::Awgn { es_n0_db: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sc = ScDecoder::new(&spec).unwrap();
        let mut list = ListDecoder::new(&spec, 1).unwrap();
        for _ in 0..1000 {
            let (_, c) = random_codeword(&spec, &mut rng);
            let llr = ch.llrs(&c, &mut rng);
            let a = sc.decode(&llr).unwrap();
            let b = list.decode(&llr).unwrap();
            assert_eq!(b.len(), 1);
            assert_eq!(a, b[0]);
        }
    }

    #[test]
    fn results_satisfy_constraints_and_are_sorted() {
        let spec = ebch16_spec();
        let ch = ChannelSpec::Awgn { es_n0_db: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = crate::polarize::polarizing_matrix(&Kernel::arikan(), 4).unwrap();
        for _ in 0..200 {
            let (_, c) = random_codeword(&spec, &mut rng);
            let llr = ch.llrs(&c, &mut rng);
            let res = list_sc_decode(&spec, &llr, 8).unwrap();
            assert_eq!(res.len(), 8);
            for (i, r) in res.iter().enumerate() {
                assert!(spec.constraints.satisfied_by(&r.u_hat));
                assert_eq!(r.codeword, a.mul_vec(&r.u_hat));
                assert_eq!(r.list_rank, i);
                let exact: f64 = r.codeword.iter().zip(&llr).map(|(&b, &l)| penalty(l, b)).sum();
                assert!((r.metric - exact).abs() < 1e-9 * (1.0 + exact));
            }
            assert!(res.windows(2).all(|w| w[0].metric <= w[1].metric));
        }
    }

    #[test]
    fn exhaustive_list_is_ml() {
        let spec = example3_spec();
        assert_eq!(spec.k, 6);
        let g = spec.generator_matrix();
        let ch = ChannelSpec::Awgn { es_n0_db: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut dec = ListDecoder::new(&spec, 64).unwrap();
        for _ in 0..300 {
            let (_, c) = random_codeword(&spec, &mut rng);
            let llr = ch.llrs(&c, &mut rng);
            let best = &dec.decode(&llr).unwrap()[0];
            let ml = ml_oracle(&g, &llr).unwrap();
            assert_eq!(best.codeword, ml.codeword);
            assert_eq!(best.u_hat, ml.u_hat);
        }
    }

    #[test]
    fn ml_oracle_examples() {
        let rep = BitMatrix::from_strs(&["11"]).unwrap();
        let r = ml_oracle(&rep, &[1.0, -3.0]).unwrap();
        assert_eq!(r.codeword, vec![1, 1]);
        assert_eq!(r.info_bits, vec![1]);
        let r = ml_oracle(&rep, &[0.0, 0.0]).unwrap();
        assert_eq!(r.codeword, vec![0, 0]);
        assert!(ml_oracle(&BitMatrix::identity(21), &[0.0; 21]).is_err());
    }

    #[test]
    fn genie_bec_matches_bhattacharyya() {
        // P_i = Z_i / 2 under the tie rule
        let z = bec_reliability(4, 0.5).values;
        let ch = ChannelSpec::Bec { eps: 0.5 };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let trials = 40_000;
        let mut counts = [0u32; 16];
        for _ in 0..trials {
            let u: Vec<u8> = (0..16).map(|_| rng.gen_range(0..2)).collect();
            let c = transform_encode(&u, &Kernel::arikan(), 4).unwrap();
            let llr = ch.llrs(&c, &mut rng);
            for (i, e) in genie_errors(&llr, &u).into_iter().enumerate() {
                counts[i] += e as u32;
            }
        }
        for i in 0..16 {
            let p = z[i] / 2.0;
            let est = counts[i] as f64 / trials as f64;
            let sd = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((est - p).abs() <= 3.0 * sd + 1e-12, "i={i} est={est} p={p}");
        }
    }

    #[test]
    fn bigger_list_never_worse_on_matched_noise() {
        let spec = ebch16_spec();
        let ch = ChannelSpec::Awgn { es_n0_db: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut d1 = ListDecoder::new(&spec, 1).unwrap();
        let mut d8 = ListDecoder::new(&spec, 8).unwrap();
        let mut d64 = ListDecoder::new(&spec, 128).unwrap();
        let (mut e1, mut e8, mut e64) = (0, 0, 0);
        for _ in 0..2000 {
            let (_, c) = random_codeword(&spec, &mut rng);
            let llr = ch.llrs(&c, &mut rng);
            let b1 = d1.decode(&llr).unwrap()[0].metric;
            let b8 = d8.decode(&llr).unwrap()[0].metric;
            let r = d64.decode(&llr).unwrap();
            // exhaustive list reaches the ML metric, which bounds the others
            assert!(r[0].metric <= b8 + 1e-9 && r[0].metric <= b1 + 1e-9);
            e1 += (d1.decode(&llr).unwrap()[0].codeword != c) as u32;
            e8 += (d8.decode(&llr).unwrap()[0].codeword != c) as u32;
            e64 += (r[0].codeword != c) as u32;
        }
        assert!(e1 >= e8 && e8 + 20 >= e64, "{e1} {e8} {e64}");
    }

    #[test]
    fn static_only_code() {
        // classical polar code with rate 1/2 at n = 8
        let cs = ConstraintSystem::static_frozen(8, &[0, 1, 2, 4]).unwrap();
        let spec = CodeSpec::arikan(cs, "none", "test");
        let llr = [2.0, -1.0, 0.5, 3.0, -0.2, 1.0, 1.5, -2.5];
        let sc = sc_decode(&spec, &llr).unwrap();
        let l = list_sc_decode(&spec, &llr, 16).unwrap();
        let ml = ml_oracle(&spec.generator_matrix(), &llr).unwrap();
        assert_eq!(l[0].codeword, ml.codeword);
        assert!(sc.metric >= l[0].metric - 1e-12);
        let _ = build_polar_subcode;
    }
}
