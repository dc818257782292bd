//! Parent codes: extended BCH check matrices, Reed-Muller frozen sets, CRC
//! constraints, generator matrices and brute-force minimum distance.

use crate::binmat::{null_space, ones, right_rref, xor_into, BitMatrix};
use crate::error::{Error, Result};
use crate::galois::{Basis, Field, Gf2Poly};
use crate::polarize::ConstraintSystem;
use rayon::prelude::*;

/// Largest dimension accepted by [`min_distance_bruteforce`].
pub const MAX_ENUM_K: usize = 26;

/// A binary linear code of length `n` given by a full-rank check matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParentCode {
    pub n: usize,
    pub k: usize,
    pub design_d: usize,
    pub h: BitMatrix,
    pub label: String,
}

impl ParentCode {
    /// The whole space `F_2^n`.
    pub fn full_space(n: usize) -> Self {
        ParentCode {
            n,
            k: n,
            design_d: 1,
            h: BitMatrix::zeros(0, n),
            label: "none".into(),
        }
    }

    /// Wraps an arbitrary check matrix, reducing it to full rank.
    pub fn from_checks(h: &BitMatrix, design_d: usize, label: impl Into<String>) -> Self {
        let reduced = right_rref(h).matrix;
        let n = h.cols();
        ParentCode {
            n,
            k: n - reduced.rows(),
            design_d,
            h: reduced,
            label: label.into(),
        }
    }

    pub fn generator(&self) -> BitMatrix {
        generator_from_checks(&self.h)
    }

    /// True iff `c` satisfies every check.
    pub fn contains(&self, c: &[u8]) -> bool {
        assert_eq!(c.len(), self.n);
        (0..self.h.rows()).all(|r| ones(self.h.row(r)).filter(|&j| c[j] & 1 == 1).count() % 2 == 0)
    }
}

/// Check matrix of the extended primitive narrow-sense BCH code of length
/// `2^m` and design distance `d`.
///
/// Position `i` carries the locator `x_i = Σ_j X_{i,j} β_j` where `X_{i,j}` is
/// bit `j` of `i`. The checks `Σ_i c_i x_i^j = 0` for `0 ≤ j < d - 1` (with
/// `0^0 = 1`) are expanded into binary rows through coordinates in `basis`,
/// which equals pairing with the trace-dual basis.
pub fn ebch_check_matrix(field: &Field, d: usize, basis: &Basis) -> Result<ParentCode> {
    let n = field.order() as usize;
    if d < 2 || d > n {
        return Err(Error::BadDesignDistance { d, n });
    }
    if basis.dim() != field.m() as usize {
        return Err(Error::Dimension("basis size differs from m".into()));
    }
    let m = field.m() as usize;
    let locators: Vec<u32> = (0..n as u32).map(|i| basis.element_from_mask(i)).collect();
    let mut h = BitMatrix::zeros((d - 1) * m, n);
    let mut powers: Vec<u32> = vec![1; n];
    for j in 0..d - 1 {
        for (i, &p) in powers.iter().enumerate() {
            let c = basis.coordinates_mask(p);
            for t in ones(&[c as u64]) {
                h.set(j * m + t, i, true);
            }
        }
        for (p, &x) in powers.iter_mut().zip(&locators) {
            *p = field.mul(*p, x);
        }
    }
    let label = format!("ebch(m={},d={d})", field.m());
    Ok(ParentCode {
        design_d: d,
        ..ParentCode::from_checks(&h, d, label)
    })
}

/// `{i < 2^m : wt(i) ≤ r}`, the frozen set of the Reed-Muller code of order `m - r - 1`.
pub fn rm_frozen_set(r: u32, m: u32) -> Vec<usize> {
    (0..1usize << m)
        .filter(|i| i.count_ones() <= r)
        .collect()
}

/// Adds CRC constraints to `cs`.
///
/// The CRC occupies the last `c = deg(crc_poly)` non-frozen positions; the
/// remaining non-frozen positions carry the message `m_0 … m_{k-1}`, read as
/// `M(x) = Σ_t m_t x^{k-1-t}`. CRC position `i` holds the coefficient of
/// `x^{c-1-i}` in `M(x) x^c mod crc_poly`.
pub fn crc_constraint_rows(cs: &ConstraintSystem, crc_poly: Gf2Poly) -> Result<ConstraintSystem> {
    let c = crc_poly
        .degree()
        .ok_or_else(|| Error::Invalid("CRC polynomial must be nonzero".into()))? as usize;
    if c == 0 {
        return Ok(cs.clone());
    }
    if c >= 63 {
        return Err(Error::Unsupported("CRC degree above 62".into()));
    }
    let info: Vec<usize> = (0..cs.n()).filter(|&i| !cs.is_frozen(i)).collect();
    if c >= info.len() {
        return Err(Error::Invalid(format!(
            "CRC length {c} needs more than {} non-frozen positions",
            info.len()
        )));
    }
    let k = info.len() - c;
    let (msg, crc) = info.split_at(k);
    // rem[t] = x^{k-1-t+c} mod g, built from t = k-1 downward.
    let mut rem = vec![Gf2Poly(0); k];
    let mut cur = Gf2Poly(1u64 << c).rem(crc_poly);
    for t in (0..k).rev() {
        rem[t] = cur;
        cur = cur.mulmod(Gf2Poly(0b10), crc_poly);
    }
    let mut v = cs.to_matrix();
    for (i, &pos) in crc.iter().enumerate() {
        let bit = (c - 1 - i) as u32;
        let mut row = BitMatrix::zeros(1, cs.n());
        row.set(0, pos, true);
        for (t, &src) in msg.iter().enumerate() {
            if rem[t].coeff(bit) == 1 {
                row.set(0, src, true);
            }
        }
        v.push_row(row.row(0));
    }
    Ok(ConstraintSystem::from_matrix(&v))
}

/// Basis of the code with check matrix `h`.
pub fn generator_from_checks(h: &BitMatrix) -> BitMatrix {
    null_space(h)
}

/// Minimum Hamming weight of a nonzero codeword of the code spanned by `g`.
///
/// Enumerates all `2^k` codewords in Gray-code order. The enumeration is split
/// into independent chunks by the top generator rows; the result does not
/// depend on how chunks are scheduled. A zero code yields `usize::MAX`.
pub fn min_distance_bruteforce(g: &BitMatrix) -> Result<usize> {
    let basis = right_rref(g).matrix;
    let k = basis.rows();
    if k > MAX_ENUM_K {
        return Err(Error::EnumerationTooLarge {
            k,
            limit: MAX_ENUM_K,
        });
    }
    if k == 0 {
        return Ok(usize::MAX);
    }
    let high = k.min(6);
    let low = k - high;
    let words = basis.row(0).len();
    let best = (0u64..1 << high)
        .into_par_iter()
        .map(|prefix| {
            let mut cw = vec![0u64; words];
            for b in 0..high {
                if (prefix >> b) & 1 == 1 {
                    xor_into(&mut cw, basis.row(low + b));
                }
            }
            let weight = |cw: &[u64]| cw.iter().map(|w| w.count_ones() as usize).sum::<usize>();
            let mut best = if prefix == 0 { usize::MAX } else { weight(&cw) };
            for step in 1u64..1 << low {
                xor_into(&mut cw, basis.row(step.trailing_zeros() as usize));
                best = best.min(weight(&cw));
            }
            best
        })
        .min()
        .unwrap();
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binmat::{rank, row_space_equal};
    use crate::galois::{cyclotomic_cosets, make_field};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ebch(m: u32, poly: Option<u32>, d: usize) -> ParentCode {
        let f = match poly {
            Some(p) => Field::with_poly(m, p).unwrap(),
            None => make_field(m).unwrap(),
        };
        ebch_check_matrix(&f, d, &Basis::polynomial(&f)).unwrap()
    }

    /// The GF(16) check matrix `(1, x_i, x_i^3)` written out in the polynomial basis.
    fn example2_check_rows() -> BitMatrix {
        let f = Field::with_poly(4, 0b11001).unwrap();
        let mut h = BitMatrix::zeros(0, 16);
        for e in [0u64, 1, 3] {
            let vals: Vec<u32> = (0..16u32).map(|x| f.pow(x, e)).collect();
            for t in 0..4 {
                let bits: Vec<u8> = vals.iter().map(|v| ((v >> t) & 1) as u8).collect();
                h.push_bits(&bits);
            }
        }
        h
    }

    #[test]
    fn ebch_16_7() {
        let p = ebch(4, Some(0b11001), 6);
        assert_eq!((p.n, p.k), (16, 7));
        assert!(row_space_equal(&p.h, &example2_check_rows()));
        assert_eq!(min_distance_bruteforce(&p.generator()).unwrap(), 6);
        // the printed locator table
        let f = Field::with_poly(4, 0b11001).unwrap();
        let a = f.alpha_pow(1);
        assert_eq!(f.pow(2, 3), f.pow(a, 3));
        assert_eq!(f.pow(12, 3), a ^ 1); // (α^2(1+α))^3 = 1 + α
        assert_eq!(f.pow(15, 3), f.pow(a, 3));
    }

    #[test]
    fn ebch_parity_and_m5() {
        for m in 2..=6 {
            let p = ebch(m, None, 2);
            assert_eq!(p.k, (1 << m) - 1);
        }
        assert_eq!(ebch(5, None, 4).k, 26);
        assert!(matches!(
            ebch_check_matrix(&make_field(4).unwrap(), 1, &Basis::polynomial(&make_field(4).unwrap())),
            Err(Error::BadDesignDistance { .. })
        ));
    }

    #[test]
    fn ebch_dimension_formula() {
        for m in 2..=7u32 {
            let cosets = cyclotomic_cosets(m);
            for d in 2..=(1usize << m) {
                let p = ebch(m, None, d);
                let used: usize = cosets
                    .iter()
                    .filter(|c| c.representative >= 1 && (c.representative as usize) < d - 1)
                    .map(|c| c.size())
                    .sum();
                assert_eq!(p.k, (1 << m) - 1 - used, "m={m} d={d}");
            }
        }
    }

    #[test]
    fn ebch_words_even_and_bch_bound() {
        for m in 2..=5u32 {
            for d in 2..=(1usize << m) {
                let p = ebch(m, None, d);
                let g = p.generator();
                for i in 0..g.rows() {
                    assert_eq!(g.row_weight(i) % 2, 0);
                    assert!(p.contains(&g.row_bits(i)));
                }
                if g.rows() > 0 && g.rows() <= MAX_ENUM_K {
                    let dist = min_distance_bruteforce(&g).unwrap();
                    assert!(dist >= d, "m={m} d={d} dist={dist}");
                }
            }
        }
    }

    #[test]
    fn any_basis_gives_same_code_dimension() {
        let f = make_field(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let basis = loop {
            let e: Vec<u32> = (0..5).map(|_| rng.gen_range(1..32)).collect();
            if let Ok(b) = Basis::new(&f, e) {
                break b;
            }
        };
        let p = ebch_check_matrix(&f, 6, &basis).unwrap();
        assert_eq!(p.k, ebch(5, None, 6).k);
    }

    #[test]
    fn rm_sets() {
        assert_eq!(rm_frozen_set(1, 3), vec![0, 1, 2, 4]);
        assert_eq!(rm_frozen_set(3, 3).len(), 8);
        assert_eq!(rm_frozen_set(1, 4), vec![0, 1, 2, 4, 8]);
    }

    #[test]
    fn generator_examples() {
        assert_eq!(generator_from_checks(&BitMatrix::identity(3)).rows(), 0);
        assert_eq!(
            generator_from_checks(&BitMatrix::from_strs(&["11"]).unwrap()),
            BitMatrix::from_strs(&["11"]).unwrap()
        );
        let p = ebch(4, Some(0b11001), 6);
        let g = generator_from_checks(&p.h);
        assert_eq!(g.rows(), 7);
        assert!(p.h.mul(&g.transpose()).unwrap().is_zero());
    }

    #[test]
    fn min_distance_examples() {
        for n in 1..12 {
            let rep = BitMatrix::from_rows(n, &[vec![1u8; n]]).unwrap();
            assert_eq!(min_distance_bruteforce(&rep).unwrap(), n);
        }
        let big = BitMatrix::identity(27);
        assert_eq!(
            min_distance_bruteforce(&big).unwrap_err(),
            Error::EnumerationTooLarge { k: 27, limit: 26 }
        );
        // dependent rows do not produce a spurious zero codeword
        let g = BitMatrix::from_strs(&["1110", "1110", "0111"]).unwrap();
        assert_eq!(min_distance_bruteforce(&g).unwrap(), 2);
    }

    #[test]
    fn min_distance_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let k = rng.gen_range(1..10);
            let n = rng.gen_range(k..20);
            let mut g = BitMatrix::zeros(k, n);
            for i in 0..k {
                for j in 0..n {
                    g.set(i, j, rng.gen());
                }
            }
            let r = rank(&g);
            let basis = right_rref(&g).matrix;
            let naive = (1u32..1 << r)
                .map(|x| {
                    let bits: Vec<u8> = (0..r).map(|i| ((x >> i) & 1) as u8).collect();
                    basis.mul_vec(&bits).iter().map(|&b| b as usize).sum::<usize>()
                })
                .min()
                .unwrap_or(usize::MAX);
            assert_eq!(min_distance_bruteforce(&g).unwrap(), naive);
        }
    }

    #[test]
    fn crc_parity_example() {
        // n = 8, classical polar with 4 frozen, 3 message bits + 1 parity
        let cs = ConstraintSystem::static_frozen(8, &[0, 1, 2, 4]).unwrap();
        let out = crc_constraint_rows(&cs, Gf2Poly(0b11)).unwrap();
        assert_eq!(out.k(), 3);
        assert_eq!(out.sources(7).unwrap(), &[3, 5, 6]);
        assert_eq!(crc_constraint_rows(&cs, Gf2Poly(1)).unwrap(), cs);
        assert!(crc_constraint_rows(&cs, Gf2Poly(0b110001)).is_err());
    }

    #[test]
    fn crc_codewords_pass_check() {
        // CRC-8 0x107 on a (64, 32+8) classical layout
        let frozen: Vec<usize> = (0..24).collect();
        let cs = ConstraintSystem::static_frozen(64, &frozen).unwrap();
        let g = Gf2Poly(0x107);
        let out = crc_constraint_rows(&cs, g).unwrap();
        let info: Vec<usize> = (0..64).filter(|&i| !cs.is_frozen(i)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let mut u = vec![0u8; 64];
            for i in 0..64 {
                if !out.is_frozen(i) {
                    u[i] = rng.gen_range(0..2);
                }
            }
            out.fill_frozen(&mut u);
            // message then CRC as a polynomial must be divisible by g
            let bits: Vec<u8> = info.iter().map(|&i| u[i]).collect();
            let mut r = Gf2Poly(0);
            for &b in &bits {
                r = Gf2Poly((r.0 << 1) | b as u64).rem(g);
            }
            assert_eq!(r, Gf2Poly(0));
        }
    }
}
