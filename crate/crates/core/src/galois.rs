//! Arithmetic in GF(2^m), cyclotomic cosets, minimal polynomials and
//! coordinate maps with respect to a basis of GF(2^m) over GF(2).
//!
//! Elements are represented as integers whose bits are the coordinates in the
//! polynomial basis `(1, α, …, α^{m-1})`, so element `i` is also the locator
//! of codeword position `i` in the standard digit order.

use crate::error::{Error, Result};

/// Primitive polynomials used when the caller does not supply one, indexed by `m`.
///
/// Mostly the Lin-Costello table; `m = 4` uses `x^4 + x^3 + 1`.
const DEFAULT_PRIMITIVE: [u32; 17] = [
    0, 0x3, 0x7, 0xB, 0x19, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B,
    0x4443, 0x8003, 0x1100B,
];

/// Default primitive polynomial for GF(2^m), as a coefficient bit-vector.
pub fn default_primitive_poly(m: u32) -> Result<u32> {
    if !(1..=16).contains(&m) {
        return Err(Error::BadDegree(m));
    }
    Ok(DEFAULT_PRIMITIVE[m as usize])
}

/// A polynomial over GF(2) of degree at most 63; bit `i` is the coefficient of `x^i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly(pub u64);

impl Gf2Poly {
    pub const ONE: Gf2Poly = Gf2Poly(1);

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            Some(63 - self.0.leading_zeros())
        }
    }

    pub fn coeff(self, i: u32) -> u8 {
        ((self.0 >> i) & 1) as u8
    }

    /// Carry-less product. Panics if the result would not fit in 64 coefficients.
    pub fn mul(self, other: Gf2Poly) -> Gf2Poly {
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return Gf2Poly(0);
        };
        assert!(da + db < 64, "polynomial product degree {} overflows", da + db);
        let mut acc = 0u64;
        let mut b = other.0;
        while b != 0 {
            let i = b.trailing_zeros();
            acc ^= self.0 << i;
            b &= b - 1;
        }
        Gf2Poly(acc)
    }

    /// Remainder modulo a nonzero polynomial.
    pub fn rem(self, modulus: Gf2Poly) -> Gf2Poly {
        let dm = modulus.degree().expect("division by the zero polynomial");
        let mut r = self.0;
        while r != 0 {
            let dr = 63 - r.leading_zeros();
            if dr < dm {
                break;
            }
            r ^= modulus.0 << (dr - dm);
        }
        Gf2Poly(r)
    }

    /// `self * other mod modulus`, without requiring the full product to fit.
    pub fn mulmod(self, other: Gf2Poly, modulus: Gf2Poly) -> Gf2Poly {
        let dm = modulus.degree().expect("division by the zero polynomial");
        assert!(dm < 63);
        let mut a = self.rem(modulus).0;
        let mut b = other.rem(modulus).0;
        let mut acc = 0u64;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if (a >> dm) & 1 == 1 {
                a ^= modulus.0;
            }
        }
        Gf2Poly(acc)
    }
}

impl std::fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let Some(d) = self.degree() else {
            return write!(f, "0");
        };
        let mut first = true;
        for i in (0..=d).rev() {
            if self.coeff(i) == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match i {
                0 => write!(f, "1")?,
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

/// GF(2^m) with log/antilog tables.
#[derive(Clone, Debug)]
pub struct Field {
    m: u32,
    poly: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.poly == other.poly
    }
}

impl Eq for Field {}

/// Builds GF(2^m) with the library's default primitive polynomial.
pub fn make_field(m: u32) -> Result<Field> {
    Field::with_poly(m, default_primitive_poly(m)?)
}

impl Field {
    pub fn new(m: u32) -> Result<Self> {
        make_field(m)
    }

    /// Builds GF(2^m) from an explicit polynomial, verifying that `x` has
    /// multiplicative order `2^m - 1` modulo it.
    pub fn with_poly(m: u32, poly: u32) -> Result<Self> {
        if !(1..=16).contains(&m) {
            return Err(Error::BadDegree(m));
        }
        let fail = |reason: &str| Error::NotPrimitive {
            poly,
            m,
            reason: reason.to_string(),
        };
        if poly >> m != 1 {
            return Err(fail("degree differs from m"));
        }
        if poly & 1 == 0 {
            return Err(fail("divisible by x"));
        }
        let q = 1u32 << m;
        let order = q - 1;
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for i in 0..order {
            if i > 0 && x == 1 {
                return Err(fail(&format!("order of the root is {i}, not {order}")));
            }
            exp[i as usize] = x;
            log[x as usize] = i;
            x <<= 1;
            if x & q != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(fail("root does not return to 1 after 2^m - 1 steps"));
        }
        for i in order..2 * order {
            exp[i as usize] = exp[(i - order) as usize];
        }
        Ok(Field { m, poly, exp, log })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Number of elements `2^m`.
    pub fn order(&self) -> u32 {
        1 << self.m
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::ZeroInverse(a));
        }
        let order = self.order() - 1;
        Ok(self.exp[((order - self.log[a as usize]) % order) as usize])
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`, with `0^0 = 1`.
    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = (self.order() - 1) as u64;
        let l = (self.log[a as usize] as u64 * (e % order)) % order;
        self.exp[l as usize]
    }

    /// `α^i` for any integer exponent.
    pub fn alpha_pow(&self, i: i64) -> u32 {
        let order = (self.order() - 1) as i64;
        self.exp[i.rem_euclid(order) as usize]
    }

    /// Discrete logarithm base `α`; `None` for zero.
    pub fn log(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    /// Absolute trace `Tr(a) = a + a^2 + … + a^{2^{m-1}}`, an element of GF(2).
    pub fn trace(&self, a: u32) -> u8 {
        let mut t = 0;
        let mut x = a;
        for _ in 0..self.m {
            t ^= x;
            x = self.mul(x, x);
        }
        debug_assert!(t <= 1);
        t as u8
    }
}

/// Free-function form of [`Field::mul`].
pub fn multiply(field: &Field, a: u32, b: u32) -> u32 {
    field.mul(a, b)
}

/// A cyclotomic coset of 2 modulo `2^m - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coset {
    pub representative: u32,
    /// `t, 2t, 4t, …` in generation order.
    pub members: Vec<u32>,
}

impl Coset {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Binary weight shared by all members.
    pub fn weight(&self) -> u32 {
        self.representative.count_ones()
    }
}

/// Partition of `{0, …, 2^m - 2}` into cyclotomic cosets, sorted by representative.
pub fn cyclotomic_cosets(m: u32) -> Vec<Coset> {
    assert!((1..=16).contains(&m), "m out of range");
    let modulus = (1u32 << m) - 1;
    let mut seen = vec![false; modulus.max(1) as usize];
    let mut out = Vec::new();
    for t in 0..modulus.max(1) {
        if seen[t as usize] {
            continue;
        }
        let mut members = Vec::new();
        let mut x = t;
        loop {
            seen[x as usize] = true;
            members.push(x);
            x = if modulus == 1 { 0 } else { (x * 2) % modulus };
            if x == t {
                break;
            }
        }
        out.push(Coset {
            representative: t,
            members,
        });
    }
    out
}

/// The coset containing `s`.
pub fn coset_of(m: u32, s: u32) -> Coset {
    let modulus = (1u32 << m) - 1;
    let s = if modulus == 1 { 0 } else { s % modulus };
    let mut members = vec![s];
    let mut x = if modulus == 1 { 0 } else { (s * 2) % modulus };
    while x != s {
        members.push(x);
        x = (x * 2) % modulus;
    }
    let representative = *members.iter().min().unwrap();
    Coset {
        representative,
        members,
    }
}

/// `∏_{j ∈ coset} (x - α^j)`, which has binary coefficients.
pub fn minimal_polynomial(field: &Field, coset: &Coset) -> Gf2Poly {
    // Coefficients in GF(2^m), lowest degree first.
    let mut coeffs: Vec<u32> = vec![1];
    for &j in &coset.members {
        let root = field.alpha_pow(j as i64);
        let mut next = vec![0u32; coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] ^= c;
            next[i] ^= field.mul(c, root);
        }
        coeffs = next;
    }
    let mut bits = 0u64;
    for (i, &c) in coeffs.iter().enumerate() {
        assert!(c <= 1, "minimal polynomial coefficient outside GF(2)");
        bits |= (c as u64) << i;
    }
    Gf2Poly(bits)
}

/// Inverts an `m × m` GF(2) matrix whose row `r` is the bitmask `rows[r]`.
fn invert_small(rows: &[u32]) -> Option<Vec<u32>> {
    let m = rows.len();
    let mut a = rows.to_vec();
    let mut inv: Vec<u32> = (0..m).map(|i| 1 << i).collect();
    for col in 0..m {
        let pivot = (col..m).find(|&r| (a[r] >> col) & 1 == 1)?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        for r in 0..m {
            if r != col && (a[r] >> col) & 1 == 1 {
                a[r] ^= a[col];
                inv[r] ^= inv[col];
            }
        }
    }
    Some(inv)
}

/// A basis of GF(2^m) over GF(2) with precomputed coordinate map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    elems: Vec<u32>,
    // Row j is the mask selecting coordinate j: c_j = parity(to_coord[j] & x).
    to_coord: Vec<u32>,
}

impl Basis {
    /// `(1, α, …, α^{m-1})`.
    pub fn polynomial(field: &Field) -> Basis {
        let m = field.m();
        Basis {
            elems: (0..m).map(|i| 1 << i).collect(),
            to_coord: (0..m).map(|i| 1 << i).collect(),
        }
    }

    pub fn new(field: &Field, elems: Vec<u32>) -> Result<Basis> {
        let m = field.m() as usize;
        if elems.len() != m || elems.iter().any(|&e| e >= field.order()) {
            return Err(Error::Dimension(format!(
                "basis needs {m} elements of GF(2^{m})"
            )));
        }
        // Column j of the element matrix is elems[j]; row r collects bit r.
        let rows: Vec<u32> = (0..m)
            .map(|r| {
                elems
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (j, &e)| acc | (((e >> r) & 1) << j))
            })
            .collect();
        let inv = invert_small(&rows).ok_or(Error::DependentBasis)?;
        Ok(Basis {
            elems,
            to_coord: inv,
        })
    }

    pub fn elements(&self) -> &[u32] {
        &self.elems
    }

    pub fn dim(&self) -> usize {
        self.elems.len()
    }

    /// Coordinates of `x` packed into a bitmask (bit `j` is the coefficient of `β_j`).
    pub fn coordinates_mask(&self, x: u32) -> u32 {
        self.to_coord
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &row)| acc | (((row & x).count_ones() & 1) << j))
    }

    pub fn element_from_mask(&self, coords: u32) -> u32 {
        self.elems
            .iter()
            .enumerate()
            .filter(|(j, _)| (coords >> j) & 1 == 1)
            .fold(0, |acc, (_, &e)| acc ^ e)
    }

    /// Trace-dual basis `γ` with `Tr(β_i γ_j) = δ_ij`.
    pub fn dual(&self, field: &Field) -> Basis {
        let m = self.elems.len();
        // Row i of the trace form: bit b = Tr(β_i · 2^b).
        let rows: Vec<u32> = self
            .elems
            .iter()
            .map(|&b| (0..m).fold(0, |acc, bit| acc | ((field.trace(field.mul(b, 1 << bit)) as u32) << bit)))
            .collect();
        let inv = invert_small(&rows).expect("trace form is nondegenerate");
        // γ_j is column j of the inverse.
        let gammas: Vec<u32> = (0..m)
            .map(|j| (0..m).fold(0, |acc, r| acc | (((inv[r] >> j) & 1) << r)))
            .collect();
        Basis::new(field, gammas).expect("dual basis is a basis")
    }
}

/// Coordinates of `x` in `basis` as a bit vector of length `m`.
pub fn to_coordinates(basis: &Basis, x: u32) -> Vec<u8> {
    let mask = basis.coordinates_mask(x);
    (0..basis.dim()).map(|j| ((mask >> j) & 1) as u8).collect()
}

/// Inverse of [`to_coordinates`].
pub fn from_coordinates(basis: &Basis, coords: &[u8]) -> u32 {
    let mask = coords
        .iter()
        .enumerate()
        .fold(0u32, |acc, (j, &c)| acc | (((c & 1) as u32) << j));
    basis.element_from_mask(mask)
}
