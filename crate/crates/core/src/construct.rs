//! Polar subcode and classical polar code construction.

use crate::binmat::{right_rref, BitMatrix};
use crate::error::{Error, Result};
use crate::galois::cyclotomic_cosets;
use crate::parentcodes::ParentCode;
use crate::simulate::ChannelSpec;
use crate::polarize::{
    bec_reliability, derive_constraints, ga_reliability, polarizing_matrix, transform_encode, ConstraintSystem, Kernel, KernelKind,
    ProfileKind, ReliabilityProfile,
};

/// Complete definition of a polar subcode.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeSpec {
    pub n: usize,
    pub k: usize,
    pub kernel: KernelKind,
    pub l: usize,
    pub m: u32,
    pub constraints: ConstraintSystem,
    /// Description of the parent code, e.g. `ebch(m=10,d=28)`.
    pub parent: String,
    /// Channel the reliabilities were computed for.
    pub channel: String,
}

impl CodeSpec {
    /// Arikan-kernel spec; `n` must be a power of two.
    pub fn arikan(cs: ConstraintSystem, parent: &str, channel: &str) -> CodeSpec {
        let n = cs.n();
        assert!(n.is_power_of_two(), "length {n} is not a power of two");
        CodeSpec {
            n,
            k: cs.k(),
            kernel: KernelKind::Arikan,
            l: 2,
            m: n.trailing_zeros(),
            constraints: cs,
            parent: parent.into(),
            channel: channel.into(),
        }
    }

    /// Checks the dimension fields against the constraint system.
    pub fn validate(&self) -> Result<()> {
        if self.l < 2 || self.l.checked_pow(self.m) != Some(self.n) {
            return Err(Error::Invalid(format!(
                "n = {} is not {}^{}",
                self.n, self.l, self.m
            )));
        }
        if self.constraints.n() != self.n {
            return Err(Error::Invalid("constraint length differs from n".into()));
        }
        if self.k != self.constraints.k() {
            return Err(Error::Invalid(format!(
                "k = {} but the constraints leave {} free inputs",
                self.k,
                self.constraints.k()
            )));
        }
        if self.kernel == KernelKind::Arikan && self.l != 2 {
            return Err(Error::Invalid("the Arikan kernel has l = 2".into()));
        }
        Ok(())
    }

    /// Encodes `k` information bits: `u` takes them on the non-frozen
    /// positions and the frozen positions are evaluated, then `c = uA`.
    /// This equals `x W A` with `W` from [`precoder_matrix`].
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k {
            return Err(Error::Dimension(format!(
                "{} information bits for k = {}",
                info.len(),
                self.k
            )));
        }
        let u = self.input_vector(info);
        transform_encode(&u, &self.binary_kernel()?, self.m)
    }

    /// Input vector `u` carrying `info` on the non-frozen positions.
    pub fn input_vector(&self, info: &[u8]) -> Vec<u8> {
        let mut u = vec![0u8; self.n];
        for (&i, &b) in self.constraints.non_frozen().iter().zip(info) {
            u[i] = b & 1;
        }
        self.constraints.fill_frozen(&mut u);
        u
    }

    fn binary_kernel(&self) -> Result<Kernel> {
        match self.kernel {
            KernelKind::ReedSolomon => Err(Error::Unsupported(
                "binary encoding with a Reed-Solomon kernel".into(),
            )),
            kind => crate::polarize::make_kernel(kind, self.l, None),
        }
    }

    /// `k × n` generator `W A`.
    pub fn generator_matrix(&self) -> BitMatrix {
        let a = polarizing_matrix(&self.binary_kernel().expect("binary kernel"), self.m)
            .expect("transform size");
        precoder_matrix(&self.constraints).mul(&a).expect("shapes agree")
    }
}

/// Error-probability profile used for construction: exact `Z_i / 2` on the
/// BEC, Gaussian approximation on AWGN.
pub fn design_profile(m: u32, channel: &ChannelSpec) -> Result<ReliabilityProfile> {
    channel.validate()?;
    let mut p = match *channel {
        ChannelSpec::Bec { eps } => bec_reliability(m, eps).bec_error_probs(),
        ChannelSpec::Awgn { .. } => ga_reliability(m, channel.sigma().expect("awgn")),
    };
    p.channel = channel.label();
    Ok(p)
}

/// Indices of the `count` largest values, ties toward the smaller index.
fn worst_indices(values: &[f64], candidates: &[usize], count: usize) -> Vec<usize> {
    let mut order = candidates.to_vec();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(count);
    order.sort_unstable();
    order
}

fn require_error_probs(profile: &ReliabilityProfile) -> Result<()> {
    if profile.kind != ProfileKind::ErrorProb {
        return Err(Error::ProfileKind {
            expected: ProfileKind::ErrorProb.to_string(),
            got: profile.kind.to_string(),
        });
    }
    Ok(())
}

/// Polar subcode of the parent: freezes the `k' - k` non-frozen inputs with
/// the largest error probabilities (ties freeze the smaller index).
pub fn build_polar_subcode(
    parent_cs: &ConstraintSystem,
    profile: &ReliabilityProfile,
    k: usize,
) -> Result<CodeSpec> {
    require_error_probs(profile)?;
    let n = parent_cs.n();
    if profile.n() != n {
        return Err(Error::Dimension(format!(
            "profile of length {} for a code of length {n}",
            profile.n()
        )));
    }
    let k_parent = parent_cs.k();
    if k > k_parent {
        return Err(Error::Infeasible { k, max: k_parent });
    }
    let extra = worst_indices(&profile.values, &parent_cs.non_frozen(), k_parent - k);
    let cs = parent_cs.with_static(&extra)?;
    Ok(CodeSpec::arikan(cs, "custom", &profile.channel))
}

/// Classical polar code freezing the `n - k` least reliable inputs.
pub fn build_classical_polar(n: usize, k: usize, profile: &ReliabilityProfile) -> Result<CodeSpec> {
    if profile.n() != n {
        return Err(Error::Dimension(format!(
            "profile of length {} for a code of length {n}",
            profile.n()
        )));
    }
    if k > n {
        return Err(Error::Infeasible { k, max: n });
    }
    let all: Vec<usize> = (0..n).collect();
    let frozen = worst_indices(&profile.values, &all, n - k);
    let cs = ConstraintSystem::static_frozen(n, &frozen)?;
    Ok(CodeSpec::arikan(cs, "none", &profile.channel))
}

/// `k × n` matrix `W` with `W V^T = 0`: row `t` is the unit vector at the
/// `t`-th non-frozen index plus every frozen index whose constraint uses it.
pub fn precoder_matrix(cs: &ConstraintSystem) -> BitMatrix {
    let free = cs.non_frozen();
    let mut pos = vec![usize::MAX; cs.n()];
    for (t, &f) in free.iter().enumerate() {
        pos[f] = t;
    }
    let mut w = BitMatrix::zeros(free.len(), cs.n());
    for (t, &f) in free.iter().enumerate() {
        w.set(t, f, true);
    }
    for (j, srcs) in cs.rows() {
        for &s in srcs {
            w.set(pos[s], j, true);
        }
    }
    w
}

/// Adds block-diagonal outer constraints to a parent system. `outer[i]`
/// constrains inputs `i·b .. (i+1)·b` with `b = n / outer.len()`.
pub fn stack_outer_constraints(
    parent_cs: &ConstraintSystem,
    outer: &[ConstraintSystem],
) -> Result<ConstraintSystem> {
    let n = parent_cs.n();
    if outer.is_empty() || n % outer.len() != 0 || !(n / outer.len()).is_power_of_two() {
        return Err(Error::Dimension(format!(
            "{} outer blocks for length {n}",
            outer.len()
        )));
    }
    let b = n / outer.len();
    let mut v = parent_cs.to_matrix();
    for (i, o) in outer.iter().enumerate() {
        if o.n() != b {
            return Err(Error::Dimension(format!(
                "outer system {i} has length {}, expected {b}",
                o.n()
            )));
        }
        for (j, srcs) in o.rows() {
            let mut row = vec![0u8; n];
            row[i * b + j] = 1;
            for &s in srcs {
                row[i * b + s] = 1;
            }
            v.push_bits(&row);
        }
    }
    Ok(ConstraintSystem::from_rref(&right_rref(&v), n))
}

/// Frozen-index counts by binary weight, observed and predicted.
#[derive(Clone, Debug, PartialEq)]
pub struct Census {
    /// `observed[t]`: frozen indices `i` with `wt(i) = t`.
    pub observed: Vec<usize>,
    /// `predicted[t]`: `Σ m_s` over coset representatives `s < d - 1` of weight `t`.
    pub predicted: Vec<usize>,
}

impl Census {
    pub fn matches(&self) -> bool {
        self.observed == self.predicted
    }
}

/// Per-weight frozen counts of an EBCH parent under the Arikan transform.
pub fn theorem2_census(parent: &ParentCode, m: u32) -> Result<Census> {
    if !parent.label.starts_with("ebch") {
        return Err(Error::Invalid(format!(
            "weight census needs an EBCH parent, got {}",
            parent.label
        )));
    }
    let cs = derive_constraints(parent, &Kernel::arikan(), m)?;
    let mut observed = vec![0usize; m as usize + 1];
    for &j in cs.frozen() {
        observed[j.count_ones() as usize] += 1;
    }
    let mut predicted = vec![0usize; m as usize + 1];
    for c in cyclotomic_cosets(m) {
        if (c.representative as usize) < parent.design_d - 1 {
            predicted[c.weight() as usize] += c.size();
        }
    }
    Ok(Census { observed, predicted })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::binmat::{null_space, rank};
    use crate::galois::{make_field, Basis};
    use crate::parentcodes::ebch_check_matrix;
    use crate::polarize::tests::{example2_parent, example2_system};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn example3_spec() -> CodeSpec {
        let p = bec_reliability(4, 0.5).bec_error_probs();
        build_polar_subcode(&example2_system(), &p, 6).unwrap()
    }

    #[test]
    fn example3_extra_freeze() {
        let spec = example3_spec();
        assert_eq!(spec.k, 6);
        assert_eq!(spec.constraints.frozen(), &[0, 1, 2, 3, 4, 6, 8, 9, 10, 12]);
        assert!(spec.constraints.sources(3).unwrap().is_empty());
        spec.validate().unwrap();
    }

    #[test]
    fn subcode_rejects_wrong_inputs() {
        let z = bec_reliability(4, 0.5);
        assert!(matches!(
            build_polar_subcode(&example2_system(), &z, 6),
            Err(Error::ProfileKind { .. })
        ));
        let p = z.bec_error_probs();
        assert!(matches!(
            build_polar_subcode(&example2_system(), &p, 8),
            Err(Error::Infeasible { k: 8, max: 7 })
        ));
        let same = build_polar_subcode(&example2_system(), &p, 7).unwrap();
        assert_eq!(same.constraints, example2_system());
    }

    #[test]
    fn classical_polar_examples() {
        let z = bec_reliability(4, 0.5);
        let spec = build_classical_polar(16, 8, &z).unwrap();
        assert_eq!(spec.constraints.frozen(), &[0, 1, 2, 3, 4, 5, 6, 8]);
        let full = build_classical_polar(16, 16, &z).unwrap();
        assert!(full.constraints.frozen().is_empty());
    }

    #[test]
    fn design_profiles() {
        let p = design_profile(4, &ChannelSpec::Bec { eps: 0.5 }).unwrap();
        assert_eq!(p.kind, ProfileKind::ErrorProb);
        assert_eq!(p.channel, "bec(0.5)");
        assert!((p.values[3] - 0.772476 / 2.0).abs() < 1e-6);
        let a = design_profile(3, &ChannelSpec::Awgn { es_n0_db: -1.0 }).unwrap();
        assert_eq!(a.channel, "awgn(esn0=-1dB)");
        assert!(a.values.windows(2).any(|w| w[0] > w[1]));
        assert!(design_profile(3, &ChannelSpec::Bec { eps: 2.0 }).is_err());
    }

    #[test]
    fn ties_freeze_smaller_index() {
        let p = ReliabilityProfile {
            kind: ProfileKind::ErrorProb,
            values: vec![0.5, 0.25, 0.25, 0.0],
            channel: "t".into(),
        };
        let spec = build_classical_polar(4, 2, &p).unwrap();
        assert_eq!(spec.constraints.frozen(), &[0, 1]);
    }

    #[test]
    fn precoder_properties() {
        let cs = example2_system();
        let w = precoder_matrix(&cs);
        assert_eq!((w.rows(), w.cols()), (7, 16));
        assert_eq!(rank(&w), 7);
        assert!(w.mul(&cs.to_matrix().transpose()).unwrap().is_zero());

        let stat = ConstraintSystem::static_frozen(8, &[0, 1, 2, 4]).unwrap();
        let ws = precoder_matrix(&stat);
        for (t, f) in [3, 5, 6, 7].into_iter().enumerate() {
            assert_eq!(ws.row_bits(t).iter().map(|&b| b as usize).sum::<usize>(), 1);
            assert!(ws.get(t, f));
        }
        assert_eq!(precoder_matrix(&ConstraintSystem::empty(8)), BitMatrix::identity(8));
    }

    #[test]
    fn encode_matches_precoder() {
        let spec = example3_spec();
        let g = spec.generator_matrix();
        let parent = example2_parent();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..64 {
            let x: Vec<u8> = (0..spec.k).map(|_| rng.gen_range(0..2)).collect();
            let c = spec.encode(&x).unwrap();
            let t = g.mul_vec(&x);
            assert_eq!(c, t);
            assert!(parent.contains(&c));
        }
        assert!(spec.encode(&[0; 5]).is_err());
    }

    #[test]
    fn subcode_of_parent_exhaustive() {
        let spec = example3_spec();
        let parent = example2_parent();
        for x in 0..1u32 << spec.k {
            let bits: Vec<u8> = (0..spec.k).map(|i| ((x >> i) & 1) as u8).collect();
            assert!(parent.contains(&spec.encode(&bits).unwrap()));
        }
    }

    #[test]
    fn stacking_outer_constraints() {
        let parent = example2_system();
        let none: Vec<ConstraintSystem> = (0..4).map(|_| ConstraintSystem::empty(4)).collect();
        assert_eq!(stack_outer_constraints(&parent, &none).unwrap(), parent);

        let mut full = none.clone();
        full[0] = ConstraintSystem::static_frozen(4, &[0, 1, 2, 3]).unwrap();
        let s = stack_outer_constraints(&parent, &full).unwrap();
        assert!((0..4).all(|i| s.is_frozen(i)));

        // single parity check on every block: u_{4i+3} = u_{4i} + u_{4i+1} + u_{4i+2}
        let spc = ConstraintSystem::from_rows(4, vec![(3, vec![0, 1, 2])]).unwrap();
        let outer = vec![spc; 4];
        let s = stack_outer_constraints(&parent, &outer).unwrap();
        let mut stack = parent.to_matrix();
        for i in 0..4 {
            let mut row = vec![0u8; 16];
            for j in 0..4 {
                row[4 * i + j] = 1;
            }
            stack.push_bits(&row);
        }
        assert_eq!(s.frozen().len(), rank(&stack));
        let spec = CodeSpec::arikan(s.clone(), "stacked", "none");
        let g = spec.generator_matrix();
        let a = polarizing_matrix(&Kernel::arikan(), 4).unwrap();
        let pc = example2_parent();
        for x in 0..1u32 << spec.k {
            let bits: Vec<u8> = (0..spec.k).map(|i| ((x >> i) & 1) as u8).collect();
            let c = g.mul_vec(&bits);
            assert!(pc.contains(&c));
            // A is an involution, so u = cA
            let u = a.mul_vec(&c);
            for i in 0..4 {
                assert_eq!(u[4 * i..4 * i + 4].iter().fold(0, |p, &b| p ^ b), 0);
            }
        }
        assert!(stack_outer_constraints(&parent, &vec![ConstraintSystem::empty(5); 3]).is_err());
        let _ = null_space;
    }

    #[test]
    fn census_examples() {
        let c = theorem2_census(&example2_parent(), 4).unwrap();
        assert_eq!(c.predicted, vec![1, 4, 4, 0, 0]);
        assert!(c.matches());
        let f5 = make_field(5).unwrap();
        let b5 = Basis::polynomial(&f5);
        let c = theorem2_census(&ebch_check_matrix(&f5, 4, &b5).unwrap(), 5).unwrap();
        assert_eq!(c.predicted, vec![1, 5, 0, 0, 0, 0]);
        assert!(c.matches());
        let c = theorem2_census(&ebch_check_matrix(&f5, 2, &b5).unwrap(), 5).unwrap();
        assert_eq!(c.predicted, vec![1, 0, 0, 0, 0, 0]);
        assert!(c.matches());
        assert!(theorem2_census(&ParentCode::full_space(16), 4).is_err());
    }

    #[test]
    fn census_all_small_ebch() {
        for m in 4..=6 {
            let f = make_field(m).unwrap();
            let b = Basis::polynomial(&f);
            for d in 2..=(1usize << m) {
                let p = ebch_check_matrix(&f, d, &b).unwrap();
                let c = theorem2_census(&p, m).unwrap();
                assert!(c.matches(), "m={m} d={d} {c:?}");
            }
        }
    }
}
