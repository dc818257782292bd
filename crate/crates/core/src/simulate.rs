//! Channel models and Monte Carlo frame error rate measurement.
//!
//! Frame `f` of a run with seed `s` draws everything (information bits first,
//! then noise) from the ChaCha8 stream `(s, f)`, so results do not depend on
//! how frames are spread over worker threads.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::construct::CodeSpec;
use crate::decode::{ListDecoder, ScDecoder};
use crate::error::{Error, Result};
use crate::polarize::arikan_transform;

/// Magnitude of the LLR given to unerased BEC symbols.
pub const BEC_LLR: f64 = 1000.0;

/// Frames decoded per scheduling round; stopping is decided in frame order
/// after each round.
const CHUNK: u64 = 512;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelSpec {
    Bec { eps: f64 },
    /// Binary-input AWGN with BPSK, parameterized by Es/N0 in dB.
    Awgn { es_n0_db: f64 },
}

impl ChannelSpec {
    /// AWGN point from Eb/N0 for a code of rate `rate`.
    pub fn awgn_from_eb_n0(eb_n0_db: f64, rate: f64) -> ChannelSpec {
        ChannelSpec::Awgn {
            es_n0_db: eb_n0_db + 10.0 * rate.log10(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelSpec::Bec { eps } if !(0.0..=1.0).contains(&eps) => {
                Err(Error::Invalid(format!("erasure probability {eps} outside [0, 1]")))
            }
            ChannelSpec::Awgn { es_n0_db } if !es_n0_db.is_finite() => {
                Err(Error::Invalid("Es/N0 must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ChannelSpec::Bec { .. } => "bec",
            ChannelSpec::Awgn { .. } => "biawgn",
        }
    }

    /// Erasure probability or Es/N0 in dB.
    pub fn param(&self) -> f64 {
        match *self {
            ChannelSpec::Bec { eps } => eps,
            ChannelSpec::Awgn { es_n0_db } => es_n0_db,
        }
    }

    /// Noise standard deviation, `σ² = 1 / (2 Es/N0)`.
    pub fn sigma(&self) -> Option<f64> {
        match *self {
            ChannelSpec::Awgn { es_n0_db } => {
                let es_n0 = 10f64.powf(es_n0_db / 10.0);
                Some((0.5 / es_n0).sqrt())
            }
            ChannelSpec::Bec { .. } => None,
        }
    }

    /// Eb/N0 in dB for a code of rate `rate`.
    pub fn eb_n0_db(&self, rate: f64) -> Option<f64> {
        match *self {
            ChannelSpec::Awgn { es_n0_db } => Some(es_n0_db - 10.0 * rate.log10()),
            ChannelSpec::Bec { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Transmits `codeword` and returns channel LLRs (positive favours 0).
    pub fn llrs(&self, codeword: &[u8], rng: &mut impl Rng) -> Vec<f64> {
        match *self {
            ChannelSpec::Bec { eps } => codeword
                .iter()
                .map(|&b| {
                    if rng.gen::<f64>() < eps {
                        0.0
                    } else if b == 0 {
                        BEC_LLR
                    } else {
                        -BEC_LLR
                    }
                })
                .collect(),
            ChannelSpec::Awgn { .. } => {
                let sigma = self.sigma().unwrap();
                let scale = 2.0 / (sigma * sigma);
                codeword
                    .iter()
                    .map(|&b| {
                        let x = 1.0 - 2.0 * b as f64;
                        let z: f64 = rng.sample(StandardNormal);
                        scale * (x + sigma * z)
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ChannelSpec::Bec { eps } => write!(f, "bec({eps})"),
            ChannelSpec::Awgn { es_n0_db } => write!(f, "awgn(esn0={es_n0_db}dB)"),
        }
    }
}

/// Free-function form of [`ChannelSpec::llrs`].
pub fn channel_llrs(channel: &ChannelSpec, codeword: &[u8], rng: &mut impl Rng) -> Vec<f64> {
    channel.llrs(codeword, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderKind {
    Sc,
    List(usize),
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecoderKind::Sc => write!(f, "sc"),
            DecoderKind::List(l) => write!(f, "list{l}"),
        }
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "sc" {
            return Ok(DecoderKind::Sc);
        }
        s.strip_prefix("list")
            .and_then(|l| l.parse().ok())
            .filter(|&l: &usize| l >= 1)
            .map(DecoderKind::List)
            .ok_or_else(|| Error::Invalid(format!("unknown decoder {s:?}; use sc or list<L>")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StopRule {
    pub max_frames: u64,
    /// Zero disables the error target.
    pub target_errors: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            max_frames: 1_000_000,
            target_errors: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    pub code: String,
    pub decoder: String,
    pub channel: ChannelSpec,
    /// Eb/N0 of the AWGN point for the simulated code rate.
    pub eb_n0_db: Option<f64>,
    pub frames: u64,
    pub frame_errors: u64,
    /// Information bit errors.
    pub bit_errors: u64,
    pub fer: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
    pub seconds: f64,
}

impl SimReport {
    pub const CSV_HEADER: &'static str =
        "code,decoder,channel_kind,param_db_or_eps,frames,frame_errors,fer,ci_lo,ci_hi,seed,seconds";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6e},{:.6e},{:.6e},{},{:.3}",
            self.code,
            self.decoder,
            self.channel.kind(),
            self.channel.param(),
            self.frames,
            self.frame_errors,
            self.fer,
            self.ci_lo,
            self.ci_hi,
            self.seed,
            self.seconds
        )
    }

    /// True when the two 95% intervals are disjoint.
    pub fn ci_disjoint(&self, other: &SimReport) -> bool {
        self.ci_hi < other.ci_lo || other.ci_hi < self.ci_lo
    }
}

/// 95% Wilson score interval for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

enum AnyDecoder {
    Sc(ScDecoder),
    List(ListDecoder),
}

/// Outcome of one simulated frame.
#[derive(Clone, Copy, Default)]
struct Frame {
    error: bool,
    bit_errors: u32,
}

struct FrameRunner<'a> {
    spec: &'a CodeSpec,
    channel: ChannelSpec,
    seed: u64,
    info: Vec<usize>,
}

impl FrameRunner<'_> {
    fn new_decoder(&self, kind: DecoderKind) -> AnyDecoder {
        match kind {
            DecoderKind::Sc => AnyDecoder::Sc(ScDecoder::new(self.spec).expect("checked")),
            DecoderKind::List(l) => AnyDecoder::List(ListDecoder::new(self.spec, l).expect("checked")),
        }
    }

    fn run(&self, dec: &mut AnyDecoder, frame: u64) -> Frame {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(frame);
        let x: Vec<u8> = (0..self.spec.k).map(|_| rng.gen_range(0..2u8)).collect();
        let c = self.spec.encode(&x).expect("checked");
        let llr = self.channel.llrs(&c, &mut rng);
        let chat = match dec {
            AnyDecoder::Sc(d) => d.decode(&llr).expect("checked").codeword,
            AnyDecoder::List(d) => {
                let mut out = Vec::new();
                d.decode_best_codeword(&llr, &mut out).expect("checked");
                out
            }
        };
        if chat == c {
            return Frame::default();
        }
        // A is an involution under the digit-reversed row order used here.
        let rev = crate::binmat::digit_reversal(2, self.spec.m);
        let mut v: Vec<u8> = (0..self.spec.n).map(|i| chat[rev[i]]).collect();
        arikan_transform(&mut v);
        let bit_errors = self
            .info
            .iter()
            .zip(&x)
            .filter(|(&i, &b)| v[i] != b)
            .count() as u32;
        Frame {
            error: true,
            bit_errors,
        }
    }
}

/// Measures the frame error rate of `spec` under `decoder` on `channel`.
///
/// Frames are decoded in rounds of a fixed size on `workers` threads; the
/// run stops at the first frame (in index order) where either limit of
/// `stop` is reached, so the report depends only on the inputs and `seed`.
pub fn run_fer(
    spec: &CodeSpec,
    decoder: DecoderKind,
    channel: ChannelSpec,
    stop: StopRule,
    seed: u64,
    workers: usize,
) -> Result<SimReport> {
    spec.validate()?;
    channel.validate()?;
    match decoder {
        DecoderKind::Sc => drop(ScDecoder::new(spec)?),
        DecoderKind::List(l) => drop(ListDecoder::new(spec, l)?),
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let runner = FrameRunner {
        spec,
        channel,
        seed,
        info: spec.constraints.non_frozen(),
    };
    let start = Instant::now();
    let (mut frames, mut frame_errors, mut bit_errors) = (0u64, 0u64, 0u64);
    let reached = |e: u64| stop.target_errors > 0 && e >= stop.target_errors;
    'outer: while frames < stop.max_frames && !reached(frame_errors) {
        let end = (frames + CHUNK).min(stop.max_frames);
        let results: Vec<Frame> = pool.install(|| {
            (frames..end)
                .into_par_iter()
                .map_init(|| runner.new_decoder(decoder), |dec, f| runner.run(dec, f))
                .collect()
        });
        for r in results {
            frames += 1;
            if r.error {
                frame_errors += 1;
                bit_errors += r.bit_errors as u64;
                if reached(frame_errors) {
                    break 'outer;
                }
            }
        }
    }
    let (ci_lo, ci_hi) = wilson_interval(frame_errors, frames);
    let rate = spec.k as f64 / spec.n as f64;
    Ok(SimReport {
        code: format!("n{}k{}", spec.n, spec.k),
        decoder: decoder.to_string(),
        channel,
        eb_n0_db: channel.eb_n0_db(rate),
        frames,
        frame_errors,
        bit_errors,
        fer: if frames == 0 { 0.0 } else { frame_errors as f64 / frames as f64 },
        ci_lo,
        ci_hi,
        seed,
        seconds: start.elapsed().as_secs_f64(),
    })
}
