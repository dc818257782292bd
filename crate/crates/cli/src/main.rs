//! `psc`: construct, analyze and simulate polar subcodes.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use polar_subcodes::construct::{build_polar_subcode, design_profile, CodeSpec};
use polar_subcodes::galois::{Basis, Field};
use polar_subcodes::parentcodes::{ebch_check_matrix, min_distance_bruteforce, MAX_ENUM_K};
use polar_subcodes::polarize::{derive_constraints, sc_error_prob, ConstraintSystem, Kernel};
use polar_subcodes::pscf;
use polar_subcodes::simulate::{run_fer, ChannelSpec, DecoderKind, SimReport, StopRule};

/// Exit code for unreadable or invalid data.
const EXIT_DATA: u8 = 3;

#[derive(Parser)]
#[command(name = "psc", version, about = "Polar subcodes with dynamic frozen symbols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ParentKind {
    Ebch,
    None,
}

/// A channel point: `bec:<eps>`, `esn0:<dB>` or `ebn0:<dB>`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum ChannelArg {
    Bec(f64),
    EsN0(f64),
    EbN0(f64),
}

impl ChannelArg {
    fn resolve(self, rate: f64) -> ChannelSpec {
        match self {
            ChannelArg::Bec(eps) => ChannelSpec::Bec { eps },
            ChannelArg::EsN0(db) => ChannelSpec::Awgn { es_n0_db: db },
            ChannelArg::EbN0(db) => ChannelSpec::awgn_from_eb_n0(db, rate),
        }
    }
}

fn parse_channel(s: &str) -> std::result::Result<ChannelArg, String> {
    let (kind, value) = s
        .split_once(':')
        .ok_or_else(|| format!("expected bec:<eps>, esn0:<dB> or ebn0:<dB>, got {s:?}"))?;
    let v: f64 = value
        .parse()
        .map_err(|_| format!("invalid number {value:?}"))?;
    if !v.is_finite() {
        return Err(format!("{value:?} is not finite"));
    }
    match kind {
        "bec" if (0.0..=1.0).contains(&v) => Ok(ChannelArg::Bec(v)),
        "bec" => Err(format!("erasure probability {v} outside [0, 1]")),
        "esn0" => Ok(ChannelArg::EsN0(v)),
        "ebn0" => Ok(ChannelArg::EbN0(v)),
        _ => Err(format!("unknown channel kind {kind:?}")),
    }
}

fn parse_decoder(s: &str) -> std::result::Result<DecoderKind, String> {
    s.parse().map_err(|e: polar_subcodes::Error| e.to_string())
}

fn parse_poly(s: &str) -> std::result::Result<u32, String> {
    let t = s.trim_start_matches("0x");
    u32::from_str_radix(t, 16).map_err(|_| format!("invalid hexadecimal polynomial {s:?}"))
}

#[derive(Subcommand)]
enum Command {
    /// Build a polar subcode and write it as PSCF.
    Construct {
        /// Parent code.
        #[arg(long, value_enum)]
        parent: ParentKind,
        /// Number of levels; the code length is 2^m.
        #[arg(long)]
        m: u32,
        /// Design distance of the EBCH parent.
        #[arg(long, required_if_eq("parent", "ebch"))]
        d: Option<usize>,
        /// Primitive polynomial of GF(2^m) in hexadecimal (default: built-in table).
        #[arg(long, value_parser = parse_poly)]
        poly: Option<u32>,
        /// Design channel: bec:<eps>, esn0:<dB> or ebn0:<dB> (ebn0 uses the rate k/n).
        #[arg(long, value_parser = parse_channel)]
        channel: ChannelArg,
        /// Code dimension.
        #[arg(long)]
        k: usize,
        /// Output file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print structural information about a PSCF code.
    Analyze {
        /// PSCF file.
        spec: PathBuf,
        /// Channel for the SC error probability estimate.
        #[arg(long, value_parser = parse_channel)]
        channel: Option<ChannelArg>,
    },
    /// Measure the frame error rate over a sweep of channel points.
    Simulate {
        /// PSCF file.
        spec: PathBuf,
        /// `sc` or `list<L>`, e.g. `list32`.
        #[arg(long, default_value = "list32", value_parser = parse_decoder)]
        decoder: DecoderKind,
        /// Channel points, e.g. `ebn0:1.5,ebn0:2` or `bec:0.4`.
        #[arg(long, value_parser = parse_channel, value_delimiter = ',', required = true)]
        channel: Vec<ChannelArg>,
        #[arg(long, default_value_t = 1_000_000)]
        max_frames: u64,
        /// Stop after this many frame errors (0 disables).
        #[arg(long, default_value_t = 100)]
        target_errors: u64,
        /// Seed of the per-frame random streams.
        #[arg(long)]
        seed: u64,
        /// Worker threads (default: available parallelism).
        #[arg(long, env = "PSC_WORKERS")]
        workers: Option<usize>,
        /// CSV output file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write 0 in the seconds column so reruns give identical files.
        #[arg(long)]
        no_wall_time: bool,
    },
}

fn read_spec(path: &PathBuf) -> Result<CodeSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    pscf::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn construct(
    parent: ParentKind,
    m: u32,
    d: Option<usize>,
    poly: Option<u32>,
    channel: ChannelArg,
    k: usize,
    out: &Option<PathBuf>,
) -> Result<()> {
    if !(1..=20).contains(&m) {
        bail!("m must be in 1..=20");
    }
    let n = 1usize << m;
    let (cs, label) = match parent {
        ParentKind::None => (ConstraintSystem::empty(n), "none".to_string()),
        ParentKind::Ebch => {
            let field = match poly {
                Some(p) => Field::with_poly(m, p)?,
                None => Field::new(m)?,
            };
            let d = d.expect("clap requires --d");
            let pc = ebch_check_matrix(&field, d, &Basis::polynomial(&field))?;
            let label = pc.label.clone();
            (derive_constraints(&pc, &Kernel::arikan(), m)?, label)
        }
    };
    let ch = channel.resolve(k as f64 / n as f64);
    let profile = design_profile(m, &ch)?;
    let mut spec = build_polar_subcode(&cs, &profile, k)?;
    spec.parent = label;
    write_output(out, &pscf::serialize(&spec))?;
    let diag = format!(
        "parent {}: k' = {}; code ({}, {}); nontrivial dynamic rows f = {}; terms T = {}\n",
        spec.parent,
        cs.k(),
        spec.n,
        spec.k,
        spec.constraints.nontrivial_rows(),
        spec.constraints.total_terms()
    );
    if out.is_some() {
        print!("{diag}");
    } else {
        eprint!("{diag}");
    }
    Ok(())
}

fn analyze(path: &PathBuf, channel: Option<ChannelArg>) -> Result<()> {
    let spec = read_spec(path)?;
    let cs = &spec.constraints;
    println!("n {}", spec.n);
    println!("k {}", spec.k);
    println!("kernel {} l={} m={}", spec.kernel, spec.l, spec.m);
    if !spec.parent.is_empty() {
        println!("parent {}", spec.parent);
    }
    if !spec.channel.is_empty() {
        println!("design channel {}", spec.channel);
    }
    println!(
        "frozen {} (dynamic {}), nontrivial rows f = {}, terms T = {}",
        cs.frozen().len(),
        cs.rows().filter(|(_, s)| !s.is_empty()).count(),
        cs.nontrivial_rows(),
        cs.total_terms()
    );
    let max_w = (usize::BITS - spec.n.leading_zeros()) as usize;
    let mut hist = vec![0usize; max_w + 1];
    for &j in cs.frozen() {
        hist[j.count_ones() as usize] += 1;
    }
    while hist.len() > 1 && hist[hist.len() - 1] == 0 {
        hist.pop();
    }
    println!("frozen indices by weight:");
    for (w, c) in hist.iter().enumerate() {
        println!("  wt {w}: {c}");
    }
    if let Some(ch) = channel {
        let ch = ch.resolve(spec.k as f64 / spec.n as f64);
        let profile = design_profile(spec.m, &ch)?;
        println!("sc error estimate on {}: {:.6e}", ch, sc_error_prob(&profile, cs)?);
    }
    if spec.k == 0 {
        println!("min distance: undefined (k = 0)");
    } else if spec.k <= MAX_ENUM_K {
        let d = min_distance_bruteforce(&spec.generator_matrix())?;
        println!("min distance {d}");
    } else {
        println!("min distance: not computed (k > {MAX_ENUM_K})");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    path: &PathBuf,
    decoder: DecoderKind,
    channels: &[ChannelArg],
    stop: StopRule,
    seed: u64,
    workers: Option<usize>,
    out: &Option<PathBuf>,
    no_wall_time: bool,
) -> Result<()> {
    let spec = read_spec(path)?;
    let workers = workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let rate = spec.k as f64 / spec.n as f64;
    let mut csv = String::from(SimReport::CSV_HEADER);
    csv.push('\n');
    for &ch in channels {
        let mut r = run_fer(&spec, decoder, ch.resolve(rate), stop, seed, workers)?;
        if no_wall_time {
            r.seconds = 0.0;
        }
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    write_output(out, &csv)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Construct {
            parent,
            m,
            d,
            poly,
            channel,
            k,
            out,
        } => construct(parent, m, d, poly, channel, k, &out),
        Command::Analyze { spec, channel } => analyze(&spec, channel),
        Command::Simulate {
            spec,
            decoder,
            channel,
            max_frames,
            target_errors,
            seed,
            workers,
            out,
            no_wall_time,
        } => simulate(
            &spec,
            decoder,
            &channel,
            StopRule {
                max_frames,
                target_errors,
            },
            seed,
            workers,
            &out,
            no_wall_time,
        ),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
