use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use fstdeg::construct::{build_basic, build_block_expander, build_wprod_fst, BasicOp};
use fstdeg::degrees::{atom_witness, exp_chain, squares_chain, ChainReport, DegreeError, ReductionChain};
use fstdeg::fst::{compose_all, parse_fst, pump, run_stream, write_fst, zero_loops, Fst};
use fstdeg::lookahead::write_lfst;
use fstdeg::normalize::{disambiguate, dp_to_canonical, extract_transduct, parse_dp, write_dp, Disambiguated};
use fstdeg::seq::{blocks_decode, parse_blockfun_spec, parse_seq_spec, BlockFun, Stream, Word};
use fstdeg::weights::{certify_spiralling, parse_weights, wprod_values};

#[derive(Parser)]
#[command(
    name = "fstdeg",
    version,
    about = "Finite-state transducers on infinite binary sequences"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a machine on a sequence and print a prefix or decoded blocks.
    Run {
        fst: PathBuf,
        spec: String,
        #[command(flatten)]
        len: Length,
    },
    /// Compose machines; the first one reads the input.
    Compose {
        #[arg(required = true)]
        fsts: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Zero-loops, Z(T) and pump decompositions at n = |Q|.
    Analyze { fst: PathBuf },
    /// Build an explicit machine.
    Build {
        #[command(subcommand)]
        what: Build,
    },
    /// Print the first values of a weighted product.
    Wprod {
        weights: PathBuf,
        spec: String,
        #[arg(long, default_value_t = 8)]
        n: u64,
    },
    /// Print the double product of a transduct of a block sequence.
    Extract { fst: PathBuf, spec: String },
    /// Disambiguate a double product.
    Normalize {
        dp: PathBuf,
        /// Also print the canonical form and its look-ahead machine.
        #[arg(long)]
        canonical: bool,
    },
    /// Run a reduction chain and print its report.
    Pipeline {
        #[command(subcommand)]
        which: Pipeline,
    },
    /// Compare two sequences on a prefix.
    VerifyEq {
        spec1: String,
        spec2: String,
        #[arg(long)]
        bits: Option<usize>,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct Length {
    #[arg(long)]
    bits: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
}

#[derive(Subcommand)]
enum Build {
    /// A block operation, e.g. `merge 3 1` or `x-prepend 0 1`.
    Basic {
        #[arg(required = true, num_args = 1..)]
        op: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The block expander for prefixes p_j and cycles c_j (`-` is the empty word).
    Expander {
        #[arg(long = "p", required = true, num_args = 1..)]
        ps: Vec<String>,
        #[arg(long = "c", required = true, num_args = 1..)]
        cs: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The weighted-product machine of a weights file.
    Wprod {
        weights: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Verify {
    #[arg(long)]
    verify_blocks: Option<usize>,
    /// Also run the composed machine.
    #[arg(long)]
    composed: bool,
}

#[derive(Subcommand)]
enum Pipeline {
    /// ⟨an² + bn + c⟩ to ⟨n²⟩.
    Squares {
        a: u64,
        b: u64,
        c: u64,
        #[command(flatten)]
        verify: Verify,
    },
    /// ⟨2^{nk}⟩ to ⟨2^{2nk}⟩.
    Exp {
        k: u64,
        #[command(flatten)]
        verify: Verify,
    },
    /// A transduct of a quadratic block sequence back to ⟨n²⟩.
    Atom {
        fst: PathBuf,
        spec: String,
        #[command(flatten)]
        verify: Verify,
    },
}

/// Usage and format errors exit with 2, verdicts with 1.
enum Failure {
    Usage(String),
    Verdict(String),
}

impl<E: fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Res = Result<(), Failure>;

#[derive(Clone, Copy)]
struct Horizon {
    bits: usize,
    blocks: usize,
}

fn horizon() -> Result<Horizon, Failure> {
    let mut h = Horizon { bits: 4096, blocks: 32 };
    let Ok(v) = std::env::var("FSTDEG_HORIZON") else {
        return Ok(h);
    };
    let bad = || Failure::Usage(format!("FSTDEG_HORIZON: expected <bits>[:<blocks>], got {v:?}"));
    let (bits, blocks) = match v.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (v.as_str(), None),
    };
    h.bits = bits.trim().parse().map_err(|_| bad())?;
    if let Some(b) = blocks {
        h.blocks = b.trim().parse().map_err(|_| bad())?;
    }
    Ok(h)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_fst(path: &Path) -> Result<Fst, Failure> {
    parse_fst(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn seq(spec: &str) -> Result<Stream, Failure> {
    parse_seq_spec(spec).map_err(|e| Failure::Usage(format!("sequence spec {spec:?}: {e}")))
}

fn blockfun(spec: &str) -> Result<BlockFun, Failure> {
    let body = spec.trim();
    let body = body.strip_prefix("blocks").unwrap_or(body);
    parse_blockfun_spec(body).map_err(|e| Failure::Usage(format!("block spec {spec:?}: {e}")))
}

fn emit(text: &str, output: Option<&Path>) -> Res {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn word(w: &Word) -> String {
    if w.is_empty() {
        "-".into()
    } else {
        w.to_string()
    }
}

fn join(v: &[BigUint]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn run(fst: &Path, spec: &str, len: &Length, h: Horizon) -> Res {
    let m = load_fst(fst)?;
    let out = run_stream(&m, &seq(spec)?);
    match (len.bits, len.blocks) {
        (_, Some(n)) => println!("{}", join(&blocks_decode(&out, n)?)),
        (bits, None) => println!("{}", out.prefix(bits.unwrap_or(h.bits))?),
    }
    Ok(())
}

fn analyze(path: &Path) -> Res {
    let m = load_fst(path)?;
    let r = zero_loops(&m);
    println!("states {}", m.num_states());
    for l in &r.loops {
        let names: Vec<&str> = l.states.iter().map(|&q| m.label(q)).collect();
        println!("zero-loop {}", names.join(" "));
    }
    println!("Z {}", r.z);
    let n = m.num_states();
    for q in 0..n {
        let d = pump(&m, q, n)?;
        println!(
            "pump {} n={} p={} c={} target={}",
            m.label(q),
            n,
            word(&d.p),
            word(&d.c),
            m.label(d.target)
        );
    }
    Ok(())
}

fn build(what: &Build) -> Res {
    match what {
        Build::Basic { op, output } => {
            let op: BasicOp = op.join(" ").parse()?;
            emit(&write_fst(&build_basic(&op)?), output.as_deref())
        }
        Build::Expander { ps, cs, output } => {
            let parse = |v: &[String]| -> Result<Vec<Word>, Failure> {
                v.iter().map(|s| s.parse::<Word>().map_err(Failure::from)).collect()
            };
            let m = build_block_expander(&parse(ps)?, &parse(cs)?)?;
            emit(&write_fst(&m), output.as_deref())
        }
        Build::Wprod { weights, output } => {
            let a =
                parse_weights(&read(weights)?).map_err(|e| Failure::Usage(format!("{}: {e}", weights.display())))?;
            emit(&write_fst(&build_wprod_fst(&a)?), output.as_deref())
        }
    }
}

fn wprod(weights: &Path, spec: &str, n: u64) -> Res {
    let a = parse_weights(&read(weights)?).map_err(|e| Failure::Usage(format!("{}: {e}", weights.display())))?;
    let f = blockfun(spec)?;
    let v: Vec<String> = wprod_values(&a, &f, n).iter().map(ToString::to_string).collect();
    println!("{}", v.join(" "));
    Ok(())
}

fn extract(fst: &Path, spec: &str) -> Res {
    let t = load_fst(fst)?;
    let f = blockfun(spec)?;
    let z = zero_loops(&t).z as u64;
    let cert = certify_spiralling(&f, &[z], 0)?;
    let x = extract_transduct(&t, &f, &cert)?;
    print!("{}", write_dp(&x.dp));
    Ok(())
}

fn normalize(path: &Path, canonical: bool) -> Res {
    let dp = parse_dp(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    match disambiguate(&dp)? {
        Disambiguated::UltimatelyPeriodic(v) => {
            println!("ULTIMATELY-PERIODIC {}", v.reason);
            Err(Failure::Verdict(String::new()))
        }
        Disambiguated::Form(dp) => {
            print!("{}", write_dp(&dp));
            if canonical {
                let c = dp_to_canonical(&dp)?;
                println!("canonical shift={} n2={}", c.shift, c.n2);
                print!("{}", fstdeg::weights::write_weights(&c.alphas));
                print!("{}", write_lfst(&c.forth));
            }
            Ok(())
        }
    }
}

fn report(chain: &ReductionChain, v: &Verify, h: Horizon) -> Res {
    let blocks = v.verify_blocks.unwrap_or(h.blocks);
    let r: ChainReport = chain.verify(blocks);
    println!("{r}");
    let mut ok = r.ok;
    if v.composed {
        let got = chain.run_composed(blocks)?;
        let same = got == r.expected;
        println!("composed blocks: {} {}", join(&got), if same { "ok" } else { "FAIL" });
        ok &= same;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verdict("chain verification failed".into()))
    }
}

fn pipeline(which: &Pipeline, h: Horizon) -> Res {
    match which {
        Pipeline::Squares { a, b, c, verify } => report(&squares_chain(*a, *b, *c)?, verify, h),
        Pipeline::Exp { k, verify } => report(&exp_chain(*k)?, verify, h),
        Pipeline::Atom { fst, spec, verify } => {
            let t = load_fst(fst)?;
            let w = match atom_witness(&t, &blockfun(spec)?) {
                Err(DegreeError::UltimatelyPeriodic(reason)) => {
                    println!("ULTIMATELY-PERIODIC {reason}");
                    return Err(Failure::Verdict(String::new()));
                }
                w => w?,
            };
            println!("q {} scale {} dropped {}", w.q, w.scale, w.dropped);
            report(&w.chain, verify, h)
        }
    }
}

fn verify_eq(s1: &str, s2: &str, bits: usize) -> Res {
    let (a, b) = (seq(s1)?.prefix(bits)?, seq(s2)?.prefix(bits)?);
    match a.iter().zip(b.iter()).position(|(x, y)| x != y) {
        None => {
            println!("equal on {bits} bits");
            Ok(())
        }
        Some(i) => {
            println!("differ at bit {i}");
            Err(Failure::Verdict(String::new()))
        }
    }
}

fn dispatch(cli: &Cli) -> Res {
    let h = horizon()?;
    match &cli.cmd {
        Cmd::Run { fst, spec, len } => run(fst, spec, len, h),
        Cmd::Compose { fsts, output } => {
            let ms = fsts.iter().map(|p| load_fst(p)).collect::<Result<Vec<_>, _>>()?;
            emit(&write_fst(&compose_all(&ms)), output.as_deref())
        }
        Cmd::Analyze { fst } => analyze(fst),
        Cmd::Build { what } => build(what),
        Cmd::Wprod { weights, spec, n } => wprod(weights, spec, *n),
        Cmd::Extract { fst, spec } => extract(fst, spec),
        Cmd::Normalize { dp, canonical } => normalize(dp, *canonical),
        Cmd::Pipeline { which } => pipeline(which, h),
        Cmd::VerifyEq { spec1, spec2, bits } => verify_eq(spec1, spec2, bits.unwrap_or(h.bits)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict(msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
