//! Batch front-end: loads TOML descriptor documents, runs one operation and
//! writes a TOML report (or a CSV trace).
//!
//! Exit status: 0 ok, 1 property violation found, 2 parse or precondition
//! error, 3 enumeration budget exhausted.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use scanclosure::closure::{averaging_value, fairness_lemma_check};
use scanclosure::constructions::bpp::{pipeline, BinMartingale, CertificateReport, SyntheticBpp};
use scanclosure::constructions::dishonest;
use scanclosure::constructions::domination::{leftmost_path, DominationFamily};
use scanclosure::document::{from_document, parse_document, to_document, Validate};
use scanclosure::martingale::{capital_trace, fairness_check_with_budget, write_trace_csv};
use scanclosure::scan::{filling_bound, filling_check_at, FillingReport};
use scanclosure::{
    BettingStrategy, BitString, Error, Martingale, Rational, ScanningFunction, SequenceOracle, DEFAULT_BUDGET,
};

#[derive(Parser)]
#[command(name = "scanclosure", version, about = "Exact martingale and scanning-strategy experiments")]
struct Cli {
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Enumeration budget for brute-force operations.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check fairness and positivity of a martingale.
    Check {
        martingale: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Capital of a martingale along a sequence, as CSV.
    Trace {
        martingale: PathBuf,
        /// Sequence document; defaults to the all-zero sequence.
        #[arg(long)]
        sequence: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        steps: usize,
    },
    /// Averaging martingale of a betting strategy.
    Avg {
        #[command(subcommand)]
        op: AvgOp,
    },
    /// Check that a scanner has read every position below `n`.
    Fill {
        scanner: PathBuf,
        #[arg(long)]
        n: usize,
        /// Run length to check; defaults to the exact bound of a
        /// permutation scanner.
        #[arg(long)]
        run_length: Option<usize>,
    },
    /// Leftmost non-ascending path of a martingale or of a dominating family.
    Path {
        #[command(flatten)]
        source: PathSource,
        #[arg(long, default_value_t = 12)]
        length: usize,
    },
    /// Run the rearrangement pipeline of a synthetic procedure.
    Pipeline {
        /// Procedure document; defaults to the built-in procedure.
        alg: Option<PathBuf>,
        /// Base sequence document; defaults to a seeded pseudorandom one.
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        blocks: u64,
    },
    /// Bad-block measures and the bin martingale.
    Bins {
        alg: Option<PathBuf>,
        /// Largest block index examined.
        #[arg(long, default_value_t = 1)]
        n_max: u64,
        /// Fairness depth for the bin martingale; defaults to the end of
        /// block `n_max`.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// The dishonest permutation and its witness positions.
    Dishonest {
        #[arg(long, default_value_t = 3)]
        k_max: u64,
        /// Search witnesses below this position.
        #[arg(long, default_value_t = 10_000)]
        range: u64,
        /// Number of table rows `n ↦ S(n)` to emit.
        #[arg(long, default_value_t = 32)]
        table: u64,
    },
}

#[derive(Subcommand)]
enum AvgOp {
    /// `D(w)` at `t` (default `g(|w|)`).
    Value {
        strategy: PathBuf,
        #[arg(long, default_value = "")]
        w: BitString,
        #[arg(long)]
        t: Option<usize>,
    },
    /// Fairness of `D` below a depth.
    Lemma {
        strategy: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// `D(w)` at two run lengths.
    TIndependence {
        strategy: PathBuf,
        #[arg(long, default_value = "")]
        w: BitString,
        #[arg(long)]
        t1: usize,
        #[arg(long)]
        t2: usize,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PathSource {
    #[arg(long)]
    martingale: Option<PathBuf>,
    #[arg(long)]
    family: Option<PathBuf>,
}

/// Failure of a command, mapped to an exit status.
enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// What a command produced: the output text and whether it found a
/// violation.
struct Output {
    text: String,
    violation: bool,
}

fn report<T: Serialize>(value: &T, ok: bool) -> Result<Output, Failure> {
    Ok(Output {
        text: to_document(value)?,
        violation: !ok,
    })
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load<T: DeserializeOwned + Validate>(path: &Path) -> Result<T, Failure> {
    Ok(from_document(&read(path)?)?)
}

fn load_strategy(path: &Path, budget: u64) -> Result<BettingStrategy, Failure> {
    let g: BettingStrategy = parse_document(&read(path)?)?;
    g.validate(budget)?;
    Ok(g)
}

fn load_alg(path: Option<&Path>) -> Result<SyntheticBpp, Failure> {
    match path {
        Some(p) => load(p),
        None => Ok(SyntheticBpp::default()),
    }
}

#[derive(Serialize)]
struct TIndependenceReport {
    ok: bool,
    w: BitString,
    t1: usize,
    t2: usize,
    value_t1: Rational,
    value_t2: Rational,
}

#[derive(Serialize)]
struct FillReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_bound: Option<u64>,
    #[serde(flatten)]
    check: FillingReport,
}

#[derive(Serialize)]
struct PathReport {
    bits: BitString,
    /// `L(Z ↾ m)` for `m = 0..=length`.
    trace: Vec<Rational>,
    non_increasing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    delay_points: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    search_exhausted: Option<bool>,
}

#[derive(Serialize)]
struct BlockBins {
    n: u64,
    random_bits: u64,
    bad_count: u64,
    measure: Rational,
    certificate: CertificateReport,
    /// First bad string of the block, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_bad: Option<BitString>,
    /// Bin `n` capital after reading zeros up to the block, then `sample_bad`.
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_bin_capital: Option<Rational>,
}

#[derive(Serialize)]
struct BinsReport {
    ok: bool,
    fairness_depth: usize,
    fair: bool,
    blocks: Vec<BlockBins>,
}

#[derive(Serialize)]
struct TableRow {
    n: u64,
    image: u64,
}

#[derive(Serialize)]
struct WitnessRow {
    k: u64,
    found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    image: Option<u64>,
    /// `p_k(S(n))`.
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<String>,
}

#[derive(Serialize)]
struct DishonestReport {
    range: u64,
    table: Vec<TableRow>,
    witnesses: Vec<WitnessRow>,
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let budget = cli.budget;
    match &cli.command {
        Command::Check { martingale, depth } => {
            let m: Martingale = load(martingale)?;
            let r = fairness_check_with_budget(&m, *depth, budget)?;
            report(&r, r.ok)
        }
        Command::Trace {
            martingale,
            sequence,
            steps,
        } => {
            let m: Martingale = load(martingale)?;
            let z = match sequence {
                Some(p) => load(p)?,
                None => SequenceOracle::zeros(),
            };
            let points = capital_trace(&m, &z, *steps)?;
            let mut buf = Vec::new();
            write_trace_csv(&points, &mut buf)?;
            Ok(Output {
                text: String::from_utf8(buf).expect("CSV of ASCII fields"),
                violation: false,
            })
        }
        Command::Avg { op } => match op {
            AvgOp::Value { strategy, w, t } => {
                let g = load_strategy(strategy, budget)?;
                report(&averaging_value(&g, w, *t, budget)?, true)
            }
            AvgOp::Lemma { strategy, depth } => {
                let g = load_strategy(strategy, budget)?;
                let r = fairness_lemma_check(&g, *depth, budget)?;
                report(&r, r.ok)
            }
            AvgOp::TIndependence { strategy, w, t1, t2 } => {
                if t1 >= t2 {
                    return Err(Error::Precondition(format!("need t1 < t2, got {t1} and {t2}")).into());
                }
                let g = load_strategy(strategy, budget)?;
                let a = averaging_value(&g, w, Some(*t1), budget)?.value;
                let b = averaging_value(&g, w, Some(*t2), budget)?.value;
                let r = TIndependenceReport {
                    ok: a == b,
                    w: w.clone(),
                    t1: *t1,
                    t2: *t2,
                    value_t1: a,
                    value_t2: b,
                };
                report(&r, r.ok)
            }
        },
        Command::Fill { scanner, n, run_length } => {
            let v: ScanningFunction = load(scanner)?;
            let exact_bound = match &v {
                ScanningFunction::FromPermutation { permutation } => Some(filling_bound(permutation, *n as u64)?),
                _ => None,
            };
            let len = match (run_length, exact_bound) {
                (Some(l), _) => *l,
                (None, Some(b)) => usize::try_from(b)
                    .map_err(|_| Error::Precondition(format!("bound {b} exceeds addressable runs")))?,
                (None, None) => {
                    return Err(Error::Precondition("--run-length is required for adaptive scanners".into()).into())
                }
            };
            let check = filling_check_at(&v, len, *n, budget)?;
            let ok = check.ok;
            report(&FillReport { exact_bound, check }, ok)
        }
        Command::Path { source, length } => {
            let (l, points) = match (&source.martingale, &source.family) {
                (Some(p), _) => (load::<Martingale>(p)?, None),
                (None, Some(p)) => {
                    let family: DominationFamily = load(p)?;
                    let (dp, l) = family.build()?;
                    (l, Some(dp))
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            let path = leftmost_path(&l, *length)?;
            let non_increasing = path.trace.windows(2).all(|w| w[1] <= w[0]);
            let r = PathReport {
                bits: path.bits,
                trace: path.trace,
                non_increasing,
                delay_points: points.as_ref().map(|d| d.points.clone()),
                search_exhausted: points.map(|d| d.exhausted),
            };
            report(&r, non_increasing)
        }
        Command::Pipeline { alg, base, blocks } => {
            let alg = load_alg(alg.as_deref())?;
            let b = match base {
                Some(p) => load(p)?,
                None => SequenceOracle::Pseudorandom { seed: 0 },
            };
            let r = pipeline(&alg, &b, *blocks, budget)?;
            let ok = r.h_capital == r.expected_h_capital;
            report(&r, ok)
        }
        Command::Bins { alg, n_max, depth } => {
            let alg = load_alg(alg.as_deref())?;
            alg.validate()?;
            let layout = alg.layout();
            let bins = BinMartingale::new(alg.clone(), budget);
            let mut blocks = Vec::new();
            let mut ok = true;
            for n in 0..=*n_max {
                let bits = alg.random_bits(n)?;
                let bad = alg.bad_set(n, budget)?;
                let certificate = alg.error_certificate(n, budget)?;
                ok &= certificate.ok;
                let sample_bad = bad.first().map(|&y| BitString::from_u64(y, bits as usize));
                let sample_bin_capital = match &sample_bad {
                    Some(y) => {
                        let mut x = BitString::zeros(layout.base_offset(n) as usize);
                        x.extend_from(y);
                        Some(bins.bin_capital(&x, n)?)
                    }
                    None => None,
                };
                blocks.push(BlockBins {
                    n,
                    random_bits: bits,
                    bad_count: bad.len() as u64,
                    measure: alg.bad_block_measure(n, budget)?,
                    certificate,
                    sample_bad,
                    sample_bin_capital,
                });
            }
            let fairness_depth = match depth {
                Some(d) => *d,
                None => layout.base_offset(n_max + 1) as usize,
            };
            let fair = fairness_check_with_budget(&Martingale::Bin(bins), fairness_depth, budget)?.ok;
            let r = BinsReport {
                ok: ok && fair,
                fairness_depth,
                fair,
                blocks,
            };
            report(&r, r.ok)
        }
        Command::Dishonest { k_max, range, table } => {
            let rows = (0..*table)
                .map(|n| TableRow {
                    n,
                    image: dishonest::forward(n),
                })
                .collect();
            let witnesses = dishonest::witnesses(*k_max, *range)
                .into_iter()
                .map(|(k, w)| WitnessRow {
                    k,
                    found: w.is_some(),
                    n: w.as_ref().map(|w| w.n),
                    image: w.as_ref().map(|w| w.image),
                    bound: w.map(|w| w.bound),
                })
                .collect();
            report(
                &DishonestReport {
                    range: *range,
                    table: rows,
                    witnesses,
                },
                true,
            )
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            if let Err(e) = emit(cli.out.as_deref(), &output.text) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if output.violation {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_budget() { 3 } else { 2 })
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
