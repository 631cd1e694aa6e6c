use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use addrseq::analysis::{analyze, AnalyzeOptions};
use addrseq::format::{parse_sequence, write_sequence, SeqFormat};
use addrseq::gf2::GenerationMatrix;
use addrseq::matrixlib::{
    fullrank_probability, permute_address_bits, rank_census, sample_ranks, BitPermutation,
    FamilyKind,
};
use addrseq::seqgen::{generate, generate_direct, start_address_at, Direction, SequenceSpec};
use addrseq::{BitVector, Error, MAX_WIDTH};

#[derive(Parser)]
#[command(
    name = "addrseq",
    version,
    about = "Generate and check memory-test address sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream an address sequence.
    Gen(GenArgs),
    /// Print a family's generation matrix.
    Matrix(MatrixArgs),
    /// Check a sequence; exits 1 if any property fails.
    Verify(CheckArgs),
    /// Print the full analysis report of a sequence.
    Analyze(CheckArgs),
    /// Full-rank probability and rank-deficit statistics.
    RankStats(RankStatsArgs),
    /// Rearrange the address bits of a sequence.
    Permute(PermuteArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Engine {
    Direct,
    Recursive,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum FormatArg {
    Bin,
    Dec,
    Hex,
    Csv,
}

impl From<FormatArg> for SeqFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Bin => SeqFormat::Bin,
            FormatArg::Dec => SeqFormat::Dec,
            FormatArg::Hex => SeqFormat::Hex,
            FormatArg::Csv => SeqFormat::Csv,
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["family", "matrix"])))]
struct GenArgs {
    /// Address width (taken from the matrix file when omitted).
    #[arg(short = 'm', long = "width")]
    m: Option<usize>,
    /// linear, pow2:J, complement, limited, gray[:P1,P2,..], quasi, random:SEED
    #[arg(long)]
    family: Option<String>,
    /// Matrix file (`m=<m>` then one row per line).
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "recursive")]
    engine: Engine,
    /// Initial address A(0): 0b…, 0x… or decimal.
    #[arg(long)]
    a0: Option<String>,
    /// Initial counter B(0): 0b…, 0x… or decimal.
    #[arg(long, conflicts_with = "shift")]
    b0: Option<String>,
    /// Emit the down-sequence (exact reversal of the up-sequence).
    #[arg(long)]
    down: bool,
    /// Rotate the sequence left by L positions.
    #[arg(long, value_name = "L")]
    shift: Option<String>,
    /// Number of addresses (default 2^m).
    #[arg(long)]
    count: Option<String>,
    #[arg(long, value_enum, default_value = "bin")]
    format: FormatArg,
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(short = 'm', long = "width")]
    m: usize,
    #[arg(long)]
    family: String,
    /// Append the rank as a comment line.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Sequence file (stdin when omitted).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(short = 'm', long = "width")]
    m: Option<usize>,
    /// Input format (auto-detected when omitted).
    #[arg(long, value_enum)]
    input_format: Option<FormatArg>,
    /// Largest width accepted; a 2^m-bit presence set is allocated.
    #[arg(long, default_value_t = 28)]
    max_m: usize,
    /// Largest tuple size checked for balance.
    #[arg(long, default_value_t = 4)]
    max_tuple: usize,
    /// Longest Hamming profile printed in full.
    #[arg(long, default_value_t = 1 << 16)]
    profile_limit: usize,
}

#[derive(Args)]
struct RankStatsArgs {
    #[arg(short = 'm', long = "width")]
    m: usize,
    #[arg(short = 'n', long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Count ranks over all 2^(m*m) matrices (m <= 5).
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Args)]
struct PermuteArgs {
    /// Source position for output bits a_1, a_2, … (comma separated).
    #[arg(long)]
    perm: String,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(short = 'm', long = "width")]
    m: Option<usize>,
    #[arg(long, value_enum)]
    input_format: Option<FormatArg>,
    #[arg(long, value_enum, default_value = "bin")]
    format: FormatArg,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type CmdResult = Result<ExitCode, Failure>;

/// `0b…` binary, `0x…` hex, `0d…` or bare decimal.
fn parse_number(s: &str) -> Result<u128, Failure> {
    let s = s.trim().replace('_', "");
    let parsed = if let Some(b) = s.strip_prefix("0b") {
        u128::from_str_radix(b, 2)
    } else if let Some(h) = s.strip_prefix("0x") {
        u128::from_str_radix(h, 16)
    } else if let Some(d) = s.strip_prefix("0d") {
        d.parse()
    } else {
        s.parse()
    };
    parsed.map_err(|_| Failure::Usage(format!("cannot parse number '{s}'")))
}

fn parse_word(s: &str, m: usize, what: &str) -> Result<u64, Failure> {
    let v = parse_number(s)?;
    let w = u64::try_from(v)
        .map_err(|_| Failure::Usage(format!("{what} {s} does not fit in {m} bits")))?;
    BitVector::new(m, w)
        .map_err(|_| Failure::Usage(format!("{what} {s} does not fit in {m} bits")))?;
    Ok(w)
}

fn check_width(m: usize) -> Result<(), Failure> {
    if m == 0 || m > MAX_WIDTH {
        Err(Error::WidthOutOfRange(m).into())
    } else {
        Ok(())
    }
}

fn load_matrix(args: &GenArgs) -> Result<GenerationMatrix, Failure> {
    if let Some(path) = &args.matrix {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let v = GenerationMatrix::parse_text(&text)?;
        if let Some(m) = args.m {
            if m != v.m() {
                return Err(Failure::Usage(format!(
                    "-m {m} disagrees with matrix file width {}",
                    v.m()
                )));
            }
        }
        return Ok(v);
    }
    let m = args
        .m
        .ok_or_else(|| Failure::Usage("--family needs -m".into()))?;
    check_width(m)?;
    let family: FamilyKind = args.family.as_deref().unwrap_or_default().parse()?;
    Ok(family.build(m)?)
}

fn open_input(path: &Option<PathBuf>) -> Result<Box<dyn BufRead>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufReader::new(
            fs::File::open(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdin().lock()),
    })
}

fn cmd_gen(args: GenArgs) -> CmdResult {
    if let Some(m) = args.m {
        check_width(m)?;
    }
    let v = load_matrix(&args)?;
    v.require_full_rank()?;
    let m = v.m();
    let count = match &args.count {
        Some(c) => parse_number(c)?,
        None => addrseq::full_length(m),
    };

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let format = SeqFormat::from(args.format);

    if args.engine == Engine::Direct {
        if args.down || args.shift.is_some() || args.a0.is_some() || args.b0.is_some() {
            return Err(Failure::Usage(
                "--down, --shift, --a0 and --b0 need --engine recursive".into(),
            ));
        }
        write_sequence(&mut out, m, format, generate_direct(&v, count)?.words())?;
        out.flush()?;
        return Ok(ExitCode::SUCCESS);
    }

    let offset = match &args.a0 {
        Some(a) => parse_word(a, m, "--a0")?,
        None => 0,
    };
    let (a0, b0) = match &args.shift {
        Some(l) => {
            let l = parse_number(l)?;
            let base = start_address_at(&v, l)?.word();
            (base ^ offset, l as u64)
        }
        None => {
            let b0 = match &args.b0 {
                Some(b) => parse_word(b, m, "--b0")?,
                None => 0,
            };
            (offset, b0)
        }
    };
    let direction = if args.down {
        Direction::Down
    } else {
        Direction::Up
    };
    let spec = SequenceSpec::new(v)?
        .with_start_address(a0)?
        .with_start_counter(b0)?
        .with_direction(direction)
        .with_count(count)?;
    write_sequence(&mut out, m, format, generate(&spec).words())?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_matrix(args: MatrixArgs) -> CmdResult {
    check_width(args.m)?;
    let family: FamilyKind = args.family.parse()?;
    let v = family.build(args.m)?;
    let mut out = io::stdout().lock();
    write!(out, "{}", v.to_text())?;
    if args.check {
        writeln!(out, "# rank={} full_rank={}", v.rank(), v.is_full_rank())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: CheckArgs, strict: bool) -> CmdResult {
    let input = open_input(&args.input)?;
    let parsed = parse_sequence(input, args.input_format.map(SeqFormat::from), args.m)?;
    if parsed.m > args.max_m {
        return Err(Failure::Usage(format!(
            "width {} exceeds --max-m {}",
            parsed.m, args.max_m
        )));
    }
    let opts = AnalyzeOptions {
        max_tuple: args.max_tuple,
        profile_limit: args.profile_limit,
        ..AnalyzeOptions::default()
    };
    let report = analyze(&parsed.words, parsed.m, &opts);
    let mut out = io::stdout().lock();
    write!(out, "{}", report.to_kv())?;
    out.flush()?;
    if strict && !report.passed() {
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn cmd_rank_stats(args: RankStatsArgs) -> CmdResult {
    check_width(args.m)?;
    let m = args.m;
    let mut out = io::stdout().lock();
    writeln!(out, "m={m}")?;
    writeln!(out, "fullrank_probability={:.13}", fullrank_probability(m))?;
    if args.exhaustive {
        let counts = rank_census(m)?;
        let total: u64 = counts.iter().sum();
        let deficit: u64 = counts
            .iter()
            .enumerate()
            .map(|(r, &c)| (m - r) as u64 * c)
            .sum();
        writeln!(out, "exhaustive_total={total}")?;
        writeln!(out, "exhaustive_full_rank={}", counts[m])?;
        writeln!(out, "exhaustive_full_rank_fraction={}/{}", counts[m], total)?;
        writeln!(
            out,
            "exhaustive_rank_counts={}",
            counts
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(",")
        )?;
        writeln!(
            out,
            "exhaustive_expected_rank_deficit={:.12}",
            deficit as f64 / total as f64
        )?;
    }
    if args.samples > 0 {
        let s = sample_ranks(m, args.samples, args.seed)?;
        writeln!(out, "samples={}", s.samples)?;
        writeln!(out, "seed={}", args.seed)?;
        writeln!(out, "mc_full_rank_rate={:.6}", s.full_rank_rate())?;
        writeln!(out, "mc_expected_rank_deficit={:.6}", s.mean_deficit())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_permute(args: PermuteArgs) -> CmdResult {
    let perm: BitPermutation = args.perm.parse()?;
    let input = open_input(&args.input)?;
    let m = args.m.or(Some(perm.len()));
    let parsed = parse_sequence(input, args.input_format.map(SeqFormat::from), m)?;
    if parsed.m != perm.len() {
        return Err(Failure::Usage(format!(
            "permutation has {} positions, sequence width is {}",
            perm.len(),
            parsed.m
        )));
    }
    let vectors = parsed
        .words
        .iter()
        .map(|&w| BitVector::new(parsed.m, w))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = BufWriter::new(io::stdout().lock());
    write_sequence(
        &mut out,
        parsed.m,
        args.format.into(),
        permute_address_bits(vectors, &perm).map(|a| a.word()),
    )?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Matrix(a) => cmd_matrix(a),
        Command::Verify(a) => cmd_check(a, true),
        Command::Analyze(a) => cmd_check(a, false),
        Command::RankStats(a) => cmd_rank_stats(a),
        Command::Permute(a) => cmd_permute(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("addrseq: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("addrseq: {msg}");
            ExitCode::from(2)
        }
    }
}
