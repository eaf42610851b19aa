//! Command-line front end: analyze digit streams, generate digit files,
//! cross-verify sources, and extract hexadecimal digits of pi.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use digitstat_core::digitstream::{
    bbp_hex_digits, e_digits, pi_digits, sqrt_digits, verify_prefix, DigitSource, FileFormat,
    VerifyStatus,
};
use digitstat_core::error::Error;
use digitstat_core::harness::{run_analysis, RunConfig, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "digitstat", version, about = "Digit statistics of mathematical constants: CLT deviations, LIL envelopes, and normality tests")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stream digits from a file or generator and emit CSV statistics.
    Analyze(AnalyzeArgs),
    /// Compute digits of a constant and write them to an ASCII file.
    Generate(GenerateArgs),
    /// Compare a digit file against an independent source.
    Verify(VerifyArgs),
    /// Extract hexadecimal digits of pi at a 1-based position.
    Bbp(BbpArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Digit source: a file path, or gen:sqrt2 | gen:sqrt:<m> | gen:e |
    /// gen:pi | gen:baseline (baseline requires --seed).
    #[arg(long)]
    source: String,
    #[arg(long, default_value_t = 10)]
    base: u32,
    /// Number of digits to analyze.
    #[arg(long)]
    digits: u64,
    /// Histogram bin width (0.1 or 0.025).
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    /// Initial digits excluded from the histogram.
    #[arg(long, default_value_t = 0)]
    burn_in: u64,
    #[arg(long, default_value_t = 100_000_000)]
    block_size: u64,
    #[arg(long, default_value_t = 1000)]
    points_per_block: u64,
    /// Pattern lengths for the normality scan, comma-separated.
    #[arg(long, default_value = "1,2,3", value_delimiter = ',')]
    k: Vec<u32>,
    /// Output directory (default: $DIGITSTAT_OUT, then the current dir).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Resume from the checkpoint file if it exists.
    #[arg(long)]
    resume: bool,
    #[arg(long, default_value_t = 1)]
    threads: u32,
    /// Seed for the gen:baseline source.
    #[arg(long)]
    seed: Option<u64>,
    /// File layout: plain digits, or a header line ending at the first '.'.
    #[arg(long, value_enum, default_value_t = CliFormat::Ascii)]
    format: CliFormat,
    /// Skip unexpected bytes in digit files instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// Which constant: sqrt:<m> (or sqrt2), e, or pi.
    #[arg(long)]
    constant: String,
    #[arg(long)]
    digits: u64,
    /// Output file; fractional digits are written as plain ASCII.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    file: PathBuf,
    /// Reference source, e.g. gen:sqrt2 or gen:pi.
    #[arg(long)]
    against: String,
    /// Number of leading digits to compare.
    #[arg(long)]
    prefix: u64,
    #[arg(long, default_value_t = 10)]
    base: u32,
    #[arg(long, value_enum, default_value_t = CliFormat::Ascii)]
    format: CliFormat,
    /// Seed if the reference is gen:baseline.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BbpArgs {
    /// 1-based hex digit position after the point.
    #[arg(long)]
    position: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliFormat {
    /// Whitespace-tolerant digit file with no header.
    Ascii,
    /// Header line (e.g. "1.") consumed up to the first '.'.
    Header,
}

impl CliFormat {
    fn to_format(self) -> FileFormat {
        match self {
            CliFormat::Ascii => FileFormat::Ascii,
            CliFormat::Header => FileFormat::AsciiWithHeader,
        }
    }
}

/// Parse a --source/--against value into a DigitSource.
fn parse_source(
    spec: &str,
    digits: u64,
    seed: Option<u64>,
    format: FileFormat,
    strict: bool,
) -> Result<DigitSource, Error> {
    let Some(gen) = spec.strip_prefix("gen:") else {
        return Ok(DigitSource::File {
            path: PathBuf::from(spec),
            format,
            strict,
        });
    };
    match gen {
        "sqrt2" => Ok(DigitSource::Sqrt {
            radicand: 2,
            count: digits,
        }),
        "e" => Ok(DigitSource::E { count: digits }),
        "pi" => Ok(DigitSource::Pi { count: digits }),
        "baseline" => {
            let seed = seed.ok_or_else(|| {
                Error::usage("gen:baseline requires --seed")
            })?;
            Ok(DigitSource::Baseline {
                seed,
                count: digits,
            })
        }
        other => {
            if let Some(m) = other.strip_prefix("sqrt:") {
                let radicand: u64 = m.parse().map_err(|_| {
                    Error::usage(format!("bad radicand in gen spec '{spec}'"))
                })?;
                return Ok(DigitSource::Sqrt {
                    radicand,
                    count: digits,
                });
            }
            Err(Error::usage(format!(
                "unknown generator '{spec}'; expected gen:sqrt2, gen:sqrt:<m>, gen:e, gen:pi, or gen:baseline"
            )))
        }
    }
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Error> {
    let source = parse_source(
        &args.source,
        args.digits,
        args.seed,
        args.format.to_format(),
        !args.lenient,
    )?;
    let out_dir = args.out.unwrap_or_else(default_out_dir);
    let config = RunConfig {
        source,
        base: args.base,
        max_digits: args.digits,
        step: args.step,
        burn_in: args.burn_in,
        block_size: args.block_size,
        points_per_block: args.points_per_block,
        lil_cutoff: 10,
        pattern_lens: args.k,
        out_dir: out_dir.clone(),
        checkpoint_path: args.checkpoint,
        checkpoint_interval: 10_000_000,
        resume: args.resume,
        threads: args.threads,
    };
    let report = run_analysis(&config)?;
    println!("analyzed n = {} digits, S = {}", report.n, report.s);
    println!("d = {}", report.d);
    match report.delta {
        Some(delta) => println!("delta = {delta}"),
        None => println!("delta undefined (n below LIL cutoff)"),
    }
    println!("outputs in {}", out_dir.display());
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    let digits = match args.constant.as_str() {
        "e" => e_digits(args.digits)?,
        "pi" => pi_digits(args.digits)?,
        "sqrt2" => sqrt_digits(2, args.digits)?,
        other => {
            let Some(m) = other.strip_prefix("sqrt:") else {
                return Err(Error::usage(format!(
                    "unknown constant '{other}'; expected sqrt:<m>, e, or pi"
                )));
            };
            let radicand: u64 = m
                .parse()
                .map_err(|_| Error::usage(format!("bad radicand '{m}'")))?;
            sqrt_digits(radicand, args.digits)?
        }
    };
    let ascii: Vec<u8> = digits.iter().map(|&d| d + b'0').collect();
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(&args.out).map_err(|e| Error::io(&args.out, e))?,
    );
    f.write_all(&ascii).map_err(|e| Error::io(&args.out, e))?;
    f.flush().map_err(|e| Error::io(&args.out, e))?;
    println!("wrote {} digits to {}", digits.len(), args.out.display());
    Ok(())
}

/// Ok(true) means the prefixes matched; Ok(false) is a reported mismatch.
fn cmd_verify(args: VerifyArgs) -> Result<bool, Error> {
    let file_source = DigitSource::File {
        path: args.file.clone(),
        format: args.format.to_format(),
        strict: true,
    };
    let reference = parse_source(&args.against, args.prefix, args.seed, FileFormat::Ascii, true)?;
    let mut a = file_source.open(args.base)?;
    let mut b = reference.open(args.base)?;
    let report = verify_prefix(&mut a, &mut b, args.prefix)?;
    match report.status {
        VerifyStatus::Match => {
            println!("match: first {} digits agree", report.digits_compared);
            Ok(true)
        }
        VerifyStatus::Mismatch => {
            println!(
                "mismatch at digit {} (1-based), after {} agreeing digits",
                report.first_mismatch.unwrap(),
                report.first_mismatch.unwrap() - 1
            );
            Ok(false)
        }
        VerifyStatus::ShortInput => {
            println!(
                "short input: only {} of {} digits available (those agreed)",
                report.digits_compared, args.prefix
            );
            Ok(false)
        }
    }
}

fn cmd_bbp(args: BbpArgs) -> Result<(), Error> {
    let digits = bbp_hex_digits(args.position, args.count)?;
    let hex: String = digits
        .iter()
        .map(|&d| char::from_digit(d as u32, 16).unwrap().to_ascii_uppercase())
        .collect();
    println!("{hex}");
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Io { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are successes; anything else is usage.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.cmd {
        Cmd::Analyze(args) => cmd_analyze(args),
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Verify(args) => match cmd_verify(args) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(3),
            Err(e) => Err(e),
        },
        Cmd::Bbp(args) => cmd_bbp(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
