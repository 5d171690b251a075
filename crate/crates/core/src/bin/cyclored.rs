use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cyclored::app::{self, AppError, CensusReportFile, DensityReportFile, IngestSource};
use cyclored::census::{run_census, CensusOptions, DEFAULT_SPLIT_PRIMES};
use cyclored::density::{parse_rational, to_decimal, DegreeProfile, DensityReport, Rounding};
use cyclored::entangle::GroupDescription;
use cyclored::galois_image::{certify_surjective, image_fingerprint, two_division_degree, DEFAULT_SAMPLE_BOUND};
use cyclored::density::artin_constant;
use cyclored::CurveOverQ;

const EXIT_USAGE: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "cyclored", version, about = "Primes of cyclic reduction for elliptic curves over Q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count primes p <= limit with cyclic E(F_p).
    Census(CensusArgs),
    /// Exact density, correction factor and vanishing class for a profile.
    Density(DensityArgs),
    /// Evaluate a JSON group description.
    Entangle {
        file: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// 2-division degree and mod-l surjectivity check.
    Galois(GaloisArgs),
    /// Print the enclosure of A_inf.
    Constants {
        #[arg(long, default_value_t = app::DEFAULT_TRUNCATION)]
        truncation: u64,
    },
    /// Read nonmaximal degrees from fixtures (or a remote endpoint).
    Ingest {
        label: String,
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        remote: Option<String>,
    },
}

#[derive(Args)]
struct CurveArgs {
    /// Registry label, e.g. serre-ex1.
    #[arg(long, conflicts_with_all = ["a", "b"])]
    label: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "b")]
    a: Option<i64>,
    #[arg(long, allow_hyphen_values = true, requires = "a")]
    b: Option<i64>,
}

impl CurveArgs {
    fn resolve(&self) -> Result<(Option<app::CurveSpec>, CurveOverQ), AppError> {
        match (&self.label, self.a, self.b) {
            (Some(label), _, _) => {
                let spec = app::lookup(label)?;
                let curve = spec.curve()?;
                Ok((Some(spec), curve))
            }
            (None, Some(a), Some(b)) => Ok((None, CurveOverQ::new(a, b)?)),
            _ => Err(AppError::UnknownLabel("give --label or both --a and --b".into())),
        }
    }
}

#[derive(Args)]
struct CensusArgs {
    #[command(flatten)]
    curve: CurveArgs,
    #[arg(long, default_value_t = app::TABLE_LIMIT)]
    limit: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-prime classification CSV.
    #[arg(long)]
    primes_csv: Option<PathBuf>,
    /// Running fraction CSV.
    #[arg(long)]
    running_csv: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SPLIT_PRIMES)]
    split: Vec<u64>,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long, conflicts_with = "profile")]
    label: Option<String>,
    /// Profile JSON; without it and without a label the maximal profile is used.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, default_value_t = app::DEFAULT_TRUNCATION)]
    truncation: u64,
    /// Replace the character-sum primes; with no value, clear them.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    charsum: Option<Vec<u64>>,
    /// Replace the superfluous primes; with no value, clear them.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    superfluous: Option<Vec<u64>>,
    /// Use this correction factor (`n/d`) instead of the derived one.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GaloisArgs {
    #[command(flatten)]
    curve: CurveArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [5u64, 7, 11, 13])]
    ell: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_BOUND)]
    samples: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<u8, AppError> {
    match command {
        Command::Census(args) => census(args),
        Command::Density(args) => density(args),
        Command::Entangle { file, output } => {
            let text = std::fs::read_to_string(&file).map_err(|e| AppError::Io {
                path: file.clone(),
                message: e.to_string(),
            })?;
            let summary = GroupDescription::from_json(&text)?.evaluate()?;
            print!("{}", app::to_json_pretty(&summary));
            if let Some(path) = output {
                app::write_json(&path, &summary)?;
            }
            Ok(0)
        }
        Command::Galois(args) => galois(args),
        Command::Constants { truncation } => {
            if truncation < 2 {
                return Err(AppError::SchemaMismatch("truncation must be at least 2".into()));
            }
            let a = artin_constant(truncation);
            println!("A_inf in {a}");
            println!("width {}", to_decimal(&a.width(), 20, Rounding::Up));
            Ok(0)
        }
        Command::Ingest { label, fixtures, remote } => {
            let fixtures = fixtures.unwrap_or_else(app::default_fixture_dir);
            let source = match remote {
                Some(endpoint) => IngestSource::Remote { endpoint, fixtures },
                None => IngestSource::Offline { fixtures },
            };
            let profile = app::ingest_degrees(&source, &label)?;
            println!("{}", profile.to_json());
            Ok(0)
        }
    }
}

fn census(args: CensusArgs) -> Result<u8, AppError> {
    let (spec, curve) = args.curve.resolve()?;
    let opts = CensusOptions {
        workers: args.workers,
        checkpoint: args.checkpoint,
        split_primes: args.split,
        prime_csv: args.primes_csv,
        running_csv: args.running_csv,
    };
    let report = run_census(&curve, args.limit, &opts)?;
    println!(
        "y^2 = x^3 + ({})x + ({}): {} of {} primes below {} cyclic, fraction {:.6} ({:.1} s)",
        curve.a(),
        curve.b(),
        report.cyclic_count,
        report.total_primes,
        report.limit,
        report.fraction,
        report.elapsed_seconds
    );
    let label = spec.as_ref().map(|s| s.label.clone());
    let file = CensusReportFile::new(label, report, spec.and_then(|s| s.expected));
    if let Some(path) = &args.output {
        app::write_json(path, &file)?;
    }
    if file.matches_expected == Some(false) {
        let e = file.expected.as_ref().expect("expected values present");
        eprintln!("mismatch: expected {} cyclic primes, fraction {}", e.cyclic_count, e.fraction);
        return Ok(EXIT_MISMATCH);
    }
    Ok(0)
}

fn density(args: DensityArgs) -> Result<u8, AppError> {
    let (label, mut profile, expected) = match (&args.label, &args.profile) {
        (Some(label), _) => {
            let spec = app::lookup(label)?;
            (Some(spec.label), spec.profile, spec.expected)
        }
        (None, Some(path)) => (None, app::load_profile(path)?, None),
        (None, None) => (None, DegreeProfile::maximal(), None),
    };
    let overridden = args.charsum.is_some() || args.superfluous.is_some() || args.alpha.is_some();
    if let Some(c) = args.charsum {
        profile.charsum = c.into_iter().collect();
    }
    if let Some(s) = args.superfluous {
        profile.superfluous = s.into_iter().collect();
    }
    profile.validate()?;
    let alpha = match &args.alpha {
        Some(s) => Some(
            parse_rational(s).ok_or_else(|| AppError::SchemaMismatch(format!("cannot parse alpha {s:?}")))?,
        ),
        None => None,
    };
    if args.truncation < 2 {
        return Err(AppError::SchemaMismatch("truncation must be at least 2".into()));
    }
    let report = DensityReport::build(&profile, args.truncation, alpha)?;
    println!("A_inf  {}", report.a_inf);
    println!("A_E    {}", report.naive);
    println!("delta  {}", report.delta);
    println!("alpha  {}", report.alpha);
    println!("c      {}", report.c_factor);
    println!("class  {:?}", report.vanishing);
    let file = DensityReportFile::new(label, &profile, &report, if overridden { None } else { expected });
    if let Some(path) = &args.output {
        app::write_json(path, &file)?;
    }
    if file.matches_expected == Some(false) {
        eprintln!("mismatch against the printed values");
        return Ok(EXIT_MISMATCH);
    }
    Ok(0)
}

fn galois(args: GaloisArgs) -> Result<u8, AppError> {
    let (_, curve) = args.curve.resolve()?;
    println!("[Q(E[2]):Q] = {}", two_division_degree(&curve));
    for &ell in &args.ell {
        if ell < 5 {
            let fp = image_fingerprint(&curve, ell, args.samples)?;
            println!("l = {ell}: fingerprint only, {} samples, {} (trace, det) pairs", fp.samples, fp.trace_det_pairs.len());
            continue;
        }
        let check = certify_surjective(&curve, ell, args.samples)?;
        let fp = check.fingerprint();
        let verdict = if check.is_certified() { "surjective (heuristic certificate)" } else { "inconclusive" };
        println!(
            "l = {ell}: {verdict}; witnesses {}{}{} after {} samples",
            fp.w1 as u8, fp.w2 as u8, fp.w3 as u8, fp.samples
        );
    }
    Ok(0)
}
