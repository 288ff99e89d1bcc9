//! Command-line front end: classify points, decide same-orbit, run fiber
//! censuses and the rank map, verify the identity suites, and build
//! canonical representatives. Results are compact JSON on stdout (or a
//! file); a human summary goes to stderr.
//!
//! Exit codes: 0 success, 1 verification failures, 2 usage or input errors.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use orbitkit::orbits::{classify, fiber_census, representative, same_orbit};
use orbitkit::suites::{run_suite_sized, SuiteKind, SuiteReport};
use orbitkit::{fields, FiberSpec, GroupCase, OrbitLabel, Point, Rational, SeedStream};

#[derive(Parser)]
#[command(
    name = "orbitkit",
    about = "Exact orbit classification on the unit-pairing quadric",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArg {
    /// Write the JSON result to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a point under one of the five cases.
    Classify {
        /// Case token: h1 | glplus | htilde | h | htilde-torus.
        #[arg(long)]
        case: String,
        /// Point as JSON: {"n":3,"x1":"2","xp":[...],"y1":"1/2","yp":[...]}.
        #[arg(long)]
        point: String,
        /// Optional dimension cross-checked against the point.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Decide whether two points lie on the same orbit.
    SameOrbit {
        #[arg(long)]
        case: String,
        /// Two points, each passed as its own --point argument.
        #[arg(long = "point")]
        points: Vec<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Sample a fiber of an invariant map and count distinct labels.
    Census {
        #[arg(long)]
        case: String,
        /// Fiber spec: q=X1,Y1 for a head fiber or Q=T for a level fiber.
        #[arg(long)]
        fiber: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Compare block and split-orthogonal field ranks across strata.
    RankMap {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run a verification suite (or all of them).
    Verify {
        /// Suite token: actions | classifier | census | lemma3 | rankmap |
        /// delta | charts | all.
        #[arg(long)]
        suite: String,
        #[arg(long)]
        seed: u64,
        /// Chart dimension override (lemma3 only; others are pinned).
        #[arg(long)]
        n: Option<usize>,
        /// Per-check trial count override (defaults are pinned per suite).
        #[arg(long)]
        trials: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Build the canonical representative of a label.
    Representative {
        #[arg(long)]
        n: usize,
        /// Label as JSON, as produced by classify.
        #[arg(long)]
        label: String,
        /// Optional case token cross-checked against the label.
        #[arg(long)]
        case: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
}

struct UsageError(String);

impl From<orbitkit::Error> for UsageError {
    fn from(err: orbitkit::Error) -> Self {
        UsageError(err.to_string())
    }
}

fn parse_case(token: &str) -> Result<GroupCase, UsageError> {
    GroupCase::from_cli_token(token).ok_or_else(|| {
        UsageError(format!(
            "unknown case {token:?}; expected h1 | glplus | htilde | h | htilde-torus"
        ))
    })
}

fn parse_point(text: &str) -> Result<Point, UsageError> {
    serde_json::from_str(text).map_err(|e| UsageError(format!("malformed point: {e}")))
}

fn parse_label(text: &str) -> Result<OrbitLabel, UsageError> {
    serde_json::from_str(text).map_err(|e| UsageError(format!("malformed label: {e}")))
}

/// Parses `q=X1,Y1` or `Q=T` with exact rational values.
fn parse_fiber(text: &str) -> Result<FiberSpec, UsageError> {
    if let Some(rest) = text.strip_prefix("q=") {
        let (x1, y1) = rest
            .split_once(',')
            .ok_or_else(|| UsageError(format!("fiber {text:?} needs q=X1,Y1")))?;
        return Ok(FiberSpec::first_pair(
            Rational::from_str(x1.trim())?,
            Rational::from_str(y1.trim())?,
        ));
    }
    if let Some(rest) = text.strip_prefix("Q=") {
        return Ok(FiberSpec::prime_pairing(Rational::from_str(rest.trim())?));
    }
    Err(UsageError(format!(
        "fiber {text:?} must start with q= or Q="
    )))
}

fn emit(value: &impl Serialize, out: &OutArg) -> Result<(), UsageError> {
    let mut text = serde_json::to_string(value).map_err(|e| UsageError(e.to_string()))?;
    text.push('\n');
    match &out.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct AllSuites {
    suites: Vec<SuiteReport>,
    failures: usize,
}

#[derive(Serialize)]
struct ClassifyOut<'a> {
    label: &'a OrbitLabel,
}

#[derive(Serialize)]
struct SameOrbitOut<'a> {
    same: bool,
    labels: [&'a OrbitLabel; 2],
}

/// Applies the ORBITKIT_THREADS cap. The variable is validated in every
/// build; sizing the pool only applies to the parallel lane (the
/// sequential build accepts any valid cap as a no-op).
fn configure_threads() -> Result<(), UsageError> {
    let Ok(raw) = std::env::var("ORBITKIT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .map_err(|_| UsageError(format!("ORBITKIT_THREADS={raw:?} is not a thread count")))?;
    if threads == 0 {
        return Err(UsageError("ORBITKIT_THREADS must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| UsageError(format!("cannot size the thread pool: {e}")))?;
    Ok(())
}

fn require_dimension(n: usize) -> Result<(), UsageError> {
    if n < 2 {
        return Err(UsageError(format!(
            "dimension parameter must be at least 2, got {n}"
        )));
    }
    Ok(())
}

fn require_samples(samples: usize) -> Result<(), UsageError> {
    if samples == 0 {
        return Err(UsageError("sample count must be at least 1".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, UsageError> {
    match cli.command {
        Command::Classify { case, point, n, out } => {
            let case = parse_case(&case)?;
            let p = parse_point(&point)?;
            if let Some(n) = n {
                if n != p.n() {
                    return Err(UsageError(format!(
                        "--n {n} does not match the point's dimension {}",
                        p.n()
                    )));
                }
            }
            let label = classify(case, &p);
            emit(&ClassifyOut { label: &label }, &out)?;
            eprintln!(
                "classify: case {}, stratum {}",
                case.json_token(),
                label.stratum().token()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::SameOrbit { case, points, out } => {
            let case = parse_case(&case)?;
            if points.len() != 2 {
                return Err(UsageError(format!(
                    "same-orbit needs exactly two --point arguments, got {}",
                    points.len()
                )));
            }
            let a = parse_point(&points[0])?;
            let b = parse_point(&points[1])?;
            let same = same_orbit(case, &a, &b)?;
            let labels = [classify(case, &a), classify(case, &b)];
            emit(
                &SameOrbitOut {
                    same,
                    labels: [&labels[0], &labels[1]],
                },
                &out,
            )?;
            eprintln!(
                "same-orbit: case {}, {}",
                case.json_token(),
                if same { "same orbit" } else { "different orbits" }
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Census {
            case,
            fiber,
            n,
            samples,
            seed,
            out,
        } => {
            let case = parse_case(&case)?;
            let fiber = parse_fiber(&fiber)?;
            require_dimension(n)?;
            require_samples(samples)?;
            let mut stream = SeedStream::new(seed);
            let report = fiber_census(case, &fiber, n, samples, &mut stream)?;
            emit(&report, &out)?;
            eprintln!(
                "census: case {}, n {}, fiber {}: {} distinct labels over {} samples{}",
                case.json_token(),
                n,
                fiber.token(),
                report.distinct,
                samples,
                if report.continuum {
                    " (one a continuum family)"
                } else {
                    ""
                }
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::RankMap {
            n,
            samples,
            seed,
            out,
        } => {
            require_dimension(n)?;
            require_samples(samples)?;
            let mut stream = SeedStream::new(seed);
            let table = fields::rank_map(n, samples, &mut stream)?;
            emit(&table, &out)?;
            let divergent: Vec<&str> = table
                .strata
                .iter()
                .filter(|row| !row.equal)
                .map(|row| row.name)
                .collect();
            eprintln!(
                "rank-map: n {}, spans diverge on {}",
                n,
                if divergent.is_empty() {
                    "no strata".to_string()
                } else {
                    divergent.join(", ")
                }
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            suite,
            seed,
            n,
            trials,
            out,
        } => {
            if suite == "all" {
                if n.is_some() {
                    return Err(UsageError(
                        "the combined run fixes its own dimensions; --n needs a single suite"
                            .into(),
                    ));
                }
                let suites: Vec<SuiteReport> = SuiteKind::ALL
                    .iter()
                    .map(|&kind| run_suite_sized(kind, seed, None, trials))
                    .collect::<Result<_, _>>()?;
                let failures = suites.iter().map(|s| s.failures).sum();
                emit(&AllSuites { suites, failures }, &out)?;
                eprintln!("verify: all suites, {failures} failures");
                return Ok(if failures == 0 {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                });
            }
            let kind = SuiteKind::from_token(&suite).ok_or_else(|| {
                UsageError(format!(
                    "unknown suite {suite:?}; expected actions | classifier | census | lemma3 | rankmap | delta | charts | all"
                ))
            })?;
            let report = run_suite_sized(kind, seed, n, trials)?;
            emit(&report, &out)?;
            eprintln!(
                "verify: suite {}, {} checks, {} failures",
                report.suite,
                report.checks.len(),
                report.failures
            );
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Representative {
            n,
            label,
            case,
            out,
        } => {
            require_dimension(n)?;
            let label = parse_label(&label)?;
            if let Some(token) = case {
                let case = parse_case(&token)?;
                if case != label.case() {
                    return Err(UsageError(format!(
                        "case {token:?} does not match the label's case {}",
                        label.case().json_token()
                    )));
                }
            }
            let p = representative(n, &label)?;
            emit(&p, &out)?;
            eprintln!(
                "representative: case {}, stratum {}, n {}",
                label.case().json_token(),
                label.stratum().token(),
                n
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(UsageError(msg)) = configure_threads() {
        eprintln!("orbitkit: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("orbitkit: {msg}");
            ExitCode::from(2)
        }
    }
}
