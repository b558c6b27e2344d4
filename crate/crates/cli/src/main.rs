//! Batch command-line driver: PBW normal forms, the property suites,
//! homology and cyclic reports, and the index pairing tables.
//!
//! Exit codes: 0 success, 1 property failure, 2 usage or parse error,
//! 3 semantic input error (e.g. a supplied matrix that is not a projection).

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use qpodles_core::{
    basis_up_to, hc_report, index_table, orbifold_hh, run_suite, ChernError, CrossedElement,
    CrossedMatrix, HomologyError, HomologyReport, Orbifold, PodlesAlgebra, Resolution, Suite,
    TruncationSpec, Twist,
};
use serde::Deserialize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "qpodles", version, about = "Exact computations in the quantum-sphere orbifolds")]
struct Cli {
    /// Algebra parameter s, an exact rational such as 1 or 1/2.
    #[arg(long, global = true, default_value = "1", env = "QPODLES_S")]
    s: String,

    /// Truncation degree for chain modules (at least 2).
    #[arg(
        long = "N",
        global = true,
        default_value_t = 6,
        env = "QPODLES_N",
        value_parser = clap::value_parser!(u32).range(2..)
    )]
    max_degree: u32,

    /// Cap on the bar tensor arity.
    #[arg(
        long = "tensor-max",
        global = true,
        default_value_t = 3,
        env = "QPODLES_TENSOR_MAX"
    )]
    tensor_max: u8,

    /// Output format for tables and reports.
    #[arg(
        long,
        global = true,
        value_enum,
        default_value_t = Format::Md,
        env = "QPODLES_FORMAT"
    )]
    format: Format,

    /// Seed for the randomized property suites.
    #[arg(long, global = true, default_value_t = 7, env = "QPODLES_SEED")]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the PBW normal form of an expression.
    Normalize { expr: String },
    /// Multiply two expressions and print the normal form of the product.
    Mul { x: String, y: String },
    /// Run a property suite: relations, resolution or complexes.
    Verify { suite: String },
    /// Hochschild homology of an orbifold in one degree.
    Homology {
        orbifold: OrbifoldArg,
        /// Homological degree (0, 1 or 2).
        #[arg(long, default_value_t = 0)]
        n: u8,
    },
    /// Cyclic homology of the sphere with twisted coefficients.
    Cyclic {
        /// Coefficient twist.
        #[arg(long, value_enum, default_value_t = TwistArg::Id)]
        twist: TwistArg,
        /// Homological degree.
        #[arg(long, default_value_t = 0)]
        n: u8,
    },
    /// Chern pairing table of an orbifold, optionally with extra projections.
    #[command(name = "index-table")]
    IndexTable {
        orbifold: OrbifoldArg,
        /// JSON file with a projection matrix over the crossed product.
        #[arg(long)]
        projection: Option<PathBuf>,
    },
    /// List the PBW basis monomials up to the truncation degree.
    Basis,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrbifoldArg {
    /// Quantum disc (ladder sign flip).
    #[value(name = "Dq", alias = "dq")]
    Dq,
    /// Quantum real projective plane (total sign flip).
    #[value(name = "RP2q", alias = "rp2q")]
    RP2q,
}

impl From<OrbifoldArg> for Orbifold {
    fn from(o: OrbifoldArg) -> Orbifold {
        match o {
            OrbifoldArg::Dq => Orbifold::Dq,
            OrbifoldArg::RP2q => Orbifold::RP2q,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TwistArg {
    Id,
    Sigma,
    Mu,
}

impl From<TwistArg> for Twist {
    fn from(t: TwistArg) -> Twist {
        match t {
            TwistArg::Id => Twist::Id,
            TwistArg::Sigma => Twist::Sigma,
            TwistArg::Mu => Twist::Mu,
        }
    }
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn semantic(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }

    fn property(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

fn homology_failure(e: HomologyError) -> Failure {
    match e {
        HomologyError::Degree { .. }
        | HomologyError::UnsupportedDegree { .. }
        | HomologyError::SmallTruncation { .. } => Failure::usage(e.to_string()),
        other => Failure::property(other.to_string()),
    }
}

fn chern_failure(e: ChernError) -> Failure {
    match e {
        ChernError::NotAProjection | ChernError::SymmetryMismatch { .. } => {
            Failure::semantic(e.to_string())
        }
        ChernError::Crossed(inner) => Failure::usage(inner.to_string()),
    }
}

#[derive(Deserialize)]
struct ProjectionFile {
    size: usize,
    /// Row-major entries, each `even | odd` in the expression grammar.
    entries: Vec<String>,
}

fn load_projection(
    alg: &PodlesAlgebra,
    action: Twist,
    path: &PathBuf,
) -> Result<CrossedMatrix, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let file: ProjectionFile = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("bad projection file {}: {e}", path.display())))?;
    let mut entries = Vec::with_capacity(file.entries.len());
    for src in &file.entries {
        entries.push(
            CrossedElement::parse(alg, action, src)
                .map_err(|e| Failure::usage(format!("bad projection entry `{src}`: {e}")))?,
        );
    }
    CrossedMatrix::new(file.size, action, entries).map_err(|e| Failure::usage(e.to_string()))
}

fn print_homology(report: &HomologyReport, format: Format) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report.to_json()).expect("report serializes")
        ),
        Format::Csv => {
            println!("twist,n,N,dim,stabilized,generators");
            println!(
                "{},{},{},{},{},{}",
                report.twist,
                report.n,
                report.max_degree,
                report.dim,
                report.stabilized,
                report.generators.join(";")
            );
        }
        Format::Md => {
            println!("| twist | n | N | dim | stabilized |");
            println!("| --- | --- | --- | --- | --- |");
            println!(
                "| {} | {} | {} | {} | {} |",
                report.twist, report.n, report.max_degree, report.dim, report.stabilized
            );
            println!();
            if report.generators.is_empty() {
                println!("generators: (none)");
            } else {
                println!("generators: {}", report.generators.join(", "));
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let s = BigRational::from_str(&cli.s)
        .map_err(|e| Failure::usage(format!("bad --s value `{}`: {e}", cli.s)))?;
    let alg = PodlesAlgebra::new(s.clone());
    let trunc = TruncationSpec {
        max_degree: cli.max_degree,
        tensor_cap: cli.tensor_max,
    };

    match cli.command {
        Command::Normalize { expr } => {
            let x = alg.parse(&expr).map_err(|e| Failure::usage(e.to_string()))?;
            println!("{x}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Mul { x, y } => {
            let x = alg.parse(&x).map_err(|e| Failure::usage(e.to_string()))?;
            let y = alg.parse(&y).map_err(|e| Failure::usage(e.to_string()))?;
            println!("{}", alg.mul(&x, &y));
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite } => {
            let suite = Suite::from_str(&suite).map_err(Failure::usage)?;
            let report = run_suite(suite, &s, cli.seed);
            match cli.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report.to_json()).expect("report serializes")
                ),
                Format::Csv => print!("{}", report.to_csv()),
                Format::Md => print!("{}", report.to_markdown()),
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Homology { orbifold, n } => {
            let res = Resolution::new(alg).map_err(|e| Failure::semantic(e.to_string()))?;
            let report = orbifold_hh(&res, orbifold.into(), n, trunc).map_err(homology_failure)?;
            print_homology(&report, cli.format);
            Ok(ExitCode::SUCCESS)
        }
        Command::Cyclic { twist, n } => {
            let res = Resolution::new(alg).map_err(|e| Failure::semantic(e.to_string()))?;
            let report = hc_report(&res, twist.into(), n, trunc).map_err(homology_failure)?;
            print_homology(&report, cli.format);
            Ok(ExitCode::SUCCESS)
        }
        Command::IndexTable {
            orbifold,
            projection,
        } => {
            let orbifold: Orbifold = orbifold.into();
            let mut extras = Vec::new();
            if let Some(path) = &projection {
                extras.push(load_projection(&alg, orbifold.action(), path)?);
            }
            let table = index_table(&alg, orbifold, &extras).map_err(chern_failure)?;
            match cli.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&table.to_json()).expect("table serializes")
                ),
                Format::Csv => print!("{}", table.to_csv()),
                Format::Md => print!("{}", table.to_markdown()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Basis => {
            let basis = basis_up_to(cli.max_degree);
            match cli.format {
                Format::Json => {
                    let monomials: Vec<_> = basis
                        .iter()
                        .map(|m| {
                            serde_json::json!({
                                "text": m.to_string(),
                                "degree": m.degree(),
                                "charge": m.charge(),
                            })
                        })
                        .collect();
                    let value = serde_json::json!({
                        "N": cli.max_degree,
                        "count": basis.len(),
                        "monomials": monomials,
                    });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&value).expect("basis serializes")
                    );
                }
                Format::Csv => {
                    println!("index,monomial,degree,charge");
                    for (i, m) in basis.iter().enumerate() {
                        println!("{i},{m},{},{}", m.degree(), m.charge());
                    }
                }
                Format::Md => {
                    println!("| index | monomial | degree | charge |");
                    println!("| --- | --- | --- | --- |");
                    for (i, m) in basis.iter().enumerate() {
                        println!("| {i} | {m} | {} | {} |", m.degree(), m.charge());
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
