//! `catlab`: reproducible computations on quantized cat maps and their
//! Hecke eigenfunctions. Every run writes CSV outputs plus a manifest
//! with checksums; exit codes are 0 (ok), 1 (internal error), 2 (invalid
//! input), 3 (a verification budget failed).

mod commands;
mod output;
mod svg;

use catlab::budgets::Budgets;
use catlab::classical::CatMap;
use catlab::kernels::sum_kernel;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or domain preconditions: exit 2.
    Invalid(String),
    /// A declared budget was exceeded: exit 3.
    Assertion(String),
    /// IO or other internal problems: exit 1.
    Internal(String),
}

impl Failure {
    fn invalid(e: impl std::fmt::Display) -> Self {
        Failure::Invalid(e.to_string())
    }

    fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Assertion(_) => 3,
            Failure::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Assertion(m) | Failure::Internal(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "catlab", version, about = "quantized cat map laboratory")]
struct Cli {
    /// Map entries a,b,c,d (det 1, |a+d| > 2, congruent to I mod 2).
    #[arg(long, global = true, default_value = "3,2,4,3")]
    map: String,
    /// Output directory for CSVs and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for the oracle's random coefficients and character sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// key=value tolerance-budget overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Sum kernel: direct, fft, or auto.
    #[arg(long, global = true, default_value = "auto")]
    kernel: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify odd primes up to a bound.
    Classify {
        #[arg(long)]
        primes_up_to: u64,
    },
    /// Build and validate the Hecke eigenbasis at a split prime.
    Eigenbasis {
        #[arg(long)]
        prime: u64,
        /// Export each basis vector as psi_p{p}_k{k}.csv.
        #[arg(long)]
        export: bool,
    },
    /// Amplitude value-distribution statistics for chosen characters.
    Valuedist {
        #[arg(long)]
        prime: u64,
        /// Comma-separated character indices in [1, p-2].
        #[arg(long)]
        chars: String,
        /// Also measure pairwise joint discrepancy over consecutive pairs.
        #[arg(long)]
        joint: bool,
        /// Histogram bins for the SVG.
        #[arg(long, default_value_t = 40)]
        bins: usize,
        /// Write an SVG histogram with the semicircle overlay per character.
        #[arg(long)]
        svg: bool,
        /// Export normalized sum profiles and their metadata.
        #[arg(long)]
        profiles: bool,
    },
    /// Sup-norm scan over split primes up to a bound.
    Supnorm {
        #[arg(long)]
        primes_up_to: u64,
    },
    /// Count torus quadruples annihilated by a twist.
    Solcount {
        #[arg(long)]
        modulus: u64,
        /// Twist u,v representing u + v*alpha.
        #[arg(long)]
        nu: String,
        /// Counting strategy: convolution or brute-force.
        #[arg(long, default_value = "convolution")]
        algorithm: String,
    },
    /// Fourth moments of diagonal matrix elements up to n-max.
    Moments {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        n_max: i64,
    },
    /// Exact-Egorov residual grid at one prime.
    Egorov {
        #[arg(long)]
        prime: u64,
    },
    /// Full invariant suite at one prime; exit 3 on any failure.
    Verify {
        #[arg(long)]
        prime: u64,
    },
}

fn parse_csv_numbers<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| Failure::Invalid(format!("bad {what}: '{s}'")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Ok(threads) = std::env::var("CATLAB_THREADS") {
        let n: usize = threads
            .parse()
            .map_err(|_| Failure::Invalid(format!("CATLAB_THREADS = '{threads}'")))?;
        // Ignore the error when a pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let entries: Vec<i64> = parse_csv_numbers(&cli.map, "map entry")?;
    let [a, b, c, d] = entries[..] else {
        return Err(Failure::Invalid(format!(
            "--map needs four entries, got {}",
            entries.len()
        )));
    };
    let map = CatMap::new(a, b, c, d).map_err(Failure::invalid)?;

    let mut budgets = Budgets::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Invalid(format!("config {}: {e}", path.display())))?;
        budgets.apply_kv(&text).map_err(Failure::invalid)?;
    }
    let kernel = sum_kernel(&cli.kernel).map_err(Failure::invalid)?;

    let mut sink = output::OutputSink::new(&cli.out)?;
    let (name, params) = match &cli.cmd {
        Cmd::Classify { primes_up_to } => (
            "classify",
            commands::classify(&map, *primes_up_to, &mut sink)?,
        ),
        Cmd::Eigenbasis { prime, export } => (
            "eigenbasis",
            commands::eigenbasis(&map, *prime, *export, kernel.as_ref(), &budgets, &mut sink)?,
        ),
        Cmd::Valuedist {
            prime,
            chars,
            joint,
            bins,
            svg,
            profiles,
        } => {
            let chars: Vec<u64> = parse_csv_numbers(chars, "character index")?;
            if chars.is_empty() {
                return Err(Failure::Invalid("--chars needs at least one index".into()));
            }
            (
                "valuedist",
                commands::valuedist(
                    &map,
                    *prime,
                    &chars,
                    *joint,
                    *bins,
                    *svg,
                    *profiles,
                    kernel.as_ref(),
                    &budgets,
                    &mut sink,
                )?,
            )
        }
        Cmd::Supnorm { primes_up_to } => (
            "supnorm",
            commands::supnorm(&map, *primes_up_to, kernel.as_ref(), &mut sink)?,
        ),
        Cmd::Solcount {
            modulus,
            nu,
            algorithm,
        } => {
            let nu_parts: Vec<i64> = parse_csv_numbers(nu, "twist coordinate")?;
            let [u, v] = nu_parts[..] else {
                return Err(Failure::Invalid("--nu needs two entries".into()));
            };
            (
                "solcount",
                commands::solcount(&map, *modulus, (u, v), algorithm, &mut sink)?,
            )
        }
        Cmd::Moments { prime, n_max } => (
            "moments",
            commands::moments(&map, *prime, *n_max, kernel.as_ref(), &budgets, &mut sink)?,
        ),
        Cmd::Egorov { prime } => (
            "egorov",
            commands::egorov(&map, *prime, &budgets, &mut sink)?,
        ),
        Cmd::Verify { prime } => (
            "verify",
            commands::verify(&map, *prime, cli.seed, kernel.as_ref(), &budgets, &mut sink)?,
        ),
    };

    let mut params = params;
    params["seed"] = serde_json::json!(cli.seed);
    params["kernel"] = serde_json::json!(kernel.name());
    output::write_manifest(&mut sink, [a, b, c, d], name, params, &budgets)?;
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {}", f.message());
            std::process::exit(f.exit_code());
        }
    }
}
