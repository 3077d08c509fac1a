//! Command-line front end for the budget aggregation library.
//!
//! Exit codes: 0 on success, 1 when the axiom suite finds a counterexample
//! for an axiom the mechanism claims, 2 on input errors.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use moving_phantoms::axioms::{run_axiom_suite, SuiteConfig};
use moving_phantoms::generate::{ProfileKind, ProfileStream};
use moving_phantoms::io::{
    parse_profile, run_mechanism, suite_to_json, suite_to_lines, trajectory_table,
    DocumentFormat, ProfileDocument, SEED_ENV_VAR,
};
use moving_phantoms::mechanisms::{Mechanism, MoulinPhantoms, PARIMUTUEL_TOLERANCE};
use moving_phantoms::rational::parse_rational;
use moving_phantoms::{Profile, Result};

#[derive(Parser)]
#[command(
    name = "phantoms",
    about = "Budget aggregation by moving phantom mechanisms, exactly",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MechanismArgs {
    /// Mechanism id: independent-markets, utilitarian, uniform-phantom,
    /// moulin, mean, or parimutuel.
    #[arg(long)]
    mechanism: String,
    /// Comma-separated phantom placements for `moulin` (e.g. "1,2/3,1/3,0").
    #[arg(long)]
    phantoms: Option<String>,
    /// Convergence tolerance for `parimutuel`.
    #[arg(long, default_value_t = PARIMUTUEL_TOLERANCE)]
    tolerance: f64,
}

impl MechanismArgs {
    fn resolve(&self) -> Result<Mechanism> {
        let mut mechanism = Mechanism::from_id(&self.mechanism)?;
        if let Mechanism::Parimutuel { tolerance } = &mut mechanism {
            *tolerance = self.tolerance;
        }
        if let Some(values) = &self.phantoms {
            let alphas = values
                .split(',')
                .map(parse_rational)
                .collect::<Result<Vec<_>>>()?;
            mechanism = Mechanism::Moulin(Some(MoulinPhantoms::new(alphas)?));
        }
        Ok(mechanism)
    }
}

#[derive(Args)]
struct InputArgs {
    /// Profile file, or `-` for stdin.
    #[arg(long)]
    input: PathBuf,
    /// Input format: json or csv.
    #[arg(long, default_value = "json")]
    format: String,
}

impl InputArgs {
    fn read(&self) -> std::result::Result<Profile, String> {
        let text = if self.input.as_os_str() == "-" {
            let mut buffer = String::new();
            std::io::stdin()
                .read_to_string(&mut buffer)
                .map_err(|e| e.to_string())?;
            buffer
        } else {
            fs::read_to_string(&self.input)
                .map_err(|e| format!("{}: {e}", self.input.display()))?
        };
        let format = DocumentFormat::from_id(&self.format)
            .ok_or_else(|| format!("unknown input format `{}`", self.format))?;
        parse_profile(&text, format).map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on a profile and print the result document.
    Run {
        #[command(flatten)]
        mechanism: MechanismArgs,
        #[command(flatten)]
        input: InputArgs,
        /// Write the JSON document here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the axiom suite against a mechanism.
    Axioms {
        #[command(flatten)]
        mechanism: MechanismArgs,
        /// Profile file to test on; omitted means generated profiles.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Input format: json or csv.
        #[arg(long, default_value = "json")]
        format: String,
        /// Seed (defaults to PHANTOMS_SEED, then 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Trial budget per randomized axiom.
        #[arg(long, default_value_t = 200)]
        trials: u64,
        /// Lattice resolution for the Pareto grid oracle.
        #[arg(long, default_value_t = 10)]
        grid: u32,
        /// Generator family when no input is given.
        #[arg(long, default_value = "dirichlet-like")]
        kind: String,
        /// Voters per generated profile.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Alternatives per generated profile.
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Number of generated profiles.
        #[arg(long, default_value_t = 20)]
        profiles: usize,
        /// Emit one verdict per line instead of JSON.
        #[arg(long)]
        lines: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the phantom movie of a mechanism on a profile.
    Trajectory {
        #[command(flatten)]
        mechanism: MechanismArgs,
        #[command(flatten)]
        input: InputArgs,
        /// Uniform sample count (breakpoints and t* are always included).
        #[arg(long, default_value_t = 21)]
        samples: usize,
        /// Output format: csv or json.
        #[arg(long, default_value = "csv")]
        emit: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate random profiles as JSON documents, one per line.
    Generate {
        /// single-minded, dirichlet-like, or polarized.
        #[arg(long, default_value = "dirichlet-like")]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of profiles to emit.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Lattice resolution of generated reports.
        #[arg(long, default_value_t = 20)]
        grid: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn default_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var(SEED_ENV_VAR)
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

fn write_output(out: Option<&PathBuf>, text: &str) -> std::result::Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> std::result::Result<u8, String> {
    match cli.command {
        Command::Run {
            mechanism,
            input,
            out,
        } => {
            let mechanism = mechanism.resolve().map_err(|e| e.to_string())?;
            let profile = input.read()?;
            let document = run_mechanism(&mechanism, &profile).map_err(|e| e.to_string())?;
            let json = serde_json::to_string_pretty(&document).expect("document serializes");
            write_output(out.as_ref(), &json)?;
            Ok(0)
        }
        Command::Axioms {
            mechanism,
            input,
            format,
            seed,
            trials,
            grid,
            kind,
            n,
            m,
            profiles,
            lines,
            out,
        } => {
            let mechanism = mechanism.resolve().map_err(|e| e.to_string())?;
            let seed = default_seed(seed);
            let suite_profiles: Vec<Profile> = match input {
                Some(path) => {
                    let args = InputArgs {
                        input: path,
                        format,
                    };
                    vec![args.read()?]
                }
                None => {
                    let kind = ProfileKind::from_id(&kind)
                        .ok_or_else(|| format!("unknown profile kind `{kind}`"))?;
                    ProfileStream::new(kind, n, m, 20, seed)
                        .take(profiles)
                        .collect()
                }
            };
            let config = SuiteConfig {
                mechanism,
                trials,
                seed,
                grid_resolution: grid,
            };
            let suite =
                run_axiom_suite(&config, &suite_profiles).map_err(|e| e.to_string())?;
            let text = if lines {
                suite_to_lines(&suite)
            } else {
                suite_to_json(&suite)
            };
            write_output(out.as_ref(), &text)?;
            Ok(if suite.claim_violations().is_empty() {
                0
            } else {
                1
            })
        }
        Command::Trajectory {
            mechanism,
            input,
            samples,
            emit,
            out,
        } => {
            let mechanism = mechanism.resolve().map_err(|e| e.to_string())?;
            let profile = input.read()?;
            let table =
                trajectory_table(&mechanism, &profile, samples).map_err(|e| e.to_string())?;
            let text = match emit.as_str() {
                "csv" => table.to_csv(),
                "json" => table.to_json(),
                other => return Err(format!("unknown output format `{other}`")),
            };
            write_output(out.as_ref(), &text)?;
            Ok(0)
        }
        Command::Generate {
            kind,
            n,
            m,
            seed,
            count,
            grid,
            out,
        } => {
            let kind = ProfileKind::from_id(&kind)
                .ok_or_else(|| format!("unknown profile kind `{kind}`"))?;
            let seed = default_seed(seed);
            let documents: Vec<String> = ProfileStream::new(kind, n, m, grid, seed)
                .take(count)
                .map(|p| {
                    serde_json::to_string(&ProfileDocument::from_profile(&p))
                        .expect("profile document serializes")
                })
                .collect();
            write_output(out.as_ref(), &documents.join("\n"))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
