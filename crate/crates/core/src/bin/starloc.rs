use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use starloc::orelab::Side;
use starloc::session::{Session, SessionConfig};
use starloc::verify::{self, VerifyContext};
use starloc::Error;

/// Exact star products, their localizations and Ore experiments.
#[derive(Parser, Debug)]
#[command(name = "starloc", version)]
struct Cli {
    /// Session configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized suites; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Truncation order K; overrides the config.
    #[arg(long, global = true)]
    trunc: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Right,
    Left,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Star product of two series.
    Eval {
        u: String,
        v: String,
        /// Evaluate over the localization at this set.
        #[arg(long)]
        set: Option<String>,
    },
    /// Star inverse of a series.
    Invert {
        g: String,
        #[arg(long)]
        set: Option<String>,
    },
    /// Poisson bracket of two polynomials.
    Bracket { f: String, g: String },
    /// Localize the session product at a set (JSON report).
    Localize {
        #[arg(long)]
        set: String,
        u: Option<String>,
        v: Option<String>,
    },
    /// Bounded Ore witness search (JSON report).
    Ore {
        #[arg(long)]
        r: String,
        #[arg(long)]
        s: String,
        #[arg(long)]
        set: String,
        #[arg(long, value_enum, default_value = "right")]
        side: SideArg,
        /// Degree bound for unknown coefficients.
        #[arg(long, default_value_t = 2)]
        degree: u32,
        /// Largest exponent tried for the leading term of s'.
        #[arg(long, default_value_t = 3)]
        exponent_bound: u32,
    },
    /// Run a verification suite, or `all`.
    Verify { suite: String },
    /// Gauge the session product by exp(c L Δ) and print it as JSON.
    Gauge {
        #[arg(long, default_value = "1/2")]
        c: String,
    },
}

enum Failure {
    Usage(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::StarAxiom(_) => {
                eprintln!("error: {e}");
                Failure::Verification
            }
            e => Failure::Usage(e),
        }
    }
}

fn session(cli: &Cli) -> Result<Session, Error> {
    let mut config = match &cli.config {
        Some(path) => SessionConfig::load(path)?,
        None => SessionConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(k) = cli.trunc {
        config.trunc = k;
    }
    let base = cli.config.as_deref().and_then(|p| p.parent());
    Session::new(config, base)
}

fn json(value: &impl serde::Serialize) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let s = session(cli)?;
    match &cli.command {
        Command::Eval { u, v, set } => println!("{}", s.eval(u, v, set.as_deref())?),
        Command::Invert { g, set } => println!("{}", s.invert(g, set.as_deref())?),
        Command::Bracket { f, g } => println!("{}", s.bracket(f, g)?),
        Command::Localize { set, u, v } => {
            let args = match (u, v) {
                (Some(u), Some(v)) => Some((u.as_str(), v.as_str())),
                (None, None) => None,
                _ => {
                    return Err(Failure::Usage(Error::Precondition(
                        "localize takes either no fractions or two".into(),
                    )))
                }
            };
            let report = s.localize(set, args)?;
            println!("{}", json(&report)?);
            if !report.passed() {
                return Err(Failure::Verification);
            }
        }
        Command::Ore {
            r,
            s: sx,
            set,
            side,
            degree,
            exponent_bound,
        } => {
            let side = match side {
                SideArg::Right => Side::Right,
                SideArg::Left => Side::Left,
            };
            let report = s.ore(r, sx, set, side, *degree, *exponent_bound)?;
            println!("{}", json(&report)?);
            if report.witness.is_some() && !report.verified {
                return Err(Failure::Verification);
            }
        }
        Command::Verify { suite } => {
            if s.names().len() != 2 {
                return Err(Failure::Usage(Error::Precondition(
                    "verification suites need two variables (x, p)".into(),
                )));
            }
            let ctx = VerifyContext::new(s.star().clone(), s.seed());
            let mut ok = true;
            if suite == "all" {
                for name in verify::SUITES {
                    let r = verify::run(name, &ctx)?;
                    ok &= r.ok();
                    println!("{name}: {r}");
                }
            } else {
                let r = verify::run(suite, &ctx)?;
                ok = r.ok();
                println!("{r}");
            }
            if !ok {
                return Err(Failure::Verification);
            }
        }
        Command::Gauge { c } => println!("{}", json(&s.gauge(c)?)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
