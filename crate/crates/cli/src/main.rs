use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dykstra_cli::config::{Natural, Rational, RateQuery};
use dykstra_cli::query::{evaluate, nat_flag, pos_flag, str_flag, u64_flag, Outcome};
use dykstra_cli::{report, run_batch, scenario, verify, CliError, ExperimentConfig, OUT_ENV, SCENARIOS};
use dykstra_core::Calculus;

#[derive(Parser)]
#[command(name = "dykstra", version, about = "Dykstra's projection algorithm: experiments, diagnostics and rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file or a built-in scenario and write artifacts.
    Run {
        /// Path to a JSON experiment config.
        config: Option<PathBuf>,
        /// Built-in scenario name, or `all`.
        #[arg(long, conflicts_with = "config")]
        scenario: Option<String>,
        /// Artifact root directory.
        #[arg(long, env = OUT_ENV, default_value = "out")]
        out: PathBuf,
    },
    /// Evaluate one rate function exactly.
    Rates(Box<RateArgs>),
    /// Re-check a recorded trace against its config.
    Verify { trace: PathBuf, config: PathBuf },
    /// Print the tables of a run directory.
    Report { dir: PathBuf },
    /// Print a built-in scenario as a JSON config.
    Scenario { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum RateName {
    Psi,
    Phi,
    #[value(alias = "Phi")]
    Liminf,
    Alpha,
    Beta,
    Gamma,
    Omega,
    Theta,
    Kappa,
    #[value(name = "modulus_orthant")]
    ModulusOrthant,
    #[value(name = "modulus_semialgebraic")]
    ModulusSemialgebraic,
    #[value(name = "modulus_from_rate")]
    ModulusFromRate,
}

#[derive(Args)]
struct RateArgs {
    name: RateName,
    /// Bound B (Psi: rational, phi: natural).
    #[arg(long = "B")]
    big_b: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long = "N")]
    big_n: Option<String>,
    /// Counterfunction expression, e.g. "n+1" or "max(n,3)".
    #[arg(long)]
    f: Option<String>,
    /// Threshold function for beta, e.g. "x" or "min(x, 1/2)".
    #[arg(long)]
    delta: Option<String>,
    /// Cap for gamma, e.g. "1/4" or "ratio(1/4, n+1)".
    #[arg(long = "Delta")]
    big_delta: Option<String>,
    /// Modulus for theta: orthant, constant:R, from_rate:EXPR, semialgebraic:n,d,c,m.
    #[arg(long)]
    modulus: Option<String>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    r: Option<String>,
    /// Rate counterfunction for modulus_from_rate.
    #[arg(long)]
    rho: Option<String>,
}

fn rate_query(a: &RateArgs) -> Result<RateQuery, CliError> {
    let eps = || pos_flag("eps", &a.eps).map(Rational);
    let b = || nat_flag("b", &a.b).map(Natural);
    let m = || u64_flag("m", a.m);
    let f = || str_flag("f", &a.f).map(str::to_string);
    let r = || match &a.r {
        Some(_) => nat_flag("r", &a.r).map(Natural),
        None => Ok(Natural(1u32.into())),
    };
    Ok(match a.name {
        RateName::Psi => RateQuery::Psi {
            bound: Rational(pos_flag("B", &a.big_b)?),
            eps: eps()?,
            f: f()?,
        },
        RateName::Phi => RateQuery::Phi {
            bound: Natural(nat_flag("B", &a.big_b)?),
            m: m()?,
            eps: eps()?,
            n: Natural(nat_flag("N", &a.big_n)?),
        },
        RateName::Liminf => RateQuery::Liminf {
            b: b()?,
            m: m()?,
            eps: eps()?,
            n: Natural(nat_flag("N", &a.big_n)?),
        },
        RateName::Alpha => RateQuery::Alpha {
            b: b()?,
            m: m()?,
            eps: eps()?,
            f: f()?,
        },
        RateName::Beta => RateQuery::Beta {
            b: b()?,
            eps: eps()?,
            delta: str_flag("delta", &a.delta)?.to_string(),
        },
        RateName::Gamma => RateQuery::Gamma {
            b: b()?,
            m: m()?,
            eps: eps()?,
            cap: str_flag("Delta", &a.big_delta)?.to_string(),
        },
        RateName::Omega => RateQuery::Omega {
            b: b()?,
            m: m()?,
            eps: eps()?,
            f: f()?,
        },
        RateName::Theta => RateQuery::Theta {
            b: b()?,
            m: m()?,
            eps: eps()?,
            modulus: str_flag("modulus", &a.modulus)?.to_string(),
        },
        RateName::Kappa => RateQuery::Kappa {
            b: b()?,
            n: u64_flag("n", a.n)?,
            eps: eps()?,
        },
        RateName::ModulusOrthant => RateQuery::Modulus {
            modulus: format!("orthant:{}", m()?),
            r: r()?,
            eps: eps()?,
        },
        RateName::ModulusSemialgebraic => {
            pos_flag("c", &a.c)?;
            RateQuery::Modulus {
                modulus: format!(
                    "semialgebraic:{},{},{},{}",
                    u64_flag("n", a.n)?,
                    u64_flag("d", a.d)?,
                    str_flag("c", &a.c)?,
                    m()?
                ),
                r: r()?,
                eps: eps()?,
            }
        }
        RateName::ModulusFromRate => RateQuery::Modulus {
            modulus: format!("from_rate:{}", str_flag("rho", &a.rho)?),
            r: r()?,
            eps: eps()?,
        },
    })
}

fn cmd_run(config: Option<PathBuf>, scenario_name: Option<String>, out: &Path) -> Result<ExitCode, CliError> {
    let cfgs: Vec<ExperimentConfig> = match (config, scenario_name) {
        (Some(path), None) => vec![ExperimentConfig::load(&path)?],
        (None, Some(name)) if name == "all" => SCENARIOS.iter().map(|s| scenario(s)).collect::<Result<_, _>>()?,
        (None, Some(name)) => vec![scenario(&name)?],
        _ => return Err(CliError::usage("give a config path or --scenario NAME")),
    };
    let mut code = 0;
    for (cfg, result) in cfgs.iter().zip(run_batch(&cfgs, out)) {
        match result {
            Ok(done) => {
                let status = if done.reports.summary.pass { "PASS" } else { "FAIL" };
                println!("{}: {status} ({})", cfg.name, done.dir.display());
                for c in done.reports.checks.iter().filter(|c| !c.pass) {
                    println!("  {c}");
                }
                for w in done.reports.witnesses.iter().filter(|w| w.report.failed()) {
                    println!("  {}", w.report);
                }
                for e in &done.reports.errors {
                    println!("  error: {e}");
                }
                code = code.max(done.reports.exit_code());
            }
            Err(e) => {
                eprintln!("{}: {e}", cfg.name);
                code = 2;
            }
        }
    }
    Ok(ExitCode::from(code as u8))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, scenario, out } => cmd_run(config, scenario, &out),
        Command::Rates(args) => rate_query(&args).and_then(|q| {
            let r = evaluate(&q, &Calculus::default());
            println!("{r}");
            match &r.outcome {
                Outcome::Error { message } => Err(CliError::usage(message.clone())),
                _ => Ok(ExitCode::SUCCESS),
            }
        }),
        Command::Verify { trace, config } => ExperimentConfig::load(&config)
            .and_then(|cfg| verify::verify(&trace, &cfg))
            .and_then(|reports| {
                let text = report::render_value(&serde_json::to_value(&reports).expect("reports serialize"))?;
                print!("{text}");
                Ok(ExitCode::from(reports.exit_code() as u8))
            }),
        Command::Report { dir } => report::render(&dir).map(|text| {
            print!("{text}");
            ExitCode::SUCCESS
        }),
        Command::Scenario { name } => scenario(&name).map(|cfg| {
            println!("{}", cfg.to_json());
            ExitCode::SUCCESS
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
