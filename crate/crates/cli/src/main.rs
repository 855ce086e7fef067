use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};

use netposs::certificates::{extract_certificate, relax_symbolic, to_inequality, ExponentRule};
use netposs::examples::{fixture, parse_rational, Fixture};
use netposs::inflation::Inflation;
use netposs::pipeline::{classify, default_stages, parse_stages, w_study, PipelineConfig};
use netposs::possibility::{Refutation, Refuter};
use netposs::sat::Budget;
use netposs::scenario::{Pattern, Scenario};

#[derive(Parser)]
#[command(
    name = "netposs",
    version,
    about = "Classify outcome patterns of causal networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the classification stages over every orbit of patterns.
    Classify {
        /// `triangle`, `square`, or a scenario TOML file.
        #[arg(long)]
        scenario: String,
        /// Comma-separated stages; defaults to the scenario's built-in list.
        #[arg(long)]
        stages: Option<String>,
        /// Worker threads, 0 for all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
        /// Reuse the records already in `--out`.
        #[arg(long)]
        resume: bool,
        /// Conflict limit per SAT call.
        #[arg(long)]
        conflicts: Option<u64>,
        /// Skip re-checking witnesses.
        #[arg(long)]
        no_verify: bool,
    },
    /// Refute a pattern with one inflation and print the certificate and
    /// its inequality.
    Certify {
        /// `[000]+[111]` or a bitstring.
        #[arg(long)]
        pattern: String,
        /// `cut`, `spiral`, `ring:L` or `web:n`.
        #[arg(long)]
        inflation: String,
        #[arg(long, default_value = "triangle")]
        scenario: String,
    },
    /// Visibility thresholds of the noisy W family on the 6-ring.
    Wstudy {
        #[arg(long, default_value_t = 10)]
        grid: usize,
        /// Bisection stops once the bracket is at most twice this wide.
        #[arg(long, default_value = "1/1024")]
        tol: String,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a named pattern or distribution, e.g. `P5`, `ghz:x=1/2`,
    /// `w:mu=1/3,nu=1/3`, `hardy-square`.
    Fixture { name: String },
}

/// Invalid input: bad arguments, unknown names, unreadable files.
struct InputError(anyhow::Error);

fn input<T, E: Into<anyhow::Error>>(
    r: std::result::Result<T, E>,
) -> std::result::Result<T, InputError> {
    r.map_err(|e| InputError(e.into()))
}

fn load_scenario(name: &str) -> Result<Scenario> {
    if let Some(s) = Scenario::builtin(name) {
        return Ok(s);
    }
    let path = Path::new(name);
    if !path.exists() {
        bail!("unknown scenario {name}");
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {name}"))?;
    Ok(Scenario::from_toml(&text)?)
}

fn run_classify(
    scenario: &str,
    stages: Option<&str>,
    jobs: usize,
    out: PathBuf,
    resume: bool,
    conflicts: Option<u64>,
    verify: bool,
) -> std::result::Result<ExitCode, InputError> {
    let scenario = input(load_scenario(scenario))?;
    let stages = match stages {
        Some(spec) => input(parse_stages(spec))?,
        None => input(
            default_stages(&scenario)
                .ok_or_else(|| anyhow!("--stages is required for {}", scenario.name())),
        )?,
    };
    let config = PipelineConfig {
        scenario,
        stages,
        jobs,
        budget: Budget {
            max_conflicts: conflicts,
            max_time: None,
        },
        out: Some(out),
        resume,
        verify,
    };
    let outcome = classify(&config).map_err(|e| InputError(e.into()))?;
    print!("{}", outcome.summary.render());
    Ok(if outcome.summary.budget_partial {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn run_certify(pattern: &str, inflation: &str, scenario: &str) -> Result<()> {
    let scenario = load_scenario(scenario)?;
    let pattern = Pattern::parse(scenario.shape(), pattern)?;
    let inf = Inflation::named(&scenario, inflation)?;
    let c = match Refuter::new(&inf).refute(&pattern) {
        Refutation::Consistent => {
            println!(
                "{}: no contradiction on {}",
                pattern.to_literal(),
                inf.name()
            );
            return Ok(());
        }
        Refutation::Contradiction(c) => c,
    };
    println!("contradiction  {}", c.render(&inf));
    let cert = extract_certificate(&c, &inf, &pattern)?;
    println!("certificate    {}", cert.render(&inf));
    for row in cert.verify(&inf)?.render(&inf) {
        println!("  {row}");
    }
    let ineq = to_inequality(&cert, &scenario);
    println!("inequality     {}", ineq.render());
    println!(
        "relaxed        {}",
        relax_symbolic(&ineq, ExponentRule::Degree)?.render()
    );
    Ok(())
}

fn run_wstudy(
    grid: usize,
    tol: &str,
    jobs: usize,
    out: Option<PathBuf>,
) -> std::result::Result<(), InputError> {
    let tol = input(parse_rational(tol))?;
    let study = input(w_study(grid, &tol, jobs))?;
    match out {
        Some(path) => {
            input(
                fs::write(&path, study.to_csv())
                    .with_context(|| format!("writing {}", path.display())),
            )?;
        }
        None => print!("{}", study.to_csv()),
    }
    print!("{}", study.render_extremes());
    Ok(())
}

fn run_fixture(name: &str) -> Result<()> {
    let f = fixture(name)?;
    let shape = f.scenario().shape().clone();
    println!("scenario  {}", f.scenario().name());
    println!("pattern   {}", f.pattern().to_literal());
    println!("bits      {}", f.pattern().to_bitstring());
    if let Fixture::Distribution(_, d) = &f {
        for (i, v) in d.values().iter().enumerate() {
            println!("  P({}) = {v}", shape.label(i));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify {
            scenario,
            stages,
            jobs,
            out,
            resume,
            conflicts,
            no_verify,
        } => run_classify(
            &scenario,
            stages.as_deref(),
            jobs,
            out,
            resume,
            conflicts,
            !no_verify,
        ),
        Command::Certify {
            pattern,
            inflation,
            scenario,
        } => input(run_certify(&pattern, &inflation, &scenario)).map(|_| ExitCode::SUCCESS),
        Command::Wstudy {
            grid,
            tol,
            jobs,
            out,
        } => run_wstudy(grid, &tol, jobs, out).map(|_| ExitCode::SUCCESS),
        Command::Fixture { name } => input(run_fixture(&name)).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
