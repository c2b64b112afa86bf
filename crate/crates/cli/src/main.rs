//! The `helam` command-line tool.
//!
//! Exit status is 0 on success, 1 when the program is rejected or misbehaves,
//! and 2 on usage or I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use helam::central::{default_fuel, run};
use helam::frontend::{check, parse, Compiled, DesugarError, FrontendError};
use helam::harness::{check_metatheory, MetaConfig};
use helam::project::{project, project_all};
use helam::runtime::{explore, simulate_seeded, SimOutcome, DEFAULT_STATE_BUDGET};
use helam::span::SourceSpan;
use helam::{Party, PartySet};

#[derive(Parser)]
#[command(
    name = "helam",
    version,
    about = "Check, run, project, and simulate choreographies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type check a program and print its type.
    Check {
        file: PathBuf,
        #[command(flatten)]
        theta: Theta,
        /// Print diagnostics as JSON lines with kind, span, and detail.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a program centrally and print its value.
    Run {
        file: PathBuf,
        #[command(flatten)]
        theta: Theta,
        /// Print each step's rule and redex before the value.
        #[arg(long)]
        trace: bool,
    },
    /// Print or write the local program of one party or of every party.
    Project {
        file: PathBuf,
        #[command(flatten)]
        theta: Theta,
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        party: Option<String>,
        #[arg(long)]
        all: bool,
        /// Write `<party>.hlp` files here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the projected network under a seeded scheduler, or explore every
    /// interleaving.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        theta: Theta,
        #[arg(long, default_value_t = 0, conflicts_with = "exhaustive")]
        seed: u64,
        #[arg(long)]
        exhaustive: bool,
        /// State budget for `--exhaustive`.
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        budget: usize,
        /// Step limit for seeded runs.
        #[arg(long, default_value_t = 100_000)]
        fuel: usize,
        /// Write the full step trace, silent steps included, to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print a program in canonical layout.
    Fmt { file: PathBuf },
    /// Check the language's metatheory on generated programs.
    TestMetatheory {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

#[derive(Args)]
struct Theta {
    /// Parties present at the top level, comma separated. Defaults to every
    /// party the program names.
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<String>>,
}

/// Why a command failed, mapped to an exit status.
enum Failure {
    Rejected(String),
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn parse_party(name: &str) -> Result<Party, Failure> {
    Party::new(name).map_err(|e| Failure::Usage(format!("bad party name `{name}`: {e}")))
}

impl Theta {
    fn parties(&self) -> Result<Option<PartySet>, Failure> {
        let Some(names) = &self.theta else {
            return Ok(None);
        };
        let parties = names
            .iter()
            .map(|n| parse_party(n.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        PartySet::new(parties)
            .map(Some)
            .map_err(|_| Failure::Usage("--theta needs at least one party".into()))
    }
}

fn span_json(span: Option<SourceSpan>) -> serde_json::Value {
    span.map_or(
        serde_json::Value::Null,
        |s| json!({"line": s.line, "column": s.column, "start": s.start, "end": s.end}),
    )
}

/// One machine-readable diagnostic record.
fn diagnostic_json(err: &FrontendError) -> serde_json::Value {
    let (kind, span, detail) = match err {
        FrontendError::Parse(e) => (
            "ParseError".to_owned(),
            Some(e.span),
            format!("expected {}, found {}", e.expected, e.found),
        ),
        FrontendError::Desugar(DesugarError::Type(e)) | FrontendError::Type(e) => {
            (e.kind.to_string(), e.span, e.detail.clone())
        }
        FrontendError::Desugar(e) => {
            let span = match e {
                DesugarError::UnknownAlias { span, .. }
                | DesugarError::NeedsAnnotation { span, .. } => Some(*span),
                _ => None,
            };
            ("DesugarError".to_owned(), span, e.to_string())
        }
    };
    json!({"kind": kind, "span": span_json(span), "detail": detail})
}

fn checked(file: &Path, theta: &Theta) -> Result<(Compiled, helam::Type), Failure> {
    let src = read(file)?;
    check(&src, theta.parties()?.as_ref())
        .map_err(|e| Failure::Rejected(format!("{}: {e}", file.display())))
}

fn cmd_check(file: &Path, theta: &Theta, as_json: bool) -> Outcome {
    let src = read(file)?;
    match check(&src, theta.parties()?.as_ref()) {
        Ok((_, t)) => {
            println!("{t}");
            Ok(())
        }
        Err(e) if as_json => Err(Failure::Rejected(diagnostic_json(&e).to_string())),
        Err(e) => Err(Failure::Rejected(format!("{}: {e}", file.display()))),
    }
}

fn cmd_run(file: &Path, theta: &Theta, trace: bool) -> Outcome {
    let (compiled, _) = checked(file, theta)?;
    let result = run(&compiled.expr, default_fuel(&compiled.expr))
        .map_err(|e| Failure::Rejected(e.to_string()))?;
    if trace {
        for s in &result.steps {
            println!("{} {}", s.rule, s.redex);
        }
    }
    println!("{}", result.value);
    Ok(())
}

fn cmd_project(file: &Path, theta: &Theta, party: Option<&str>, out: Option<&Path>) -> Outcome {
    let (compiled, _) = checked(file, theta)?;
    let locals: Vec<(Party, String)> = match party {
        Some(name) => {
            let p = parse_party(name)?;
            vec![(p.clone(), project(&compiled.expr, &p).to_string())]
        }
        None => project_all(&compiled.expr)
            .map_err(|e| Failure::Rejected(e.to_string()))?
            .procs
            .into_iter()
            .map(|(p, b)| (p, b.to_string()))
            .collect(),
    };
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            for (p, text) in &locals {
                write(&dir.join(format!("{p}.hlp")), &format!("{text}\n"))?;
            }
        }
        None if party.is_some() => println!("{}", locals[0].1),
        None => {
            for (p, text) in &locals {
                println!("{p}: {text}");
            }
        }
    }
    Ok(())
}

struct SimulateOpts {
    seed: u64,
    exhaustive: bool,
    budget: usize,
    fuel: usize,
    trace: Option<PathBuf>,
}

fn cmd_simulate(file: &Path, theta: &Theta, opts: &SimulateOpts) -> Outcome {
    let (compiled, _) = checked(file, theta)?;
    let net = project_all(&compiled.expr).map_err(|e| Failure::Rejected(e.to_string()))?;
    if opts.exhaustive {
        let ex = explore(&net, opts.budget);
        println!(
            "{} states, {} final, {} deadlocked{}",
            ex.states(),
            ex.finals.len(),
            ex.deadlocks.len(),
            if ex.complete {
                ""
            } else {
                " (budget exhausted)"
            }
        );
        for (i, f) in ex.finals.iter().enumerate() {
            println!("final {}:\n{f}", i + 1);
        }
        if let Some(d) = ex.deadlocks.first() {
            return Err(Failure::Rejected(d.to_string()));
        }
        if !ex.complete {
            eprintln!(
                "warning: state budget of {} exhausted; exploration is partial",
                opts.budget
            );
        }
        return Ok(());
    }
    let sim = simulate_seeded(&net, opts.seed, opts.fuel);
    if let Some(path) = &opts.trace {
        write(path, &sim.trace.to_string())?;
    }
    print!("{}", sim.trace.render_communication());
    let stats = sim.trace.stats();
    println!(
        "{} steps, {} rendezvous, {} messages",
        stats.network_steps, stats.rendezvous_steps, stats.messages
    );
    match sim.outcome {
        SimOutcome::Finished(n) => {
            println!("{n}");
            Ok(())
        }
        SimOutcome::Deadlock(d) => Err(Failure::Rejected(d.to_string())),
        SimOutcome::FuelExhausted(_) => Err(Failure::Rejected(format!(
            "no final state within {} steps",
            opts.fuel
        ))),
    }
}

fn cmd_fmt(file: &Path) -> Outcome {
    let src = read(file)?;
    let program = parse(&src)
        .map_err(|e| Failure::Rejected(format!("{}: parse error at {e}", file.display())))?;
    print!("{program}");
    Ok(())
}

fn cmd_test_metatheory(
    instances: usize,
    seed: u64,
    report: Option<&Path>,
    threads: usize,
) -> Outcome {
    let cfg = MetaConfig {
        instances,
        seed,
        threads,
        ..MetaConfig::default()
    };
    let result = check_metatheory(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    for r in &result.reports {
        let status = if r.ok() { "ok" } else { "FAILED" };
        println!("{status} {}: {}/{}", r.property, r.passed, r.checked);
        for f in &r.failures {
            println!("  seed {}: {}\n    {}", f.seed, f.counterexample, f.detail);
        }
    }
    if !result.missing_rules.is_empty() {
        println!("rules never used: {}", result.missing_rules.join(", "));
    }
    println!("{} instances in {} ms", instances, result.elapsed_ms);
    if let Some(path) = report {
        let text =
            serde_json::to_string_pretty(&result).map_err(|e| Failure::Usage(e.to_string()))?;
        write(path, &text)?;
    }
    if result.all_passed() {
        Ok(())
    } else {
        Err(Failure::Rejected("some properties failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Check { file, theta, json } => cmd_check(file, theta, *json),
        Command::Run { file, theta, trace } => cmd_run(file, theta, *trace),
        Command::Project {
            file,
            theta,
            party,
            all: _,
            out,
        } => cmd_project(file, theta, party.as_deref(), out.as_deref()),
        Command::Simulate {
            file,
            theta,
            seed,
            exhaustive,
            budget,
            fuel,
            trace,
        } => cmd_simulate(
            file,
            theta,
            &SimulateOpts {
                seed: *seed,
                exhaustive: *exhaustive,
                budget: *budget,
                fuel: *fuel,
                trace: trace.clone(),
            },
        ),
        Command::Fmt { file } => cmd_fmt(file),
        Command::TestMetatheory {
            instances,
            seed,
            report,
            threads,
        } => cmd_test_metatheory(*instances, *seed, report.as_deref(), *threads),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
