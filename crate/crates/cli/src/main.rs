//! `argwf`: validate, explain and optimize workforce schedules.
//!
//! Exit codes: 0 success, 1 `validate` found problems, 2 input errors,
//! 3 infeasible instance, 4 search space too large for `--exact`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use argwf_core::builders::{self, AfKind};
use argwf_core::cost::cost_report;
use argwf_core::exec::{Budget, Execution};
use argwf_core::explain::explain;
use argwf_core::format::{self, FormatError, Style};
use argwf_core::solver::{brute_force_with, local_search, SearchOptions};
use argwf_core::{Error, ProblemInstance, Schedule};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "argwf", version, about = "Explainable workforce scheduling")]
struct Cli {
    /// Run every search on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Inputs {
    /// Problem file.
    #[arg(short, long)]
    problem: PathBuf,
    /// Schedule file.
    #[arg(short, long)]
    schedule: PathBuf,
}

#[derive(clap::Args)]
struct OptimizeArgs {
    #[arg(short, long)]
    problem: PathBuf,
    /// Start local search from this schedule instead of the greedy one.
    #[arg(long)]
    seed: Option<PathBuf>,
    /// Exhaustive search instead of local search.
    #[arg(long, conflicts_with = "seed")]
    exact: bool,
    /// Also write the move trace, as JSON, to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Give up after this many seconds.
    #[arg(long)]
    timeout: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Explanations as JSON lines; exit 1 if there are any.
    Validate(Inputs),
    /// Explanations as JSON lines; always exit 0.
    Explain(Inputs),
    /// Write an optimized schedule to stdout.
    Optimize(OptimizeArgs),
    /// Per-operator costs and makespan.
    Cost(Inputs),
    /// Print one of the argumentation frameworks.
    Af {
        #[arg(short, long)]
        problem: PathBuf,
        /// Schedule whose extension is highlighted; empty if omitted.
        #[arg(short, long)]
        schedule: Option<PathBuf>,
        #[arg(long, value_parser = parse_kind)]
        kind: AfKind,
        #[arg(long, value_enum, default_value = "dot")]
        format: GraphFormat,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Keep a JSON snapshot of every problem in this directory.
        #[arg(long)]
        snapshots: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

fn parse_kind(s: &str) -> Result<AfKind, String> {
    AfKind::parse(s).ok_or_else(|| {
        let names: Vec<_> = AfKind::ALL.iter().map(|k| k.as_str()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

enum Failure {
    Input(String),
    Format(PathBuf, FormatError),
    Engine(Box<ProblemInstance>, Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) | Failure::Format(..) => 2,
            Failure::Engine(_, Error::Infeasible(_)) => 3,
            Failure::Engine(_, Error::BoundExceeded { .. }) => 4,
            Failure::Engine(..) => 2,
        }
    }

    fn report(&self, err: &mut impl Write) -> io::Result<()> {
        match self {
            Failure::Input(msg) => writeln!(err, "error: {msg}"),
            Failure::Format(path, e) => {
                for d in &e.diagnostics {
                    writeln!(err, "error: {}: {}: {}", path.display(), d.path, d.message)?;
                }
                Ok(())
            }
            Failure::Engine(inst, Error::Infeasible(blockers)) => {
                writeln!(err, "error: no feasible schedule exists")?;
                for b in format::blockers_to_value(inst, blockers).as_array().into_iter().flatten() {
                    writeln!(err, "  blocked: {}", format::to_canonical(b, Style::Compact))?;
                }
                Ok(())
            }
            Failure::Engine(_, e) => writeln!(err, "error: {e}"),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<ProblemInstance, Failure> {
    format::parse_problem(&read(path)?).map_err(|e| Failure::Format(path.to_path_buf(), e))
}

fn load_schedule(inst: &ProblemInstance, path: &Path) -> Result<Schedule, Failure> {
    format::parse_schedule(inst, &read(path)?).map_err(|e| Failure::Format(path.to_path_buf(), e))
}

fn load(inputs: &Inputs) -> Result<(ProblemInstance, Schedule), Failure> {
    let inst = load_problem(&inputs.problem)?;
    let sched = load_schedule(&inst, &inputs.schedule)?;
    Ok((inst, sched))
}

fn engine(inst: &ProblemInstance) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::Engine(Box::new(inst.clone()), e)
}

fn io_err(e: io::Error) -> Failure {
    Failure::Input(e.to_string())
}

fn explanations(inputs: &Inputs, out: &mut impl Write) -> Result<usize, Failure> {
    let (inst, sched) = load(inputs)?;
    let list = explain(&inst, &sched);
    for e in &list {
        let line = format::to_canonical(&format::explanation_to_value(&inst, e), Style::Compact);
        writeln!(out, "{line}").map_err(io_err)?;
    }
    Ok(list.len())
}

fn optimize(execution: Execution, args: &OptimizeArgs, out: &mut impl Write, err: &mut impl Write) -> Outcome {
    let inst = load_problem(&args.problem)?;
    let budget = match args.timeout {
        Some(s) if s.is_finite() && s >= 0.0 => Budget::with_timeout(Duration::from_secs_f64(s)),
        Some(_) => return Err(Failure::Input("--timeout must be a non-negative number of seconds".into())),
        None => Budget::unlimited(),
    };
    let (schedule, trace, completed) = if args.exact {
        let sol = brute_force_with(&inst, execution, &budget).map_err(engine(&inst))?;
        (sol.schedule, Vec::new(), true)
    } else {
        let seed = args.seed.as_deref().map(|p| load_schedule(&inst, p)).transpose()?;
        let opts = SearchOptions {
            execution,
            budget,
            ..SearchOptions::default()
        };
        let o = local_search(&inst, seed.as_ref(), &opts).map_err(engine(&inst))?;
        (o.schedule, o.trace, o.completed)
    };
    out.write_all(format::emit_schedule(&inst, &schedule).as_bytes()).map_err(io_err)?;
    if let Some(path) = args.trace.as_deref() {
        let text = format::to_canonical(&format::trace_to_value(&inst, &trace), Style::Pretty);
        fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    let report = cost_report(&inst, &schedule).map_err(engine(&inst))?;
    writeln!(err, "makespan {:.6} after {} moves", report.makespan, trace.len()).map_err(io_err)?;
    if !completed {
        writeln!(err, "warning: stopped before reaching a fixpoint").map_err(io_err)?;
    }
    Ok(0)
}

fn serve(host: &str, port: u16, snapshots: Option<&Path>) -> Outcome {
    let store = match snapshots {
        Some(dir) => argwf_service::Store::with_snapshots(dir).map_err(io_err)?,
        None => argwf_service::Store::new(),
    };
    let state = argwf_service::AppState::new(store);
    let rt = tokio::runtime::Runtime::new().map_err(io_err)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port)).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        argwf_service::serve(listener, state).await
    })
    .map_err(io_err)?;
    Ok(0)
}

fn run(cli: Cli, out: &mut impl Write, err: &mut impl Write) -> Outcome {
    let execution = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match cli.command {
        Command::Validate(inputs) => Ok(u8::from(explanations(&inputs, out)? > 0)),
        Command::Explain(inputs) => explanations(&inputs, out).map(|_| 0),
        Command::Optimize(args) => optimize(execution, &args, out, err),
        Command::Cost(inputs) => {
            let (inst, sched) = load(&inputs)?;
            let report = cost_report(&inst, &sched).map_err(engine(&inst))?;
            let text = format::to_canonical(&format::cost_report_to_value(&inst, &report), Style::Pretty);
            out.write_all(text.as_bytes()).map_err(io_err)?;
            Ok(0)
        }
        Command::Af {
            problem,
            schedule,
            kind,
            format: graph_format,
        } => {
            let inst = load_problem(&problem)?;
            let sched = match &schedule {
                Some(p) => load_schedule(&inst, p)?,
                None => Schedule::empty(inst.num_operators()),
            };
            let g = builders::build(kind, &inst, &sched);
            let ext = builders::extension(kind, &inst, &sched);
            let text = match graph_format {
                GraphFormat::Dot => g.to_dot(&inst, Some(&ext)),
                GraphFormat::Json => {
                    let mut v = format::af_to_value(&inst, &g, &ext);
                    v["kind"] = json!(kind.as_str());
                    format::to_canonical(&v, Style::Pretty)
                }
            };
            out.write_all(text.as_bytes()).map_err(io_err)?;
            Ok(0)
        }
        Command::Serve { port, host, snapshots } => serve(&host, port, snapshots.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = match run(cli, &mut out, &mut err) {
        Ok(code) => code,
        Err(f) => {
            let _ = f.report(&mut err);
            f.code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code)
}
