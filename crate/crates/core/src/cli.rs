//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure (non-finite
//! state, stability violation, untrusted reference).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{
    render_report, run_sweep, taus_from_k_range, ReportFormat, SweepSpec, DEFAULT_GRID_POINTS,
};
use crate::integrators::{integrate, MethodId};
use crate::problems::{make_example, Problem, EXAMPLES};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "adrsplit",
    about = "Splitting and predictor-corrector time stepping for 1D advection-diffusion-reaction problems",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one problem with one method and write the final field as `x,u` csv.
    Run(RunArgs),
    /// Run a step-size sweep against an RK4 reference and write the error report.
    Convergence(ConvergenceArgs),
    /// List registered problems and methods.
    List,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_parser = parse_problem)]
    pub problem: String,
    #[arg(long, value_parser = parse_method, default_value = "predictor_corrector")]
    pub method: MethodId,
    /// Step size; must tile [0, t_final].
    #[arg(long, default_value_t = 0.5 / 256.0)]
    pub tau: f64,
    /// Grid points, boundary nodes included.
    #[arg(long = "n", default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// Final time; defaults to the problem's own.
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[arg(long, value_parser = parse_problem)]
    pub problem: String,
    /// Comma-separated method ids.
    #[arg(
        long,
        value_parser = parse_method,
        value_delimiter = ',',
        default_value = "corrected_first_order,predictor_corrector,classical_lie,classical_strang"
    )]
    pub methods: Vec<MethodId>,
    /// Exponent range `a..b`; step sizes are t_final / 2^k for k = a..=b.
    #[arg(long, value_parser = parse_k_range, default_value = "4..10")]
    pub k: (u32, u32),
    #[arg(long = "n", default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// RK4 reference steps; default is the smallest power of two with step <= h^2/8.
    #[arg(long)]
    pub reference_steps: Option<usize>,
    #[arg(long, value_parser = ["csv", "dat"], default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_problem(s: &str) -> std::result::Result<String, String> {
    make_example(s).map(|p| p.id).map_err(|e| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<MethodId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_k_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected `a..b`, got `{s}`"))?;
    let a: u32 = a.trim().parse().map_err(|_| format!("bad lower bound in `{s}`"))?;
    let b: u32 = b.trim().parse().map_err(|_| format!("bad upper bound in `{s}`"))?;
    if a > b || b > 40 {
        return Err(format!("k range must satisfy a <= b <= 40, got `{s}`"));
    }
    Ok((a, b))
}

fn load_problem(id: &str, t_final: Option<f64>) -> Result<Problem> {
    let p = make_example(id)?;
    match t_final {
        Some(t) => p.with_t_final(t),
        None => Ok(p),
    }
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io { path: path.clone(), source }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn cmd_run(args: &RunArgs) -> Result<u8> {
    let prob = load_problem(&args.problem, args.t_final)?;
    let g = prob.grid(args.grid_points)?;
    let result = integrate(&g, &prob, args.method, args.tau)?;

    let mut text = String::new();
    let _ = writeln!(text, "# problem = {}", prob.id);
    let _ = writeln!(text, "# method = {}", args.method);
    let _ = writeln!(text, "# tau = {}", args.tau);
    let _ = writeln!(text, "# grid_points = {}", args.grid_points);
    let _ = writeln!(text, "# t_final = {}", result.t_final_reached);
    let _ = writeln!(text, "# steps = {}", result.steps_taken);
    text.push_str("x,u\n");
    for (i, u) in result.final_state.iter().enumerate() {
        let _ = writeln!(text, "{},{}", g.x(i), u);
    }
    write_output(args.out.as_ref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_convergence(args: &ConvergenceArgs) -> Result<u8> {
    let prob = load_problem(&args.problem, args.t_final)?;
    let format: ReportFormat = args.format.parse()?;
    let spec = SweepSpec {
        taus: taus_from_k_range(prob.t_final, args.k.0, args.k.1),
        problem: prob,
        methods: args.methods.clone(),
        grid_points: args.grid_points,
        reference_steps: args.reference_steps,
    };
    let mut report = run_sweep(&spec)?;
    let flags = [
        ("methods", args.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(",")),
        ("k", format!("{}..{}", args.k.0, args.k.1)),
        ("format", args.format.clone()),
    ];
    for (k, v) in flags {
        report.provenance.push((k.to_string(), v));
    }
    for s in &report.series {
        for c in &s.cells {
            if let Some(reason) = &c.failure {
                report
                    .provenance
                    .push(("failed_cell".to_string(), format!("{} tau={} {}", s.method, c.tau, reason)));
            }
        }
    }
    write_output(Some(&args.out), &render_report(&report, format))?;
    if report.trusted() {
        Ok(EXIT_OK)
    } else {
        eprintln!("reference solution is untrusted (self-refinement delta above tolerance)");
        Ok(EXIT_NUMERICAL)
    }
}

pub fn list_text() -> String {
    let mut text = String::from("problems:\n");
    for (id, desc) in EXAMPLES {
        let _ = writeln!(text, "  {id:<10} {desc}");
    }
    text.push_str("methods:\n");
    for m in MethodId::ALL {
        let _ = writeln!(text, "  {:<22} {}", m.as_str(), m.description());
    }
    text
}

/// Parses `args` (program name first) and executes the subcommand.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Convergence(a) => cmd_convergence(a),
        Command::List => write_output(None, &list_text()).map(|_| EXIT_OK),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
    }
}
