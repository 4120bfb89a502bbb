use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flexbelt::io::{run, verify_report, Mode, Outcome, ProblemFile, SweepSpec};
use flexbelt::{Branch, SolutionSign};

/// Construct, solve and flex isogonal Kokotsakis belts and V-hedra blocks.
///
/// Exit codes: 0 success, 1 error or failed check, 2 only non-real solutions.
#[derive(Parser, Debug)]
#[command(name = "flexbelt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the quadrilateral closure for e1, e2, e3 from e0 and d (or f).
    SolveVhedra(Common),
    /// Flexibility test, or offsets solved over the complex numbers.
    Closure(Common),
    /// Flex a block and write OBJ frames.
    Flex(SweepArgs),
    /// Reciprocal-parallel meshes along a sweep.
    Reciprocal(SweepArgs),
    /// Re-check a report (or run a problem in verify mode).
    Verify { file: PathBuf },
}

#[derive(Args, Debug)]
struct Common {
    /// Problem file (JSON).
    problem: PathBuf,
    /// Report path; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Closure residual tolerance (also read from FLEXBELT_TOL).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    sign: Option<SignArg>,
    /// Per-vertex branches, e.g. `minus,minus,plus,plus`.
    #[arg(long, value_delimiter = ',')]
    branch: Option<Vec<BranchArg>>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Number of driving angles; overrides the problem's sweep.
    #[arg(long)]
    samples: Option<usize>,
    /// Directory for frames and report.json.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Obj)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SignArg {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Obj,
}

fn read_problem(
    common: &Common,
    mode: Mode,
    samples: Option<usize>,
) -> anyhow::Result<ProblemFile> {
    let text = fs::read_to_string(&common.problem)
        .with_context(|| format!("reading {}", common.problem.display()))?;
    let mut problem: ProblemFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", common.problem.display()))?;
    problem.mode = mode;
    let env_tol = match std::env::var("FLEXBELT_TOL") {
        Ok(v) => Some(
            v.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("FLEXBELT_TOL: not a number: {v:?}"))?,
        ),
        Err(_) => None,
    };
    if let Some(alg) = common
        .tol
        .or_else(|| problem.tolerances.is_none().then_some(env_tol).flatten())
    {
        problem.tolerances = Some(problem.tolerances().with_alg(alg));
    }
    if let Some(sign) = common.sign {
        problem.solution_sign = Some(match sign {
            SignArg::Upper => SolutionSign::Upper,
            SignArg::Lower => SolutionSign::Lower,
        });
    }
    if let Some(branch) = &common.branch {
        problem.branch = Some(
            branch
                .iter()
                .map(|b| match b {
                    BranchArg::Plus => Branch::Plus,
                    BranchArg::Minus => Branch::Minus,
                })
                .collect(),
        );
    }
    if let Some(samples) = samples {
        problem.sweep = Some(SweepSpec {
            samples,
            ..problem.sweep()
        });
    }
    problem
        .validate()
        .with_context(|| format!("in {}", common.problem.display()))?;
    Ok(problem)
}

fn write_report(outcome: &Outcome, output: Option<&Path>) -> anyhow::Result<()> {
    let text = outcome.report_text();
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_warnings(outcome: &Outcome) {
    if let Some(list) = outcome.report["warnings"].as_array() {
        for w in list.iter().filter_map(|w| w.as_str()) {
            eprintln!("warning: {w}");
        }
    }
}

fn solve(common: &Common, mode: Mode) -> anyhow::Result<u8> {
    let problem = read_problem(common, mode, None)?;
    let outcome = run(&problem)?;
    print_warnings(&outcome);
    write_report(&outcome, common.output.as_deref())?;
    Ok(outcome.status.exit_code() as u8)
}

fn sweep(args: &SweepArgs, mode: Mode) -> anyhow::Result<u8> {
    debug_assert_eq!(args.format, Format::Obj);
    let problem = read_problem(&args.common, mode, args.samples)?;
    let outcome = run(&problem)?;
    print_warnings(&outcome);
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    for artifact in &outcome.artifacts {
        let path = args.out_dir.join(&artifact.name);
        fs::write(&path, &artifact.contents)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let default_report = args.out_dir.join("report.json");
    let output = args.common.output.as_deref().unwrap_or(&default_report);
    write_report(&outcome, Some(output))?;
    Ok(outcome.status.exit_code() as u8)
}

fn verify(file: &Path) -> anyhow::Result<u8> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", file.display()))?;
    if value.get("format").is_some() {
        let result = verify_report(&text)?;
        for m in &result.messages {
            eprintln!("{m}");
        }
        if result.ok() {
            println!("verified: {}", file.display());
            return Ok(0);
        }
        return Ok(1);
    }
    let mut problem: ProblemFile =
        serde_json::from_value(value).with_context(|| format!("parsing {}", file.display()))?;
    problem.mode = Mode::Verify;
    let outcome = run(&problem)?;
    print_warnings(&outcome);
    print!("{}", outcome.report_text());
    Ok(outcome.status.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::SolveVhedra(c) => solve(c, Mode::VhedraSolve),
        Command::Closure(c) => solve(c, Mode::Closure),
        Command::Flex(s) => sweep(s, Mode::Flex),
        Command::Reciprocal(s) => sweep(s, Mode::Reciprocal),
        Command::Verify { file } => verify(file),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
