//! `tracegen`: turn annotated program skeletons into verified quiz questions.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use tracegen_core::frontend::{load, load_instance, printer::print_skeleton, FrontendError};
use tracegen_core::instance::{interpret, InterpConfig};
use tracegen_core::pipeline::{prepare, PipelineError, PipelineOptions, Prepared};
use tracegen_core::quiz::{export, generate, ExportFile, Format, QuestionKind, QuestionSpec, QuizError};
use tracegen_core::smt::{emit_problem, CheckResult, Session};
use tracegen_core::unwind::TargetMode;

use config::Config;

const EXIT_PARTIAL: u8 = 2;
const EXIT_NO_MODEL: u8 = 3;
const EXIT_ERROR: u8 = 4;

#[derive(Parser)]
#[command(name = "tracegen", version, about = "Generate verified code-tracing questions from annotated Java skeletons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a pool of questions and export it.
    Gen(GenArgs),
    /// Report whether the skeleton has any instance.
    Check(CommonArgs),
    /// Interpret a plain program and print its output.
    Run(RunArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Skeleton source file.
    skeleton: PathBuf,
    /// Skip the optimizer and constant propagation.
    #[arg(long)]
    no_optimize: bool,
    /// Print the normalized skeleton to stderr.
    #[arg(long)]
    dump_normalized: bool,
    /// Print the modified-SSA form to stderr.
    #[arg(long)]
    dump_ssa: bool,
    /// Print the SMT-LIB problem to stderr before solving.
    #[arg(long)]
    dump_smt: bool,
    /// Write the solver session to this directory.
    #[arg(long, value_name = "DIR")]
    keep_smt: Option<PathBuf>,
    /// TOML file with `[solver]` and `[generation]` settings.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seeds the solver and the order of multiple-choice options.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of questions.
    #[arg(short = 'n', default_value_t = 5)]
    n: usize,
    /// output, return-value, hole-fill or which-fragment. Defaults to
    /// hole-fill when the skeleton marks a HOLE, else return-value when the
    /// entry function returns something, else output.
    #[arg(long)]
    kind: Option<QuestionKind>,
    /// Placeholder ordinal (0-based, source order) to use as the hole.
    #[arg(long)]
    hole: Option<usize>,
    #[arg(long, default_value = "json")]
    format: Format,
    /// Maximum wrong options per multiple-choice question.
    #[arg(long, default_value_t = 3)]
    distractors: usize,
    /// Question text replacing the default one.
    #[arg(long)]
    prompt: Option<String>,
    /// Directory for the exported files; stdout when absent.
    #[arg(long, short = 'o', value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Program file without placeholders.
    program: PathBuf,
    /// Entry method of a program with several methods.
    #[arg(long, default_value = "main")]
    entry: String,
    /// Print the full trace as JSON instead of the program output.
    #[arg(long)]
    trace: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => run_gen(a),
        Command::Check(a) => run_check(a),
        Command::Run(a) => run_program(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn frontend_error(path: &Path, e: FrontendError) -> anyhow::Error {
    anyhow::anyhow!(e.with_file(&path.display().to_string()))
}

fn options(common: &CommonArgs) -> Result<(PipelineOptions, u64)> {
    let cfg = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let mut opts = cfg.apply(PipelineOptions::default());
    opts.optimize = !common.no_optimize;
    if let Some(s) = common.seed {
        opts.solver.seed = s;
    }
    let seed = opts.solver.seed;
    Ok((opts, seed))
}

/// Load, prepare and print whatever dumps were asked for.
fn prepare_with_dumps(common: &CommonArgs, opts: &PipelineOptions) -> Result<Prepared> {
    let src = read(&common.skeleton)?;
    let ast = load(&src).map_err(|e| frontend_error(&common.skeleton, e))?;
    let prepared = prepare(ast, opts)?;
    let mut err = std::io::stderr().lock();
    if common.dump_normalized {
        writeln!(err, "{}", print_skeleton(&prepared.normalized))?;
    }
    if let Some(r) = &prepared.report {
        log::info!("optimizer:\n{r}");
    }
    if common.dump_ssa {
        writeln!(err, "{}", prepared.spec.dump_ssa())?;
    }
    if common.dump_smt {
        writeln!(err, "{}", prepared.smt(TargetMode::Require, &opts.solver)?)?;
    }
    Ok(prepared)
}

fn keep_smt(common: &CommonArgs, transcript: &str) -> Result<()> {
    if let Some(dir) = &common.keep_smt {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let stem = common.skeleton.file_stem().unwrap_or_default().to_string_lossy();
        let path = dir.join(format!("{stem}.smt2"));
        fs::write(&path, transcript).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn default_kind(p: &Prepared, hole: Option<usize>) -> QuestionKind {
    let ast = &p.skeleton;
    if hole.is_some() || ast.hole().is_some() {
        QuestionKind::HoleFill
    } else if ast.entry_function().ret.is_some() {
        QuestionKind::ReturnValue
    } else {
        QuestionKind::Output
    }
}

fn write_files(files: &[ExportFile], out: Option<&Path>) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            for f in files {
                let path = dir.join(&f.name);
                fs::write(&path, &f.contents).with_context(|| format!("cannot write {}", path.display()))?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if let [single] = files {
                stdout.write_all(single.contents.as_bytes())?;
            } else {
                for f in files {
                    writeln!(stdout, "==> {} <==", f.name)?;
                    stdout.write_all(f.contents.as_bytes())?;
                }
            }
        }
    }
    Ok(())
}

fn run_gen(a: GenArgs) -> Result<u8> {
    let (opts, seed) = options(&a.common)?;
    let prepared = prepare_with_dumps(&a.common, &opts)?;
    let name = a.common.skeleton.file_stem().unwrap_or_default().to_string_lossy().to_string();
    let qs = QuestionSpec {
        kind: a.kind.unwrap_or_else(|| default_kind(&prepared, a.hole)),
        skeleton: name,
        n: a.n,
        hole: a.hole,
        distractors: a.distractors,
        seed,
        prompt: a.prompt,
    };
    let outcome = match generate(&prepared, &opts, &qs) {
        Ok(o) => o,
        Err(QuizError::Empty(why)) => {
            eprintln!("no instance found: {why}");
            return Ok(EXIT_NO_MODEL);
        }
        Err(QuizError::Pipeline(PipelineError::Solver(e))) => {
            return Err(anyhow::anyhow!(e).context("solver failed"));
        }
        Err(e) => return Err(e.into()),
    };
    keep_smt(&a.common, &outcome.transcript)?;
    if outcome.rejected > 0 {
        log::warn!("{} solver model(s) failed verification and were skipped", outcome.rejected);
    }
    let files = export(&outcome.bundles, a.format, &qs, &opts)?;
    write_files(&files, a.out.as_deref())?;
    Ok(match &outcome.shortfall {
        Some(s) => {
            eprintln!("partial pool: {} of {} questions ({s})", outcome.bundles.len(), qs.n);
            EXIT_PARTIAL
        }
        None => 0,
    })
}

fn run_check(a: CommonArgs) -> Result<u8> {
    let (opts, _) = options(&a)?;
    let prepared = prepare_with_dumps(&a, &opts)?;
    if let Some(r) = &prepared.report {
        eprint!("{r}");
    }
    let mut session = Session::start(&opts.solver)?;
    session.send(&emit_problem(&prepared.spec.problem(TargetMode::Require), &opts.solver)?)?;
    let result = session.check_sat()?;
    keep_smt(&a, session.transcript())?;
    Ok(match result {
        CheckResult::Sat => {
            println!("sat");
            0
        }
        CheckResult::Unsat => {
            println!("unsat");
            EXIT_NO_MODEL
        }
        CheckResult::Unknown(why) => {
            println!("unknown ({why})");
            EXIT_ERROR
        }
    })
}

fn run_program(a: RunArgs) -> Result<u8> {
    let src = read(&a.program)?;
    let ast = load_instance(&src, &a.entry).map_err(|e| frontend_error(&a.program, e))?;
    if !ast.placeholders.is_empty() {
        anyhow::bail!("{} still contains placeholders; use `gen` for skeletons", a.program.display());
    }
    let trace = interpret(&ast, &Default::default(), &InterpConfig::default());
    if a.trace {
        println!("{}", serde_json::to_string_pretty(&trace)?);
    } else {
        print!("{}", trace.output);
        if let Some(v) = &trace.return_value {
            eprintln!("returned {}", v.display());
        }
    }
    if let Some(f) = &trace.fault {
        eprintln!("fault: {f}");
        return Ok(EXIT_ERROR);
    }
    if let Some(bad) = trace.assertions.iter().find(|a| !a.holds) {
        eprintln!("assertion at {}:{} does not hold", bad.line, bad.col);
        return Ok(EXIT_ERROR);
    }
    Ok(0)
}
