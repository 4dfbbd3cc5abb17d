//! `cinnamon`: validate, run and trace cinnamon programs, compile
//! while-programs and fuzz the compiler.
//!
//! Exit codes: 0 success, 1 no solution, 2 parse or validation error,
//! 3 runtime error or fuzz disagreement, 4 step limit.

use std::fs::{self, File};
use std::io::{self, LineWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cinnamon::interp::{
    compute, run_with_sink, Computed, JsonlSink, NoTrace, Outcome, RunError, RunOptions, Undefined, UndoMode,
    DEFAULT_STEP_LIMIT,
};
use cinnamon::whilec::{compile_while, eval_while, fuzz, parse_while_named, FuzzConfig, WhileResult};
use cinnamon::{export_dot, parse_named, print, validate, Cinnamon, Mode, Value};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

#[derive(Parser)]
#[command(name = "cinnamon", version, about = "Core control network programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Undo {
    Paper,
    Journal,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a .cin file.
    Validate { file: PathBuf },
    /// Run from the main subnet's initial state and print its variables.
    Run {
        file: PathBuf,
        /// Initial value, `name=value`; string values may be double-quoted.
        #[arg(long = "var", value_name = "NAME=VALUE")]
        vars: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
        limit: u64,
        #[arg(long, value_enum, default_value = "paper")]
        undo: Undo,
        /// Write every event to this .trace.jsonl file as it happens.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compute the function denoted by a nat-mode cinnamon.
    Compute {
        file: PathBuf,
        /// Comma-separated naturals, possibly empty.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        args: String,
        #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
        limit: u64,
    },
    /// Export Graphviz DOT.
    Dot {
        file: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Compile a while-program (.wh) into a cinnamon.
    CompileWhile {
        file: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Run a while-program with the reference interpreter.
    RunWhile {
        file: PathBuf,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        args: String,
        #[arg(long, default_value_t = 100_000)]
        fuel: u64,
    },
    /// Differential campaign: reference interpreter against compiled code.
    Fuzz {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 12)]
        size: usize,
        #[arg(long, default_value_t = 100_000)]
        fuel: u64,
    },
}

/// A terminating condition: exit code plus lines for standard error.
struct Exit {
    code: u8,
    lines: Vec<String>,
}

impl Exit {
    fn new(code: u8, line: impl Into<String>) -> Self {
        Exit {
            code,
            lines: vec![line.into()],
        }
    }

    fn usage(line: impl Into<String>) -> Self {
        Exit::new(2, line)
    }
}

impl From<io::Error> for Exit {
    fn from(e: io::Error) -> Self {
        Exit::new(2, format!("error: {e}"))
    }
}

type Result<T> = std::result::Result<T, Exit>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Exit::usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Cinnamon> {
    let name = path.display().to_string();
    let c = parse_named(&read(path)?, &name).map_err(|diags| Exit {
        code: 2,
        lines: diags.iter().map(|d| d.to_string()).collect(),
    })?;
    let report = validate(&c);
    if !report.is_ok() {
        let lines = report
            .violations
            .iter()
            .map(|v| {
                let at = v.span.as_ref().map_or_else(|| name.clone(), |s| s.to_string());
                format!("{at}: {}: {} ({})", v.rule, v.message, v.location)
            })
            .collect();
        return Err(Exit { code: 2, lines });
    }
    Ok(c)
}

fn write_output(o: Option<&Path>, text: &str) -> Result<()> {
    match o {
        Some(path) => fs::write(path, text).map_err(|e| Exit::usage(format!("{}: {e}", path.display()))),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_args(csv: &str) -> Result<Vec<BigUint>> {
    if csv.trim().is_empty() {
        return Ok(Vec::new());
    }
    csv.split(',')
        .map(|a| {
            a.trim()
                .parse::<BigUint>()
                .map_err(|_| Exit::usage(format!("error: `{}` is not a natural number", a.trim())))
        })
        .collect()
}

fn unquote(s: &str) -> Option<String> {
    let inner = s.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        out.push(if c == '\\' { chars.next()? } else { c });
    }
    Some(out)
}

fn parse_var(spec: &str, mode: Mode) -> Result<(String, Value)> {
    let (name, raw) = spec
        .split_once('=')
        .ok_or_else(|| Exit::usage(format!("error: `{spec}` is not of the form name=value")))?;
    let value = match (mode, unquote(raw)) {
        (Mode::Str, Some(s)) => Value::Str(s),
        (Mode::Str, None) => Value::Str(raw.to_string()),
        (Mode::Nat, Some(_)) => {
            return Err(Exit::usage(format!(
                "error: `{name}` expects a natural number, got a string"
            )))
        }
        (Mode::Nat, None) => Value::Nat(
            raw.parse()
                .map_err(|_| Exit::usage(format!("error: `{raw}` is not a natural number")))?,
        ),
    };
    Ok((name.to_string(), value))
}

fn run_error(e: RunError) -> Exit {
    match e {
        RunError::Runtime(e) => Exit::new(3, format!("runtime error: {e}")),
        other => Exit::usage(format!("error: {other}")),
    }
}

fn options(limit: u64, undo: Undo) -> RunOptions {
    RunOptions {
        step_limit: limit,
        undo: match undo {
            Undo::Paper => UndoMode::Paper,
            Undo::Journal => UndoMode::Journal,
        },
    }
}

fn cmd_run(file: &Path, vars: &[String], limit: u64, undo: Undo, trace: Option<&Path>) -> Result<()> {
    let c = load(file)?;
    let initial = vars.iter().map(|v| parse_var(v, c.mode)).collect::<Result<Vec<_>>>()?;
    let opts = options(limit, undo);
    let (outcome, _) = match trace {
        Some(path) => {
            let out = File::create(path).map_err(|e| Exit::usage(format!("{}: {e}", path.display())))?;
            let mut sink = JsonlSink::new(LineWriter::new(out));
            let result = run_with_sink(&c, &initial, opts, &mut sink);
            sink.finish()?;
            result
        }
        None => run_with_sink(&c, &initial, opts, &mut NoTrace),
    }
    .map_err(run_error)?;
    match outcome {
        Outcome::Success(env) => {
            let main = c.main_subnet().expect("validated");
            let mut out = io::stdout().lock();
            for v in main.formals.iter().chain(&main.locals) {
                writeln!(out, "{v}={}", env.get(v).expect("declared"))?;
            }
            Ok(())
        }
        Outcome::Failure => Err(Exit::new(
            1,
            "no solution: the run ended in the main subnet's initial state",
        )),
        Outcome::StepLimit => Err(Exit::new(4, format!("step limit of {limit} reached"))),
        Outcome::RuntimeError(e) => Err(Exit::new(3, format!("runtime error: {e}"))),
    }
}

fn cmd_compute(file: &Path, args: &str, limit: u64) -> Result<()> {
    let c = load(file)?;
    let args = parse_args(args)?;
    match compute(&c, &args, RunOptions::default().with_limit(limit)).map_err(run_error)? {
        Computed::Value(v) => {
            println!("{v}");
            Ok(())
        }
        Computed::Undefined(Undefined::Failure) => Err(Exit::new(1, "undefined: no solution")),
        Computed::Undefined(Undefined::StepLimit) => {
            Err(Exit::new(4, format!("undefined: step limit of {limit} reached")))
        }
    }
}

fn load_while(file: &Path) -> Result<cinnamon::whilec::WhileProgram> {
    parse_while_named(&read(file)?, &file.display().to_string()).map_err(|d| Exit::usage(d.to_string()))
}

fn cmd_fuzz(config: FuzzConfig) -> Result<()> {
    let report = fuzz(config);
    let bad = report.cases.len() - report.agreeing_programs();
    for line in report.reproducers() {
        println!("{line}");
    }
    println!("agree={} disagree={bad}", report.agreeing_programs());
    match (bad, report.failures()) {
        (0, 0) => Ok(()),
        (_, 0) => Err(Exit::new(3, format!("{bad} programs disagree"))),
        (_, f) => Err(Exit::new(3, format!("{f} compiled runs ended in Failure"))),
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Validate { file } => load(&file).map(|_| ()),
        Command::Run {
            file,
            vars,
            limit,
            undo,
            trace,
        } => cmd_run(&file, &vars, limit, undo, trace.as_deref()),
        Command::Compute { file, args, limit } => cmd_compute(&file, &args, limit),
        Command::Dot { file, o } => write_output(o.as_deref(), &export_dot(&load(&file)?)),
        Command::CompileWhile { file, o } => write_output(o.as_deref(), &print(&compile_while(&load_while(&file)?))),
        Command::RunWhile { file, args, fuel } => {
            let p = load_while(&file)?;
            match eval_while(&p, &parse_args(&args)?, fuel) {
                WhileResult::Value(v) => {
                    println!("{v}");
                    Ok(())
                }
                WhileResult::Diverged(f) => Err(Exit::new(4, format!("diverged: fuel {f} exhausted"))),
            }
        }
        Command::Fuzz {
            seed,
            count,
            size,
            fuel,
        } => {
            if size == 0 {
                return Err(Exit::usage("error: --size must be at least 1"));
            }
            cmd_fuzz(FuzzConfig {
                seed,
                count,
                max_size: size,
                fuel,
                ..FuzzConfig::default()
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(exit) => {
            for line in &exit.lines {
                eprintln!("{line}");
            }
            ExitCode::from(exit.code)
        }
    }
}
