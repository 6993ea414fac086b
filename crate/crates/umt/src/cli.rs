//! Command-line front end: load metamodels, specs and models, then check,
//! plan, run or verify.
//!
//! ```text
//! umt check  -m graph.mm -s spec.tspec [-i in.model] [--param k=v]...
//! umt plan   -m graph.mm -s spec.tspec
//! umt run    -m graph.mm -s spec.tspec [-i in.model] -o out.model [--force] [--verify]
//! umt verify -m graph.mm -s spec.tspec [-i in.model] -o out.model
//! ```
//!
//! Exit codes: 0 success, 1 parse/validation error, 2 interference
//! rejection (or a planning cycle), 3 runtime error, 4 assumption failure,
//! 5 post-verification failure. Diagnostics go to standard error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::engine;
use crate::error::UmtError;
use crate::metamodel::{Metamodel, MetamodelSet, ValueType};
use crate::model::{ModelState, Value};
use crate::planner;
use crate::spec::{check_assumptions, TransformationSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_INTERFERENCE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_ASSUMPTION: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

#[derive(Parser)]
#[command(
    name = "umt",
    version,
    about = "Constraint-driven model transformation engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Metamodel file(s); may be given twice (source and target language)
    #[arg(short = 'm', long = "metamodel", required = true, num_args = 1)]
    metamodels: Vec<PathBuf>,

    /// Transformation spec file
    #[arg(short = 's', long = "spec")]
    spec: PathBuf,

    /// Input model file (omitted = empty model)
    #[arg(short = 'i', long = "input")]
    input: Option<PathBuf>,

    /// Spec parameter, as name=value
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Output model file, or `-` for standard output
    #[arg(short = 'o', long = "output")]
    output: PathBuf,

    /// Run even if assumptions fail or the interference check rejects
    #[arg(long)]
    force: bool,

    /// Re-verify every constraint on the result
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Output model to verify against the input
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Validate metamodels, load the spec, and check assumptions on the input
    Check(CommonArgs),
    /// Print the phase plan, interference verdicts and entity order
    Plan(CommonArgs),
    /// Execute the transformation and write the output model
    Run(RunArgs),
    /// Check every constraint declaratively over an input/output model pair
    Verify(VerifyArgs),
}

/// Everything loaded and resolved, ready for a command to use.
struct Session {
    mm: Arc<MetamodelSet>,
    spec: TransformationSpec,
    input: ModelState,
    params: BTreeMap<String, Value>,
}

fn exit_code(err: &UmtError) -> i32 {
    match err {
        UmtError::Syntax { .. } | UmtError::Resolve { .. } | UmtError::Invalid(_) => EXIT_PARSE,
        UmtError::Cycle(_) => EXIT_INTERFERENCE,
        UmtError::Runtime(_) => EXIT_RUNTIME,
    }
}

fn read_file(path: &Path) -> Result<String, i32> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_PARSE
    })
}

fn load_session(common: &CommonArgs) -> Result<Session, i32> {
    if common.metamodels.len() > 2 {
        eprintln!("error: at most two metamodels may be loaded");
        return Err(EXIT_PARSE);
    }
    let mut mms = Vec::new();
    for path in &common.metamodels {
        let text = read_file(path)?;
        let mut mm = Metamodel::parse(&text).map_err(|e| {
            eprintln!("error: {}: {e}", path.display());
            exit_code(&e)
        })?;
        mm.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        mms.push(mm);
    }
    let set = MetamodelSet::new(mms);
    let diags = set.validate();
    if !diags.is_empty() {
        for d in &diags {
            eprintln!("error: {d}");
        }
        return Err(EXIT_PARSE);
    }
    let mm = Arc::new(set);

    let spec_text = read_file(&common.spec)?;
    let spec = TransformationSpec::parse(&spec_text, &mm).map_err(|e| {
        eprintln!("error: {}: {e}", common.spec.display());
        exit_code(&e)
    })?;

    let input = match &common.input {
        Some(path) => {
            let text = read_file(path)?;
            ModelState::parse(&text, Arc::clone(&mm)).map_err(|e| {
                eprintln!("error: {}: {e}", path.display());
                exit_code(&e)
            })?
        }
        None => ModelState::new(Arc::clone(&mm)),
    };

    let params = parse_params(&spec, &common.params)?;
    Ok(Session {
        mm,
        spec,
        input,
        params,
    })
}

fn parse_params(spec: &TransformationSpec, raw: &[String]) -> Result<BTreeMap<String, Value>, i32> {
    let mut out = BTreeMap::new();
    for item in raw {
        let Some((name, value)) = item.split_once('=') else {
            eprintln!("error: --param expects NAME=VALUE, got `{item}`");
            return Err(EXIT_PARSE);
        };
        let Some((_, ty)) = spec.params.iter().find(|(n, _)| n == name) else {
            eprintln!("error: spec `{}` has no parameter `{name}`", spec.name);
            return Err(EXIT_PARSE);
        };
        let v = match ty {
            ValueType::Str => Value::Str(value.to_string()),
            ValueType::Int => match value.parse::<i64>() {
                Ok(n) => Value::Int(n),
                Err(_) => {
                    eprintln!("error: parameter `{name}` expects an integer, got `{value}`");
                    return Err(EXIT_PARSE);
                }
            },
        };
        out.insert(name.to_string(), v);
    }
    for (name, _) in &spec.params {
        if !out.contains_key(name) {
            eprintln!("error: missing --param {name}=..");
            return Err(EXIT_PARSE);
        }
    }
    Ok(out)
}

fn cmd_check(session: &Session) -> i32 {
    println!(
        "metamodels: ok ({} entities)",
        session.mm.entities().count()
    );
    println!(
        "spec: ok ({}, {} assumptions, {} constraints)",
        session.spec.name,
        session.spec.assumptions.len(),
        session.spec.constraints.len()
    );
    match check_assumptions(&session.spec, &session.input, &session.params) {
        Ok(verdicts) => {
            let mut failed = false;
            for v in &verdicts {
                println!("{v}");
                failed |= !v.passed;
            }
            if failed {
                EXIT_ASSUMPTION
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_plan(session: &Session) -> i32 {
    match planner::derive_plan(&session.spec, &session.mm) {
        Ok(plan) => {
            print!("{}", plan.render(&session.spec));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_run(session: Session, args: &RunArgs) -> i32 {
    // assumption gate
    match check_assumptions(&session.spec, &session.input, &session.params) {
        Ok(verdicts) => {
            let failures: Vec<_> = verdicts.iter().filter(|v| !v.passed).collect();
            if !failures.is_empty() {
                for v in &failures {
                    eprintln!("{v}");
                }
                if args.force {
                    eprintln!("warning: assumptions failed; continuing because of --force");
                } else {
                    return EXIT_ASSUMPTION;
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    }
    // interference gate
    let plan = match planner::derive_plan(&session.spec, &session.mm) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if !plan.all_ok() {
        for phase in &plan.phases {
            if let planner::Verdict::Rejected(conflicts) = &phase.verdict {
                let c = &session.spec.constraints[phase.constraint_index];
                eprintln!("interference: constraint {} rejected:", c.label);
                for conflict in conflicts {
                    eprintln!("  {conflict}");
                }
            }
        }
        if args.force {
            eprintln!(
                "warning: interference check rejected the plan; continuing because of --force"
            );
        } else {
            return EXIT_INTERFERENCE;
        }
    }
    let result = match engine::run(
        &session.spec,
        &plan,
        session.input,
        &session.params,
        args.force,
    ) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = result.final_state.serialize();
    if args.output.as_os_str() == "-" {
        print!("{text}");
    } else if let Err(e) = fs::write(&args.output, &text) {
        eprintln!("error: cannot write {}: {e}", args.output.display());
        return EXIT_RUNTIME;
    }
    if args.verify {
        match engine::verify_cons(
            &session.spec,
            &result.final_state,
            result.pre_state.state(),
            &session.params,
        ) {
            Ok(verdicts) => {
                let mut failed = false;
                for v in &verdicts {
                    eprintln!("{v}");
                    failed |= !v.passed;
                }
                if failed {
                    return EXIT_VERIFY;
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code(&e);
            }
        }
    }
    EXIT_OK
}

fn cmd_verify(session: &Session, args: &VerifyArgs) -> i32 {
    let text = match read_file(&args.output) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let final_state = match ModelState::parse(&text, Arc::clone(&session.mm)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", args.output.display());
            return exit_code(&e);
        }
    };
    match engine::verify_cons(&session.spec, &final_state, &session.input, &session.params) {
        Ok(verdicts) => {
            let mut failed = false;
            for v in &verdicts {
                println!("{v}");
                failed |= !v.passed;
            }
            if failed {
                EXIT_VERIFY
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parse arguments and run one command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with success exits
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Check(common) => match load_session(&common) {
            Ok(session) => cmd_check(&session),
            Err(code) => code,
        },
        Command::Plan(common) => match load_session(&common) {
            Ok(session) => cmd_plan(&session),
            Err(code) => code,
        },
        Command::Run(args) => match load_session(&args.common) {
            Ok(session) => cmd_run(session, &args),
            Err(code) => code,
        },
        Command::Verify(args) => match load_session(&args.common) {
            Ok(session) => cmd_verify(&session, &args),
            Err(code) => code,
        },
    }
}
