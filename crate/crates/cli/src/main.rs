mod cli;
mod commands;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};

use cli::{Cli, Command};
use commands::{CliResult, Globals, Outcome, Payload};
use error::CliError;

const THREADS_ENV: &str = "CONTRASTIVE_VC_THREADS";

fn worker_count(flag: Option<usize>) -> CliResult<Option<usize>> {
    let requested = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
            CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))
        })?),
        Err(_) => flag,
    };
    if requested == Some(0) {
        return Err(CliError::Usage("worker count must be at least 1".into()));
    }
    Ok(requested)
}

fn dispatch(command: &Command, g: &Globals) -> CliResult<Outcome> {
    match command {
        Command::Realize(a) => commands::realize_cmd(a, g),
        Command::Shatter(a) => commands::shatter_cmd(a, g),
        Command::Vcdim(a) => commands::vcdim_cmd(a, g),
        Command::Construct(a) => commands::construct_cmd(a),
        Command::Bounds(a) => commands::bounds_cmd(a),
        Command::Wendel(a) => commands::wendel_cmd(a, g),
        Command::JlCheck(a) => commands::jl_cmd(a, g),
        Command::Simulate(a) => commands::simulate_cmd(a),
    }
}

fn manifest(cli: &Cli, outcome: &Outcome, threads: usize, started: Instant) -> Value {
    json!({
        "tool": "contrastive-vc",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": cli.command.name(),
        "seed": cli.seed,
        "strict": cli.strict,
        "threads": threads,
        "config": outcome.config,
        "inputs": outcome.inputs,
        "duration_seconds": started.elapsed().as_secs_f64(),
    })
}

fn render(manifest: Value, payload: Payload) -> String {
    match payload {
        Payload::Json(result) => {
            let doc = json!({ "manifest": manifest, "result": result });
            serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
        }
        Payload::Csv(body) => format!("# manifest: {manifest}\n{body}"),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Write {
            path: path.clone(),
            message: e.to_string(),
        }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Write {
                path: "<stdout>".into(),
                message: e.to_string(),
            }),
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    let started = Instant::now();
    if let Some(n) = worker_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?;
    }
    let globals = Globals {
        seed: cli.seed,
        strict: cli.strict,
    };
    let outcome = dispatch(&cli.command, &globals)?;
    let manifest = manifest(&cli, &outcome, rayon::current_num_threads(), started);
    let exit = outcome.exit;
    emit(&render(manifest, outcome.payload), cli.out.as_ref())?;
    Ok(exit)
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return fail(&CliError::Usage(first.trim_start_matches("error: ").to_string()));
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => fail(&e),
    }
}
