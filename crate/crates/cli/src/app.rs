//! Entry point shared by the binary and the tests.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use crate::args::{Cli, Command, Threads, DEFAULT_SEED};
use crate::commands::{execute, CliError, CliResult};
use crate::manifest::RunManifest;
use crate::table::{write_atomic, Format, Table};

/// Environment variable holding the default thread count.
pub const THREADS_ENV: &str = "KLAB_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parse `args`, run, and return the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn env_threads() -> CliResult<Option<Threads>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .parse()
            .map(Some)
            .map_err(|e| CliError::Usage(format!("{THREADS_ENV}: {e}"))),
        Err(_) => Ok(None),
    }
}

struct Plan {
    command: Command,
    output: Option<PathBuf>,
    format: Format,
    threads: Threads,
    seed: u64,
}

fn plan(cli: Cli) -> CliResult<Plan> {
    let g = cli.global;
    let (command, output, format, threads, seed) = match cli.command {
        Command::Run(r) => {
            let m = RunManifest::load(&r.manifest)?.resolve(r.manifest.parent())?;
            (
                m.command,
                g.output.or(m.output),
                g.format.or(m.format),
                g.threads.or(m.threads),
                g.seed.or(m.seed),
            )
        }
        c => (c, g.output, g.format, g.threads, g.seed),
    };
    let threads = match threads {
        Some(t) => t,
        None => env_threads()?.unwrap_or(Threads::Auto),
    };
    let format = format.unwrap_or_else(|| match &output {
        Some(p) if p.extension().is_some_and(|e| e == "json") => Format::Json,
        _ => Format::Csv,
    });
    Ok(Plan {
        command,
        output,
        format,
        threads,
        seed: seed.unwrap_or(DEFAULT_SEED),
    })
}

fn header(plan: &Plan) -> Table {
    let mut t = Table::default();
    t.meta("tool", "klab");
    t.meta("version", env!("CARGO_PKG_VERSION"));
    t.meta("command", plan.command.name());
    if let serde_json::Value::Object(params) = plan.command.params() {
        for (k, v) in params {
            let v = match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|i| match i {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                other => other.to_string(),
            };
            t.meta(k, v);
        }
    }
    t.meta("seed", plan.seed);
    t
}

/// Run a parsed command line; `Ok(false)` means a verification failed.
pub fn run(cli: Cli) -> CliResult<bool> {
    let plan = plan(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.threads.count())
        .build()
        .map_err(|e| CliError::Usage(format!("threads: {e}")))?;
    let (outcome, threads) = pool.install(|| {
        (execute(&plan.command, plan.seed), rayon::current_num_threads())
    });
    let mut outcome = outcome?;

    let mut table = header(&plan);
    table.meta.append(&mut outcome.table.meta);
    table.columns = std::mem::take(&mut outcome.table.columns);
    table.rows = std::mem::take(&mut outcome.table.rows);

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    for line in &outcome.summary {
        writeln!(out, "{line}").map_err(io)?;
    }
    writeln!(out, "threads={threads} status={}", if outcome.passed { "pass" } else { "FAIL" })
        .map_err(io)?;
    match &plan.output {
        Some(p) if p.as_os_str() == "-" => {
            out.write_all(table.render(plan.format).as_bytes()).map_err(io)?;
        }
        Some(p) => {
            write_atomic(p, &table.render(plan.format))
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            writeln!(out, "wrote {}", p.display()).map_err(io)?;
        }
        None => {}
    }
    Ok(outcome.passed)
}
