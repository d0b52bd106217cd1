mod args;
mod bench;
mod compare;
mod reduce;
mod sample;

use std::num::NonZeroUsize;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use balkit::ErrorClass;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

/// Model order reduction by balanced truncation and singular perturbation
/// approximation, from realizations or from transfer-function samples.
#[derive(Parser)]
#[command(name = "balkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a system or a sample set to a ROM file.
    Reduce(reduce::ReduceArgs),
    /// Compare a full model against one or more ROMs on a frequency grid.
    Compare(compare::CompareArgs),
    /// Run one of the benchmark suites.
    Bench(bench::BenchArgs),
    /// Write transfer-function samples of a system to CSV.
    Sample(sample::SampleArgs),
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("BALKIT_THREADS") else {
        return Ok(());
    };
    let n: NonZeroUsize = raw
        .trim()
        .parse()
        .map_err(|_| usage(format!("BALKIT_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.get())
        .build_global()
        .context("cannot configure the thread pool")?;
    faer::set_global_parallelism(if n.get() == 1 {
        faer::Par::Seq
    } else {
        faer::Par::Rayon(n)
    });
    Ok(())
}

/// A usage error raised by the front end itself.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Usage(msg.into()))
}

fn classify(err: &anyhow::Error) -> (&'static str, ErrorClass) {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<balkit::Error>() {
            return (e.tag(), e.class());
        }
        if cause.downcast_ref::<Usage>().is_some() {
            return ("usage", ErrorClass::Usage);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return ("io", ErrorClass::Io);
        }
    }
    ("error", ErrorClass::Usage)
}

/// The error chain joined with ": ", skipping causes already spelled out by
/// the message above them.
fn message(err: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in err.chain() {
        let s = cause.to_string();
        if !parts.last().is_some_and(|p| p.contains(&s)) {
            parts.push(s);
        }
    }
    parts.join(": ")
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Usage => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Io => 4,
    }
}

fn report_error(tag: &str, class: ErrorClass, message: &str) -> ExitCode {
    let class_name = match class {
        ErrorClass::Usage => "usage",
        ErrorClass::Numerical => "numerical",
        ErrorClass::Io => "io",
    };
    // serde_json escapes newlines, so this is always one line
    let line = serde_json::json!({ "error": tag, "class": class_name, "message": message });
    eprintln!("{line}");
    ExitCode::from(exit_code(class))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let text: Vec<&str> = msg
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let text = text.join(" ");
            return report_error("usage", ErrorClass::Usage, text.trim_start_matches("error: "));
        }
    };
    let run = configure_threads().and_then(|()| match cli.command {
        Command::Reduce(a) => reduce::run(a),
        Command::Compare(a) => compare::run(a),
        Command::Bench(a) => bench::run(a),
        Command::Sample(a) => sample::run(a),
    });
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (tag, class) = classify(&e);
            report_error(tag, class, &message(&e))
        }
    }
}
