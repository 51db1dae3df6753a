use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use devilstick::cli_runner::scenario::with_mode;
use devilstick::cli_runner::table::render;
use devilstick::cli_runner::{
    parse_config, run_scenario, run_sweep, Mode, ScenarioConfig, ScenarioOutput,
};
use devilstick::Error;

#[derive(Parser)]
#[command(
    name = "devilstick",
    version,
    about = "Impulsive propeller juggling of a devil-stick"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario according to its `mode`.
    Run {
        config: PathBuf,
        /// CSV destination; defaults to the scenario's `out`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterate the discrete zero dynamics of a scenario.
    Dzd {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fixed point of the section map.
    FixedPoint { config: PathBuf },
    /// Linearization of the section map and the LQR gain.
    Linearize { config: PathBuf },
    /// Closed-loop run with the section correction.
    Stabilize {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every `*.cfg` in a directory, in parallel.
    Sweep {
        dir: PathBuf,
        /// Directory for the tables; defaults to the scenario directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Model(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Model(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Model(m) | Failure::Io(m) => m,
        }
    }
}

fn model(e: Error) -> Failure {
    match e {
        Error::InvalidParameter { .. } => Failure::Config(e.to_string()),
        _ => Failure::Model(e.to_string()),
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|errs| {
        let lines: Vec<String> = errs
            .iter()
            .map(|e| format!("{}: {e}", path.display()))
            .collect();
        Failure::Config(lines.join("\n"))
    })
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Prints the summary and writes the table (to `out`, or stdout after the summary).
fn emit(output: &ScenarioOutput, out: Option<PathBuf>) -> Result<(), Failure> {
    let summary = output.summary.render();
    match (out, output.rows.is_empty()) {
        (_, true) => print!("{summary}"),
        (Some(p), false) => {
            write(&p, &render(&output.rows))?;
            print!("{summary}");
        }
        (None, false) => {
            eprint!("{summary}");
            print!("{}", render(&output.rows));
        }
    }
    Ok(())
}

fn default_out(cfg_path: &Path, cfg: &ScenarioConfig, flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| {
        cfg.output
            .as_ref()
            .map(|o| cfg_path.parent().unwrap_or(Path::new(".")).join(o))
    })
}

fn single(path: &Path, forced: Option<Mode>, out: Option<PathBuf>) -> Result<(), Failure> {
    let mut cfg = load(path)?;
    if let Some(m) = forced {
        cfg = with_mode(&cfg, m);
    }
    let out = default_out(path, &cfg, out);
    if cfg.mode == Mode::Sweep {
        let runs = run_sweep(&cfg).map_err(model)?;
        let base = out.unwrap_or_else(|| path.with_extension("csv"));
        return write_sweep(&base, &runs);
    }
    let output = run_scenario(&cfg).map_err(model)?;
    emit(&output, out)
}

fn write_sweep(base: &Path, runs: &[ScenarioOutput]) -> Result<(), Failure> {
    let stem = base
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sweep")
        .to_string();
    for (i, r) in runs.iter().enumerate() {
        let p = base.with_file_name(format!("{stem}_{}.csv", i + 1));
        write(&p, &render(&r.rows))?;
        println!("[{}]", p.display());
        print!("{}", r.summary.render());
    }
    Ok(())
}

fn sweep_dir(dir: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    files.sort();
    let out_dir = out.unwrap_or_else(|| dir.to_path_buf());
    let results: Vec<(PathBuf, Result<String, Failure>)> = files
        .par_iter()
        .map(|f| {
            let res = (|| {
                let cfg = load(f)?;
                let stem = f.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
                let csv = out_dir.join(format!("{stem}.csv"));
                let mut text = String::new();
                if cfg.mode == Mode::Sweep {
                    for (i, r) in run_sweep(&cfg).map_err(model)?.iter().enumerate() {
                        let p = out_dir.join(format!("{stem}_{}.csv", i + 1));
                        write(&p, &render(&r.rows))?;
                        text.push_str(&r.summary.render());
                    }
                } else {
                    let r = run_scenario(&cfg).map_err(model)?;
                    if !r.rows.is_empty() {
                        write(&csv, &render(&r.rows))?;
                    }
                    text.push_str(&r.summary.render());
                }
                Ok(text)
            })();
            (f.clone(), res)
        })
        .collect();
    let mut worst: Option<Failure> = None;
    for (f, r) in results {
        println!("[{}]", f.display());
        match r {
            Ok(text) => print!("{text}"),
            Err(e) => {
                eprintln!("{}", e.message());
                if worst.as_ref().is_none_or(|w| e.code() > w.code()) {
                    worst = Some(e);
                }
            }
        }
    }
    worst.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run { config, out } => single(&config, None, out),
        Command::Dzd { config, out } => single(&config, Some(Mode::Dzd), out),
        Command::FixedPoint { config } => single(&config, Some(Mode::FixedPoint), None),
        Command::Linearize { config } => single(&config, Some(Mode::Linearize), None),
        Command::Stabilize { config, out } => single(&config, Some(Mode::Stabilize), out),
        Command::Sweep { dir, out } => sweep_dir(&dir, out),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
