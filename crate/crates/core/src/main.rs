use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fathorse::experiment::{run, ExperimentConfig, RunError, Suite};
use fathorse::svg::{render_section_svg, FigureKind, SectionDataset};

/// Caps the rayon pool when set to a positive integer.
const THREADS_VAR: &str = "FATHORSE_THREADS";

#[derive(Parser)]
#[command(
    name = "fathorse",
    version,
    about = "Cantor cones, fat Cantor sets and fat horseshoes of Lorenz-like maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment suites and write tables, reports and figures.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Run a single suite: cones, fatcantor, bowen or horseshoe.
        #[arg(long)]
        only: Option<Suite>,
        /// Output directory (overrides `output_dir` from the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a figure dataset (from `data/*.json`) as SVG on stdout.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        kind: FigureKind,
    },
}

fn configure_threads() {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return;
    };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                eprintln!("warning: {THREADS_VAR}: {e}");
            }
        }
        _ => eprintln!("warning: ignoring {THREADS_VAR}={value:?} (expected a positive integer)"),
    }
}

fn run_command(
    config: PathBuf,
    only: Option<Suite>,
    out: Option<PathBuf>,
) -> Result<bool, RunError> {
    let config = ExperimentConfig::load(&config)?;
    if config.c == 2.0 {
        eprintln!("warning: c = 2 gives f(1) = 1, the boundary case of f(1) < 1");
    }
    let out = out.unwrap_or_else(|| config.output_dir.clone());
    let report = run(&config, only, &out)?;
    for c in &report.criteria {
        println!(
            "{:<4} {:<32} value={:e} bound={:e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.value,
            c.bound
        );
    }
    println!("wrote {}", out.display());
    Ok(report.pass)
}

fn render_command(input: PathBuf, kind: FigureKind) -> Result<String, RunError> {
    let text = std::fs::read_to_string(&input).map_err(|source| RunError::Io {
        path: input,
        source,
    })?;
    let data: SectionDataset =
        serde_json::from_str(&text).map_err(|e| RunError::Config(e.to_string()))?;
    Ok(render_section_svg(&data, kind))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Run { config, only, out } => {
            run_command(config, only, out).map(|pass| if pass { 0 } else { 1 })
        }
        Command::Render { input, kind } => render_command(input, kind).map(|svg| {
            print!("{svg}");
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
