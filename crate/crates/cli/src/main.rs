use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pea_cli::pipeline::{self, to_json};
use pea_cli::{ProjectConfig, Stage, StageError, StageResult};
use pea_design::render_svg;

/// Stiffness and preload design for parallel elastic actuators.
#[derive(Debug, Parser)]
#[command(name = "pea", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Project config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write into this directory instead of stdout (`run`: overrides the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solver tolerance, overriding the config.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load, scale and differentiate the task files.
    Ingest(Common),
    /// Per-task quadratic costs.
    Quadratics(Common),
    /// Benefit regions as JSON or SVG.
    Regions(Common),
    /// Solve the configured design problem.
    Solve(Common),
    /// Metrics of the spring-free and optimal designs.
    Evaluate(Common),
    /// All stages; writes the full bundle.
    Run(Common),
    /// Serve the JSON API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Store snapshot, loaded at start and rewritten on change.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

fn load_config(args: &Common) -> StageResult<ProjectConfig> {
    let mut config = ProjectConfig::load(&args.config)?;
    if let Some(tol) = args.tol {
        config.tol = tol;
        config.validate()?;
    }
    Ok(config)
}

fn check_format(format: Option<Format>, allowed: &[Format], default: Format) -> StageResult<Format> {
    let f = format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(StageError::validation(Stage::Config, format!("--format {f:?} is not available here").to_lowercase()))
    }
}

fn emit(out: Option<&Path>, file: &str, text: &str) -> StageResult<()> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| StageError::validation(Stage::Write, format!("creating {}: {e}", dir.display())))?;
            let path = dir.join(file);
            std::fs::write(&path, text)
                .map_err(|e| StageError::validation(Stage::Write, format!("writing {}: {e}", path.display())))
        }
    }
}

fn execute(command: Command) -> StageResult<()> {
    match command {
        Command::Ingest(args) => {
            let format = check_format(args.format, &[Format::Json, Format::Csv], Format::Json)?;
            let project = pipeline::ingest(&load_config(&args)?)?;
            match (format, args.out.as_deref()) {
                (Format::Json | Format::Svg, None) => {
                    let docs: Vec<_> = project.tasks.iter().map(|t| t.to_document()).collect();
                    emit(None, "", &to_json(&docs))
                }
                (Format::Csv, None) => {
                    let text: Vec<String> = project.tasks.iter().map(|t| t.to_csv()).collect();
                    emit(None, "", &text.join("\n"))
                }
                (_, Some(dir)) => {
                    for task in &project.tasks {
                        let (file, text) = match format {
                            Format::Csv => (format!("{}.csv", task.name), task.to_csv()),
                            _ => (format!("{}.json", task.name), task.to_json() + "\n"),
                        };
                        emit(Some(dir), &file, &text)?;
                    }
                    Ok(())
                }
            }
        }
        Command::Quadratics(args) => {
            check_format(args.format, &[Format::Json], Format::Json)?;
            let project = pipeline::ingest(&load_config(&args)?)?;
            let quads = pipeline::quadratics(&project)?;
            emit(args.out.as_deref(), pipeline::QUADRATICS_FILE, &to_json(&quads))
        }
        Command::Regions(args) => {
            let format = check_format(args.format, &[Format::Json, Format::Svg], Format::Json)?;
            let project = pipeline::ingest(&load_config(&args)?)?;
            let regions = pipeline::regions(&pipeline::quadratics(&project)?);
            match format {
                Format::Svg => emit(args.out.as_deref(), pipeline::SVG_FILE, &render_svg(&regions, &[])),
                _ => emit(args.out.as_deref(), pipeline::REGIONS_FILE, &to_json(&regions)),
            }
        }
        Command::Solve(args) => {
            check_format(args.format, &[Format::Json], Format::Json)?;
            let config = load_config(&args)?;
            let project = pipeline::ingest(&config)?;
            let problem = pipeline::build_problem(&project, &pipeline::quadratics(&project)?)?;
            let report = pipeline::solve(&problem, config.tol)?;
            emit(args.out.as_deref(), pipeline::SOLUTION_FILE, &to_json(&report))
        }
        Command::Evaluate(args) => {
            let format = check_format(args.format, &[Format::Csv, Format::Json], Format::Csv)?;
            let config = load_config(&args)?;
            let project = pipeline::ingest(&config)?;
            let problem = pipeline::build_problem(&project, &pipeline::quadratics(&project)?)?;
            let report = pipeline::solve(&problem, config.tol)?;
            let table = pipeline::evaluate(&project, &report.x_star)?;
            match format {
                Format::Json => emit(args.out.as_deref(), "metrics.json", &(table.to_json() + "\n")),
                _ => emit(args.out.as_deref(), pipeline::METRICS_FILE, &table.to_csv()),
            }
        }
        Command::Run(args) => {
            check_format(args.format, &[Format::Json], Format::Json)?;
            let mut config = load_config(&args)?;
            if let Some(out) = args.out {
                config.output_dir = out;
            }
            let bundle = pipeline::run_pipeline(&config)?;
            let x = bundle.solution.x_star;
            eprintln!(
                "{}: k_p = {} N·m/rad, tau_p = {} N·m, wrote {}",
                serde_json::to_string(&bundle.solution.status).unwrap_or_default().trim_matches('"'),
                x.k_p,
                x.tau_p,
                config.output_path().display()
            );
            Ok(())
        }
        Command::Serve { bind, snapshot } => {
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| StageError::validation(Stage::Config, format!("starting runtime: {e}")))?;
            runtime
                .block_on(pea_cli::service::serve(bind, snapshot))
                .map_err(|e| StageError::validation(Stage::Config, format!("serving on {bind}: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
