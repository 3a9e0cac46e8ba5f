use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use evotrack_core::model::{load_project, validate_project, IssueKind, ValidationIssue};
use evotrack_core::pipeline::{compare, explore, write_bundle, PipelineError};

mod serve;

#[derive(Parser)]
#[command(
    name = "evotrack",
    version,
    about = "Track GUI-level change across application versions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Slice every handler of one version and write an exploration bundle.
    Explore {
        project: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Compare two versions and write a comparison bundle.
    Compare {
        old: PathBuf,
        new: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print the regression-focus report for two versions.
    Report {
        old: PathBuf,
        new: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check a project's artifacts and print every issue found.
    Validate { project: PathBuf },
    /// Serve a bundle directory over HTTP.
    Serve {
        dir: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory with the explorer UI assets.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn fail(err: PipelineError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code() as u8)
}

fn print_warnings(warnings: &[ValidationIssue]) {
    for w in warnings {
        eprintln!("{w}");
    }
}

fn run_explore(project: &Path, out: &Path) -> Result<(), PipelineError> {
    let ex = explore(project)?;
    print_warnings(&ex.bundle.warnings);
    write_bundle(out, &ex.files())?;
    eprintln!(
        "wrote {} slices to {}",
        ex.bundle.slices.len(),
        out.display()
    );
    Ok(())
}

fn run_compare(old: &Path, new: &Path, out: &Path) -> Result<(), PipelineError> {
    let cmp = compare(old, new)?;
    print_warnings(&cmp.bundle.warnings);
    write_bundle(out, &cmp.files())?;
    eprintln!("wrote comparison to {}", out.display());
    Ok(())
}

fn run_report(old: &Path, new: &Path, format: Format) -> Result<(), PipelineError> {
    let cmp = compare(old, new)?;
    print_warnings(&cmp.bundle.warnings);
    match format {
        Format::Text => print!("{}", cmp.report_text),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&cmp.bundle.report).expect("report serializes")
        ),
    }
    Ok(())
}

fn run_validate(project: &Path) -> ExitCode {
    let issues = match load_project(project) {
        Ok(p) => validate_project(&p),
        Err(e) => {
            eprintln!("error: {}: {e}", project.display());
            let missing = matches!(e, evotrack_core::model::ModelError::Io { .. });
            return ExitCode::from(if missing { 2 } else { 1 });
        }
    };
    for issue in &issues {
        println!("{issue}");
    }
    let errors: Vec<_> = issues.iter().filter(|i| i.is_error()).collect();
    if errors.iter().any(|i| i.kind == IssueKind::MissingArtifact) {
        ExitCode::from(2)
    } else if !errors.is_empty() {
        ExitCode::from(1)
    } else {
        if issues.is_empty() {
            println!("ok");
        }
        ExitCode::SUCCESS
    }
}

fn run_serve(dir: &Path, ui: Option<&Path>, port: u16) -> ExitCode {
    let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
    match runtime.block_on(serve::serve(dir, ui, port)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Explore { project, out } => run_explore(project, out),
        Command::Compare { old, new, out } => run_compare(old, new, out),
        Command::Report { old, new, format } => run_report(old, new, *format),
        Command::Validate { project } => return run_validate(project),
        Command::Serve { dir, port, ui } => return run_serve(dir, ui.as_deref(), *port),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
