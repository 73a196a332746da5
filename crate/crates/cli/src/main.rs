use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phaselab::Exec;
use phaselab_cli::{emit_results, load, output_path, run_scenario, CliError, Format};

#[derive(Parser)]
#[command(version, about = "Run phaselab scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file; exit status 0 only if every expectation passes.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Overrides the format set in the file.
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        quiet: bool,
    },
}

fn run(config: PathBuf, out: PathBuf, format: Option<Format>, quiet: bool) -> Result<bool, CliError> {
    let loaded = load(&config)?;
    let format = format.unwrap_or(loaded.config.output.format);
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let path = output_path(&out, &loaded.config.name, format);
    // Opened before computing so an unwritable target fails fast.
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let result = run_scenario(&loaded, Exec::Parallel)?;
    emit_results(&result.records, format, BufWriter::new(file))?;
    if !quiet {
        for o in &result.outcomes {
            let at = match (o.point, o.row) {
                (Some(p), Some(r)) => format!(" [point {p} row {r}]"),
                _ => String::new(),
            };
            println!(
                "{} expect[{}] {}{at}: {}",
                if o.pass { "PASS" } else { "FAIL" },
                o.expectation,
                o.field,
                o.detail
            );
        }
        println!("{} records -> {}", result.records.len(), path.display());
    }
    Ok(result.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { config, out, format, quiet } = cli.command;
    match run(config, out, format, quiet) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
