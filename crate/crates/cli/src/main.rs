use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oms_cli::config::threads_from_config;
use oms_cli::{parse_config_with, run_job, CliError, JobKind, KindRequest, OutputFormat, Overrides};

/// Steady states, probe spectra and parameter sweeps of a two-port
/// multi-mode optomechanical cavity.
#[derive(Parser)]
#[command(name = "oms", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state amplitudes and effective detunings for every branch.
    SteadyState(JobArgs),
    /// Port transmissions over the probe-offset grid.
    Spectrum(JobArgs),
    /// Spectra over one or two parameter axes.
    Sweep(JobArgs),
    /// Compare the linear response with a time-domain integration.
    Verify(JobArgs),
    /// List the built-in parameter presets.
    Presets {
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

#[derive(Args)]
struct JobArgs {
    /// TOML job file with [system] and [job] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name; overrides `preset` in the file.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory; overrides `output` in the file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Maximum number of worker threads.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn execute(kind: KindRequest, args: JobArgs) -> Result<(), CliError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?,
        None if args.preset.is_some() => String::new(),
        None => return Err(CliError::Usage("either --config or --preset is required".into())),
    };
    let overrides = Overrides {
        kind: Some(kind),
        preset: args.preset,
        output_dir: args.out,
        format: args.format.map(Into::into),
    };
    let job = parse_config_with(&text, &overrides)?;
    let threads = args.threads.or_else(|| threads_from_config(&text));
    let outcome = match threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| run_job(&job))?,
        None => run_job(&job)?,
    };
    for w in &outcome.warnings {
        eprintln!("{}", serde_json::json!({ "warning": w }));
    }
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(())
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
    let result = match cli.command {
        Command::Presets { format } => {
            match format {
                Some(Format::Json) => print!("{}", oms_cli::presets_json()),
                _ => print!("{}", oms_cli::presets_text()),
            }
            Ok(())
        }
        Command::SteadyState(a) => execute(KindRequest::Exact(JobKind::SteadyState), a),
        Command::Spectrum(a) => execute(KindRequest::Exact(JobKind::Spectrum), a),
        Command::Sweep(a) => execute(KindRequest::AnySweep, a),
        Command::Verify(a) => execute(KindRequest::Exact(JobKind::Verify), a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
