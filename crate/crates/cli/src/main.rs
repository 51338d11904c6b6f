use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use peaked_cli::run::EXIT_INPUT;
use peaked_cli::{parse_config, run, write_error_record, Command, RunContext};

/// Thread count for the numerical kernels; defaults to all cores.
const THREADS_VAR: &str = "PEAKED_THREADS";

#[derive(Parser)]
#[command(name = "peaked", version, about = "Construct, verify and classify surfaces with a peaked singularity")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the Cauchy problem for the configured curve and export the surface.
    Construct(RunArgs),
    /// Check residuals and curvature of sample or solution files.
    Verify(RunArgs),
    /// Classify the singularity of a sample file or a constructed surface.
    Classify(RunArgs),
    /// Write mesh and forms tables for a solution.
    Export(RunArgs),
    /// Write graph samples of a closed-form model surface.
    Sample(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run twice and require identical artifacts.
    #[arg(long)]
    seed_check: bool,
}

fn fail(out: &Path, command: Command, kind: &str, code: u8, messages: Vec<String>) -> ExitCode {
    for m in &messages {
        eprintln!("peaked {command}: {m}");
    }
    if let Err(e) = write_error_record(out, &command.to_string(), kind, code, &messages) {
        eprintln!("peaked {command}: cannot write error record: {e}");
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Construct(a) => (Command::Construct, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Classify(a) => (Command::Classify, a),
        Cmd::Export(a) => (Command::Export, a),
        Cmd::Sample(a) => (Command::Sample, a),
    };
    let fallback_out = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n = match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return fail(&fallback_out, command, "input", EXIT_INPUT, vec![format!("{THREADS_VAR}=`{v}` is not a positive integer")]),
        };
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&fallback_out, command, "input", EXIT_INPUT, vec![e.to_string()]);
        }
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            let msg = format!("{}: {e}", args.config.display());
            return fail(&fallback_out, command, "io", EXIT_INPUT, vec![msg]);
        }
    };
    let config = match parse_config(&text) {
        Ok(c) => c,
        Err(errs) => {
            let msgs = errs.0.iter().map(|e| format!("{}: {e}", args.config.display())).collect();
            return fail(&fallback_out, command, "input", EXIT_INPUT, msgs);
        }
    };
    let out_dir = args.out.unwrap_or_else(|| config.output.dir.clone());
    let base_dir = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let ctx = RunContext { config, base_dir, out_dir: out_dir.clone(), seed_check: args.seed_check };
    match run(command, &ctx) {
        Ok(m) => {
            for c in m.checks.iter().filter(|c| !c.pass) {
                eprintln!("peaked {command}: {} = {:e} exceeds {:e}", c.name, c.value, c.tolerance);
            }
            println!(
                "{command}: run {} status {} in {:.2} s, artifacts in {}",
                m.run_id,
                m.status,
                m.wall_time_s,
                out_dir.display()
            );
            ExitCode::from(m.status)
        }
        Err(e) => fail(&out_dir, command, e.kind(), e.exit_code(), vec![e.to_string()]),
    }
}
