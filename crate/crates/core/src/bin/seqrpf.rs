use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use seqrpf::error::Error;
use seqrpf::experiments::{run_experiment, Kind, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "seqrpf", version, about = "Run a sequential transfer operator experiment")]
struct Cli {
    /// Experiment kind, e.g. rpf, gibbs, berry-esseen, env-llt.
    kind: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let kind: Kind = match cli.kind.parse() {
        Ok(k) => k,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let o = RunOptions { out: cli.out, seed: cli.seed, jobs: cli.jobs };
    match run_experiment(kind, &cli.config, &o) {
        Ok(m) => {
            for w in &m.warnings {
                eprintln!("warning: {w}");
            }
            for f in &m.outputs {
                println!("{f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Config(_)) { 2 } else { 1 })
        }
    }
}
