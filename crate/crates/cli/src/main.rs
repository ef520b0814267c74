use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qngrc_core::experiment::{
    cmd_generate, cmd_predict, cmd_report, cmd_train, cmd_verify_quantum, output_dir, summarize, ExperimentConfig,
    RESOLVED_CONFIG_FILE,
};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Profile {
    Paper,
    Ci,
}

impl Profile {
    fn name(self) -> &'static str {
        match self {
            Profile::Paper => "paper",
            Profile::Ci => "ci",
        }
    }
}

/// Next-generation reservoir computing experiments on transverse-field Ising dynamics.
#[derive(Debug, Parser)]
#[command(name = "qngrc", version)]
struct Cli {
    /// TOML file merged over the selected profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to `output.dir` of the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "paper")]
    profile: Profile,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use the one-step iterative counterpart of the configured skip-ahead run.
    #[arg(long, global = true)]
    iterative: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the training, prediction and target series.
    Generate,
    /// Fit the weight matrix on the generated series.
    Train,
    /// Predict and write per-step metrics.
    Predict,
    /// Run the block-encoding pipeline on the toy instance.
    VerifyQuantum,
    /// Summarize metrics files as JSON.
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

fn config(cli: &Cli) -> qngrc_core::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref(), cli.profile.name())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.iterative {
        cfg = cfg.iterative_counterpart();
        cfg.validate()?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> qngrc_core::Result<Value> {
    let cfg = config(cli)?;
    let out = output_dir(&cfg, cli.out.as_deref());
    let value = match &cli.command {
        Command::Generate => {
            let files = cmd_generate(&cfg, &out)?;
            json!({ "written": files })
        }
        Command::Train => {
            let model = cmd_train(&cfg, &out)?;
            json!({ "model": out.join(qngrc_core::experiment::MODEL_FILE), "diagnostics": model.diagnostics() })
        }
        Command::Predict => {
            let rows = cmd_predict(&cfg, &out)?;
            json!({
                "metrics": out.join(qngrc_core::experiment::METRICS_FILE),
                "summary": summarize("predict", &rows)?,
            })
        }
        Command::VerifyQuantum => {
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join(RESOLVED_CONFIG_FILE), cfg.to_toml()?)?;
            let report = cmd_verify_quantum(&cfg, &out)?;
            serde_json::to_value(report)?
        }
        Command::Report { files } => {
            let paths: Vec<&std::path::Path> = files.iter().map(PathBuf::as_path).collect();
            serde_json::to_value(cmd_report(&paths)?)?
        }
    };
    Ok(value)
}

fn fail(kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim_end()),
    };
    match run(&cli) {
        Ok(value) => {
            // a closed stdout is not an experiment failure
            let _ = writeln!(std::io::stdout(), "{value:#}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}
