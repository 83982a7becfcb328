use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use veritas::{run, summary, ExperimentConfig, RunError, Style};
use veritas_core::epistemic::{self, EpistemicError, KripkeModel, ModelSpec};
use veritas_core::ngram::{self, IngestConfig, NGramError};

#[derive(Parser)]
#[command(
    name = "veritas",
    version,
    about = "Seeded experiments on learning true probabilities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the output directory in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact chain-rule probability of a sentence under a corpus.
    Ngram {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        sentence: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Evaluate an epistemic formula at a point of a Kripke model.
    Logic {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long)]
        formula: String,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }

    fn runtime(message: impl ToString) -> Self {
        Self {
            code: 3,
            message: message.to_string(),
        }
    }
}

fn read(path: &PathBuf) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

fn cmd_run(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), Failure> {
    let text = String::from_utf8(read(&config)?)
        .map_err(|e| Failure::validation(format!("{}: {e}", config.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)
        .map_err(|e| Failure::validation(format!("invalid config {}: {e}", config.display())))?;
    if seed.is_some() {
        cfg.seed = seed;
    }
    if out.is_some() {
        cfg.output_dir = out;
    }
    let report = run(&cfg).map_err(|e: RunError| Failure {
        code: e.exit_code() as u8,
        message: e.to_string(),
    })?;
    let dir = report
        .config
        .output_dir
        .clone()
        .unwrap_or_else(|| veritas::default_output_dir(cfg.experiment));
    print!("{}", summary(&report, &dir, Style::detect()));
    Ok(())
}

fn cmd_ngram(corpus: PathBuf, sentence: String, n: usize) -> Result<(), Failure> {
    let raw = read(&corpus)?;
    let cfg = IngestConfig {
        n_max: n,
        ..IngestConfig::default()
    };
    let (_, table) = ngram::ingest(&raw, &cfg).map_err(|e| match e {
        NGramError::EmptyCorpus | NGramError::EncodingError(_) => {
            Failure::runtime(format!("{}: {e}", corpus.display()))
        }
        other => Failure::validation(other),
    })?;
    let text = std::str::from_utf8(&raw).expect("ingest checked the encoding");
    let tokens = ngram::parse_tokens(&sentence);
    let report = ngram::direct_observation_check(&table, text, &cfg, &tokens)
        .map_err(Failure::validation)?;
    let style = Style::detect();
    let p = &report.chain_value;
    println!("{} {}", style.bold("sentence"), tokens.join(" "));
    println!(
        "{} {}/{} ({})",
        style.bold("P(S)"),
        p.numer(),
        p.denom(),
        *p.numer() as f64 / *p.denom() as f64
    );
    for k in 0..tokens.len() {
        let c = table.conditional_prob(&tokens[k], &tokens[..k]);
        match c {
            Ok(c) => println!(
                "  P({} | {}) = {}/{}",
                tokens[k],
                tokens[..k].join(" "),
                c.numer(),
                c.denom()
            ),
            Err(_) => break,
        }
    }
    let b = &report.brute_force_value;
    println!(
        "{} {}/{} equal={}",
        style.bold("C(S)/C(w_0)"),
        b.numer(),
        b.denom(),
        report.equal
    );
    Ok(())
}

fn cmd_logic(model: PathBuf, point: String, formula: String) -> Result<(), Failure> {
    let raw = read(&model)?;
    let spec: ModelSpec = serde_json::from_slice(&raw)
        .map_err(|e| Failure::validation(format!("{}: {e}", model.display())))?;
    let m = KripkeModel::from_spec(&spec).map_err(Failure::validation)?;
    let f = epistemic::parse(&formula).map_err(|e| match &e {
        EpistemicError::SyntaxError { position, .. } => {
            Failure::validation(format!("{e}\n  {formula}\n  {}^", " ".repeat(*position)))
        }
        _ => Failure::validation(e),
    })?;
    let value = epistemic::evaluate(&m, &point, &f).map_err(Failure::validation)?;
    println!("{f} at {point}: {value}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out } => cmd_run(config, seed, out),
        Command::Ngram {
            corpus,
            sentence,
            n,
        } => cmd_ngram(corpus, sentence, n),
        Command::Logic {
            model,
            point,
            formula,
        } => cmd_logic(model, point, formula),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
