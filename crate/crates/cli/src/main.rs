use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use storylink::pipeline::{self, DEFAULT_THRESHOLD};
use storylink::server::{serve, AppState};
use storylink_core::classifier::Hyperparams;
use storylink_core::domain::to_canonical_json;

#[derive(Parser)]
#[command(name = "storylink", version, about = "Couple basketball recaps to game data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract who/what/when/where mentions from a story.
    Extract(ExtractArgs),
    /// Train the stat window classifier on a story corpus.
    Train(TrainArgs),
    /// Bind extracted mentions to game data.
    Couple(CoupleArgs),
    /// Serve the coupled document over HTTP.
    Serve(ServeArgs),
    /// Re-evaluate a trained model on its held-out windows.
    Eval(EvalArgs),
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    story: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    /// Grammar file; the built-in basketball grammar when omitted.
    #[arg(long)]
    grammar: Option<PathBuf>,
    /// Classifier model; without one only lexicon and grammar run.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    grammar: Option<PathBuf>,
    #[arg(long, default_value = "out/model.json")]
    model: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    lambda: f64,
    #[arg(long, default_value_t = 20)]
    epochs: u32,
}

#[derive(Args)]
struct CoupleArgs {
    #[arg(long)]
    game: PathBuf,
    /// Directory holding mentions.json; coupled.json is written here.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Fail on any game-data or coupled-document violation.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    grammar: Option<PathBuf>,
    #[arg(long, default_value = "out/model.json")]
    model: PathBuf,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(a) => {
            let report = pipeline::run_extract(&pipeline::ExtractConfig {
                story: a.story,
                lexicon: a.lexicon,
                grammar: a.grammar,
                model: a.model,
                threshold: a.threshold,
                out: a.out,
            })?;
            print!("{}", to_canonical_json(&report)?);
        }
        Command::Train(a) => {
            let report = pipeline::run_train(&pipeline::TrainConfig {
                corpus: a.corpus,
                grammar: a.grammar,
                model: a.model,
                hyperparams: Hyperparams {
                    reg_lambda: a.lambda,
                    epochs: a.epochs,
                    seed: a.seed,
                },
            })?;
            print!("{}", to_canonical_json(&report)?);
        }
        Command::Couple(a) => {
            let (_, report) = pipeline::run_couple(&pipeline::CoupleConfig {
                game: a.game,
                out: a.out,
                strict: a.strict,
            })?;
            for w in &report.warnings {
                eprintln!("warning: {}: {}", w.code, w.message);
            }
            print!("{}", to_canonical_json(&report)?);
        }
        Command::Serve(a) => {
            let coupled = pipeline::load_coupled(&a.out.join(pipeline::COUPLED_FILE))?;
            let (game, _) = pipeline::load_game_data(&a.game, a.strict)?;
            let state = AppState::new(coupled, &game)?;
            tokio::runtime::Runtime::new()?.block_on(serve(state, a.port))?;
        }
        Command::Eval(a) => {
            let ev = pipeline::run_eval(&pipeline::EvalConfig {
                corpus: a.corpus,
                grammar: a.grammar,
                model: a.model,
            })?;
            print!("{}", to_canonical_json(&ev)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
