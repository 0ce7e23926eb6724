mod commands;
mod config;
mod error;
mod render;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use convograph_core::eval::Averaging;
use convograph_core::graph::{EdgeFormat, EdgePolicy};
use convograph_core::ingest::RecordFormat;

use crate::commands::{Context, TimeWindow};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::render::OutputFormat;

/// Conversation-network and sentiment analysis for brand message corpora.
#[derive(Debug, Parser)]
#[command(name = "convograph", version)]
struct Cli {
    /// INI run configuration with [brand.NAME] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for community detection, splitting and sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Keep records created at or after this RFC 3339 instant.
    #[arg(long, global = true)]
    since: Option<String>,

    /// Keep records created strictly before this RFC 3339 instant.
    #[arg(long, global = true)]
    until: Option<String>,

    /// Record file format; inferred from the extension when omitted.
    #[arg(long, global = true, value_enum)]
    input_format: Option<InputFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InputFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EdgeSource {
    Both,
    Mentions,
    Replies,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExportFormat {
    Tsv,
    Dot,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Record file (JSONL or CSV).
    input: Option<PathBuf>,

    /// Read the records of a brand from the config instead.
    #[arg(long, conflicts_with = "input")]
    brand: Option<String>,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Which interactions become edges; overrides the [edges] section.
    #[arg(long, value_enum)]
    edges: Option<EdgeSource>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a record file and summarise it.
    Ingest {
        #[command(subcommand)]
        cmd: IngestCmd,
    },
    /// Build the interaction graph.
    Graph {
        #[command(subcommand)]
        cmd: GraphCmd,
    },
    /// Partition the graph into communities.
    Community {
        #[command(subcommand)]
        cmd: CommunityCmd,
    },
    /// Train, evaluate and apply the sentiment classifier.
    Sentiment {
        #[command(subcommand)]
        cmd: SentimentCmd,
    },
    /// Side-by-side report over every configured brand.
    Compare,
}

#[derive(Debug, Subcommand)]
enum IngestCmd {
    Validate(InputArgs),
}

#[derive(Debug, Subcommand)]
enum GraphCmd {
    /// Network properties of the graph.
    Metrics(GraphArgs),
    /// Edge list as TSV or Graphviz DOT.
    Export {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long = "as", value_enum, default_value = "tsv")]
        as_format: ExportFormat,
    },
}

#[derive(Debug, Subcommand)]
enum CommunityCmd {
    Detect(GraphArgs),
}

#[derive(Debug, Subcommand)]
enum SentimentCmd {
    /// Fit a model and save it as JSON.
    Train {
        #[arg(long)]
        labeled: Option<PathBuf>,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        train_fraction: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Fit on the whole labeled corpus without holding anything out.
        #[arg(long)]
        all: bool,
    },
    /// Held-out evaluation, plus a label tally over records when given.
    Eval {
        #[arg(long)]
        labeled: Option<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        train_fraction: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Macro-average precision and recall over both classes.
        #[arg(long = "macro")]
        macro_average: bool,
    },
    /// Label every record with a saved model.
    Label {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        input: InputArgs,
    },
}

fn edge_policy(base: EdgePolicy, source: Option<EdgeSource>) -> CliResult<EdgePolicy> {
    Ok(match source {
        None => base,
        Some(EdgeSource::Both) => EdgePolicy::new(true, true)?,
        Some(EdgeSource::Mentions) => EdgePolicy::new(true, false)?,
        Some(EdgeSource::Replies) => EdgePolicy::new(false, true)?,
    })
}

fn override_training(
    cfg: &mut RunConfig,
    train_fraction: Option<f64>,
    alpha: Option<f64>,
) -> CliResult<()> {
    if let Some(f) = train_fraction {
        if !(f > 0.0 && f < 1.0) {
            return Err(CliError::input(format!(
                "--train-fraction {f} must be strictly between 0 and 1"
            )));
        }
        cfg.train_fraction = f;
    }
    if let Some(a) = alpha {
        cfg.alpha = a;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<String> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let mut ctx = Context {
        format: cli.format.unwrap_or(cfg.output_format),
        window: TimeWindow::parse(cli.since.as_deref(), cli.until.as_deref())?,
        input_format: cli.input_format.map(|f| match f {
            InputFormat::Jsonl => RecordFormat::Jsonl,
            InputFormat::Csv => RecordFormat::Csv,
        }),
        cfg,
    };

    match cli.command {
        Command::Ingest {
            cmd: IngestCmd::Validate(a),
        } => {
            let input = commands::resolve_input(&ctx, a.input, a.brand.as_deref())?;
            commands::ingest_validate(&ctx, &input)
        }
        Command::Graph {
            cmd: GraphCmd::Metrics(g),
        } => {
            let policy = edge_policy(ctx.cfg.edge_policy, g.edges)?;
            let input = commands::resolve_input(&ctx, g.input.input, g.input.brand.as_deref())?;
            commands::graph_metrics(&ctx, &input, policy)
        }
        Command::Graph {
            cmd: GraphCmd::Export { graph, as_format },
        } => {
            let policy = edge_policy(ctx.cfg.edge_policy, graph.edges)?;
            let input =
                commands::resolve_input(&ctx, graph.input.input, graph.input.brand.as_deref())?;
            let format = match as_format {
                ExportFormat::Tsv => EdgeFormat::Tsv,
                ExportFormat::Dot => EdgeFormat::Dot,
            };
            commands::graph_export(&ctx, &input, policy, format)
        }
        Command::Community {
            cmd: CommunityCmd::Detect(g),
        } => {
            let policy = edge_policy(ctx.cfg.edge_policy, g.edges)?;
            let input = commands::resolve_input(&ctx, g.input.input, g.input.brand.as_deref())?;
            commands::community_detect(&ctx, &input, policy)
        }
        Command::Sentiment { cmd } => match cmd {
            SentimentCmd::Train {
                labeled,
                model,
                train_fraction,
                alpha,
                all,
            } => {
                override_training(&mut ctx.cfg, train_fraction, alpha)?;
                commands::sentiment_train(&ctx, labeled, &model, all)
            }
            SentimentCmd::Eval {
                labeled,
                input,
                train_fraction,
                alpha,
                macro_average,
            } => {
                override_training(&mut ctx.cfg, train_fraction, alpha)?;
                let averaging = if macro_average {
                    Averaging::Macro
                } else {
                    Averaging::Positive
                };
                let records = match (input.input, input.brand) {
                    (None, None) => None,
                    (path, brand) => Some(commands::resolve_input(&ctx, path, brand.as_deref())?),
                };
                commands::sentiment_eval(&ctx, labeled, records.as_ref(), averaging)
            }
            SentimentCmd::Label { model, input } => {
                let input = commands::resolve_input(&ctx, input.input, input.brand.as_deref())?;
                commands::sentiment_label(&ctx, &model, &input)
            }
        },
        Command::Compare => {
            if cli.config.is_none() {
                return Err(CliError::input(
                    "compare needs --config with at least 2 brands",
                ));
            }
            commands::compare_report(&ctx)?.render(ctx.format)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::Internal(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(cli).and_then(|text| emit(out.as_deref(), &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
