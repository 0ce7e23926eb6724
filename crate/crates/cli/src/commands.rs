use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use convograph_core::classify::{label_corpus, predict, split, train, SentimentModel};
use convograph_core::community::{detect_communities, modularity};
use convograph_core::eval::{
    confusion, evaluate_with, sentiment_percentages, Averaging, EvalReport,
};
use convograph_core::graph::{build_graph, EdgeFormat, EdgePolicy, Graph};
use convograph_core::ingest::{
    parse_labeled_corpus, parse_records, InteractionRecord, Label, LabeledDocument, RecordFormat,
};
use convograph_core::metrics::{compute_all, MetricsOptions, MetricsReport};
use convograph_core::Error as CoreError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Brand, RunConfig};
use crate::error::{CliError, CliResult};
use crate::render::{self, OutputFormat};

/// Optional `--since`/`--until` bounds on `created_at` (since inclusive,
/// until exclusive).
#[derive(Debug, Clone, Copy, Default)]
pub struct TimeWindow {
    pub since: Option<DateTime<Utc>>,
    pub until: Option<DateTime<Utc>>,
}

impl TimeWindow {
    pub fn parse(since: Option<&str>, until: Option<&str>) -> CliResult<Self> {
        let p = |s: &str| {
            DateTime::parse_from_rfc3339(s)
                .map(|d| d.with_timezone(&Utc))
                .map_err(|e| CliError::input(format!("bad timestamp {s:?}: {e}")))
        };
        Ok(TimeWindow {
            since: since.map(p).transpose()?,
            until: until.map(p).transpose()?,
        })
    }

    fn is_open(&self) -> bool {
        self.since.is_none() && self.until.is_none()
    }

    fn contains(&self, created_at: &str) -> bool {
        let Ok(t) = DateTime::parse_from_rfc3339(created_at) else {
            return false;
        };
        let t = t.with_timezone(&Utc);
        self.since.is_none_or(|s| t >= s) && self.until.is_none_or(|u| t < u)
    }
}

/// Settings shared by every subcommand after config and flags are merged.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: RunConfig,
    pub format: OutputFormat,
    pub window: TimeWindow,
    pub input_format: Option<RecordFormat>,
}

impl Context {
    fn metrics_options(&self) -> MetricsOptions {
        MetricsOptions {
            exact_node_limit: self.cfg.exact_metrics_node_limit,
            sample_sources: self.cfg.sample_sources,
            seed: self.cfg.seed,
        }
    }

    pub fn load_records(&self, path: &Path) -> CliResult<Vec<InteractionRecord>> {
        let format = self
            .input_format
            .or_else(|| RecordFormat::from_path(path))
            .unwrap_or(RecordFormat::Jsonl);
        let file = File::open(path)
            .map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))?;
        let parsed = parse_records(file, format)?;
        if parsed.skipped_count() > 0 {
            eprintln!(
                "warning: {}: skipped {} malformed line(s)",
                path.display(),
                parsed.skipped_count()
            );
        }
        let mut records = parsed.records;
        if !self.window.is_open() {
            records.retain(|r| self.window.contains(&r.created_at));
            if records.is_empty() {
                return Err(CoreError::EmptyInput(
                    "no records inside the --since/--until window".into(),
                )
                .into());
            }
        }
        Ok(records)
    }

    pub fn load_labeled(&self, path: &Path) -> CliResult<Vec<LabeledDocument>> {
        let file = File::open(path)
            .map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))?;
        parse_labeled_corpus(file).map_err(|e| match e {
            CoreError::Validation { line, message } => CliError::input(format!(
                "{}: {}",
                path.display(),
                CoreError::Validation { line, message }
            )),
            other => other.into(),
        })
    }
}

/// What a subcommand reads: an explicit path or a configured brand.
pub struct Input<'a> {
    pub path: PathBuf,
    pub brand: Option<&'a Brand>,
}

pub fn resolve_input<'a>(
    ctx: &'a Context,
    path: Option<PathBuf>,
    brand: Option<&str>,
) -> CliResult<Input<'a>> {
    match (path, brand) {
        (Some(path), _) => Ok(Input { path, brand: None }),
        (None, Some(name)) => {
            let b = ctx.cfg.brand(name)?;
            Ok(Input {
                path: b.records.clone(),
                brand: Some(b),
            })
        }
        (None, None) => Err(CliError::input("give an input file or --brand NAME")),
    }
}

#[derive(Debug, Serialize)]
struct IngestSummary {
    records: usize,
    authors: usize,
    mentions: usize,
    replies: usize,
}

pub fn ingest_validate(ctx: &Context, input: &Input) -> CliResult<String> {
    let records = ctx.load_records(&input.path)?;
    let mut authors: Vec<&str> = records.iter().map(|r| r.author.as_str()).collect();
    authors.sort_unstable();
    authors.dedup();
    let summary = IngestSummary {
        records: records.len(),
        authors: authors.len(),
        mentions: records.iter().map(|r| r.mentions().len()).sum(),
        replies: records.iter().filter(|r| r.reply_to.is_some()).count(),
    };
    let rows = [
        ("records", summary.records.to_string()),
        ("authors", summary.authors.to_string()),
        ("mentions", summary.mentions.to_string()),
        ("replies", summary.replies.to_string()),
    ];
    match ctx.format {
        OutputFormat::Table => Ok(render::key_values(&rows)),
        OutputFormat::Csv => render::key_values_csv(&rows),
        OutputFormat::Json => render::json(&summary),
    }
}

pub fn build(ctx: &Context, path: &Path, policy: EdgePolicy) -> CliResult<Graph> {
    let records = ctx.load_records(path)?;
    Ok(build_graph(&records, &policy))
}

/// Builds the graph, runs community detection with the configured seed and
/// computes every network property.
pub fn metrics_for(ctx: &Context, path: &Path, policy: EdgePolicy) -> CliResult<MetricsReport> {
    let g = build(ctx, path, policy)?;
    let partition = if g.edge_count() > 0 {
        Some(detect_communities(&g, ctx.cfg.seed)?)
    } else {
        None
    };
    Ok(compute_all(&g, partition.as_ref(), &ctx.metrics_options()))
}

pub fn graph_metrics(ctx: &Context, input: &Input, policy: EdgePolicy) -> CliResult<String> {
    let report = metrics_for(ctx, &input.path, policy)?;
    match ctx.format {
        OutputFormat::Table => Ok(report.to_key_value()),
        OutputFormat::Csv => render::key_values_csv(&report.rows()),
        OutputFormat::Json => render::json(&report),
    }
}

pub fn graph_export(
    ctx: &Context,
    input: &Input,
    policy: EdgePolicy,
    format: EdgeFormat,
) -> CliResult<String> {
    Ok(build(ctx, &input.path, policy)?.export(format))
}

#[derive(Debug, Serialize)]
struct Assignment<'a> {
    handle: &'a str,
    community: usize,
}

#[derive(Debug, Serialize)]
struct CommunityOutput<'a> {
    modularity: f64,
    community_count: usize,
    assignments: Vec<Assignment<'a>>,
}

pub fn community_detect(ctx: &Context, input: &Input, policy: EdgePolicy) -> CliResult<String> {
    let g = build(ctx, &input.path, policy)?;
    let p = detect_communities(&g, ctx.cfg.seed)?;
    let q = modularity(&g, &p)?;
    match ctx.format {
        OutputFormat::Table => {
            eprintln!("modularity {q} over {} communities", p.community_count());
            Ok(p.to_tsv(&g))
        }
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = g
                .handles()
                .iter()
                .zip(p.labels())
                .map(|(h, l)| vec![h.clone(), l.to_string()])
                .collect();
            render::csv_rows(&["handle", "community_id"], &rows)
        }
        OutputFormat::Json => render::json(&CommunityOutput {
            modularity: q,
            community_count: p.community_count(),
            assignments: g
                .handles()
                .iter()
                .zip(p.labels())
                .map(|(h, &community)| Assignment {
                    handle: h,
                    community,
                })
                .collect(),
        }),
    }
}

/// Positive/negative tally over auto-labeled records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub positive: u64,
    pub negative: u64,
    pub positive_pct: f64,
    pub negative_pct: f64,
    pub positive_rendered: String,
    pub negative_rendered: String,
}

impl Tally {
    pub fn from_labels(labels: impl IntoIterator<Item = Label>) -> CliResult<Self> {
        let (mut pos, mut neg) = (0, 0);
        for l in labels {
            match l {
                Label::Positive => pos += 1,
                Label::Negative => neg += 1,
            }
        }
        let share = sentiment_percentages(pos, neg)?;
        Ok(Tally {
            positive: pos,
            negative: neg,
            positive_pct: share.positive_pct(),
            negative_pct: share.negative_pct(),
            positive_rendered: share.render_positive(),
            negative_rendered: share.render_negative(),
        })
    }

    fn rows(&self) -> Vec<(&'static str, String)> {
        vec![
            (
                "positive",
                format!("{} ({} messages)", self.positive_rendered, self.positive),
            ),
            (
                "negative",
                format!("{} ({} messages)", self.negative_rendered, self.negative),
            ),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentOutcome {
    pub train_size: usize,
    pub test_size: usize,
    pub evaluation: EvalReport,
    pub tally: Option<Tally>,
}

/// Split, train, evaluate on the held-out part, then optionally tally the
/// model's labels over `records`.
pub fn run_sentiment(
    ctx: &Context,
    labeled: &Path,
    records: Option<&[InteractionRecord]>,
    averaging: Averaging,
) -> CliResult<SentimentOutcome> {
    let corpus = ctx.load_labeled(labeled)?;
    let (train_docs, test_docs) = split(&corpus, ctx.cfg.train_fraction, ctx.cfg.seed)?;
    if test_docs.is_empty() {
        return Err(CliError::input(
            "held-out split is empty; lower train_fraction or add data",
        ));
    }
    let model = train(&train_docs, &ctx.cfg.pipeline, ctx.cfg.alpha)?;
    let golds: Vec<Label> = test_docs.iter().map(|d| d.label).collect();
    let preds: Vec<Label> = test_docs
        .iter()
        .map(|d| predict(&model, &d.text, &ctx.cfg.pipeline).label)
        .collect();
    let evaluation = evaluate_with(&confusion(&golds, &preds)?, averaging)?;
    let tally = records
        .map(|rs| {
            Tally::from_labels(
                label_corpus(&model, rs, &ctx.cfg.pipeline)
                    .into_iter()
                    .map(|(_, p)| p.label),
            )
        })
        .transpose()?;
    Ok(SentimentOutcome {
        train_size: train_docs.len(),
        test_size: test_docs.len(),
        evaluation,
        tally,
    })
}

fn labeled_path(
    ctx: &Context,
    explicit: Option<PathBuf>,
    brand: Option<&Brand>,
) -> CliResult<PathBuf> {
    explicit
        .or_else(|| ctx.cfg.labeled_for(brand).map(Path::to_path_buf))
        .ok_or_else(|| CliError::input("no labeled corpus: pass --labeled or set run.labeled"))
}

pub fn sentiment_eval(
    ctx: &Context,
    labeled: Option<PathBuf>,
    input: Option<&Input>,
    averaging: Averaging,
) -> CliResult<String> {
    let labeled = labeled_path(ctx, labeled, input.and_then(|i| i.brand))?;
    let records = input.map(|i| ctx.load_records(&i.path)).transpose()?;
    let outcome = run_sentiment(ctx, &labeled, records.as_deref(), averaging)?;
    let mut rows = vec![
        ("train_documents", outcome.train_size.to_string()),
        ("test_documents", outcome.test_size.to_string()),
    ];
    rows.extend(outcome.evaluation.rows());
    if let Some(t) = &outcome.tally {
        rows.extend(t.rows());
    }
    match ctx.format {
        OutputFormat::Table => Ok(render::key_values(&rows)),
        OutputFormat::Csv => render::key_values_csv(&rows),
        OutputFormat::Json => render::json(&outcome),
    }
}

#[derive(Debug, Serialize)]
struct TrainSummary<'a> {
    model: &'a Path,
    train_documents: usize,
    held_out_documents: usize,
    vocabulary: usize,
    pipeline_digest: &'a str,
}

pub fn sentiment_train(
    ctx: &Context,
    labeled: Option<PathBuf>,
    model_out: &Path,
    all: bool,
) -> CliResult<String> {
    let labeled = labeled_path(ctx, labeled, None)?;
    let corpus = ctx.load_labeled(&labeled)?;
    let (train_docs, held_out) = if all {
        (corpus, Vec::new())
    } else {
        split(&corpus, ctx.cfg.train_fraction, ctx.cfg.seed)?
    };
    let model = train(&train_docs, &ctx.cfg.pipeline, ctx.cfg.alpha)?;
    std::fs::write(model_out, model.to_json() + "\n")
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", model_out.display())))?;
    let summary = TrainSummary {
        model: model_out,
        train_documents: train_docs.len(),
        held_out_documents: held_out.len(),
        vocabulary: model.vocabulary().len(),
        pipeline_digest: model.pipeline_digest(),
    };
    let rows = [
        ("model", model_out.display().to_string()),
        ("train_documents", summary.train_documents.to_string()),
        ("held_out_documents", summary.held_out_documents.to_string()),
        ("vocabulary", summary.vocabulary.to_string()),
        ("pipeline_digest", summary.pipeline_digest.to_string()),
    ];
    match ctx.format {
        OutputFormat::Table => Ok(render::key_values(&rows)),
        OutputFormat::Csv => render::key_values_csv(&rows),
        OutputFormat::Json => render::json(&summary),
    }
}

#[derive(Debug, Serialize)]
struct LabeledRecord<'a> {
    id: &'a str,
    label: Label,
    confidence: f64,
}

#[derive(Debug, Serialize)]
struct LabelOutput<'a> {
    predictions: Vec<LabeledRecord<'a>>,
    tally: Tally,
}

pub fn sentiment_label(ctx: &Context, model_path: &Path, input: &Input) -> CliResult<String> {
    let text = std::fs::read_to_string(model_path)
        .map_err(|e| CliError::input(format!("cannot read model {}: {e}", model_path.display())))?;
    let model = SentimentModel::from_json(&text, &ctx.cfg.pipeline)?;
    let records = ctx.load_records(&input.path)?;
    let predictions = label_corpus(&model, &records, &ctx.cfg.pipeline);
    let tally = Tally::from_labels(predictions.iter().map(|(_, p)| p.label))?;
    match ctx.format {
        OutputFormat::Table => {
            let mut out: String = predictions
                .iter()
                .map(|(id, p)| format!("{id}\t{}\t{:.4}\n", p.label, p.confidence))
                .collect();
            out.push_str(&format!(
                "# positive {} ({}), negative {} ({})\n",
                tally.positive_rendered, tally.positive, tally.negative_rendered, tally.negative
            ));
            Ok(out)
        }
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = predictions
                .iter()
                .map(|(id, p)| vec![id.clone(), p.label.to_string(), p.confidence.to_string()])
                .collect();
            render::csv_rows(&["id", "label", "confidence"], &rows)
        }
        OutputFormat::Json => render::json(&LabelOutput {
            predictions: predictions
                .iter()
                .map(|(id, p)| LabeledRecord {
                    id,
                    label: p.label,
                    confidence: p.confidence,
                })
                .collect(),
            tally,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Higher,
    Lower,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Count,
    Real,
    Percent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub property: String,
    pub direction: Direction,
    pub values: Vec<Option<f64>>,
    /// Brand holding the unique best value, if any.
    pub best: Option<String>,
    pub tied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrandWins {
    pub brand: String,
    pub wins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub brands: Vec<String>,
    pub rows: Vec<CompareRow>,
    pub wins: Vec<BrandWins>,
}

/// Row name, direction and value kind, in report order. Positive share wins
/// when higher; the negative share is its complement and is not scored.
const PROPERTIES: [(&str, Direction, Kind); 11] = [
    ("size", Direction::Higher, Kind::Count),
    ("edges", Direction::Higher, Kind::Count),
    ("density", Direction::Higher, Kind::Real),
    ("modularity", Direction::Higher, Kind::Real),
    ("diameter", Direction::Lower, Kind::Count),
    ("avg_path_length", Direction::Lower, Kind::Real),
    ("avg_degree", Direction::Higher, Kind::Real),
    ("reachability", Direction::Higher, Kind::Real),
    ("connected_components", Direction::Lower, Kind::Count),
    ("positive_pct", Direction::Higher, Kind::Percent),
    ("negative_pct", Direction::None, Kind::Percent),
];

struct BrandResult {
    metrics: MetricsReport,
    tally: Option<Tally>,
}

impl BrandResult {
    fn value(&self, property: &str) -> Option<f64> {
        let m = &self.metrics;
        match property {
            "size" => Some(m.size as f64),
            "edges" => Some(m.edges as f64),
            "density" => m.density,
            "modularity" => m.modularity,
            "diameter" => m.diameter.map(|d| d as f64),
            "avg_path_length" => m.avg_path_length,
            "avg_degree" => m.avg_degree,
            "reachability" => m.reachability,
            "connected_components" => m.connected_components.map(|c| c as f64),
            "positive_pct" => self.tally.as_ref().map(|t| t.positive_pct),
            "negative_pct" => self.tally.as_ref().map(|t| t.negative_pct),
            _ => None,
        }
    }
}

fn analyze_brand(ctx: &Context, brand: &Brand) -> CliResult<BrandResult> {
    let records = ctx.load_records(&brand.records)?;
    let g = build_graph(&records, &ctx.cfg.edge_policy);
    let partition = if g.edge_count() > 0 {
        Some(detect_communities(&g, ctx.cfg.seed)?)
    } else {
        None
    };
    let metrics = compute_all(&g, partition.as_ref(), &ctx.metrics_options());
    let tally = match ctx.cfg.labeled_for(Some(brand)) {
        Some(labeled) => run_sentiment(ctx, labeled, Some(&records), Averaging::Positive)?.tally,
        None => None,
    };
    Ok(BrandResult { metrics, tally })
}

/// Unique best index under `direction`, ignoring undefined values.
fn best_of(values: &[Option<f64>], direction: Direction) -> (Option<usize>, bool) {
    let better = |a: f64, b: f64| match direction {
        Direction::Higher => a > b,
        Direction::Lower => a < b,
        Direction::None => false,
    };
    if direction == Direction::None {
        return (None, false);
    }
    let mut best: Option<(usize, f64)> = None;
    let mut tied = false;
    for (i, v) in values.iter().enumerate() {
        let Some(v) = *v else { continue };
        match best {
            None => best = Some((i, v)),
            Some((_, b)) if better(v, b) => {
                best = Some((i, v));
                tied = false;
            }
            Some((_, b)) if v == b => tied = true,
            _ => {}
        }
    }
    match best {
        Some((i, _)) if !tied => (Some(i), false),
        Some(_) => (None, true),
        None => (None, false),
    }
}

pub fn compare_report(ctx: &Context) -> CliResult<CompareReport> {
    let brands = &ctx.cfg.brands;
    if brands.len() < 2 {
        return Err(CliError::input(format!(
            "compare needs at least 2 brands in the config, found {}",
            brands.len()
        )));
    }
    let results: Vec<BrandResult> = brands
        .par_iter()
        .map(|b| analyze_brand(ctx, b))
        .collect::<CliResult<_>>()?;

    let mut wins = vec![0usize; brands.len()];
    let rows = PROPERTIES
        .iter()
        .map(|&(property, direction, _)| {
            let values: Vec<Option<f64>> = results.iter().map(|r| r.value(property)).collect();
            let (best, tied) = best_of(&values, direction);
            if let Some(i) = best {
                wins[i] += 1;
            }
            CompareRow {
                property: property.to_string(),
                direction,
                values,
                best: best.map(|i| brands[i].name.clone()),
                tied,
            }
        })
        .collect();
    Ok(CompareReport {
        brands: brands.iter().map(|b| b.name.clone()).collect(),
        rows,
        wins: brands
            .iter()
            .zip(wins)
            .map(|(b, wins)| BrandWins {
                brand: b.name.clone(),
                wins,
            })
            .collect(),
    })
}

fn render_value(v: Option<f64>, kind: Kind) -> String {
    match (v, kind) {
        (None, _) => "n/a".into(),
        (Some(x), Kind::Count) => format!("{x:.0}"),
        (Some(x), Kind::Real) => format!("{x:.6}"),
        (Some(x), Kind::Percent) => format!("{x:.2}%"),
    }
}

impl CompareReport {
    pub fn footer(&self) -> String {
        self.wins
            .iter()
            .map(|w| format!("{}: {}", w.brand, w.wins))
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn tied_rows(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.tied)
            .map(|r| r.property.as_str())
            .collect()
    }

    fn cells(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .zip(PROPERTIES)
            .map(|(row, (_, _, kind))| {
                let mut cells = vec![row.property.clone()];
                cells.extend(row.values.iter().map(|&v| render_value(v, kind)));
                cells.push(match (&row.best, row.tied, row.direction) {
                    (Some(b), _, _) => b.clone(),
                    (None, true, _) => "tie".into(),
                    (None, false, _) => "-".into(),
                });
                cells
            })
            .collect()
    }

    pub fn render(&self, format: OutputFormat) -> CliResult<String> {
        let mut header = vec!["property".to_string()];
        header.extend(self.brands.iter().cloned());
        header.push("best".into());
        match format {
            OutputFormat::Json => render::json(self),
            OutputFormat::Csv => {
                let h: Vec<&str> = header.iter().map(String::as_str).collect();
                render::csv_rows(&h, &self.cells())
            }
            OutputFormat::Table => {
                let mut out = render::grid(&header, &self.cells());
                out.push_str(&format!("\nrows won: {}\n", self.footer()));
                let ties = self.tied_rows();
                if !ties.is_empty() {
                    out.push_str(&format!("ties: {}\n", ties.join(", ")));
                }
                Ok(out)
            }
        }
    }
}
