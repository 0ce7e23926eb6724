//! Conversation-graph analytics for social CRM measurement.
//!
//! The crate turns tweet-style interaction records into an undirected
//! conversation graph, scores it with eight network properties (size,
//! density, modularity, diameter, average path length, average degree,
//! reachability, connected components), and classifies message sentiment
//! with a multinomial Naive Bayes model trained on a small labeled corpus.
//!
//! ```
//! use convograph_core::{build_graph, compute_all, parse_records, EdgePolicy, MetricsOptions, RecordFormat};
//!
//! let input = r#"{"id":"1","author":"@Alice","text":"hi @bob @carol","created_at":"2019-10-01T00:00:00Z"}"#;
//! let parsed = parse_records(input.as_bytes(), RecordFormat::Jsonl).unwrap();
//! let graph = build_graph(&parsed.records, &EdgePolicy::default());
//! let report = compute_all(&graph, None, &MetricsOptions::default());
//! assert_eq!(report.size, 3);
//! assert_eq!(report.edges, 2);
//! ```

pub mod classify;
pub mod community;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod textprep;

pub use classify::{label_corpus, predict, split, train, Prediction, SentimentModel};
pub use community::{detect_communities, modularity, Partition};
pub use error::{Error, Result};
pub use eval::{
    confusion, evaluate, evaluate_with, sentiment_percentages, Averaging, ConfusionMatrix,
    EvalReport, KappaBand, SentimentShare,
};
pub use graph::{build_graph, EdgeFormat, EdgePolicy, Graph, NodeId};
pub use ingest::{
    extract_mentions, parse_labeled_corpus, parse_records, InteractionRecord, Label,
    LabeledDocument, ParsedRecords, RecordFormat,
};
pub use metrics::{compute_all, MetricsOptions, MetricsReport};
pub use textprep::{preprocess, StemRule, StemmerRules, TokenPipelineConfig};
