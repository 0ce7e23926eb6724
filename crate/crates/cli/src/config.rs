//! INI-style run configuration.
//!
//! ```ini
//! [run]
//! seed = 42
//! train_fraction = 0.8
//! alpha = 1.0
//! exact_metrics_node_limit = 50000
//! format = table
//! labeled = labeled.csv
//!
//! [edges]
//! mentions = true
//! replies = true
//!
//! [pipeline]
//! stopwords = stopwords.txt
//! stemmer_rules = stemmer_rules.tsv
//! strip_mentions = true
//! strip_urls = true
//! min_token_len = 2
//!
//! [brand.gopay]
//! records = gopay.jsonl
//! ```
//!
//! Relative paths resolve against `$CONVOGRAPH_DATA_DIR` when it is set and
//! against the config file's directory otherwise. Brands keep file order.

use std::env;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use convograph_core::graph::EdgePolicy;
use convograph_core::textprep::{load_stemmer_rules, load_stopwords, TokenPipelineConfig};
use ini::{Ini, Properties};

use crate::error::{CliError, CliResult};
use crate::render::OutputFormat;

pub const DATA_DIR_ENV: &str = "CONVOGRAPH_DATA_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct Brand {
    pub name: String,
    pub records: PathBuf,
    /// Overrides the run-level labeled corpus for this brand.
    pub labeled: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub brands: Vec<Brand>,
    pub edge_policy: EdgePolicy,
    pub pipeline: TokenPipelineConfig,
    pub labeled: Option<PathBuf>,
    pub train_fraction: f64,
    pub alpha: f64,
    pub seed: u64,
    pub exact_metrics_node_limit: usize,
    pub sample_sources: usize,
    pub output_format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            brands: Vec::new(),
            edge_policy: EdgePolicy::default(),
            pipeline: TokenPipelineConfig::default(),
            labeled: None,
            train_fraction: 0.8,
            alpha: 1.0,
            seed: 42,
            exact_metrics_node_limit: 50_000,
            sample_sources: 2_000,
            output_format: OutputFormat::Table,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let ini = Ini::load_from_file(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let base = match env::var_os(DATA_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => path.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        Self::from_ini(&ini, &base)
    }

    pub fn from_ini(ini: &Ini, base: &Path) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        let resolve = |raw: &str| -> CliResult<PathBuf> {
            let p = Path::new(raw.trim());
            let full = if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            };
            if !full.exists() {
                return Err(CliError::input(format!(
                    "path {} does not exist",
                    full.display()
                )));
            }
            Ok(full)
        };

        if let Some(run) = ini.section(Some("run")) {
            if let Some(v) = get_parsed::<u64>(run, "run", "seed")? {
                cfg.seed = v;
            }
            if let Some(v) = get_parsed::<f64>(run, "run", "train_fraction")? {
                cfg.train_fraction = v;
            }
            if let Some(v) = get_parsed::<f64>(run, "run", "alpha")? {
                cfg.alpha = v;
            }
            if let Some(v) = get_parsed::<usize>(run, "run", "exact_metrics_node_limit")? {
                cfg.exact_metrics_node_limit = v;
            }
            if let Some(v) = get_parsed::<usize>(run, "run", "sample_sources")? {
                cfg.sample_sources = v;
            }
            if let Some(v) = get_parsed::<OutputFormat>(run, "run", "format")? {
                cfg.output_format = v;
            }
            if let Some(v) = run.get("labeled") {
                cfg.labeled = Some(resolve(v)?);
            }
        }
        if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
            return Err(CliError::input(format!(
                "run.train_fraction = {} must be strictly between 0 and 1",
                cfg.train_fraction
            )));
        }

        if let Some(edges) = ini.section(Some("edges")) {
            let mentions = get_parsed::<bool>(edges, "edges", "mentions")?.unwrap_or(true);
            let replies = get_parsed::<bool>(edges, "edges", "replies")?.unwrap_or(true);
            cfg.edge_policy = EdgePolicy::new(mentions, replies)?;
        }

        if let Some(p) = ini.section(Some("pipeline")) {
            if let Some(v) = p.get("stopwords") {
                cfg.pipeline.stopwords = load_stopwords(File::open(resolve(v)?)?)?;
            }
            if let Some(v) = p.get("stemmer_rules") {
                cfg.pipeline.stemmer_rules = load_stemmer_rules(File::open(resolve(v)?)?)?;
            }
            if let Some(v) = get_parsed::<bool>(p, "pipeline", "strip_mentions")? {
                cfg.pipeline.strip_mentions = v;
            }
            if let Some(v) = get_parsed::<bool>(p, "pipeline", "strip_urls")? {
                cfg.pipeline.strip_urls = v;
            }
            if let Some(v) = get_parsed::<usize>(p, "pipeline", "min_token_len")? {
                cfg.pipeline.min_token_len = v;
            }
        }

        for (name, props) in ini.iter() {
            let Some(brand) = name.and_then(|n| n.strip_prefix("brand.")) else {
                continue;
            };
            let records = props
                .get("records")
                .ok_or_else(|| CliError::input(format!("[brand.{brand}] has no records path")))?;
            cfg.brands.push(Brand {
                name: brand.to_string(),
                records: resolve(records)?,
                labeled: props.get("labeled").map(resolve).transpose()?,
            });
        }
        if cfg.brands.is_empty() {
            return Err(CliError::input("config defines no [brand.<name>] sections"));
        }
        Ok(cfg)
    }

    pub fn brand(&self, name: &str) -> CliResult<&Brand> {
        self.brands
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| CliError::input(format!("brand {name:?} is not in the config")))
    }

    pub fn labeled_for<'a>(&'a self, brand: Option<&'a Brand>) -> Option<&'a Path> {
        brand
            .and_then(|b| b.labeled.as_deref())
            .or(self.labeled.as_deref())
    }
}

fn get_parsed<T: FromStr>(props: &Properties, section: &str, key: &str) -> CliResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    props
        .get(key)
        .map(|raw| {
            raw.trim()
                .parse::<T>()
                .map_err(|e| CliError::input(format!("{section}.{key} = {raw:?}: {e}")))
        })
        .transpose()
}
