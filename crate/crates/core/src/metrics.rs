//! Network properties of a conversation graph.
//!
//! Distances come from breadth-first search. Diameter and average path
//! length only consider pairs joined by a path, so both stay meaningful on
//! graphs with many components. Above [`MetricsOptions::exact_node_limit`]
//! nodes the all-pairs sweep is replaced by a seeded sample of BFS sources
//! and the report flags the path metrics as estimates.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{modularity, Partition};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

const UNREACHED: u32 = u32::MAX;

/// 2L / (N(N-1)) for an undirected simple graph with `n` nodes and `l` edges.
pub fn density_from_counts(n: usize, l: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::undefined("density", "needs at least two nodes"));
    }
    Ok(2.0 * l as f64 / (n as f64 * (n as f64 - 1.0)))
}

/// 2L / N.
pub fn average_degree_from_counts(n: usize, l: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::undefined("average degree", "graph has no nodes"));
    }
    Ok(2.0 * l as f64 / n as f64)
}

pub fn density(g: &Graph) -> Result<f64> {
    density_from_counts(g.node_count(), g.edge_count())
}

pub fn average_degree(g: &Graph) -> Result<f64> {
    average_degree_from_counts(g.node_count(), g.edge_count())
}

/// Hop distance from `source` to every node; `None` where unreachable.
pub fn shortest_path_lengths(g: &Graph, source: NodeId) -> Result<Vec<Option<usize>>> {
    if source >= g.node_count() {
        return Err(Error::OutOfBounds {
            id: source,
            len: g.node_count(),
        });
    }
    let mut dist = vec![UNREACHED; g.node_count()];
    let mut queue = Vec::with_capacity(g.node_count());
    bfs(g, source, &mut dist, &mut queue);
    Ok(dist
        .into_iter()
        .map(|d| (d != UNREACHED).then_some(d as usize))
        .collect())
}

/// Fills `dist` for everything reachable from `source` and leaves the
/// visited nodes in `queue`. `dist` must be all-`UNREACHED` on entry.
fn bfs(g: &Graph, source: NodeId, dist: &mut [u32], queue: &mut Vec<NodeId>) {
    queue.clear();
    dist[source] = 0;
    queue.push(source);
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        let next = dist[u] + 1;
        for &v in g.neighbors(u) {
            if dist[v] == UNREACHED {
                dist[v] = next;
                queue.push(v);
            }
        }
    }
}

/// Aggregate of per-source BFS sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PathStats {
    /// Largest finite distance seen.
    pub max_distance: usize,
    /// Sum of finite distances over ordered pairs `(i, j)`, `i != j`.
    pub distance_sum: u64,
    /// Number of ordered connected pairs contributing to `distance_sum`.
    pub connected_pairs: u64,
    pub sources: usize,
    /// True when only a sample of sources was swept.
    pub estimated: bool,
}

impl PathStats {
    fn merge(self, other: PathStats) -> PathStats {
        PathStats {
            max_distance: self.max_distance.max(other.max_distance),
            distance_sum: self.distance_sum + other.distance_sum,
            connected_pairs: self.connected_pairs + other.connected_pairs,
            sources: self.sources + other.sources,
            estimated: self.estimated || other.estimated,
        }
    }

    pub fn average(&self) -> Option<f64> {
        (self.connected_pairs > 0).then(|| self.distance_sum as f64 / self.connected_pairs as f64)
    }
}

/// Runs BFS from every source in `sources` in parallel.
pub fn sweep(g: &Graph, sources: &[NodeId]) -> PathStats {
    let n = g.node_count();
    sources
        .par_iter()
        .map_init(
            || (vec![UNREACHED; n], Vec::with_capacity(n)),
            |(dist, queue), &s| {
                bfs(g, s, dist, queue);
                let mut stats = PathStats {
                    sources: 1,
                    ..PathStats::default()
                };
                for &v in queue.iter() {
                    let d = dist[v];
                    stats.max_distance = stats.max_distance.max(d as usize);
                    stats.distance_sum += d as u64;
                    dist[v] = UNREACHED;
                }
                stats.connected_pairs = queue.len() as u64 - 1;
                stats
            },
        )
        .reduce(PathStats::default, PathStats::merge)
}

/// Exact all-pairs path statistics.
pub fn all_pairs_stats(g: &Graph) -> PathStats {
    let sources: Vec<NodeId> = (0..g.node_count()).collect();
    sweep(g, &sources)
}

/// Largest finite shortest-path distance over all pairs.
pub fn diameter(g: &Graph) -> Result<usize> {
    if g.edge_count() == 0 {
        return Err(Error::undefined("diameter", "graph has no edges"));
    }
    Ok(all_pairs_stats(g).max_distance)
}

/// Mean distance over ordered pairs joined by a path.
pub fn average_path_length(g: &Graph) -> Result<f64> {
    all_pairs_stats(g).average().ok_or(Error::undefined(
        "average path length",
        "no connected pair of nodes",
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    /// Component id per node. Components are numbered by their lowest node id.
    pub labels: Vec<usize>,
}

impl Components {
    /// Component sizes, largest first.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

pub fn connected_components(g: &Graph) -> Result<Components> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::undefined(
            "connected components",
            "graph has no nodes",
        ));
    }
    let mut labels = vec![usize::MAX; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if labels[v] == usize::MAX {
                    labels[v] = count;
                    queue.push_back(v);
                }
            }
        }
        count += 1;
    }
    Ok(Components { count, labels })
}

/// Connected unordered pairs over N²/2.
pub fn reachability_from_sizes(n: usize, component_sizes: &[usize]) -> Result<f64> {
    if n == 0 {
        return Err(Error::undefined("reachability", "graph has no nodes"));
    }
    let pairs: u64 = component_sizes
        .iter()
        .map(|&s| s as u64 * (s as u64).saturating_sub(1) / 2)
        .sum();
    Ok(pairs as f64 / (n as f64 * n as f64 / 2.0))
}

pub fn reachability(g: &Graph) -> Result<f64> {
    let comps = connected_components(g)?;
    reachability_from_sizes(g.node_count(), &comps.sizes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricsOptions {
    /// Graphs with more nodes than this get sampled path metrics.
    pub exact_node_limit: usize,
    /// BFS sources used when sampling.
    pub sample_sources: usize,
    pub seed: u64,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        MetricsOptions {
            exact_node_limit: 50_000,
            sample_sources: 2_000,
            seed: 0,
        }
    }
}

/// The nine network properties. `None` marks a metric that is undefined for
/// the graph (rendered as `n/a` or JSON `null`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub size: usize,
    pub edges: usize,
    pub density: Option<f64>,
    pub modularity: Option<f64>,
    pub diameter: Option<usize>,
    pub avg_path_length: Option<f64>,
    pub avg_degree: Option<f64>,
    pub reachability: Option<f64>,
    pub connected_components: Option<usize>,
    #[serde(default)]
    pub per_component_sizes: Vec<usize>,
    #[serde(default)]
    pub path_metrics_estimated: bool,
}

impl MetricsReport {
    /// Field names and rendered values in canonical order.
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        vec![
            ("size", self.size.to_string()),
            ("edges", self.edges.to_string()),
            ("density", render_opt(self.density)),
            ("modularity", render_opt(self.modularity)),
            ("diameter", render_opt(self.diameter)),
            ("avg_path_length", render_opt(self.avg_path_length)),
            ("avg_degree", render_opt(self.avg_degree)),
            ("reachability", render_opt(self.reachability)),
            (
                "connected_components",
                render_opt(self.connected_components),
            ),
        ]
    }

    /// `key: value` lines, one per metric.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.rows() {
            let _ = writeln!(out, "{k}: {v}");
        }
        if self.path_metrics_estimated {
            out.push_str("# diameter and avg_path_length estimated from sampled sources\n");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

pub(crate) fn render_opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| x.to_string())
}

fn path_stats(g: &Graph, opts: &MetricsOptions) -> PathStats {
    let n = g.node_count();
    if n <= opts.exact_node_limit || opts.sample_sources >= n {
        return all_pairs_stats(g);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut sources = sample(&mut rng, n, opts.sample_sources.max(1)).into_vec();
    sources.sort_unstable();
    PathStats {
        estimated: true,
        ..sweep(g, &sources)
    }
}

/// Computes every property. Modularity is filled in only when a partition
/// is given.
pub fn compute_all(
    g: &Graph,
    partition: Option<&Partition>,
    opts: &MetricsOptions,
) -> MetricsReport {
    let n = g.node_count();
    let l = g.edge_count();
    let comps = connected_components(g).ok();
    let sizes = comps.as_ref().map(Components::sizes).unwrap_or_default();
    let stats = (n > 0).then(|| path_stats(g, opts));
    MetricsReport {
        size: n,
        edges: l,
        density: density(g).ok(),
        modularity: partition.and_then(|p| modularity(g, p).ok()),
        diameter: stats.filter(|_| l > 0).map(|s| s.max_distance),
        avg_path_length: stats.and_then(|s| s.average()),
        avg_degree: average_degree(g).ok(),
        reachability: reachability_from_sizes(n, &sizes).ok(),
        connected_components: comps.map(|c| c.count),
        per_component_sizes: sizes,
        path_metrics_estimated: stats.is_some_and(|s| s.estimated),
    }
}
