//! Modularity scoring and Louvain community detection.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Assignment of every node to a community. Labels are dense: they cover
/// `0..community_count` with no gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    community_count: usize,
}

impl Partition {
    /// Validates that `labels` use every id in `0..max+1`.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let count = labels.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; count];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(gap) = seen.iter().position(|s| !s) {
            return Err(Error::validation(
                None,
                format!("community id {gap} is unused; labels must be dense"),
            ));
        }
        Ok(Partition {
            labels,
            community_count: count,
        })
    }

    /// Renumbers arbitrary labels densely in order of first appearance.
    pub fn compact(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let dense: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Partition {
            community_count: map.len(),
            labels: dense,
        }
    }

    /// Every node alone.
    pub fn singletons(n: usize) -> Self {
        Partition {
            labels: (0..n).collect(),
            community_count: n,
        }
    }

    /// Every node in one community.
    pub fn single(n: usize) -> Self {
        Partition {
            labels: vec![0; n],
            community_count: usize::from(n > 0),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Two-column text, `handle<TAB>community_id`, in node-id order.
    pub fn to_tsv(&self, g: &Graph) -> String {
        let mut out = String::new();
        for (id, label) in self.labels.iter().enumerate() {
            let handle = g.handle(id).unwrap_or("?");
            let _ = writeln!(out, "{handle}\t{label}");
        }
        out
    }
}

/// Newman modularity of `p` on `g`, computed per community as
/// `sum_c [L_c / m - (d_c / 2m)^2]`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    if p.len() != g.node_count() {
        return Err(Error::validation(
            None,
            format!(
                "partition covers {} nodes but graph has {}",
                p.len(),
                g.node_count()
            ),
        ));
    }
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::undefined("modularity", "graph has no edges"));
    }
    let mut internal = vec![0u64; p.community_count()];
    let mut degree = vec![0u64; p.community_count()];
    for u in 0..g.node_count() {
        let cu = p.labels[u];
        degree[cu] += g.neighbors(u).len() as u64;
    }
    for (u, v) in g.edges() {
        if p.labels[u] == p.labels[v] {
            internal[p.labels[u]] += 1;
        }
    }
    let m = m as f64;
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(&lc, &dc)| lc as f64 / m - (dc as f64 / (2.0 * m)).powi(2))
        .sum())
}

/// Weighted multigraph used between Louvain levels. `self_loops[i]` is the
/// weight of edges collapsed inside node `i`.
struct Level {
    adjacency: Vec<Vec<(usize, u64)>>,
    self_loops: Vec<u64>,
}

impl Level {
    fn from_graph(g: &Graph) -> Self {
        Level {
            adjacency: (0..g.node_count())
                .map(|u| g.neighbors(u).iter().map(|&v| (v, 1)).collect())
                .collect(),
            self_loops: vec![0; g.node_count()],
        }
    }

    fn len(&self) -> usize {
        self.adjacency.len()
    }

    fn strength(&self, u: usize) -> u64 {
        self.adjacency[u].iter().map(|&(_, w)| w).sum::<u64>() + 2 * self.self_loops[u]
    }

    /// Collapses each community into one node.
    fn aggregate(&self, communities: &[usize], count: usize) -> Level {
        let mut self_loops = vec![0u64; count];
        let mut weights: Vec<std::collections::BTreeMap<usize, u64>> =
            vec![Default::default(); count];
        for u in 0..self.len() {
            let cu = communities[u];
            self_loops[cu] += self.self_loops[u];
            for &(v, w) in &self.adjacency[u] {
                let cv = communities[v];
                if cu == cv {
                    // Each internal edge is seen from both ends.
                    if u < v {
                        self_loops[cu] += w;
                    }
                } else {
                    *weights[cu].entry(cv).or_default() += w;
                }
            }
        }
        Level {
            adjacency: weights
                .into_iter()
                .map(|m| m.into_iter().collect())
                .collect(),
            self_loops,
        }
    }
}

/// One local-moving phase. Returns whether any node changed community.
fn move_nodes(
    level: &Level,
    communities: &mut [usize],
    total_weight2: u64,
    rng: &mut ChaCha8Rng,
) -> bool {
    let n = level.len();
    let strength: Vec<u64> = (0..n).map(|u| level.strength(u)).collect();
    let mut totals = vec![0u64; n];
    for u in 0..n {
        totals[communities[u]] += strength[u];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let m2 = total_weight2 as i128;
    let mut link = vec![0u64; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    loop {
        let mut moved = false;
        for &u in &order {
            let home = communities[u];
            let ku = strength[u];
            for &(v, w) in &level.adjacency[u] {
                let c = communities[v];
                if link[c] == 0 {
                    touched.push(c);
                }
                link[c] += w;
            }
            totals[home] -= ku;

            // Gain of joining c, scaled by 2m so it stays integral.
            let gain = |c: usize, link_c: u64| link_c as i128 * m2 - totals[c] as i128 * ku as i128;
            let mut best = home;
            let mut best_gain = gain(home, link[home]);
            touched.sort_unstable();
            for &c in &touched {
                let g = gain(c, link[c]);
                if g > best_gain {
                    best = c;
                    best_gain = g;
                }
            }

            totals[best] += ku;
            if best != home {
                communities[u] = best;
                moved = true;
            }
            for &c in &touched {
                link[c] = 0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
        any_move = true;
    }
    any_move
}

/// Louvain modularity optimization.
///
/// Nodes are visited in a seeded random order; a node moves only when the
/// move strictly raises modularity, and among equally good targets the
/// lowest community id wins. Communities are then collapsed into single
/// nodes and the process repeats until a level makes no move.
pub fn detect_communities(g: &Graph, seed: u64) -> Result<Partition> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::undefined("modularity", "graph has no edges"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total_weight2 = 2 * m as u64;
    let mut level = Level::from_graph(g);
    // Community of each original node, expressed in current-level node ids.
    let mut membership: Vec<usize> = (0..g.node_count()).collect();

    loop {
        let mut communities: Vec<usize> = (0..level.len()).collect();
        if !move_nodes(&level, &mut communities, total_weight2, &mut rng) {
            break;
        }
        let compact = Partition::compact(&communities);
        for c in membership.iter_mut() {
            *c = compact.labels[*c];
        }
        level = level.aggregate(&compact.labels, compact.community_count);
    }

    let found = Partition::compact(&membership);
    let singletons = Partition::singletons(g.node_count());
    if modularity(g, &found)? < modularity(g, &singletons)? {
        return Ok(singletons);
    }
    Ok(found)
}
