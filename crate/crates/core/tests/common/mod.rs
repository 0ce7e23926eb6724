//! Brute-force oracles shared by the integration and acceptance suites.
//! Nothing here calls into the BFS engine or the Louvain code.

#![allow(dead_code, clippy::needless_range_loop)]

use convograph_core::graph::Graph;
use rand::Rng;

pub const INF: usize = usize::MAX;

/// Dense 0/1 adjacency matrix read straight from the edge list.
pub fn adjacency_matrix(g: &Graph) -> Vec<Vec<u8>> {
    let n = g.node_count();
    let mut a = vec![vec![0u8; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = 1;
        a[v][u] = 1;
    }
    a
}

pub fn floyd_warshall(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let a = adjacency_matrix(g);
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if a[i][j] == 1 {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == INF {
                continue;
            }
            for j in 0..n {
                if d[k][j] != INF && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let p = self.parent[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.parent[x] = r;
        r
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMetrics {
    pub diameter: Option<usize>,
    pub avg_path_length: Option<f64>,
    pub components: usize,
    pub component_sizes: Vec<usize>,
    pub reachability: Option<f64>,
}

pub fn oracle_metrics(g: &Graph) -> OracleMetrics {
    let n = g.node_count();
    let d = floyd_warshall(g);
    let mut max = 0;
    let mut sum = 0usize;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in 0..n {
            if i != j && d[i][j] != INF {
                max = max.max(d[i][j]);
                sum += d[i][j];
                pairs += 1;
            }
        }
    }
    let mut uf = UnionFind::new(n);
    for (u, v) in g.edges() {
        uf.union(u, v);
    }
    let mut sizes = std::collections::BTreeMap::new();
    for v in 0..n {
        *sizes.entry(uf.find(v)).or_insert(0usize) += 1;
    }
    let mut component_sizes: Vec<usize> = sizes.values().copied().collect();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    // Unordered connected pairs counted directly from the distance matrix.
    let connected_unordered = pairs / 2;
    OracleMetrics {
        diameter: (g.edge_count() > 0).then_some(max),
        avg_path_length: (pairs > 0).then(|| sum as f64 / pairs as f64),
        components: sizes.len(),
        component_sizes,
        reachability: (n > 0).then(|| connected_unordered as f64 / (n as f64 * n as f64 / 2.0)),
    }
}

/// Q = (1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(s_i, s_j), evaluated term by term.
pub fn pairwise_modularity(g: &Graph, labels: &[usize]) -> f64 {
    let n = g.node_count();
    let a = adjacency_matrix(g);
    let k: Vec<f64> = a
        .iter()
        .map(|row| row.iter().map(|&x| x as f64).sum())
        .collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] as f64 - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Calls `f` with every set partition of `0..n` as a restricted growth string.
pub fn for_each_partition(n: usize, mut f: impl FnMut(&[usize])) {
    if n == 0 {
        f(&[]);
        return;
    }
    let mut labels = vec![0usize; n];
    let mut max_prefix = vec![0usize; n];
    loop {
        f(&labels);
        // Advance to the next restricted growth string.
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            if labels[i] <= max_prefix[i - 1] {
                labels[i] += 1;
                let m = max_prefix[i - 1].max(labels[i]);
                max_prefix[i] = m;
                for j in i + 1..n {
                    labels[j] = 0;
                    max_prefix[j] = m;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Best modularity over all set partitions, with one maximizing labelling.
pub fn exhaustive_best_modularity(g: &Graph) -> (f64, Vec<usize>) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = Vec::new();
    for_each_partition(g.node_count(), |labels| {
        let q = pairwise_modularity(g, labels);
        if q > best + 1e-12 {
            best = q;
            arg = labels.to_vec();
        }
    });
    (best, arg)
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

pub fn permuted<R: Rng>(rng: &mut R, g: &Graph) -> Graph {
    use rand::seq::SliceRandom;
    let mut perm: Vec<usize> = (0..g.node_count()).collect();
    perm.shuffle(rng);
    let edges: Vec<_> = g.edges().map(|(u, v)| (perm[u], perm[v])).collect();
    Graph::from_edges(g.node_count(), &edges)
}

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edges(n, &edges)
}

pub fn cycle(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &edges)
}

pub fn clique(n: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges)
}

pub fn star(leaves: usize) -> Graph {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    Graph::from_edges(leaves + 1, &edges)
}

pub fn two_triangles() -> Graph {
    Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
}

pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((i + 5, (i + 2) % 5 + 5));
    }
    Graph::from_edges(10, &edges)
}

/// Two K4s joined by the edge 3-4.
pub fn barbell() -> Graph {
    let mut edges = Vec::new();
    for base in [0, 4] {
        for u in 0..4 {
            for v in u + 1..4 {
                edges.push((base + u, base + v));
            }
        }
    }
    edges.push((3, 4));
    Graph::from_edges(8, &edges)
}

pub fn named_fixtures() -> Vec<(&'static str, Graph)> {
    vec![
        ("path3", path(3)),
        ("path5", path(5)),
        ("cycle6", cycle(6)),
        ("k4", clique(4)),
        ("k5", clique(5)),
        ("star4", star(4)),
        ("two_triangles", two_triangles()),
        ("petersen", petersen()),
        ("barbell", barbell()),
        ("two_edges", Graph::from_edges(4, &[(0, 1), (2, 3)])),
        ("isolated5", Graph::from_edges(5, &[])),
    ]
}
