//! Undirected simple conversation graph over user handles.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ingest::InteractionRecord;

/// Dense node index into a [`Graph`].
pub type NodeId = usize;

/// Which interactions become edges. Self-loops are always dropped and
/// repeated interactions always collapse into one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgePolicy {
    use_mentions: bool,
    use_replies: bool,
}

impl EdgePolicy {
    pub fn new(use_mentions: bool, use_replies: bool) -> Result<Self> {
        if !use_mentions && !use_replies {
            return Err(Error::validation(
                None,
                "edge policy must use mentions, replies, or both",
            ));
        }
        Ok(EdgePolicy {
            use_mentions,
            use_replies,
        })
    }

    pub fn use_mentions(&self) -> bool {
        self.use_mentions
    }

    pub fn use_replies(&self) -> bool {
        self.use_replies
    }

    pub fn drop_self_loops(&self) -> bool {
        true
    }

    pub fn collapse_duplicates(&self) -> bool {
        true
    }
}

impl Default for EdgePolicy {
    fn default() -> Self {
        EdgePolicy {
            use_mentions: true,
            use_replies: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    handles: Vec<String>,
    index: HashMap<String, NodeId>,
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
}

/// Incremental builder; adjacency is sorted and deduplicated on `finish`.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    handles: Vec<String>,
    index: HashMap<String, NodeId>,
    adjacency: Vec<Vec<NodeId>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `handle`, inserting it if unseen.
    pub fn node(&mut self, handle: &str) -> NodeId {
        if let Some(&id) = self.index.get(handle) {
            return id;
        }
        let id = self.handles.len();
        self.handles.push(handle.to_string());
        self.index.insert(handle.to_string(), id);
        self.adjacency.push(Vec::new());
        id
    }

    /// Adds the undirected edge `{a, b}`; a self-loop is ignored.
    pub fn edge(&mut self, a: NodeId, b: NodeId) {
        if a == b {
            return;
        }
        self.adjacency[a].push(b);
        self.adjacency[b].push(a);
    }

    pub fn finish(mut self) -> Graph {
        let mut degree_sum = 0;
        for neighbors in &mut self.adjacency {
            neighbors.sort_unstable();
            neighbors.dedup();
            degree_sum += neighbors.len();
        }
        let graph = Graph {
            handles: self.handles,
            index: self.index,
            adjacency: self.adjacency,
            edge_count: degree_sum / 2,
        };
        debug_assert!(graph.check_invariants().is_ok());
        graph
    }
}

impl Graph {
    pub fn empty() -> Self {
        GraphBuilder::new().finish()
    }

    /// Graph on nodes `0..n` named by their index, mostly for tests and
    /// synthetic workloads. Self-loops and repeats are dropped.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Self {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.node(&i.to_string());
        }
        for &(u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) outside 0..{n}");
            b.edge(u, v);
        }
        b.finish()
    }

    /// Number of nodes (N).
    pub fn node_count(&self) -> usize {
        self.handles.len()
    }

    /// Number of undirected edges (L).
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn handle(&self, id: NodeId) -> Option<&str> {
        self.handles.get(id).map(String::as_str)
    }

    pub fn handles(&self) -> &[String] {
        &self.handles
    }

    pub fn id_of(&self, handle: &str) -> Option<NodeId> {
        self.index.get(handle).copied()
    }

    /// Sorted neighbor ids. Panics on an out-of-range id.
    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.adjacency[id]
    }

    pub fn degree(&self, id: NodeId) -> Result<usize> {
        self.adjacency
            .get(id)
            .map(Vec::len)
            .ok_or(Error::OutOfBounds {
                id,
                len: self.node_count(),
            })
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency
            .get(a)
            .is_some_and(|n| n.binary_search(&b).is_ok())
    }

    /// Each undirected edge once, as `(low, high)` ids in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, ns)| {
            ns.iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Verifies simplicity, symmetry and the degree-sum identity.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut degree_sum = 0;
        for (u, ns) in self.adjacency.iter().enumerate() {
            degree_sum += ns.len();
            if ns.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("neighbors of {u} are not strictly sorted"));
            }
            for &v in ns {
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                if v >= self.node_count() {
                    return Err(format!("neighbor {v} of {u} out of range"));
                }
                if self.adjacency[v].binary_search(&u).is_err() {
                    return Err(format!("edge {u}->{v} has no reverse entry"));
                }
            }
        }
        if degree_sum != 2 * self.edge_count {
            return Err(format!(
                "degree sum {degree_sum} != 2 * edge count {}",
                self.edge_count
            ));
        }
        Ok(())
    }

    pub fn export(&self, format: EdgeFormat) -> String {
        match format {
            EdgeFormat::Tsv => self.to_tsv(),
            EdgeFormat::Dot => self.to_dot(),
        }
    }

    fn sorted_handle_edges(&self) -> Vec<(&str, &str)> {
        let mut edges: Vec<(&str, &str)> = self
            .edges()
            .map(|(u, v)| {
                let (a, b) = (self.handles[u].as_str(), self.handles[v].as_str());
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        edges.sort_unstable();
        edges
    }

    fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (a, b) in self.sorted_handle_edges() {
            let _ = writeln!(out, "{a}\t{b}");
        }
        out
    }

    fn to_dot(&self) -> String {
        let mut out = String::from("graph conversation {\n");
        let mut isolated: Vec<&str> = self
            .handles
            .iter()
            .enumerate()
            .filter(|(id, _)| self.adjacency[*id].is_empty())
            .map(|(_, h)| h.as_str())
            .collect();
        isolated.sort_unstable();
        for h in isolated {
            let _ = writeln!(out, "  {};", dot_id(h));
        }
        for (a, b) in self.sorted_handle_edges() {
            let _ = writeln!(out, "  {} -- {};", dot_id(a), dot_id(b));
        }
        out.push_str("}\n");
        out
    }
}

fn dot_id(handle: &str) -> String {
    let escaped = handle.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFormat {
    Tsv,
    Dot,
}

impl FromStr for EdgeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(EdgeFormat::Tsv),
            "dot" => Ok(EdgeFormat::Dot),
            other => Err(Error::validation(
                None,
                format!("unknown edge format {other:?}"),
            )),
        }
    }
}

/// Builds the conversation graph.
///
/// Every author becomes a node, as does every handle the author mentions or
/// replies to (per `policy`). Node ids follow first-seen order: the author
/// of a record first, then its reply target, then its mentions.
pub fn build_graph(records: &[InteractionRecord], policy: &EdgePolicy) -> Graph {
    let mut b = GraphBuilder::new();
    for rec in records {
        let author = b.node(&rec.author);
        if policy.use_replies {
            if let Some(target) = rec.reply_to.as_deref() {
                let t = b.node(target);
                b.edge(author, t);
            }
        }
        if policy.use_mentions {
            for handle in rec.mentions() {
                let t = b.node(&handle);
                b.edge(author, t);
            }
        }
    }
    let graph = b.finish();
    debug_assert_eq!(graph.check_invariants(), Ok(()));
    graph
}
