//! Path discovery.
//!
//! Two families live here:
//!
//! * spectrum-aware candidate search, a hop-by-hop frontier expansion that
//!   carries each partial path's intersected bitmap and drops partial paths
//!   as soon as their spectrum can no longer serve the request, and
//! * spectrum-blind baselines: Dijkstra shortest path (km or hops) and Yen's
//!   k loopless shortest paths.
//!
//! Neighbors are always expanded in ascending node order, so every search is
//! deterministic for a given network state.

use std::cmp::Ordering;
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::spectrum::SlotBitmap;
use crate::topology::{EdgeId, Network, NodeId};

/// Default bound on the number of partial paths held in one frontier level.
pub const DEFAULT_FRONTIER_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("source and destination are both node {0}")]
    SameEndpoints(NodeId),
    #[error("unknown node {node} (network has {nodes} nodes)")]
    UnknownNode { node: NodeId, nodes: usize },
    #[error("path budget k must be at least 1")]
    ZeroPathBudget,
    #[error("required slot count must be at least 1")]
    ZeroDemand,
    #[error("frontier exceeded {cap} partial paths")]
    FrontierCapExceeded { cap: usize },
}

/// Edge weight used by the spectrum-blind baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Km,
    Hops,
}

/// A simple path together with its available spectrum `Δp`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub bitmap: SlotBitmap,
    pub length_km: f64,
}

impl PathRecord {
    pub fn hop_count(&self) -> usize {
        self.edges.len()
    }

    /// Builds the record for a node sequence from the current network state.
    /// Returns `None` if two consecutive nodes are not adjacent.
    pub fn from_nodes(net: &Network, nodes: &[NodeId]) -> Option<PathRecord> {
        let mut edges = Vec::with_capacity(nodes.len().saturating_sub(1));
        let mut bitmap = SlotBitmap::ones(net.slot_count());
        let mut length_km = 0.0;
        for pair in nodes.windows(2) {
            let e = net.edge_between(pair[0], pair[1])?;
            edges.push(e);
            bitmap
                .intersect_in_place(net.edge(e).bitmap())
                .expect("network bitmaps are normalized");
            length_km += net.edge(e).length_km;
        }
        Some(PathRecord {
            nodes: nodes.to_vec(),
            edges,
            bitmap,
            length_km,
        })
    }

    pub fn node_string(&self) -> String {
        self.nodes
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    pub fn metric_cost(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Km => self.length_km,
            Metric::Hops => self.hop_count() as f64,
        }
    }
}

fn check_endpoints(net: &Network, s: NodeId, d: NodeId) -> Result<(), SearchError> {
    for node in [s, d] {
        if node >= net.node_count() {
            return Err(SearchError::UnknownNode {
                node,
                nodes: net.node_count(),
            });
        }
    }
    if s == d {
        return Err(SearchError::SameEndpoints(s));
    }
    Ok(())
}

struct Partial {
    nodes: Vec<NodeId>,
    edges: Vec<EdgeId>,
    bitmap: SlotBitmap,
    length_km: f64,
}

/// Level-by-level frontier expansion shared by both candidate searches.
/// `keep` decides whether an extended partial path survives.
fn frontier_search(
    net: &Network,
    s: NodeId,
    d: NodeId,
    k: usize,
    cap: usize,
    keep: impl Fn(&SlotBitmap) -> bool,
) -> Result<Vec<PathRecord>, SearchError> {
    let mut found = Vec::new();
    let mut frontier = vec![Partial {
        nodes: vec![s],
        edges: Vec::new(),
        bitmap: SlotBitmap::ones(net.slot_count()),
        length_km: 0.0,
    }];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for partial in &frontier {
            let u = *partial.nodes.last().expect("partial paths are never empty");
            for &(v, e) in net.neighbors(u) {
                if partial.nodes.contains(&v) {
                    continue;
                }
                let edge = net.edge(e);
                let bitmap = partial
                    .bitmap
                    .intersect(edge.bitmap())
                    .expect("network bitmaps are normalized");
                if !keep(&bitmap) {
                    continue;
                }
                let mut nodes = partial.nodes.clone();
                nodes.push(v);
                let mut edges = partial.edges.clone();
                edges.push(e);
                let length_km = partial.length_km + edge.length_km;
                if v == d {
                    found.push(PathRecord {
                        nodes,
                        edges,
                        bitmap,
                        length_km,
                    });
                    if found.len() == k {
                        return Ok(found);
                    }
                } else {
                    if next.len() == cap {
                        return Err(SearchError::FrontierCapExceeded { cap });
                    }
                    next.push(Partial {
                        nodes,
                        edges,
                        bitmap,
                        length_km,
                    });
                }
            }
        }
        frontier = next;
    }
    Ok(found)
}

/// First `k` simple `s → d` paths in hop order whose intersected bitmap keeps
/// at least one free slot. Partial paths whose bitmap becomes all-zero are
/// discarded.
pub fn candidate_paths_all(
    net: &Network,
    s: NodeId,
    d: NodeId,
    k: usize,
) -> Result<Vec<PathRecord>, SearchError> {
    candidate_paths_all_capped(net, s, d, k, DEFAULT_FRONTIER_CAP)
}

pub fn candidate_paths_all_capped(
    net: &Network,
    s: NodeId,
    d: NodeId,
    k: usize,
    cap: usize,
) -> Result<Vec<PathRecord>, SearchError> {
    check_endpoints(net, s, d)?;
    if k == 0 {
        return Err(SearchError::ZeroPathBudget);
    }
    frontier_search(net, s, d, k, cap, |b| b.count_free() != 0)
}

/// First `k` simple `s → d` paths in hop order with at least `required`
/// contiguous free slots. Partial paths that lose feasibility are discarded.
pub fn candidate_paths_feasible(
    net: &Network,
    s: NodeId,
    d: NodeId,
    required: usize,
    k: usize,
) -> Result<Vec<PathRecord>, SearchError> {
    candidate_paths_feasible_capped(net, s, d, required, k, DEFAULT_FRONTIER_CAP)
}

pub fn candidate_paths_feasible_capped(
    net: &Network,
    s: NodeId,
    d: NodeId,
    required: usize,
    k: usize,
    cap: usize,
) -> Result<Vec<PathRecord>, SearchError> {
    check_endpoints(net, s, d)?;
    if k == 0 {
        return Err(SearchError::ZeroPathBudget);
    }
    if required == 0 {
        return Err(SearchError::ZeroDemand);
    }
    frontier_search(net, s, d, k, cap, |b| b.is_feasible(required))
}

/// Dijkstra label: path cost, then the node sequence for lexicographic ties.
#[derive(Debug, Clone, PartialEq)]
struct Label {
    cost: f64,
    nodes: Vec<NodeId>,
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn edge_weight(net: &Network, e: EdgeId, metric: Metric) -> f64 {
    match metric {
        Metric::Km => net.edge(e).length_km,
        Metric::Hops => 1.0,
    }
}

fn path_cost(net: &Network, nodes: &[NodeId], metric: Metric) -> f64 {
    nodes
        .windows(2)
        .map(|p| edge_weight(net, net.edge_between(p[0], p[1]).expect("adjacent"), metric))
        .sum()
}

/// Dijkstra over the network minus the banned nodes and edges. Ties between
/// equal-cost paths go to the lexicographically smallest node sequence.
fn dijkstra(
    net: &Network,
    s: NodeId,
    d: NodeId,
    metric: Metric,
    banned_nodes: &[bool],
    banned_edges: &BTreeSet<EdgeId>,
) -> Option<Vec<NodeId>> {
    let n = net.node_count();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let start = Label {
        cost: 0.0,
        nodes: vec![s],
    };
    best[s] = Some(start.clone());
    heap.push(Reverse(start));
    while let Some(Reverse(label)) = heap.pop() {
        let u = *label.nodes.last().expect("labels are never empty");
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if u == d {
            return Some(label.nodes);
        }
        for &(v, e) in net.neighbors(u) {
            if settled[v] || banned_nodes[v] || banned_edges.contains(&e) {
                continue;
            }
            let mut nodes = label.nodes.clone();
            nodes.push(v);
            let cand = Label {
                cost: label.cost + edge_weight(net, e, metric),
                nodes,
            };
            if best[v].as_ref().is_none_or(|b| cand < *b) {
                best[v] = Some(cand.clone());
                heap.push(Reverse(cand));
            }
        }
    }
    None
}

/// Minimum-weight path ignoring spectrum state. The returned record still
/// carries the path's current bitmap.
pub fn shortest_path(
    net: &Network,
    s: NodeId,
    d: NodeId,
    metric: Metric,
) -> Result<Option<PathRecord>, SearchError> {
    check_endpoints(net, s, d)?;
    let banned = vec![false; net.node_count()];
    Ok(dijkstra(net, s, d, metric, &banned, &BTreeSet::new())
        .map(|nodes| PathRecord::from_nodes(net, &nodes).expect("dijkstra follows edges")))
}

/// Up to `k` loopless paths in nondecreasing cost order (Yen's algorithm).
/// Equal-cost paths are ordered lexicographically by node sequence.
pub fn k_shortest_paths(
    net: &Network,
    s: NodeId,
    d: NodeId,
    k: usize,
    metric: Metric,
) -> Result<Vec<PathRecord>, SearchError> {
    check_endpoints(net, s, d)?;
    if k == 0 {
        return Err(SearchError::ZeroPathBudget);
    }
    let no_nodes = vec![false; net.node_count()];
    let Some(first) = dijkstra(net, s, d, metric, &no_nodes, &BTreeSet::new()) else {
        return Ok(Vec::new());
    };
    let mut accepted: Vec<Vec<NodeId>> = vec![first];
    let mut candidates: BTreeSet<Label> = BTreeSet::new();

    while accepted.len() < k {
        let last = accepted.last().expect("nonempty").clone();
        for i in 0..last.len() - 1 {
            let spur = last[i];
            let root = &last[..=i];
            let mut banned_edges = BTreeSet::new();
            for p in &accepted {
                if p.len() > i + 1 && p[..=i] == *root {
                    banned_edges.insert(net.edge_between(p[i], p[i + 1]).expect("adjacent"));
                }
            }
            let mut banned_nodes = vec![false; net.node_count()];
            for &n in &root[..i] {
                banned_nodes[n] = true;
            }
            if let Some(spur_path) = dijkstra(net, spur, d, metric, &banned_nodes, &banned_edges) {
                let mut nodes = root[..i].to_vec();
                nodes.extend(spur_path);
                if !accepted.contains(&nodes) {
                    let cost = path_cost(net, &nodes, metric);
                    candidates.insert(Label { cost, nodes });
                }
            }
        }
        match candidates.pop_first() {
            Some(best) => accepted.push(best.nodes),
            None => break,
        }
    }
    Ok(accepted
        .iter()
        .map(|nodes| PathRecord::from_nodes(net, nodes).expect("yen follows edges"))
        .collect())
}
