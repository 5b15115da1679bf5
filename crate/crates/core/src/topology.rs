//! Network graph, topology files and capacity normalization.
//!
//! Topology documents are plain text:
//!
//! ```text
//! # comment
//! nodes 4
//! 0 1 1200 4000
//! 1 2 800 4000
//! ```
//!
//! The header gives the node count; every following line is an undirected
//! edge `u v length_km bandwidth_ghz` with 0-based node indices.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::spectrum::{SlotBitmap, SlotRange, SpectrumError};

pub type NodeId = usize;
pub type EdgeId = usize;

/// Flexible-grid slot width used throughout the experiments.
pub const DEFAULT_GRID_GHZ: f64 = 12.5;

/// Bundled 14-node, 22-link NSFNET topology document.
pub const NSFNET_TOPO: &str = include_str!("../fixtures/nsfnet.topo");

/// Bundled 24-node, 43-link USNET topology document.
pub const USNET_TOPO: &str = include_str!("../fixtures/usnet.topo");

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: NodeId, v: NodeId },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: NodeId },
    #[error("line {line}: node {node} out of range (network has {nodes} nodes)")]
    NodeOutOfRange {
        line: usize,
        node: NodeId,
        nodes: usize,
    },
    #[error("line {line}: {what} must be positive, got {value}")]
    NonPositive {
        line: usize,
        what: &'static str,
        value: f64,
    },
    #[error("network is disconnected: node {0} is unreachable from node 0")]
    Disconnected(NodeId),
    #[error("invalid slot configuration: {0}")]
    Config(String),
    #[error("cannot release slots {range} on edge {edge}: beyond real capacity {capacity}")]
    PaddingRelease {
        edge: EdgeId,
        range: SlotRange,
        capacity: usize,
    },
    #[error("edge {edge}: {source}")]
    Spectrum {
        edge: EdgeId,
        #[source]
        source: SpectrumError,
    },
    #[error("reading topology: {0}")]
    Io(#[from] std::io::Error),
}

/// Number of grid slots that fit in a usable bandwidth, rounded down.
pub fn slot_count(usable_bandwidth_ghz: f64, grid_size_ghz: f64) -> Result<usize, TopologyError> {
    if !(usable_bandwidth_ghz > 0.0) || !(grid_size_ghz > 0.0) {
        return Err(TopologyError::Config(format!(
            "bandwidth {usable_bandwidth_ghz} GHz and grid {grid_size_ghz} GHz must be positive"
        )));
    }
    // Tolerate representation error in ratios such as 0.3 / 0.1.
    let ratio = usable_bandwidth_ghz / grid_size_ghz;
    Ok((ratio + ratio * 1e-12).floor() as usize)
}

/// An undirected fiber link.
#[derive(Debug, Clone)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub length_km: f64,
    pub usable_bandwidth_ghz: f64,
    /// Slots actually provisioned on this fiber, before padding.
    pub real_slot_count: usize,
    bitmap: SlotBitmap,
}

impl Edge {
    pub fn bitmap(&self) -> &SlotBitmap {
        &self.bitmap
    }

    pub fn other(&self, node: NodeId) -> NodeId {
        if node == self.u {
            self.v
        } else {
            self.u
        }
    }

    /// Occupied slots among the real (non-padding) ones.
    pub fn occupied_real_slots(&self) -> usize {
        self.real_slot_count - self.free_real_slots()
    }

    pub fn free_real_slots(&self) -> usize {
        // padding bits are always 0, so every free bit is a real slot
        self.bitmap.count_free()
    }
}

/// Edge description used to build a [`Network`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub u: NodeId,
    pub v: NodeId,
    pub length_km: f64,
    pub bandwidth_ghz: f64,
}

impl EdgeSpec {
    pub fn new(u: NodeId, v: NodeId, length_km: f64, bandwidth_ghz: f64) -> Self {
        Self {
            u,
            v,
            length_km,
            bandwidth_ghz,
        }
    }
}

/// Optical network `G(V, E, {Δe})` with per-edge spectrum state.
#[derive(Debug, Clone)]
pub struct Network {
    node_count: usize,
    edges: Vec<Edge>,
    /// Neighbors of each node in ascending node order.
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    slot_count: usize,
    grid_ghz: f64,
}

impl Network {
    /// Builds a network with every real slot free and bitmaps normalized to
    /// the largest edge capacity. Connectivity is not required here; see
    /// [`load_topology`] for the checked loader.
    pub fn new(
        node_count: usize,
        specs: &[EdgeSpec],
        grid_ghz: f64,
    ) -> Result<Self, TopologyError> {
        let mut edges = Vec::with_capacity(specs.len());
        for (i, spec) in specs.iter().enumerate() {
            let slots = slot_count(spec.bandwidth_ghz, grid_ghz)?;
            edges.push(Self::make_edge(
                i + 1,
                node_count,
                spec,
                SlotBitmap::ones(slots),
            )?);
        }
        Self::assemble(node_count, edges, grid_ghz)
    }

    /// Builds a network from explicit raw edge bitmaps, e.g. to replay a
    /// known spectrum state. Each edge's real capacity is the length of its
    /// bitmap; shorter bitmaps are zero-padded.
    pub fn with_bitmaps(
        node_count: usize,
        edges: &[(NodeId, NodeId, f64, SlotBitmap)],
        grid_ghz: f64,
    ) -> Result<Self, TopologyError> {
        let mut built = Vec::with_capacity(edges.len());
        for (i, (u, v, km, bitmap)) in edges.iter().enumerate() {
            let spec = EdgeSpec::new(*u, *v, *km, bitmap.len() as f64 * grid_ghz);
            built.push(Self::make_edge(i + 1, node_count, &spec, bitmap.clone())?);
        }
        Self::assemble(node_count, built, grid_ghz)
    }

    fn make_edge(
        line: usize,
        node_count: usize,
        spec: &EdgeSpec,
        bitmap: SlotBitmap,
    ) -> Result<Edge, TopologyError> {
        for node in [spec.u, spec.v] {
            if node >= node_count {
                return Err(TopologyError::NodeOutOfRange {
                    line,
                    node,
                    nodes: node_count,
                });
            }
        }
        if spec.u == spec.v {
            return Err(TopologyError::SelfLoop { line, node: spec.u });
        }
        if !(spec.length_km > 0.0) {
            return Err(TopologyError::NonPositive {
                line,
                what: "length_km",
                value: spec.length_km,
            });
        }
        if !(spec.bandwidth_ghz > 0.0) {
            return Err(TopologyError::NonPositive {
                line,
                what: "bandwidth_ghz",
                value: spec.bandwidth_ghz,
            });
        }
        Ok(Edge {
            u: spec.u,
            v: spec.v,
            length_km: spec.length_km,
            usable_bandwidth_ghz: spec.bandwidth_ghz,
            real_slot_count: bitmap.len(),
            bitmap,
        })
    }

    fn assemble(node_count: usize, edges: Vec<Edge>, grid_ghz: f64) -> Result<Self, TopologyError> {
        if !(grid_ghz > 0.0) {
            return Err(TopologyError::Config(format!("grid size {grid_ghz} GHz")));
        }
        let mut seen = HashSet::new();
        let mut adjacency = vec![Vec::new(); node_count];
        for (id, e) in edges.iter().enumerate() {
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(TopologyError::DuplicateEdge {
                    line: id + 1,
                    u: e.u,
                    v: e.v,
                });
            }
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let mut net = Self {
            node_count,
            edges,
            adjacency,
            slot_count: 0,
            grid_ghz,
        };
        net.normalize();
        Ok(net)
    }

    /// Zero-pads every edge bitmap to the largest real capacity in the
    /// network. Idempotent.
    pub fn normalize(&mut self) {
        let target = self
            .edges
            .iter()
            .map(|e| e.real_slot_count.max(e.bitmap.len()))
            .max()
            .unwrap_or(0);
        for e in &mut self.edges {
            if e.bitmap.len() < target {
                e.bitmap = e
                    .bitmap
                    .zero_pad(target)
                    .expect("target is the maximum length");
            }
        }
        self.slot_count = target;
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Normalized bitmap length `S`.
    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    pub fn grid_ghz(&self) -> f64 {
        self.grid_ghz
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Neighbors of `node` with the connecting edge, ascending by neighbor.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[node]
    }

    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        self.adjacency
            .get(u)?
            .iter()
            .find(|(n, _)| *n == v)
            .map(|&(_, e)| e)
    }

    /// `2|E| / |V|`.
    pub fn average_nodal_degree(&self) -> f64 {
        if self.node_count == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.node_count as f64
    }

    /// Sum of real (non-padding) slots over all edges.
    pub fn total_real_slots(&self) -> usize {
        self.edges.iter().map(|e| e.real_slot_count).sum()
    }

    pub fn total_occupied_slots(&self) -> usize {
        self.edges.iter().map(Edge::occupied_real_slots).sum()
    }

    /// First node unreachable from node 0, if any.
    pub fn find_unreachable(&self) -> Option<NodeId> {
        if self.node_count == 0 {
            return None;
        }
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub(crate) fn occupy(&mut self, edge: EdgeId, range: SlotRange) -> Result<(), TopologyError> {
        self.edges[edge]
            .bitmap
            .occupy(range)
            .map_err(|source| TopologyError::Spectrum { edge, source })
    }

    pub(crate) fn release(&mut self, edge: EdgeId, range: SlotRange) -> Result<(), TopologyError> {
        let e = &mut self.edges[edge];
        if range.end() > e.real_slot_count {
            return Err(TopologyError::PaddingRelease {
                edge,
                range,
                capacity: e.real_slot_count,
            });
        }
        e.bitmap
            .free(range)
            .map_err(|source| TopologyError::Spectrum { edge, source })
    }

    /// Edge bitmaps as a snapshot, indexed by edge id.
    pub fn bitmaps(&self) -> Vec<SlotBitmap> {
        self.edges.iter().map(|e| e.bitmap.clone()).collect()
    }
}

/// Parses a topology document and returns a connected, normalized network
/// with all real slots free.
pub fn parse_topology(text: &str, grid_ghz: f64) -> Result<Network, TopologyError> {
    let mut node_count = None;
    let mut specs = Vec::new();
    let mut lines = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let Some(nodes) = node_count else {
            match fields.as_slice() {
                ["nodes", n] => {
                    let n = n.parse::<usize>().map_err(|e| TopologyError::Parse {
                        line,
                        msg: format!("bad node count {n:?}: {e}"),
                    })?;
                    node_count = Some(n);
                    continue;
                }
                _ => {
                    return Err(TopologyError::Parse {
                        line,
                        msg: "expected header `nodes N`".into(),
                    })
                }
            }
        };
        let [u, v, km, bw] = fields.as_slice() else {
            return Err(TopologyError::Parse {
                line,
                msg: format!(
                    "expected `u v length_km bandwidth_ghz`, got {} fields",
                    fields.len()
                ),
            });
        };
        let parse_err = |what: &str, tok: &str| TopologyError::Parse {
            line,
            msg: format!("bad {what} {tok:?}"),
        };
        let u: NodeId = u.parse().map_err(|_| parse_err("node", u))?;
        let v: NodeId = v.parse().map_err(|_| parse_err("node", v))?;
        let km: f64 = km.parse().map_err(|_| parse_err("length", km))?;
        let bw: f64 = bw.parse().map_err(|_| parse_err("bandwidth", bw))?;
        let spec = EdgeSpec::new(u, v, km, bw);
        // validate here so errors carry the document line
        Network::make_edge(line, nodes, &spec, SlotBitmap::zeros(0))?;
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(TopologyError::DuplicateEdge { line, u, v });
        }
        slot_count(bw, grid_ghz).and_then(|s| {
            if s == 0 {
                Err(TopologyError::Parse {
                    line,
                    msg: format!("bandwidth {bw} GHz is below one {grid_ghz} GHz slot"),
                })
            } else {
                Ok(s)
            }
        })?;
        specs.push(spec);
        lines.push(line);
    }
    let Some(nodes) = node_count else {
        return Err(TopologyError::Parse {
            line: 0,
            msg: "empty topology document".into(),
        });
    };
    let net = Network::new(nodes, &specs, grid_ghz)?;
    if let Some(node) = net.find_unreachable() {
        return Err(TopologyError::Disconnected(node));
    }
    Ok(net)
}

/// Reads and parses a topology file.
pub fn load_topology(path: impl AsRef<Path>, grid_ghz: f64) -> Result<Network, TopologyError> {
    let text = fs::read_to_string(path)?;
    parse_topology(&text, grid_ghz)
}

/// Serializes the static part of a network (no spectrum state) in the
/// topology document format.
pub fn to_topology_text(net: &Network) -> String {
    let mut out = format!("nodes {}\n", net.node_count());
    for e in net.edges() {
        out.push_str(&format!(
            "{} {} {} {}\n",
            e.u, e.v, e.length_km, e.usable_bandwidth_ghz
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bm(s: &str) -> SlotBitmap {
        s.parse().unwrap()
    }

    #[test]
    fn slot_count_examples() {
        assert_eq!(slot_count(4000.0, 12.5).unwrap(), 320);
        assert_eq!(slot_count(12.5, 12.5).unwrap(), 1);
        assert_eq!(slot_count(100.0, 12.5).unwrap(), 8);
        assert_eq!(slot_count(20.0, 12.5).unwrap(), 1);
        assert_eq!(slot_count(0.3, 0.1).unwrap(), 3);
        assert!(slot_count(0.0, 12.5).is_err());
        assert!(slot_count(100.0, -1.0).is_err());
    }

    #[test]
    fn single_edge_document() {
        let net = parse_topology("nodes 2\n0 1 100 4000\n", 12.5).unwrap();
        assert_eq!(net.slot_count(), 320);
        assert_eq!(net.edge_count(), 1);
        assert_eq!(net.edge(0).bitmap().count_free(), 320);
    }

    #[test]
    fn normalize_pads_mixed_capacities() {
        let mut net = Network::with_bitmaps(
            4,
            &[
                (0, 1, 1.0, bm("00111")),
                (1, 2, 1.0, bm("111110")),
                (2, 3, 1.0, bm("100110011")),
            ],
            12.5,
        )
        .unwrap();
        assert_eq!(net.slot_count(), 9);
        let strings: Vec<_> = net.edges().iter().map(|e| e.bitmap().to_string()).collect();
        assert_eq!(strings, ["001110000", "111110000", "100110011"]);
        assert_eq!(net.edge(0).real_slot_count, 5);

        let before = net.bitmaps();
        net.normalize();
        assert_eq!(net.bitmaps(), before);
    }

    #[test]
    fn uniform_capacities_need_no_padding() {
        let net = Network::new(
            3,
            &[
                EdgeSpec::new(0, 1, 1.0, 100.0),
                EdgeSpec::new(1, 2, 1.0, 100.0),
            ],
            12.5,
        )
        .unwrap();
        assert_eq!(net.slot_count(), 8);
        assert!(net
            .edges()
            .iter()
            .all(|e| e.bitmap().to_string() == "11111111"));
    }

    #[test]
    fn padded_capacity_counts_only_real_slots() {
        let net = Network::new(
            3,
            &[
                EdgeSpec::new(0, 1, 1.0, 62.5),
                EdgeSpec::new(1, 2, 1.0, 112.5),
            ],
            12.5,
        )
        .unwrap();
        assert_eq!(net.slot_count(), 9);
        assert_eq!(net.edge(0).bitmap().to_string(), "111110000");
        assert_eq!(net.total_real_slots(), 14);
        let free: usize = net.edges().iter().map(|e| e.free_real_slots()).sum();
        assert_eq!(free, 14);
    }

    #[test]
    fn release_rejects_padding() {
        let mut net = Network::with_bitmaps(
            3,
            &[(0, 1, 1.0, bm("00000")), (1, 2, 1.0, bm("111111111"))],
            12.5,
        )
        .unwrap();
        assert!(matches!(
            net.release(0, SlotRange::new(4, 2)),
            Err(TopologyError::PaddingRelease { capacity: 5, .. })
        ));
        net.release(0, SlotRange::new(3, 2)).unwrap();
        assert_eq!(net.edge(0).bitmap().to_string(), "000110000");
    }

    #[test]
    fn edge_lookup_is_symmetric() {
        let net = parse_topology("nodes 3\n0 1 5 100\n2 1 5 100\n", 12.5).unwrap();
        assert_eq!(net.edge_between(1, 2), Some(1));
        assert_eq!(net.edge_between(2, 1), Some(1));
        assert_eq!(net.edge_between(0, 2), None);
        assert_eq!(net.neighbors(1), &[(0, 0), (2, 1)]);
    }

    #[test]
    fn loader_errors_name_the_line() {
        let cases = [
            ("0 1 1 1\n", 1),
            ("nodes 2\n0 1 10\n", 2),
            ("nodes 2\n0 1 10 100\n1 0 10 100\n", 3),
            ("nodes 2\n\n0 5 10 100\n", 3),
            ("nodes 2\n0 0 10 100\n", 2),
            ("nodes 2\n0 1 10 -4\n", 2),
            ("nodes 2\n0 1 x 100\n", 2),
        ];
        for (doc, line) in cases {
            let err = parse_topology(doc, 12.5).unwrap_err();
            assert!(
                err.to_string().starts_with(&format!("line {line}:")),
                "{doc:?} -> {err}"
            );
        }
        assert!(matches!(
            parse_topology("nodes 3\n0 1 10 100\n", 12.5),
            Err(TopologyError::Disconnected(2))
        ));
    }

    #[test]
    fn bundled_fixtures() {
        let nsf = parse_topology(NSFNET_TOPO, DEFAULT_GRID_GHZ).unwrap();
        assert_eq!((nsf.node_count(), nsf.edge_count()), (14, 22));
        assert_eq!(nsf.slot_count(), 320);
        assert!((nsf.average_nodal_degree() - 44.0 / 14.0).abs() < 1e-12);
        let us = parse_topology(USNET_TOPO, DEFAULT_GRID_GHZ).unwrap();
        assert_eq!((us.node_count(), us.edge_count()), (24, 43));
        assert!((us.average_nodal_degree() - 86.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn comments_and_round_trip() {
        let doc = "# test\nnodes 3 # three\n0 1 10 4000\n\n1 2 20.5 4000\n";
        let net = parse_topology(doc, 12.5).unwrap();
        let again = parse_topology(&to_topology_text(&net), 12.5).unwrap();
        assert_eq!(again.edge_count(), 2);
        assert_eq!(again.edge(1).length_km, 20.5);
    }
}
