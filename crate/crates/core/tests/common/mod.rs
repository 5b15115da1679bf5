#![allow(dead_code)]

use std::collections::BTreeSet;

use flexgrid_rsa::{Network, NodeId, SlotBitmap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bitmap(s: &str) -> SlotBitmap {
    s.parse().unwrap()
}

/// Builds a network from `(u, v, km, bitmap)` tuples.
pub fn net_from(n: usize, edges: &[(NodeId, NodeId, f64, &str)]) -> Network {
    let spec: Vec<_> = edges
        .iter()
        .map(|&(u, v, km, b)| (u, v, km, bitmap(b)))
        .collect();
    Network::with_bitmaps(n, &spec, 12.5).unwrap()
}

/// A connected random graph with at most `max_nodes` nodes and bitmaps up
/// to `max_slots` long. Edges may have different bitmap lengths.
pub fn random_network(rng: &mut ChaCha8Rng, max_nodes: usize, max_slots: usize) -> Network {
    let n = rng.random_range(2..=max_nodes);
    let mut pairs = BTreeSet::new();
    // random spanning tree first so the graph is connected
    for v in 1..n {
        let u = rng.random_range(0..v);
        pairs.insert((u, v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.4) {
                pairs.insert((u, v));
            }
        }
    }
    let edges: Vec<_> = pairs
        .into_iter()
        .map(|(u, v)| {
            let len = rng.random_range(1..=max_slots);
            let density = rng.random_range(0.3..0.95);
            let bits: Vec<bool> = (0..len).map(|_| rng.random_bool(density)).collect();
            let km = rng.random_range(1..=20) as f64 * 50.0;
            (u, v, km, SlotBitmap::from_bools(&bits))
        })
        .collect();
    Network::with_bitmaps(n, &edges, 12.5).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every simple `s → d` path by depth-first enumeration, with its
/// intersected bitmap computed from scratch.
pub fn brute_force_paths(net: &Network, s: NodeId, d: NodeId) -> Vec<(Vec<NodeId>, SlotBitmap)> {
    fn walk(
        net: &Network,
        d: NodeId,
        stack: &mut Vec<NodeId>,
        out: &mut Vec<(Vec<NodeId>, SlotBitmap)>,
    ) {
        let at = *stack.last().unwrap();
        if at == d {
            let mut acc = SlotBitmap::ones(net.slot_count());
            for w in stack.windows(2) {
                let e = net.edge_between(w[0], w[1]).unwrap();
                for i in 0..acc.len() {
                    if !net.edge(e).bitmap().get(i) {
                        acc.set(i, false);
                    }
                }
            }
            out.push((stack.clone(), acc));
            return;
        }
        for v in 0..net.node_count() {
            if net.edge_between(at, v).is_some() && !stack.contains(&v) {
                stack.push(v);
                walk(net, d, stack, out);
                stack.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(net, d, &mut vec![s], &mut out);
    out
}

/// Length of the longest run of free slots, by direct counting.
pub fn longest_run(b: &SlotBitmap) -> usize {
    let (mut best, mut cur) = (0, 0);
    for bit in b.iter() {
        cur = if bit { cur + 1 } else { 0 };
        best = best.max(cur);
    }
    best
}

pub fn path_km(net: &Network, nodes: &[NodeId]) -> f64 {
    nodes
        .windows(2)
        .map(|w| net.edge(net.edge_between(w[0], w[1]).unwrap()).length_km)
        .sum()
}
