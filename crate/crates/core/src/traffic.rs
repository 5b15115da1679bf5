//! Discrete-event simulation of dynamic lightpath traffic.
//!
//! Arrivals form one network-wide Poisson process with rate
//! `λ = ρ · |V| · μ`, so `ρ` is the offered load per node in Erlang. Source
//! and destination are uniform over ordered distinct node pairs, holding
//! times are exponential with mean `1/μ`, and blocked requests are lost.
//!
//! Randomness comes from ChaCha8 seeded with the run seed, split into four
//! independent streams so that e.g. changing the demand distribution does
//! not perturb arrival times:
//!
//! | stream | draws                |
//! |--------|----------------------|
//! | 0      | inter-arrival times  |
//! | 1      | source/destination   |
//! | 2      | demanded bandwidth   |
//! | 3      | holding times        |

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::io::{self, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;
use thiserror::Error;

use crate::path_search::DEFAULT_FRONTIER_CAP;
use crate::rsa::{
    self, Assignment, BlockReason, EngineError, LightpathRequest, PolicyKind, RouteOptions,
    RouteOutcome,
};
use crate::spectrum::SlotRange;
use crate::topology::{Network, NodeId, DEFAULT_GRID_GHZ};

const STREAM_ARRIVALS: u64 = 0;
const STREAM_PAIRS: u64 = 1;
const STREAM_DEMANDS: u64 = 2;
const STREAM_HOLDING: u64 = 3;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("spectrum invariant violated at t={time}: {msg}")]
    Invariant { time: f64, msg: String },
}

/// How demanded bandwidth is drawn between one slot's worth and `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DemandDistribution {
    /// Uniform over whole data-slot counts `1..=B/grid`; the demand is
    /// `n · grid` Gbps.
    SlotQuantized,
    /// Continuous uniform on `[1, B]` Gbps.
    Continuous,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub policy: PolicyKind,
    pub k: usize,
    pub grid_ghz: f64,
    pub guard_band_ghz: f64,
    pub bits_per_symbol: u32,
    /// Largest demand `B` in Gbps.
    pub demand_max_gbps: f64,
    pub demand_distribution: DemandDistribution,
    /// Offered load per node `ρ` in Erlang.
    pub load_per_node: f64,
    /// Mean holding time `1/μ` in seconds.
    pub mean_holding_time: f64,
    pub total_requests: usize,
    pub seed: u64,
    /// Requests arriving before `warmup_multiplier · (1/μ)` are excluded from
    /// the metrics.
    pub warmup_multiplier: f64,
    pub frontier_cap: usize,
    /// Verify every spectrum invariant after each event.
    pub check_invariants: bool,
    /// Record wall-clock routing time per request.
    pub record_timing: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            policy: PolicyKind::Type2,
            k: 10,
            grid_ghz: DEFAULT_GRID_GHZ,
            guard_band_ghz: 10.0,
            bits_per_symbol: 1,
            demand_max_gbps: 100.0,
            demand_distribution: DemandDistribution::SlotQuantized,
            load_per_node: 10.0,
            mean_holding_time: 100.0,
            total_requests: 200_000,
            seed: 1,
            warmup_multiplier: 3.0,
            frontier_cap: DEFAULT_FRONTIER_CAP,
            check_invariants: cfg!(debug_assertions),
            record_timing: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, net: &Network) -> Result<(), SimError> {
        let fail = |msg: String| Err(SimError::Config(msg));
        if !(self.load_per_node > 0.0) {
            return fail(format!(
                "offered load must be positive, got {}",
                self.load_per_node
            ));
        }
        if !(self.mean_holding_time > 0.0) {
            return fail(format!(
                "mean holding time must be positive, got {}",
                self.mean_holding_time
            ));
        }
        if !(self.grid_ghz > 0.0) || !(self.guard_band_ghz >= 0.0) || self.bits_per_symbol == 0 {
            return fail("grid, guard band or modulation level out of range".into());
        }
        if !(self.demand_max_gbps >= self.grid_ghz) {
            return fail(format!(
                "demand cap {} Gbps is below one {} GHz slot",
                self.demand_max_gbps, self.grid_ghz
            ));
        }
        if self.total_requests == 0 || self.k == 0 || self.frontier_cap == 0 {
            return fail("total_requests, k and frontier_cap must be at least 1".into());
        }
        if !(self.warmup_multiplier >= 0.0) {
            return fail("warm-up multiplier must be non-negative".into());
        }
        if net.node_count() < 2 {
            return fail("network needs at least two nodes".into());
        }
        Ok(())
    }

    /// Network-wide arrival rate `λ = ρ · |V| / (1/μ)`.
    pub fn arrival_rate(&self, node_count: usize) -> f64 {
        self.load_per_node * node_count as f64 / self.mean_holding_time
    }

    pub fn warmup_end(&self) -> f64 {
        self.warmup_multiplier * self.mean_holding_time
    }
}

/// Seeded source of lightpath requests.
pub struct TrafficGenerator {
    node_count: usize,
    k: usize,
    grid_ghz: f64,
    guard_band_ghz: f64,
    bits_per_symbol: u32,
    demand_max_gbps: f64,
    distribution: DemandDistribution,
    inter_arrival: Exp<f64>,
    holding: Exp<f64>,
    arrivals_rng: ChaCha8Rng,
    pairs_rng: ChaCha8Rng,
    demands_rng: ChaCha8Rng,
    holding_rng: ChaCha8Rng,
    next_id: u64,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl TrafficGenerator {
    pub fn new(cfg: &SimConfig, node_count: usize) -> Result<Self, SimError> {
        let rate = cfg.arrival_rate(node_count);
        let inter_arrival =
            Exp::new(rate).map_err(|e| SimError::Config(format!("arrival rate {rate}: {e}")))?;
        let holding = Exp::new(1.0 / cfg.mean_holding_time)
            .map_err(|e| SimError::Config(format!("holding time: {e}")))?;
        Ok(Self {
            node_count,
            k: cfg.k,
            grid_ghz: cfg.grid_ghz,
            guard_band_ghz: cfg.guard_band_ghz,
            bits_per_symbol: cfg.bits_per_symbol,
            demand_max_gbps: cfg.demand_max_gbps,
            distribution: cfg.demand_distribution,
            inter_arrival,
            holding,
            arrivals_rng: stream(cfg.seed, STREAM_ARRIVALS),
            pairs_rng: stream(cfg.seed, STREAM_PAIRS),
            demands_rng: stream(cfg.seed, STREAM_DEMANDS),
            holding_rng: stream(cfg.seed, STREAM_HOLDING),
            next_id: 0,
        })
    }

    pub fn next_inter_arrival(&mut self) -> f64 {
        self.inter_arrival.sample(&mut self.arrivals_rng)
    }

    pub fn next_holding_time(&mut self) -> f64 {
        self.holding.sample(&mut self.holding_rng)
    }

    /// Uniform ordered pair of distinct nodes.
    pub fn next_pair(&mut self) -> (NodeId, NodeId) {
        let s = self.pairs_rng.random_range(0..self.node_count);
        let mut d = self.pairs_rng.random_range(0..self.node_count - 1);
        if d >= s {
            d += 1;
        }
        (s, d)
    }

    pub fn next_demand_gbps(&mut self) -> f64 {
        match self.distribution {
            DemandDistribution::SlotQuantized => {
                let max_slots = (self.demand_max_gbps / self.grid_ghz).floor() as u32;
                let n = self.demands_rng.random_range(1..=max_slots);
                n as f64 * self.grid_ghz
            }
            DemandDistribution::Continuous => {
                self.demands_rng.random_range(1.0..=self.demand_max_gbps)
            }
        }
    }

    /// Draws the request arriving at `clock` and the time of the following
    /// arrival.
    pub fn draw_request(&mut self, clock: f64) -> Result<(LightpathRequest, f64), EngineError> {
        let (s, d) = self.next_pair();
        let demanded_gbps = self.next_demand_gbps();
        let required_slots = rsa::required_slots(
            demanded_gbps,
            self.grid_ghz,
            self.bits_per_symbol,
            self.guard_band_ghz,
        )?;
        let holding_time = self.next_holding_time();
        let req = LightpathRequest {
            id: self.next_id,
            s,
            d,
            demanded_gbps,
            required_slots,
            k: self.k,
            arrival_time: clock,
            holding_time,
        };
        self.next_id += 1;
        Ok((req, clock + self.next_inter_arrival()))
    }
}

/// What happened to one request.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestRecord {
    pub id: u64,
    pub arrival_time: f64,
    pub s: NodeId,
    pub d: NodeId,
    pub demanded_gbps: f64,
    pub required_slots: usize,
    /// Node list and slot block when served.
    pub served: Option<(Vec<NodeId>, SlotRange)>,
    pub block_reason: Option<BlockReason>,
    pub warmup: bool,
}

impl RequestRecord {
    pub fn is_blocked(&self) -> bool {
        self.served.is_none()
    }
}

/// Occupied real slots across the network from `time` until the next
/// sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilSample {
    pub time: f64,
    pub occupied_slots: usize,
}

/// Everything a single replica produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRunRecord {
    pub policy: PolicyKind,
    pub seed: u64,
    pub requests: Vec<RequestRecord>,
    pub utilization: Vec<UtilSample>,
    pub total_real_slots: usize,
    pub warmup_end: f64,
    /// Arrival time of the last request; the utilization window closes here
    /// so the final drain does not dilute the average.
    pub last_arrival: f64,
    pub frontier_cap_hits: usize,
    /// Nanoseconds spent routing each request, when timing was requested.
    pub routing_ns: Vec<u64>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Decision<'a> {
    Path(&'a [NodeId]),
    Blocked(&'static str),
}

#[derive(Serialize)]
struct LogLine<'a> {
    id: u64,
    arrival: f64,
    s: NodeId,
    d: NodeId,
    slots: usize,
    decision: Decision<'a>,
    range: Option<[usize; 2]>,
    reason: Option<BlockReason>,
    warmup: bool,
}

impl RawRunRecord {
    /// Requests that count toward the metrics.
    pub fn measured(&self) -> impl Iterator<Item = &RequestRecord> {
        self.requests.iter().filter(|r| !r.warmup)
    }

    /// Requests that were routed to a path which then lacked spectrum.
    pub fn post_routing_blocks(&self) -> usize {
        self.requests
            .iter()
            .filter(|r| r.block_reason == Some(BlockReason::NoSpectrum))
            .count()
    }

    /// Newline-delimited JSON, one request per line. `range` is
    /// `[start, length]` with 0-based slot indices.
    pub fn write_ndjson(&self, mut out: impl Write) -> io::Result<()> {
        for r in &self.requests {
            let line = LogLine {
                id: r.id,
                arrival: r.arrival_time,
                s: r.s,
                d: r.d,
                slots: r.required_slots,
                decision: match &r.served {
                    Some((nodes, _)) => Decision::Path(nodes),
                    None => Decision::Blocked("BLOCKED"),
                },
                range: r.served.as_ref().map(|(_, rg)| [rg.start, rg.length]),
                reason: r.block_reason,
                warmup: r.warmup,
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, PartialEq)]
struct Departure {
    time: f64,
    id: u64,
}

impl Eq for Departure {}

impl Ord for Departure {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Departure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Checks continuity, contiguity and non-overlap of the live assignments,
/// and that the edge bitmaps show exactly those assignments as occupied.
pub fn check_spectrum_invariants(
    net: &Network,
    live: &BTreeMap<u64, (Assignment, usize)>,
) -> Result<(), String> {
    let slots = net.slot_count();
    let mut owner: Vec<Vec<Option<u64>>> = vec![vec![None; slots]; net.edge_count()];
    for (id, (a, required)) in live {
        if a.range.length != *required {
            return Err(format!(
                "request {id} holds {} slots, needs {required}",
                a.range.length
            ));
        }
        if a.range.end() > slots {
            return Err(format!(
                "request {id} range {} beyond {slots} slots",
                a.range
            ));
        }
        if a.path.edges.len() + 1 != a.path.nodes.len() {
            return Err(format!("request {id} path has inconsistent edges"));
        }
        for (pair, &e) in a.path.nodes.windows(2).zip(&a.path.edges) {
            if net.edge_between(pair[0], pair[1]) != Some(e) {
                return Err(format!("request {id} path edge {e} does not join {pair:?}"));
            }
            let cells = owner[e].iter_mut().enumerate();
            for (slot, cell) in cells.skip(a.range.start).take(a.range.length) {
                if let Some(other) = cell.replace(*id) {
                    return Err(format!(
                        "requests {other} and {id} overlap on edge {e} slot {slot}"
                    ));
                }
            }
        }
    }
    for (e, edge) in net.edges().iter().enumerate() {
        for (slot, cell) in owner[e].iter().enumerate() {
            let expect_free = slot < edge.real_slot_count && cell.is_none();
            if edge.bitmap().get(slot) != expect_free {
                return Err(format!(
                    "edge {e} slot {slot} is {} but should be {}",
                    if expect_free { "occupied" } else { "free" },
                    if expect_free { "free" } else { "occupied" },
                ));
            }
        }
    }
    Ok(())
}

/// Runs one replica on a private copy of `template`.
pub fn run(template: &Network, cfg: &SimConfig) -> Result<RawRunRecord, SimError> {
    cfg.validate(template)?;
    let mut net = template.clone();
    let initial = template.bitmaps();
    let mut traffic = TrafficGenerator::new(cfg, net.node_count())?;
    let opts = RouteOptions {
        frontier_cap: cfg.frontier_cap,
    };
    let warmup_end = cfg.warmup_end();

    let mut departures: BinaryHeap<Reverse<Departure>> = BinaryHeap::new();
    let mut live: BTreeMap<u64, (Assignment, usize)> = BTreeMap::new();
    let mut requests = Vec::with_capacity(cfg.total_requests);
    let mut utilization = vec![UtilSample {
        time: 0.0,
        occupied_slots: 0,
    }];
    let mut routing_ns = Vec::new();
    let mut occupied = 0usize;
    let mut frontier_cap_hits = 0;
    let mut last_arrival = 0.0;
    let mut next_arrival = traffic.next_inter_arrival();

    loop {
        let arrivals_left = requests.len() < cfg.total_requests;
        let depart_first = departures
            .peek()
            .is_some_and(|Reverse(dep)| !arrivals_left || dep.time <= next_arrival);
        let now;
        if depart_first {
            let Reverse(dep) = departures.pop().expect("peeked");
            now = dep.time;
            let (a, _) = live.remove(&dep.id).expect("departing request is live");
            rsa::release(&mut net, &a)?;
            occupied -= a.range.length * a.path.hop_count();
        } else if arrivals_left {
            let (req, following) = traffic.draw_request(next_arrival)?;
            now = req.arrival_time;
            last_arrival = now;
            next_arrival = following;

            let started = cfg.record_timing.then(Instant::now);
            let outcome = rsa::route(&net, &req, cfg.policy, &opts)?;
            if let Some(t) = started {
                routing_ns.push(t.elapsed().as_nanos() as u64);
            }
            let mut record = RequestRecord {
                id: req.id,
                arrival_time: req.arrival_time,
                s: req.s,
                d: req.d,
                demanded_gbps: req.demanded_gbps,
                required_slots: req.required_slots,
                served: None,
                block_reason: None,
                warmup: req.arrival_time < warmup_end,
            };
            match outcome {
                RouteOutcome::Assigned(a) => {
                    debug_assert_eq!(a.range.length, req.required_slots);
                    rsa::commit(&mut net, &a)?;
                    occupied += a.range.length * a.path.hop_count();
                    record.served = Some((a.path.nodes.clone(), a.range));
                    departures.push(Reverse(Departure {
                        time: req.arrival_time + req.holding_time,
                        id: req.id,
                    }));
                    live.insert(req.id, (a, req.required_slots));
                }
                RouteOutcome::Blocked(reason) => {
                    if reason == BlockReason::FrontierCap {
                        frontier_cap_hits += 1;
                    }
                    record.block_reason = Some(reason);
                }
            }
            requests.push(record);
        } else {
            break;
        }

        debug_assert_eq!(occupied, net.total_occupied_slots());
        if cfg.check_invariants {
            check_spectrum_invariants(&net, &live)
                .map_err(|msg| SimError::Invariant { time: now, msg })?;
        }
        utilization.push(UtilSample {
            time: now,
            occupied_slots: occupied,
        });
    }

    if net.bitmaps() != initial {
        return Err(SimError::Invariant {
            time: utilization.last().map_or(0.0, |u| u.time),
            msg: "spectrum not restored after drain".into(),
        });
    }

    Ok(RawRunRecord {
        policy: cfg.policy,
        seed: cfg.seed,
        requests,
        utilization,
        total_real_slots: net.total_real_slots(),
        warmup_end,
        last_arrival,
        frontier_cap_hits,
        routing_ns,
    })
}
