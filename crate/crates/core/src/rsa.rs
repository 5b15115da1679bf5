//! Routing and spectrum assignment policies, plus allocation and release of
//! lightpaths against the live network.
//!
//! Every policy assigns spectrum first-fit on the path it selects. Policies
//! differ only in how that path is chosen:
//!
//! | policy   | path choice                                                   |
//! |----------|---------------------------------------------------------------|
//! | `SP_KM`  | Dijkstra by km, then check spectrum                           |
//! | `SP_HOPS`| Dijkstra by hops, then check spectrum                         |
//! | `KSP_KM` | Yen's k paths by km, first one with spectrum                  |
//! | `TYPE1`  | k paths with any free slot, first with enough contiguous slots |
//! | `TYPE2`  | first path found whose spectrum stays feasible hop by hop      |
//! | `TYPE3`  | k feasible paths, the shortest in km                           |

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::path_search::{
    candidate_paths_all_capped, candidate_paths_feasible_capped, k_shortest_paths, shortest_path,
    Metric, PathRecord, SearchError, DEFAULT_FRONTIER_CAP,
};
use crate::spectrum::SlotRange;
use crate::topology::{Network, NodeId, TopologyError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Search(#[from] SearchError),
    /// Commit or release hit an inconsistent spectrum state. Routing never
    /// produces such assignments, so this always indicates a bug.
    #[error("engine bug while {action} request {request_id}: {source}")]
    Spectrum {
        action: &'static str,
        request_id: u64,
        #[source]
        source: TopologyError,
    },
}

/// Routing policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PolicyKind {
    #[serde(rename = "SP_KM")]
    SpKm,
    #[serde(rename = "SP_HOPS")]
    SpHops,
    #[serde(rename = "KSP_KM")]
    KspKm,
    #[serde(rename = "TYPE1")]
    Type1,
    #[serde(rename = "TYPE2")]
    Type2,
    #[serde(rename = "TYPE3")]
    Type3,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::SpKm,
        PolicyKind::SpHops,
        PolicyKind::KspKm,
        PolicyKind::Type1,
        PolicyKind::Type2,
        PolicyKind::Type3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::SpKm => "SP_KM",
            PolicyKind::SpHops => "SP_HOPS",
            PolicyKind::KspKm => "KSP_KM",
            PolicyKind::Type1 => "TYPE1",
            PolicyKind::Type2 => "TYPE2",
            PolicyKind::Type3 => "TYPE3",
        }
    }

    /// Whether this policy only returns paths already known to fit the
    /// request, so it can never block after routing.
    pub fn prunes_by_feasibility(self) -> bool {
        matches!(self, PolicyKind::Type2 | PolicyKind::Type3)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == norm)
            .ok_or_else(|| EngineError::InvalidArgument(format!("unknown policy {s:?}")))
    }
}

/// A lightpath demand `LR(s, d, |Δr|, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LightpathRequest {
    pub id: u64,
    pub s: NodeId,
    pub d: NodeId,
    pub demanded_gbps: f64,
    /// Slots to allocate, guard band included.
    pub required_slots: usize,
    /// Path budget for the policies that enumerate several paths.
    pub k: usize,
    pub arrival_time: f64,
    pub holding_time: f64,
}

impl LightpathRequest {
    /// A request with no timing information, for one-off routing.
    pub fn new(id: u64, s: NodeId, d: NodeId, required_slots: usize, k: usize) -> Self {
        Self {
            id,
            s,
            d,
            demanded_gbps: 0.0,
            required_slots,
            k,
            arrival_time: 0.0,
            holding_time: 0.0,
        }
    }

    fn validate(&self) -> Result<(), EngineError> {
        if self.s == self.d {
            return Err(SearchError::SameEndpoints(self.s).into());
        }
        if self.required_slots == 0 {
            return Err(SearchError::ZeroDemand.into());
        }
        if self.k == 0 {
            return Err(SearchError::ZeroPathBudget.into());
        }
        Ok(())
    }
}

/// A chosen path and slot block for one request.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub request_id: u64,
    pub path: PathRecord,
    pub range: SlotRange,
}

/// Why a request was refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BlockReason {
    /// Routing found no candidate path.
    NoPath,
    /// A path was chosen but it lacks the contiguous slots.
    NoSpectrum,
    /// Candidate search gave up after hitting the frontier cap.
    FrontierCap,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RouteOutcome {
    Assigned(Assignment),
    Blocked(BlockReason),
}

impl RouteOutcome {
    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            RouteOutcome::Assigned(a) => Some(a),
            RouteOutcome::Blocked(_) => None,
        }
    }

    pub fn is_blocked(&self) -> bool {
        matches!(self, RouteOutcome::Blocked(_))
    }
}

/// Slots needed for a demand:
/// `ceil(gbps / (grid · m)) + ceil(guard_band / grid)`, taking 1 Gbps to
/// occupy 1 GHz at one bit per symbol.
pub fn required_slots(
    demanded_gbps: f64,
    grid_ghz: f64,
    bits_per_symbol: u32,
    guard_band_ghz: f64,
) -> Result<usize, EngineError> {
    if !(demanded_gbps > 0.0) {
        return Err(EngineError::InvalidArgument(format!(
            "demand must be positive, got {demanded_gbps} Gbps"
        )));
    }
    if !(grid_ghz > 0.0) || bits_per_symbol == 0 || !(guard_band_ghz >= 0.0) {
        return Err(EngineError::InvalidArgument(format!(
            "grid {grid_ghz} GHz, m {bits_per_symbol}, guard band {guard_band_ghz} GHz"
        )));
    }
    let ceil = |x: f64| (x - x * 1e-12).ceil() as usize;
    Ok(ceil(demanded_gbps / (grid_ghz * bits_per_symbol as f64)) + ceil(guard_band_ghz / grid_ghz))
}

/// Tunables shared by all policies.
#[derive(Debug, Clone, Copy)]
pub struct RouteOptions {
    pub frontier_cap: usize,
}

impl Default for RouteOptions {
    fn default() -> Self {
        Self {
            frontier_cap: DEFAULT_FRONTIER_CAP,
        }
    }
}

fn assign_first_fit(req: &LightpathRequest, path: PathRecord) -> RouteOutcome {
    match path.bitmap.first_fit(req.required_slots) {
        Some(range) => RouteOutcome::Assigned(Assignment {
            request_id: req.id,
            path,
            range,
        }),
        None => RouteOutcome::Blocked(BlockReason::NoSpectrum),
    }
}

/// Maps a capped search to a blocking outcome.
fn capped<T>(res: Result<T, SearchError>) -> Result<Result<T, RouteOutcome>, EngineError> {
    match res {
        Ok(v) => Ok(Ok(v)),
        Err(SearchError::FrontierCapExceeded { .. }) => {
            Ok(Err(RouteOutcome::Blocked(BlockReason::FrontierCap)))
        }
        Err(e) => Err(e.into()),
    }
}

/// Type I: enumerate up to k paths with any free slot, pick the first one
/// whose longest free run fits the request.
pub fn route_type1(
    net: &Network,
    req: &LightpathRequest,
    opts: &RouteOptions,
) -> Result<RouteOutcome, EngineError> {
    req.validate()?;
    let paths = match capped(candidate_paths_all_capped(
        net,
        req.s,
        req.d,
        req.k,
        opts.frontier_cap,
    ))? {
        Ok(p) => p,
        Err(blocked) => return Ok(blocked),
    };
    if paths.is_empty() {
        return Ok(RouteOutcome::Blocked(BlockReason::NoPath));
    }
    match paths
        .into_iter()
        .find(|p| p.bitmap.max_contiguous() >= req.required_slots)
    {
        Some(best) => Ok(assign_first_fit(req, best)),
        None => Ok(RouteOutcome::Blocked(BlockReason::NoSpectrum)),
    }
}

/// Type II: the first path, in hop order, that stays feasible at every hop.
pub fn route_type2(
    net: &Network,
    req: &LightpathRequest,
    opts: &RouteOptions,
) -> Result<RouteOutcome, EngineError> {
    req.validate()?;
    let paths = match capped(candidate_paths_feasible_capped(
        net,
        req.s,
        req.d,
        req.required_slots,
        1,
        opts.frontier_cap,
    ))? {
        Ok(p) => p,
        Err(blocked) => return Ok(blocked),
    };
    match paths.into_iter().next() {
        Some(best) => Ok(assign_first_fit(req, best)),
        None => Ok(RouteOutcome::Blocked(BlockReason::NoPath)),
    }
}

/// Type III: up to k feasible paths, then the shortest in km. Ties go to
/// fewer hops, then the smaller node sequence.
pub fn route_type3(
    net: &Network,
    req: &LightpathRequest,
    opts: &RouteOptions,
) -> Result<RouteOutcome, EngineError> {
    req.validate()?;
    let paths = match capped(candidate_paths_feasible_capped(
        net,
        req.s,
        req.d,
        req.required_slots,
        req.k,
        opts.frontier_cap,
    ))? {
        Ok(p) => p,
        Err(blocked) => return Ok(blocked),
    };
    let best = paths.into_iter().min_by(|a, b| {
        a.length_km
            .total_cmp(&b.length_km)
            .then(a.hop_count().cmp(&b.hop_count()))
            .then_with(|| a.nodes.cmp(&b.nodes))
    });
    match best {
        Some(best) => Ok(assign_first_fit(req, best)),
        None => Ok(RouteOutcome::Blocked(BlockReason::NoPath)),
    }
}

/// Spectrum-blind baselines: route first, then check spectrum.
pub fn route_baseline(
    net: &Network,
    req: &LightpathRequest,
    kind: PolicyKind,
) -> Result<RouteOutcome, EngineError> {
    req.validate()?;
    let path = match kind {
        PolicyKind::SpKm => shortest_path(net, req.s, req.d, Metric::Km)?,
        PolicyKind::SpHops => shortest_path(net, req.s, req.d, Metric::Hops)?,
        PolicyKind::KspKm => {
            let paths = k_shortest_paths(net, req.s, req.d, req.k, Metric::Km)?;
            if paths.is_empty() {
                return Ok(RouteOutcome::Blocked(BlockReason::NoPath));
            }
            match paths
                .into_iter()
                .find(|p| p.bitmap.is_feasible(req.required_slots))
            {
                Some(p) => Some(p),
                None => return Ok(RouteOutcome::Blocked(BlockReason::NoSpectrum)),
            }
        }
        other => {
            return Err(EngineError::InvalidArgument(format!(
                "{other} is not a baseline policy"
            )))
        }
    };
    Ok(match path {
        Some(p) => assign_first_fit(req, p),
        None => RouteOutcome::Blocked(BlockReason::NoPath),
    })
}

/// Routes `req` with the given policy against the current network state.
pub fn route(
    net: &Network,
    req: &LightpathRequest,
    policy: PolicyKind,
    opts: &RouteOptions,
) -> Result<RouteOutcome, EngineError> {
    match policy {
        PolicyKind::Type1 => route_type1(net, req, opts),
        PolicyKind::Type2 => route_type2(net, req, opts),
        PolicyKind::Type3 => route_type3(net, req, opts),
        baseline => route_baseline(net, req, baseline),
    }
}

/// Occupies the assignment's slots on every edge of its path, or on none.
pub fn commit(net: &mut Network, a: &Assignment) -> Result<(), EngineError> {
    for (done, &e) in a.path.edges.iter().enumerate() {
        if let Err(source) = net.occupy(e, a.range) {
            for &undo in &a.path.edges[..done] {
                net.release(undo, a.range)
                    .expect("rolling back slots that were just occupied");
            }
            return Err(EngineError::Spectrum {
                action: "committing",
                request_id: a.request_id,
                source,
            });
        }
    }
    Ok(())
}

/// Frees the assignment's slots on every edge of its path.
pub fn release(net: &mut Network, a: &Assignment) -> Result<(), EngineError> {
    for (done, &e) in a.path.edges.iter().enumerate() {
        if let Err(source) = net.release(e, a.range) {
            for &undo in &a.path.edges[..done] {
                net.occupy(undo, a.range)
                    .expect("restoring slots that were just released");
            }
            return Err(EngineError::Spectrum {
                action: "releasing",
                request_id: a.request_id,
                source,
            });
        }
    }
    Ok(())
}
