//! C interface to `flexgrid-rsa`.
//!
//! Networks and assignments are opaque handles owned by the caller and
//! released with their `_free` function. Every fallible call returns an
//! [`FrsaStatus`]; on failure a description is available from
//! [`frsa_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use flexgrid_rsa::metrics::RunMetrics;
use flexgrid_rsa::rsa::{self, EngineError};
use flexgrid_rsa::topology::{self, TopologyError};
use flexgrid_rsa::traffic::{self, DemandDistribution, SimConfig, SimError};
use flexgrid_rsa::{Assignment, LightpathRequest, Network, PolicyKind, RouteOptions, RouteOutcome};

/// A loaded network with its current spectrum state.
pub struct FrsaNetwork(Network);

/// A routing decision that can be committed to or released from a network.
pub struct FrsaAssignment(Assignment);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrsaStatus {
    Ok = 0,
    /// The request could not be served; no assignment was produced.
    Blocked = 1,
    NullPointer = 2,
    InvalidArgument = 3,
    /// The topology text could not be parsed or validated.
    Parse = 4,
    Io = 5,
    /// A spectrum operation conflicted with the network state.
    Spectrum = 6,
    /// A simulation failed or detected a broken invariant.
    Simulation = 7,
    /// The output buffer is too small; the required size was reported.
    BufferTooSmall = 8,
    /// A Rust panic was caught at the boundary.
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrsaPolicy {
    SpKm = 0,
    SpHops = 1,
    KspKm = 2,
    Type1 = 3,
    Type2 = 4,
    Type3 = 5,
}

fn policy_kind(raw: u32) -> Result<PolicyKind, Failure> {
    const TABLE: [(FrsaPolicy, PolicyKind); 6] = [
        (FrsaPolicy::SpKm, PolicyKind::SpKm),
        (FrsaPolicy::SpHops, PolicyKind::SpHops),
        (FrsaPolicy::KspKm, PolicyKind::KspKm),
        (FrsaPolicy::Type1, PolicyKind::Type1),
        (FrsaPolicy::Type2, PolicyKind::Type2),
        (FrsaPolicy::Type3, PolicyKind::Type3),
    ];
    TABLE
        .iter()
        .find(|(p, _)| *p as u32 == raw)
        .map(|&(_, k)| k)
        .ok_or_else(|| Failure::invalid(format!("unknown policy {raw}")))
}

/// Parameters of one simulated replica. Obtain defaults from
/// [`frsa_sim_config_default`] and override fields as needed.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FrsaSimConfig {
    /// One of the `FrsaPolicy` values.
    pub policy: u32,
    pub k: usize,
    pub grid_ghz: f64,
    pub guard_band_ghz: f64,
    pub bits_per_symbol: u32,
    pub demand_max_gbps: f64,
    /// Draw demands uniformly from [1, B] instead of whole slots.
    pub continuous_demand: bool,
    pub load_per_node: f64,
    pub mean_holding_time: f64,
    pub total_requests: usize,
    pub seed: u64,
    pub warmup_multiplier: f64,
    pub frontier_cap: usize,
    pub check_invariants: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrsaMetrics {
    pub arrived: usize,
    pub blocked: usize,
    pub blocking_probability: f64,
    pub bandwidth_blocking_probability: f64,
    pub spectrum_utilization: f64,
    pub post_routing_blocks: usize,
    pub frontier_cap_hits: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(FrsaStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(FrsaStatus::NullPointer, format!("{what} is null"))
    }

    fn invalid(msg: impl Into<String>) -> Self {
        Failure(FrsaStatus::InvalidArgument, msg.into())
    }
}

impl From<TopologyError> for Failure {
    fn from(e: TopologyError) -> Self {
        let status = match e {
            TopologyError::Io(_) => FrsaStatus::Io,
            _ => FrsaStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let status = match e {
            EngineError::Spectrum { .. } => FrsaStatus::Spectrum,
            _ => FrsaStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let status = match e {
            SimError::Config(_) => FrsaStatus::InvalidArgument,
            _ => FrsaStatus::Simulation,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, records any error message and converts panics to a status.
fn guard(f: impl FnOnce() -> Result<FrsaStatus, Failure>) -> FrsaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FrsaStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn frsa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static, human-readable name of a status code.
#[no_mangle]
pub extern "C" fn frsa_status_name(status: u32) -> *const c_char {
    let name: &'static CStr = match status {
        0 => c"ok",
        1 => c"blocked",
        2 => c"null pointer",
        3 => c"invalid argument",
        4 => c"parse error",
        5 => c"i/o error",
        6 => c"spectrum conflict",
        7 => c"simulation error",
        8 => c"buffer too small",
        9 => c"panic",
        _ => c"unknown status",
    };
    name.as_ptr()
}

unsafe fn store_network(out: *mut *mut FrsaNetwork, net: Network) -> FrsaStatus {
    *out = Box::into_raw(Box::new(FrsaNetwork(net)));
    FrsaStatus::Ok
}

/// Loads a topology file. On success `*out` owns a new network.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn frsa_network_load(
    path: *const c_char,
    grid_ghz: f64,
    out: *mut *mut FrsaNetwork,
) -> FrsaStatus {
    guard(|| {
        let path = text(path, "path")?;
        get_mut(out, "out")?;
        let net = topology::load_topology(path, grid_ghz)?;
        Ok(store_network(out, net))
    })
}

/// Parses topology text. On success `*out` owns a new network.
///
/// # Safety
/// `topology` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn frsa_network_from_str(
    topology: *const c_char,
    grid_ghz: f64,
    out: *mut *mut FrsaNetwork,
) -> FrsaStatus {
    guard(|| {
        let body = text(topology, "topology")?;
        get_mut(out, "out")?;
        let net = topology::parse_topology(body, grid_ghz)?;
        Ok(store_network(out, net))
    })
}

/// Releases a network. Null is ignored.
///
/// # Safety
/// `net` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn frsa_network_free(net: *mut FrsaNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Independent copy of a network including its spectrum state.
///
/// # Safety
/// `net` must be a live network and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn frsa_network_clone(
    net: *const FrsaNetwork,
    out: *mut *mut FrsaNetwork,
) -> FrsaStatus {
    guard(|| {
        let net = get(net, "net")?;
        get_mut(out, "out")?;
        Ok(store_network(out, net.0.clone()))
    })
}

/// Number of nodes, edges and slots per bitmap. Any output may be null.
///
/// # Safety
/// `net` must be a live network.
#[no_mangle]
pub unsafe extern "C" fn frsa_network_dimensions(
    net: *const FrsaNetwork,
    nodes: *mut usize,
    edges: *mut usize,
    slots: *mut usize,
) -> FrsaStatus {
    guard(|| {
        let net = &get(net, "net")?.0;
        for (p, v) in [
            (nodes, net.node_count()),
            (edges, net.edge_count()),
            (slots, net.slot_count()),
        ] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(FrsaStatus::Ok)
    })
}

/// Endpoints and length of edge `edge`.
///
/// # Safety
/// `net` must be a live network; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn frsa_network_edge(
    net: *const FrsaNetwork,
    edge: usize,
    u: *mut usize,
    v: *mut usize,
    length_km: *mut f64,
) -> FrsaStatus {
    guard(|| {
        let net = &get(net, "net")?.0;
        if edge >= net.edge_count() {
            return Err(Failure::invalid(format!("edge {edge} out of range")));
        }
        let e = net.edge(edge);
        if let Some(u) = u.as_mut() {
            *u = e.u;
        }
        if let Some(v) = v.as_mut() {
            *v = e.v;
        }
        if let Some(l) = length_km.as_mut() {
            *l = e.length_km;
        }
        Ok(FrsaStatus::Ok)
    })
}

/// Writes the bitmap of `edge` as a NUL-terminated string of `0` and `1`,
/// slot 0 first. `*needed` receives the buffer size required including
/// the terminator; if `capacity` is smaller, nothing is written and
/// `FRSA_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `net` must be a live network, `buf` must hold `capacity` bytes (or be
/// null with `capacity` 0) and `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn frsa_network_edge_bitmap(
    net: *const FrsaNetwork,
    edge: usize,
    buf: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> FrsaStatus {
    guard(|| {
        let net = &get(net, "net")?.0;
        if edge >= net.edge_count() {
            return Err(Failure::invalid(format!("edge {edge} out of range")));
        }
        let bits = net.edge(edge).bitmap().to_string();
        let size = bits.len() + 1;
        if let Some(n) = needed.as_mut() {
            *n = size;
        }
        if capacity < size {
            return Ok(FrsaStatus::BufferTooSmall);
        }
        if buf.is_null() {
            return Err(Failure::null("buf"));
        }
        ptr::copy_nonoverlapping(bits.as_ptr().cast::<c_char>(), buf, bits.len());
        *buf.add(bits.len()) = 0;
        Ok(FrsaStatus::Ok)
    })
}

/// Slots needed for `gbps` at the given grid, modulation and guard band.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn frsa_required_slots(
    gbps: f64,
    grid_ghz: f64,
    bits_per_symbol: u32,
    guard_band_ghz: f64,
    out: *mut usize,
) -> FrsaStatus {
    guard(|| {
        let out = get_mut(out, "out")?;
        *out = rsa::required_slots(gbps, grid_ghz, bits_per_symbol, guard_band_ghz)?;
        Ok(FrsaStatus::Ok)
    })
}

/// Routes a request of `required_slots` from `s` to `d` with `policy`, one
/// of the `FrsaPolicy` values. Returns
/// `FRSA_STATUS_OK` with `*out` owning the assignment, or
/// `FRSA_STATUS_BLOCKED` with `*out` set to null. The network is not
/// modified; call [`frsa_commit`] to occupy the slots.
///
/// # Safety
/// `net` must be a live network and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn frsa_route(
    net: *const FrsaNetwork,
    policy: u32,
    s: usize,
    d: usize,
    required_slots: usize,
    k: usize,
    out: *mut *mut FrsaAssignment,
) -> FrsaStatus {
    guard(|| {
        let net = &get(net, "net")?.0;
        let out = get_mut(out, "out")?;
        *out = ptr::null_mut();
        let req = LightpathRequest::new(0, s, d, required_slots, k);
        match rsa::route(net, &req, policy_kind(policy)?, &RouteOptions::default())? {
            RouteOutcome::Assigned(a) => {
                *out = Box::into_raw(Box::new(FrsaAssignment(a)));
                Ok(FrsaStatus::Ok)
            }
            RouteOutcome::Blocked(reason) => {
                set_error(format!("blocked: {reason:?}"));
                Ok(FrsaStatus::Blocked)
            }
        }
    })
}

/// Releases an assignment handle. Null is ignored.
///
/// # Safety
/// `a` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn frsa_assignment_free(a: *mut FrsaAssignment) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// First slot and slot count of an assignment.
///
/// # Safety
/// `a` must be a live assignment; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn frsa_assignment_range(
    a: *const FrsaAssignment,
    start: *mut usize,
    length: *mut usize,
) -> FrsaStatus {
    guard(|| {
        let range = get(a, "assignment")?.0.range;
        if let Some(s) = start.as_mut() {
            *s = range.start;
        }
        if let Some(l) = length.as_mut() {
            *l = range.length;
        }
        Ok(FrsaStatus::Ok)
    })
}

/// Copies the node sequence of an assignment into `nodes`. `*count`
/// receives the number of nodes; if `capacity` is smaller, nothing is
/// copied and `FRSA_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `a` must be a live assignment, `nodes` must hold `capacity` entries
/// (or be null with `capacity` 0) and `count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frsa_assignment_path(
    a: *const FrsaAssignment,
    nodes: *mut usize,
    capacity: usize,
    count: *mut usize,
) -> FrsaStatus {
    guard(|| {
        let path = &get(a, "assignment")?.0.path.nodes;
        *get_mut(count, "count")? = path.len();
        if capacity < path.len() {
            return Ok(FrsaStatus::BufferTooSmall);
        }
        if nodes.is_null() {
            return Err(Failure::null("nodes"));
        }
        ptr::copy_nonoverlapping(path.as_ptr(), nodes, path.len());
        Ok(FrsaStatus::Ok)
    })
}

/// Occupies the assignment's slots on every edge of its path, or on none.
///
/// # Safety
/// `net` and `a` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn frsa_commit(
    net: *mut FrsaNetwork,
    a: *const FrsaAssignment,
) -> FrsaStatus {
    guard(|| {
        let net = &mut get_mut(net, "net")?.0;
        rsa::commit(net, &get(a, "assignment")?.0)?;
        Ok(FrsaStatus::Ok)
    })
}

/// Frees the assignment's slots on every edge of its path, or on none.
///
/// # Safety
/// `net` and `a` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn frsa_release(
    net: *mut FrsaNetwork,
    a: *const FrsaAssignment,
) -> FrsaStatus {
    guard(|| {
        let net = &mut get_mut(net, "net")?.0;
        rsa::release(net, &get(a, "assignment")?.0)?;
        Ok(FrsaStatus::Ok)
    })
}

/// Fills `out` with the library defaults.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn frsa_sim_config_default(out: *mut FrsaSimConfig) -> FrsaStatus {
    guard(|| {
        let d = SimConfig::default();
        *get_mut(out, "out")? = FrsaSimConfig {
            policy: FrsaPolicy::Type2 as u32,
            k: d.k,
            grid_ghz: d.grid_ghz,
            guard_band_ghz: d.guard_band_ghz,
            bits_per_symbol: d.bits_per_symbol,
            demand_max_gbps: d.demand_max_gbps,
            continuous_demand: false,
            load_per_node: d.load_per_node,
            mean_holding_time: d.mean_holding_time,
            total_requests: d.total_requests,
            seed: d.seed,
            warmup_multiplier: d.warmup_multiplier,
            frontier_cap: d.frontier_cap,
            check_invariants: false,
        };
        Ok(FrsaStatus::Ok)
    })
}

/// Simulates one replica on a copy of `net` and writes its metrics. The
/// network itself is left unchanged.
///
/// # Safety
/// `net`, `config` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn frsa_simulate(
    net: *const FrsaNetwork,
    config: *const FrsaSimConfig,
    out: *mut FrsaMetrics,
) -> FrsaStatus {
    guard(|| {
        let net = &get(net, "net")?.0;
        let c = *get(config, "config")?;
        let out = get_mut(out, "out")?;
        let cfg = SimConfig {
            policy: policy_kind(c.policy)?,
            k: c.k,
            grid_ghz: c.grid_ghz,
            guard_band_ghz: c.guard_band_ghz,
            bits_per_symbol: c.bits_per_symbol,
            demand_max_gbps: c.demand_max_gbps,
            demand_distribution: if c.continuous_demand {
                DemandDistribution::Continuous
            } else {
                DemandDistribution::SlotQuantized
            },
            load_per_node: c.load_per_node,
            mean_holding_time: c.mean_holding_time,
            total_requests: c.total_requests,
            seed: c.seed,
            warmup_multiplier: c.warmup_multiplier,
            frontier_cap: c.frontier_cap,
            check_invariants: c.check_invariants,
            record_timing: false,
        };
        let raw = traffic::run(net, &cfg)?;
        let m = RunMetrics::from_run(&raw)
            .map_err(|e| Failure(FrsaStatus::Simulation, e.to_string()))?;
        *out = FrsaMetrics {
            arrived: m.arrived,
            blocked: m.blocked,
            blocking_probability: m.blocking_probability,
            bandwidth_blocking_probability: m.bandwidth_blocking_probability,
            spectrum_utilization: m.spectrum_utilization,
            post_routing_blocks: m.post_routing_blocks,
            frontier_cap_hits: m.frontier_cap_hits,
        };
        Ok(FrsaStatus::Ok)
    })
}
