//! Dynamic routing and spectrum assignment (RSA) for flexible-grid optical
//! networks.
//!
//! The crate is layered bottom-up:
//!
//! * [`spectrum`]: slot bitmaps and the bit-level operations RSA needs,
//! * [`topology`]: the network graph, topology files and capacity padding,
//! * [`path_search`]: spectrum-aware candidate search and spectrum-blind
//!   shortest-path baselines,
//! * [`rsa`]: the six routing policies plus commit/release,
//! * [`traffic`]: a discrete-event simulator for dynamic Poisson traffic,
//! * [`metrics`]: blocking, bandwidth blocking and utilization,
//! * [`sweep`]: load sweeps and benchmarks behind the `flexgrid-rsa` CLI.
//!
//! Slot indices are 0-based everywhere; index 0 is the lowest frequency.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod metrics;
pub mod path_search;
pub mod rsa;
pub mod spectrum;
pub mod sweep;
pub mod topology;
pub mod traffic;

pub use path_search::{Metric, PathRecord, SearchError};
pub use rsa::{
    Assignment, BlockReason, EngineError, LightpathRequest, PolicyKind, RouteOptions, RouteOutcome,
};
pub use spectrum::{SlotBitmap, SlotRange, SpectrumError};
pub use topology::{EdgeSpec, Network, NodeId, TopologyError};
