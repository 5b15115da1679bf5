//! Load sweeps and routing benchmarks.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::metrics::{self, MetricPoint, MetricsError, RunMetrics};
use crate::rsa::PolicyKind;
use crate::topology::{self, Network, TopologyError};
use crate::traffic::{self, DemandDistribution, SimConfig, SimError};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Usage(String),
    #[error("loading topology {path}: {source}")]
    Topology {
        path: PathBuf,
        #[source]
        source: TopologyError,
    },
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{failed} of {total} replicas failed; first: {first}")]
    Replicas {
        failed: usize,
        total: usize,
        first: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

/// A full experiment grid.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub topology: PathBuf,
    pub policies: Vec<PolicyKind>,
    pub rhos: Vec<f64>,
    pub bandwidths: Vec<f64>,
    pub k: usize,
    pub seeds: Vec<u64>,
    pub total_requests: usize,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    /// Also write one NDJSON request log per replica under `raw/`.
    pub raw_logs: bool,
    pub grid_ghz: f64,
    pub guard_band_ghz: f64,
    pub bits_per_symbol: u32,
    pub mean_holding_time: f64,
    pub warmup_multiplier: f64,
    pub demand_distribution: DemandDistribution,
    pub frontier_cap: usize,
    pub check_invariants: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            topology: PathBuf::new(),
            policies: PolicyKind::ALL.to_vec(),
            rhos: (1..=15).map(|i| 2.0 * i as f64).collect(),
            bandwidths: vec![100.0, 200.0],
            k: sim.k,
            seeds: vec![1],
            total_requests: sim.total_requests,
            out_dir: PathBuf::from("results"),
            format: OutputFormat::Csv,
            raw_logs: false,
            grid_ghz: sim.grid_ghz,
            guard_band_ghz: sim.guard_band_ghz,
            bits_per_symbol: sim.bits_per_symbol,
            mean_holding_time: sim.mean_holding_time,
            warmup_multiplier: sim.warmup_multiplier,
            demand_distribution: sim.demand_distribution,
            frontier_cap: sim.frontier_cap,
            check_invariants: false,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        let empty = [
            ("policies", self.policies.is_empty()),
            ("rho", self.rhos.is_empty()),
            ("B", self.bandwidths.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(SweepError::Usage(format!("{name} list is empty")));
        }
        if !self.topology.is_file() {
            return Err(SweepError::Usage(format!(
                "topology file {} does not exist",
                self.topology.display()
            )));
        }
        Ok(())
    }

    pub fn load_network(&self) -> Result<Network, SweepError> {
        topology::load_topology(&self.topology, self.grid_ghz).map_err(|source| {
            SweepError::Topology {
                path: self.topology.clone(),
                source,
            }
        })
    }

    pub fn sim_config(&self, policy: PolicyKind, rho: f64, b: f64, seed: u64) -> SimConfig {
        SimConfig {
            policy,
            k: self.k,
            grid_ghz: self.grid_ghz,
            guard_band_ghz: self.guard_band_ghz,
            bits_per_symbol: self.bits_per_symbol,
            demand_max_gbps: b,
            demand_distribution: self.demand_distribution,
            load_per_node: rho,
            mean_holding_time: self.mean_holding_time,
            total_requests: self.total_requests,
            seed,
            warmup_multiplier: self.warmup_multiplier,
            frontier_cap: self.frontier_cap,
            check_invariants: self.check_invariants,
            record_timing: false,
        }
    }

    /// Applies a named preset. `desk` runs 2·10^4 requests over seeds 1-5;
    /// `paper` runs 2·10^5 requests over seeds 1-10.
    pub fn apply_preset(&mut self, name: &str) -> Result<(), SweepError> {
        match name.trim().to_ascii_lowercase().as_str() {
            "desk" => {
                self.total_requests = 20_000;
                self.seeds = (1..=5).collect();
            }
            "paper" => {
                self.total_requests = 200_000;
                self.seeds = (1..=10).collect();
            }
            other => return Err(SweepError::Usage(format!("unknown preset {other:?}"))),
        }
        Ok(())
    }

    /// Sets one option by name. Config files and command-line flags share
    /// these keys.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), SweepError> {
        let bad = |e: String| SweepError::Usage(format!("{key}: {e}"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| bad(e.to_string()));
        let int = |v: &str| v.trim().parse::<usize>().map_err(|e| bad(e.to_string()));
        let flag = |v: &str| match v.trim() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(bad(format!("expected a boolean, got {other:?}"))),
        };
        match key.trim().replace('-', "_").as_str() {
            "topology" => self.topology = PathBuf::from(value.trim()),
            "policy" | "policies" => {
                self.policies = value
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| t.parse::<PolicyKind>().map_err(|e| bad(e.to_string())))
                    .collect::<Result<_, _>>()?
            }
            "rho" => self.rhos = parse_f64_list(value).map_err(bad)?,
            "B" | "b" => self.bandwidths = parse_f64_list(value).map_err(bad)?,
            "k" => self.k = int(value)?,
            "seeds" => self.seeds = parse_seed_list(value).map_err(bad)?,
            "requests" => self.total_requests = int(value)?,
            "out" => self.out_dir = PathBuf::from(value.trim()),
            "preset" => self.apply_preset(value)?,
            "format" => {
                self.format = match value.trim() {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    "both" => OutputFormat::Both,
                    other => return Err(bad(format!("expected csv|json|both, got {other:?}"))),
                }
            }
            "raw_logs" => self.raw_logs = flag(value)?,
            "grid" => self.grid_ghz = num(value)?,
            "gb" => self.guard_band_ghz = num(value)?,
            "m" => {
                self.bits_per_symbol = value
                    .trim()
                    .parse()
                    .map_err(|e: std::num::ParseIntError| bad(e.to_string()))?
            }
            "holding" => self.mean_holding_time = num(value)?,
            "warmup" => self.warmup_multiplier = num(value)?,
            "demand" => {
                self.demand_distribution = match value.trim() {
                    "slots" => DemandDistribution::SlotQuantized,
                    "continuous" => DemandDistribution::Continuous,
                    other => return Err(bad(format!("expected slots|continuous, got {other:?}"))),
                }
            }
            "frontier_cap" => self.frontier_cap = int(value)?,
            "check_invariants" => self.check_invariants = flag(value)?,
            _ => return Err(SweepError::Usage(format!("unknown option {key:?}"))),
        }
        Ok(())
    }

    /// Every (policy, B, ρ) point in output order.
    fn points(&self) -> Vec<(PolicyKind, f64, f64)> {
        let mut out = Vec::new();
        for &p in &self.policies {
            for &b in &self.bandwidths {
                for &rho in &self.rhos {
                    out.push((p, b, rho));
                }
            }
        }
        out
    }
}

/// Result of a finished (possibly partial) sweep.
#[derive(Debug)]
pub struct SweepOutcome {
    pub points: Vec<MetricPoint>,
    /// Per-replica metrics in the same order as the cells were defined.
    pub runs: Vec<ReplicaResult>,
    pub written: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicaResult {
    pub policy: PolicyKind,
    pub rho: f64,
    pub demand_max_gbps: f64,
    pub seed: u64,
    pub metrics: RunMetrics,
}

#[derive(Debug, Error)]
enum CellError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("writing raw log {0}: {1}")]
    Io(PathBuf, std::io::Error),
}

fn raw_log_path(dir: &Path, policy: PolicyKind, b: f64, rho: f64, seed: u64) -> PathBuf {
    dir.join("raw").join(format!(
        "{}_B{}_rho{}_seed{}.ndjson",
        policy.name(),
        b,
        rho,
        seed
    ))
}

fn run_cell(
    net: &Network,
    spec: &SweepSpec,
    policy: PolicyKind,
    b: f64,
    rho: f64,
    seed: u64,
) -> Result<ReplicaResult, CellError> {
    let cfg = spec.sim_config(policy, rho, b, seed);
    let raw = traffic::run(net, &cfg)?;
    if spec.raw_logs {
        let path = raw_log_path(&spec.out_dir, policy, b, rho, seed);
        let file = File::create(&path).map_err(|e| CellError::Io(path.clone(), e))?;
        raw.write_ndjson(BufWriter::new(file))
            .map_err(|e| CellError::Io(path.clone(), e))?;
    }
    Ok(ReplicaResult {
        policy,
        rho,
        demand_max_gbps: b,
        seed,
        metrics: RunMetrics::from_run(&raw)?,
    })
}

fn write_outputs(spec: &SweepSpec, points: &[MetricPoint]) -> Result<Vec<PathBuf>, SweepError> {
    let mut written = Vec::new();
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SweepError::Io { path, source }
    };
    if spec.format.csv() {
        let path = spec.out_dir.join("metrics.csv");
        let file = File::create(&path).map_err(io_err(&path))?;
        metrics::write_csv(points, BufWriter::new(file)).map_err(|e| SweepError::Io {
            path: path.clone(),
            source: e.into(),
        })?;
        written.push(path);
    }
    if spec.format.json() {
        let path = spec.out_dir.join("metrics.json");
        let file = File::create(&path).map_err(io_err(&path))?;
        metrics::write_json(points, BufWriter::new(file)).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Runs every (policy, ρ, B, seed) replica in parallel and writes the
/// aggregated metrics. Points whose replicas all succeeded are written even
/// if others failed; the failure is then reported as an error.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome, SweepError> {
    spec.validate()?;
    let net = spec.load_network()?;
    let out_dir = &spec.out_dir;
    fs::create_dir_all(out_dir).map_err(|source| SweepError::Io {
        path: out_dir.clone(),
        source,
    })?;
    if spec.raw_logs {
        let raw = out_dir.join("raw");
        fs::create_dir_all(&raw).map_err(|source| SweepError::Io { path: raw, source })?;
    }

    let points = spec.points();
    let cells: Vec<_> = points
        .iter()
        .flat_map(|&(p, b, rho)| spec.seeds.iter().map(move |&seed| (p, b, rho, seed)))
        .collect();
    let total = cells.len();
    let done = AtomicUsize::new(0);
    let results: Vec<Result<ReplicaResult, CellError>> = cells
        .par_iter()
        .map(|&(p, b, rho, seed)| {
            let res = run_cell(&net, spec, p, b, rho, seed);
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            if n.is_multiple_of(10) || n == total {
                eprintln!("[{n}/{total}] replicas done");
            }
            res
        })
        .collect();

    let per_point = spec.seeds.len();
    let mut metric_points = Vec::new();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (i, &(p, b, rho)) in points.iter().enumerate() {
        let chunk = &results[i * per_point..(i + 1) * per_point];
        let mut ok = Vec::new();
        for (res, &seed) in chunk.iter().zip(&spec.seeds) {
            match res {
                Ok(r) => ok.push(r.clone()),
                Err(e) => failures.push(format!("{} B={b} rho={rho} seed={seed}: {e}", p.name())),
            }
        }
        if ok.len() == per_point {
            let m: Vec<_> = ok.iter().map(|r| r.metrics.clone()).collect();
            metric_points.push(MetricPoint::aggregate(p, rho, b, spec.k, &m));
        }
        runs.extend(ok);
    }

    let written = write_outputs(spec, &metric_points)?;
    if let Some(first) = failures.first() {
        return Err(SweepError::Replicas {
            failed: failures.len(),
            total,
            first: first.clone(),
        });
    }
    Ok(SweepOutcome {
        points: metric_points,
        runs,
        written,
    })
}

/// Human-readable table ordered policy × B × ρ.
pub fn format_table(points: &[MetricPoint]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<8} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "policy", "B", "rho", "BP", "+/-", "BBP", "+/-", "util"
    );
    for p in points {
        let _ = writeln!(
            s,
            "{:<8} {:>6} {:>6} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            p.policy.name(),
            p.demand_max_gbps,
            p.rho,
            p.bp,
            p.bp_hw,
            p.bbp,
            p.bbp_hw,
            p.util
        );
    }
    s
}

/// Per-policy routing time.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub policy: PolicyKind,
    pub requests: usize,
    pub median_ns: u64,
    pub mean_ns: f64,
    pub p90_ns: u64,
}

/// Times every routing decision of one replica per policy at load `rho`,
/// using the first B and seed of `spec`. Replicas run sequentially so
/// timings do not interfere.
pub fn bench_policies(spec: &SweepSpec, rho: f64) -> Result<Vec<BenchRow>, SweepError> {
    spec.validate()?;
    let net = spec.load_network()?;
    let b = spec.bandwidths[0];
    let seed = spec.seeds[0];
    let mut rows = Vec::new();
    for &policy in &spec.policies {
        let mut cfg = spec.sim_config(policy, rho, b, seed);
        cfg.record_timing = true;
        cfg.check_invariants = false;
        let raw = traffic::run(&net, &cfg).map_err(|e| SweepError::Replicas {
            failed: 1,
            total: 1,
            first: e.to_string(),
        })?;
        let mut t = raw.routing_ns;
        t.sort_unstable();
        let n = t.len();
        rows.push(BenchRow {
            policy,
            requests: n,
            median_ns: t[n / 2],
            mean_ns: t.iter().sum::<u64>() as f64 / n as f64,
            p90_ns: t[(n * 9 / 10).min(n - 1)],
        });
    }
    Ok(rows)
}

pub fn format_bench(rows: &[BenchRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<8} {:>9} {:>12} {:>12} {:>12}",
        "policy", "requests", "median_ns", "mean_ns", "p90_ns"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<8} {:>9} {:>12} {:>12.0} {:>12}",
            r.policy.name(),
            r.requests,
            r.median_ns,
            r.mean_ns,
            r.p90_ns
        );
    }
    s
}

/// Parses a `key=value` document. Blank lines and `#` comments are
/// skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, SweepError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(SweepError::Usage(format!(
                "config line {}: expected key=value",
                i + 1
            )));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses `2,4,6` or the inclusive range `2:30:2` (start:end:step).
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if let [a, b, step] = s.split(':').collect::<Vec<_>>().as_slice() {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if !(step > 0.0) || b < a {
            return Err(format!("bad range {s:?}"));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + i as f64 * step).collect());
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

/// Parses `1,2,3` or the inclusive range `1-5`.
pub fn parse_seed_list(s: &str) -> Result<Vec<u64>, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('-') {
        let a: u64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if b < a {
            return Err(format!("bad seed range {s:?}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<u64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsing() {
        assert_eq!(parse_f64_list("2,4, 6").unwrap(), vec![2.0, 4.0, 6.0]);
        let r = parse_f64_list("2:30:2").unwrap();
        assert_eq!(r.len(), 15);
        assert_eq!(r[14], 30.0);
        assert_eq!(parse_f64_list("2:30:4").unwrap().len(), 8);
        assert!(parse_f64_list("2:1:1").is_err());
        assert!(parse_f64_list("a").is_err());
        assert_eq!(parse_seed_list("1-5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_seed_list("7,9").unwrap(), vec![7, 9]);
        assert!(parse_seed_list("5-1").is_err());
    }

    #[test]
    fn default_grid_matches_experiments() {
        let spec = SweepSpec::default();
        assert_eq!(spec.rhos.first(), Some(&2.0));
        assert_eq!(spec.rhos.last(), Some(&30.0));
        assert_eq!(spec.rhos.len(), 15);
        assert_eq!(spec.bandwidths, vec![100.0, 200.0]);
        assert_eq!(spec.k, 10);
        assert_eq!(spec.total_requests, 200_000);
        assert_eq!(spec.points().len(), 6 * 2 * 15);
    }

    #[test]
    fn config_keys_and_presets() {
        let mut spec = SweepSpec::default();
        let cfg = parse_config(
            "# desk run\npreset = desk\npolicy = sp_km,TYPE2\nrho=2:10:4\nB=100\nformat=both\nraw-logs=yes\n",
        )
        .unwrap();
        for (k, v) in &cfg {
            spec.apply(k, v).unwrap();
        }
        assert_eq!(spec.total_requests, 20_000);
        assert_eq!(spec.seeds, vec![1, 2, 3, 4, 5]);
        assert_eq!(spec.policies, vec![PolicyKind::SpKm, PolicyKind::Type2]);
        assert_eq!(spec.rhos, vec![2.0, 6.0, 10.0]);
        assert_eq!(spec.format, OutputFormat::Both);
        assert!(spec.raw_logs);
        spec.apply("requests", "500").unwrap();
        assert_eq!(spec.total_requests, 500);
        assert!(spec.apply("nonsense", "1").is_err());
        assert!(spec.apply("format", "xml").is_err());
        assert!(spec.apply("preset", "huge").is_err());
        assert!(parse_config("just words").is_err());
    }

    #[test]
    fn validation_errors() {
        let spec = SweepSpec {
            topology: PathBuf::from("/nonexistent/net.topo"),
            ..SweepSpec::default()
        };
        assert!(matches!(spec.validate(), Err(SweepError::Usage(_))));
        let spec = SweepSpec {
            seeds: vec![],
            ..SweepSpec::default()
        };
        assert!(matches!(spec.validate(), Err(SweepError::Usage(m)) if m.contains("seeds")));
    }
}
