use flexgrid_rsa::metrics::RunMetrics;
use flexgrid_rsa::sweep::{run_sweep, OutputFormat, SweepSpec};
use flexgrid_rsa::topology::{parse_topology, NSFNET_TOPO, USNET_TOPO};
use flexgrid_rsa::traffic::{run, SimConfig};
use flexgrid_rsa::PolicyKind;

fn cfg(policy: PolicyKind, rho: f64, seed: u64, requests: usize) -> SimConfig {
    SimConfig {
        policy,
        load_per_node: rho,
        seed,
        total_requests: requests,
        check_invariants: false,
        ..SimConfig::default()
    }
}

#[test]
fn rescaling_time_leaves_blocking_unchanged() {
    let net = parse_topology(NSFNET_TOPO, 12.5).unwrap();
    for policy in [PolicyKind::SpKm, PolicyKind::Type2] {
        let base = cfg(policy, 16.0, 3, 6000);
        let fast = SimConfig {
            mean_holding_time: base.mean_holding_time / 2.0,
            ..base.clone()
        };
        let slow = SimConfig {
            mean_holding_time: base.mean_holding_time * 8.0,
            ..base.clone()
        };
        let reference = RunMetrics::from_run(&run(&net, &base).unwrap()).unwrap();
        for scaled in [fast, slow] {
            let m = RunMetrics::from_run(&run(&net, &scaled).unwrap()).unwrap();
            assert!(
                (m.blocking_probability - reference.blocking_probability).abs() < 0.01,
                "{policy}: {} vs {}",
                m.blocking_probability,
                reference.blocking_probability
            );
            assert!((m.spectrum_utilization - reference.spectrum_utilization).abs() < 0.01);
        }
    }
}

#[test]
fn every_policy_restores_usnet_after_drain() {
    let net = parse_topology(USNET_TOPO, 12.5).unwrap();
    for policy in PolicyKind::ALL {
        let mut c = cfg(policy, 12.0, 7, 1500);
        c.check_invariants = true;
        let raw = run(&net, &c).unwrap();
        assert_eq!(raw.requests.len(), 1500);
        let m = RunMetrics::from_run(&raw).unwrap();
        assert_eq!(m.frontier_cap_hits, 0);
        for v in [
            m.blocking_probability,
            m.bandwidth_blocking_probability,
            m.spectrum_utilization,
        ] {
            assert!((0.0..=1.0).contains(&v), "{policy}: {v}");
        }
    }
}

#[test]
fn replicas_repeat_exactly() {
    let net = parse_topology(NSFNET_TOPO, 12.5).unwrap();
    for policy in PolicyKind::ALL {
        let c = cfg(policy, 20.0, 11, 3000);
        assert_eq!(run(&net, &c).unwrap(), run(&net, &c).unwrap());
    }
}

#[test]
fn seeds_share_traffic_across_policies() {
    // common random numbers: the request stream does not depend on the policy
    let net = parse_topology(NSFNET_TOPO, 12.5).unwrap();
    let a = run(&net, &cfg(PolicyKind::SpKm, 20.0, 5, 2000)).unwrap();
    let b = run(&net, &cfg(PolicyKind::Type3, 20.0, 5, 2000)).unwrap();
    let key =
        |r: &flexgrid_rsa::traffic::RequestRecord| (r.arrival_time, r.s, r.d, r.required_slots);
    assert!(a.requests.iter().map(key).eq(b.requests.iter().map(key)));
}

#[test]
fn load_grid_produces_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("nsfnet.topo");
    std::fs::write(&topo, NSFNET_TOPO).unwrap();
    let spec = SweepSpec {
        topology: topo,
        bandwidths: vec![100.0],
        total_requests: 200,
        warmup_multiplier: 0.0,
        out_dir: dir.path().join("out"),
        format: OutputFormat::Both,
        raw_logs: true,
        ..SweepSpec::default()
    };
    let outcome = run_sweep(&spec).unwrap();
    assert_eq!(outcome.points.len(), 6 * 15);
    assert_eq!(outcome.runs.len(), 6 * 15);
    let csv = std::fs::read_to_string(dir.path().join("out/metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6 * 15);
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/metrics.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json.as_array().unwrap().len(), 6 * 15);
    let raw = dir.path().join("out/raw/TYPE2_B100_rho20_seed1.ndjson");
    let lines = std::fs::read_to_string(raw).unwrap();
    assert_eq!(lines.lines().count(), 200);
    let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    for field in ["id", "arrival", "s", "d", "slots", "decision", "warmup"] {
        assert!(first.get(field).is_some(), "missing {field}");
    }
}
