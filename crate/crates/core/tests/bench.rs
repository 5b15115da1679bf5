use flexgrid_rsa::sweep::{bench_policies, format_bench, SweepSpec};
use flexgrid_rsa::topology::NSFNET_TOPO;
use flexgrid_rsa::PolicyKind;

#[test]
fn shortest_path_routes_faster_than_type1() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("nsfnet.topo");
    std::fs::write(&topo, NSFNET_TOPO).unwrap();
    let spec = SweepSpec {
        topology: topo,
        policies: vec![PolicyKind::SpKm, PolicyKind::Type1],
        bandwidths: vec![100.0],
        total_requests: 20_000,
        ..SweepSpec::default()
    };
    let rows = bench_policies(&spec, 20.0).unwrap();
    println!("{}", format_bench(&rows));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.requests == 20_000));
    assert!(
        rows[0].median_ns <= rows[1].median_ns,
        "SP_KM median {} ns > TYPE1 median {} ns",
        rows[0].median_ns,
        rows[1].median_ns
    );
}
