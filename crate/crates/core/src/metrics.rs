//! Blocking probability, bandwidth blocking probability and spectrum
//! utilization, per run and aggregated over seeds.

use std::io::{self, Write};

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::rsa::PolicyKind;
use crate::traffic::{RawRunRecord, RequestRecord, UtilSample};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no post-warm-up arrivals; metric undefined")]
    NoArrivals,
    #[error("no utilization samples")]
    NoSamples,
}

/// Blocked over arrived, for the given requests.
pub fn blocking_probability<'a>(
    records: impl IntoIterator<Item = &'a RequestRecord>,
) -> Result<f64, MetricsError> {
    let (mut arrived, mut blocked) = (0usize, 0usize);
    for r in records {
        arrived += 1;
        blocked += r.is_blocked() as usize;
    }
    if arrived == 0 {
        return Err(MetricsError::NoArrivals);
    }
    Ok(blocked as f64 / arrived as f64)
}

/// Blocked slots over demanded slots, guard band included on both sides.
pub fn bandwidth_blocking_probability<'a>(
    records: impl IntoIterator<Item = &'a RequestRecord>,
) -> Result<f64, MetricsError> {
    let (mut demanded, mut blocked) = (0usize, 0usize);
    let mut any = false;
    for r in records {
        any = true;
        demanded += r.required_slots;
        if r.is_blocked() {
            blocked += r.required_slots;
        }
    }
    if !any || demanded == 0 {
        return Err(MetricsError::NoArrivals);
    }
    Ok(blocked as f64 / demanded as f64)
}

/// Time average of occupied over total real slots on `[start, end]`.
///
/// `samples` is a step function: each value holds from its time until the
/// next sample. Guard-band slots count as occupied. When the window is a
/// single instant the value in effect at that instant is returned.
pub fn spectrum_utilization(
    samples: &[UtilSample],
    total_real_slots: usize,
    start: f64,
    end: f64,
) -> Result<f64, MetricsError> {
    if samples.is_empty() || total_real_slots == 0 {
        return Err(MetricsError::NoSamples);
    }
    let total = total_real_slots as f64;
    let value_at = |t: f64| {
        samples
            .iter()
            .take_while(|s| s.time <= t)
            .last()
            .map_or(0, |s| s.occupied_slots)
    };
    if end <= start {
        return Ok(value_at(start) as f64 / total);
    }
    let mut area = 0.0;
    for (i, s) in samples.iter().enumerate() {
        let seg_end = samples.get(i + 1).map_or(end, |n| n.time);
        let lo = s.time.max(start);
        let hi = seg_end.min(end);
        if hi > lo {
            area += s.occupied_slots as f64 * (hi - lo);
        }
    }
    Ok(area / ((end - start) * total))
}

/// Metrics of one replica.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub arrived: usize,
    pub blocked: usize,
    pub blocking_probability: f64,
    pub bandwidth_blocking_probability: f64,
    pub spectrum_utilization: f64,
    pub post_routing_blocks: usize,
    pub frontier_cap_hits: usize,
}

impl RunMetrics {
    pub fn from_run(run: &RawRunRecord) -> Result<Self, MetricsError> {
        let arrived = run.measured().count();
        let blocked = run.measured().filter(|r| r.is_blocked()).count();
        Ok(Self {
            arrived,
            blocked,
            blocking_probability: blocking_probability(run.measured())?,
            bandwidth_blocking_probability: bandwidth_blocking_probability(run.measured())?,
            spectrum_utilization: spectrum_utilization(
                &run.utilization,
                run.total_real_slots,
                run.warmup_end.min(run.last_arrival),
                run.last_arrival,
            )?,
            post_routing_blocks: run.post_routing_blocks(),
            frontier_cap_hits: run.frontier_cap_hits,
        })
    }
}

/// Sample mean and 95% confidence half-width (Student t). The half-width
/// is zero for a single sample.
pub fn mean_and_half_width(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("degrees of freedom positive")
        .inverse_cdf(0.975);
    (mean, t * (var / n as f64).sqrt())
}

/// One sweep point aggregated over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricPoint {
    pub policy: PolicyKind,
    pub rho: f64,
    #[serde(rename = "B")]
    pub demand_max_gbps: f64,
    pub k: usize,
    pub seed_count: usize,
    pub bp: f64,
    pub bp_hw: f64,
    pub bbp: f64,
    pub bbp_hw: f64,
    pub util: f64,
    pub util_hw: f64,
}

impl MetricPoint {
    pub fn aggregate(
        policy: PolicyKind,
        rho: f64,
        demand_max_gbps: f64,
        k: usize,
        runs: &[RunMetrics],
    ) -> Self {
        let pick = |f: fn(&RunMetrics) -> f64| {
            mean_and_half_width(&runs.iter().map(f).collect::<Vec<_>>())
        };
        let (bp, bp_hw) = pick(|r| r.blocking_probability);
        let (bbp, bbp_hw) = pick(|r| r.bandwidth_blocking_probability);
        let (util, util_hw) = pick(|r| r.spectrum_utilization);
        Self {
            policy,
            rho,
            demand_max_gbps,
            k,
            seed_count: runs.len(),
            bp,
            bp_hw,
            bbp,
            bbp_hw,
            util,
            util_hw,
        }
    }

    pub fn bp_interval(&self) -> (f64, f64) {
        (self.bp - self.bp_hw, self.bp + self.bp_hw)
    }
}

/// Header of the metrics CSV.
pub const CSV_HEADER: [&str; 11] = [
    "policy",
    "rho",
    "B",
    "k",
    "seed_count",
    "bp",
    "bp_hw",
    "bbp",
    "bbp_hw",
    "util",
    "util_hw",
];

pub fn write_csv(points: &[MetricPoint], out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for p in points {
        w.write_record(&[
            p.policy.name().to_string(),
            p.rho.to_string(),
            p.demand_max_gbps.to_string(),
            p.k.to_string(),
            p.seed_count.to_string(),
            p.bp.to_string(),
            p.bp_hw.to_string(),
            p.bbp.to_string(),
            p.bbp_hw.to_string(),
            p.util.to_string(),
            p.util_hw.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(points: &[MetricPoint], mut out: impl Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, points)?;
    out.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SlotRange;
    use crate::topology::{EdgeSpec, Network};
    use crate::traffic;

    fn rec(slots: usize, blocked: bool) -> RequestRecord {
        RequestRecord {
            id: 0,
            arrival_time: 0.0,
            s: 0,
            d: 1,
            demanded_gbps: 0.0,
            required_slots: slots,
            served: (!blocked).then(|| (vec![0, 1], SlotRange::new(0, slots))),
            block_reason: None,
            warmup: false,
        }
    }

    #[test]
    fn blocking_ratios() {
        let none: Vec<_> = (0..1000).map(|_| rec(3, false)).collect();
        assert_eq!(blocking_probability(&none).unwrap(), 0.0);
        assert_eq!(bandwidth_blocking_probability(&none).unwrap(), 0.0);

        let some: Vec<_> = (0..1000).map(|i| rec(3, i < 25)).collect();
        assert_eq!(blocking_probability(&some).unwrap(), 0.025);
        assert_eq!(bandwidth_blocking_probability(&some).unwrap(), 0.025);

        let mixed = [rec(9, true), rec(2, false)];
        assert_eq!(blocking_probability(&mixed).unwrap(), 0.5);
        assert_eq!(bandwidth_blocking_probability(&mixed).unwrap(), 9.0 / 11.0);

        assert_eq!(blocking_probability(&[]), Err(MetricsError::NoArrivals));
        assert_eq!(
            bandwidth_blocking_probability(&[]),
            Err(MetricsError::NoArrivals)
        );
    }

    #[test]
    fn hand_traced_scenario_metrics() {
        let cfg = traffic::tests::two_request_config();
        let run = traffic::run(&traffic::tests::two_node(4), &cfg).unwrap();
        let m = RunMetrics::from_run(&run).unwrap();
        assert_eq!((m.arrived, m.blocked), (2, 1));
        assert_eq!(m.blocking_probability, 0.5);
        assert_eq!(m.bandwidth_blocking_probability, 0.5);
        // link busy from the first arrival onward inside the window
        let first = run.requests[0].arrival_time;
        let last = run.requests[1].arrival_time;
        let expected = (last - first) / last;
        assert!((m.spectrum_utilization - expected).abs() < 1e-12);
    }

    #[test]
    fn utilization_examples() {
        let idle = [UtilSample {
            time: 0.0,
            occupied_slots: 0,
        }];
        assert_eq!(spectrum_utilization(&idle, 7040, 0.0, 10.0).unwrap(), 0.0);

        let one = [
            UtilSample {
                time: 0.0,
                occupied_slots: 0,
            },
            UtilSample {
                time: 1.0,
                occupied_slots: 8,
            },
            UtilSample {
                time: 5.0,
                occupied_slots: 0,
            },
        ];
        let u = spectrum_utilization(&one, 22 * 320, 2.0, 4.0).unwrap();
        assert!((u - 8.0 / 7040.0).abs() < 1e-15);
        assert!((u - 0.001136).abs() < 1e-6);
        // half of [0, 2] idle, half busy
        let half = spectrum_utilization(&one, 22 * 320, 0.0, 2.0).unwrap();
        assert!((half - 4.0 / 7040.0).abs() < 1e-15);
        // instantaneous window
        assert_eq!(spectrum_utilization(&one, 8, 3.0, 3.0).unwrap(), 1.0);

        let full = [UtilSample {
            time: 0.0,
            occupied_slots: 320,
        }];
        assert_eq!(spectrum_utilization(&full, 320, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(
            spectrum_utilization(&[], 320, 0.0, 1.0),
            Err(MetricsError::NoSamples)
        );
    }

    #[test]
    fn utilization_excludes_padding_from_denominator() {
        let net = Network::new(
            3,
            &[
                EdgeSpec::new(0, 1, 1.0, 62.5),
                EdgeSpec::new(1, 2, 1.0, 112.5),
            ],
            12.5,
        )
        .unwrap();
        assert_eq!(net.total_real_slots(), 14);
        let s = [UtilSample {
            time: 0.0,
            occupied_slots: 7,
        }];
        assert_eq!(
            spectrum_utilization(&s, net.total_real_slots(), 0.0, 1.0).unwrap(),
            0.5
        );
    }

    #[test]
    fn half_width_matches_t_table() {
        let (m, hw) = mean_and_half_width(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(m, 3.0);
        // t_{0.975,4} = 2.776445, s = sqrt(2.5)
        assert!((hw - 2.776445 * (2.5f64 / 5.0).sqrt()).abs() < 1e-5);
        assert_eq!(mean_and_half_width(&[0.3]), (0.3, 0.0));
    }

    #[test]
    fn csv_layout() {
        let run = RunMetrics {
            arrived: 10,
            blocked: 1,
            blocking_probability: 0.1,
            bandwidth_blocking_probability: 0.2,
            spectrum_utilization: 0.3,
            post_routing_blocks: 0,
            frontier_cap_hits: 0,
        };
        let p = MetricPoint::aggregate(PolicyKind::Type3, 20.0, 100.0, 10, &[run]);
        let mut out = Vec::new();
        write_csv(std::slice::from_ref(&p), &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "policy,rho,B,k,seed_count,bp,bp_hw,bbp,bbp_hw,util,util_hw\nTYPE3,20,100,10,1,0.1,0,0.2,0,0.3,0\n"
        );
        let mut js = Vec::new();
        write_json(&[p], &mut js).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&js).unwrap();
        let keys: Vec<_> = v[0].as_object().unwrap().keys().cloned().collect();
        let mut expected: Vec<_> = CSV_HEADER.iter().map(|s| s.to_string()).collect();
        expected.sort();
        let mut got = keys;
        got.sort();
        assert_eq!(got, expected);
        assert_eq!(v[0]["policy"], "TYPE3");
    }
}
