use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flexgrid_rsa::sweep::{self, SweepError, SweepSpec};

/// Routing and spectrum assignment simulator for flexible-grid optical
/// networks.
#[derive(Debug, Parser)]
#[command(name = "flexgrid-rsa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a load sweep and write aggregated metrics.
    Sweep(SpecArgs),
    /// Time per-request routing for each policy at a fixed load.
    Bench {
        #[command(flatten)]
        spec: SpecArgs,
        /// Offered load per node used for timing.
        #[arg(long, default_value_t = 20.0)]
        at_rho: f64,
    },
}

#[derive(Debug, Args)]
struct SpecArgs {
    /// key=value file with the same option names as the flags below.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    topology: Option<String>,
    /// Comma-separated policies: SP_KM, SP_HOPS, KSP_KM, TYPE1, TYPE2, TYPE3.
    #[arg(long)]
    policy: Option<String>,
    /// Offered loads per node, `2,4,6` or `2:30:2`.
    #[arg(long)]
    rho: Option<String>,
    /// Maximum demanded bandwidths in Gbps.
    #[arg(long = "B")]
    b: Option<String>,
    #[arg(long)]
    k: Option<String>,
    /// Seeds, `1,2,3` or `1-5`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    requests: Option<String>,
    #[arg(long, env = "FLEXGRID_RSA_OUT")]
    out: Option<String>,
    /// desk (2e4 requests, 5 seeds) or paper (2e5 requests, 10 seeds).
    #[arg(long)]
    preset: Option<String>,
    /// csv, json or both.
    #[arg(long)]
    format: Option<String>,
    /// Write per-replica NDJSON request logs under OUT/raw.
    #[arg(long)]
    raw_logs: bool,
    /// Grid size in GHz.
    #[arg(long)]
    grid: Option<String>,
    /// Guard band in GHz.
    #[arg(long)]
    gb: Option<String>,
    /// Bits per symbol.
    #[arg(long)]
    m: Option<String>,
    /// Mean holding time in seconds.
    #[arg(long)]
    holding: Option<String>,
    /// Warm-up length in mean holding times.
    #[arg(long)]
    warmup: Option<String>,
    /// Demand distribution: slots or continuous.
    #[arg(long)]
    demand: Option<String>,
    #[arg(long)]
    frontier_cap: Option<String>,
    /// Verify spectrum invariants after every event.
    #[arg(long)]
    check_invariants: bool,
}

impl SpecArgs {
    fn build(&self) -> Result<SweepSpec, SweepError> {
        let mut spec = SweepSpec::default();
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| SweepError::Usage(format!("reading config {path}: {e}")))?;
                sweep::parse_config(&text)?
            }
            None => Vec::new(),
        };
        // preset first so explicit options override it
        let preset = self.preset.clone().or_else(|| {
            file.iter()
                .find(|(k, _)| k == "preset")
                .map(|(_, v)| v.clone())
        });
        if let Some(p) = preset {
            spec.apply_preset(&p)?;
        }
        for (k, v) in file.iter().filter(|(k, _)| k != "preset") {
            spec.apply(k, v)?;
        }
        let flags = [
            ("topology", &self.topology),
            ("policy", &self.policy),
            ("rho", &self.rho),
            ("B", &self.b),
            ("k", &self.k),
            ("seeds", &self.seeds),
            ("requests", &self.requests),
            ("out", &self.out),
            ("format", &self.format),
            ("grid", &self.grid),
            ("gb", &self.gb),
            ("m", &self.m),
            ("holding", &self.holding),
            ("warmup", &self.warmup),
            ("demand", &self.demand),
            ("frontier_cap", &self.frontier_cap),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                spec.apply(key, v)?;
            }
        }
        if self.raw_logs {
            spec.raw_logs = true;
        }
        if self.check_invariants {
            spec.check_invariants = true;
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep(args) => {
            let spec = match args.build() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match sweep::run_sweep(&spec) {
                Ok(outcome) => {
                    print!("{}", sweep::format_table(&outcome.points));
                    for path in &outcome.written {
                        eprintln!("wrote {}", path.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e @ SweepError::Usage(_)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Bench { spec, at_rho } => {
            let spec = match spec.build() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match sweep::bench_policies(&spec, at_rho) {
                Ok(rows) => {
                    print!("{}", sweep::format_bench(&rows));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
