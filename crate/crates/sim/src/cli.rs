//! Command-line front end: `sim run`, `sim gen`, `sim compare`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rpm_sync::{Routing, DEFAULT_TTL_SECONDS};

use crate::compare::compare;
use crate::engine::{run, SimConfig, INFINITE_TTL};
use crate::trace::{
    generate_trace_with, node_names, read_trace_csv, write_trace_csv, ContactEvent, TraceParams,
    DEFAULT_BANDWIDTH, DEFAULT_CONTACT_DURATION,
};
use crate::workload::{generate_workload, read_workload_csv, write_workload_csv, Workload};

#[derive(Debug, Parser)]
#[command(name = "sim", about = "Store-and-forward delivery simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a trace against a workload and write a JSON report.
    Run(RunArgs),
    /// Generate a synthetic Poisson contact trace (and optionally a workload).
    Gen(GenArgs),
    /// Run several routing configurations on the same inputs.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RoutingArg {
    Epidemic,
    Direct,
}

impl From<RoutingArg> for Routing {
    fn from(r: RoutingArg) -> Self {
        match r {
            RoutingArg::Epidemic => Routing::Epidemic,
            RoutingArg::Direct => Routing::Direct,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

fn parse_ttl(s: &str) -> Result<u64, String> {
    match s {
        "inf" | "infinite" => Ok(INFINITE_TTL),
        _ => match s.parse::<u64>() {
            Ok(0) => Err("ttl must be positive".into()),
            Ok(n) => Ok(n),
            Err(e) => Err(e.to_string()),
        },
    }
}

#[derive(Debug, Args)]
pub struct Inputs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub workload: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seconds of simulated time.
    #[arg(long)]
    pub horizon: f64,
    /// Bundle lifetime in seconds, or `inf`.
    #[arg(long, value_parser = parse_ttl, default_value_t = DEFAULT_TTL_SECONDS)]
    pub ttl: u64,
    /// Bundles per second for contacts with a blank bandwidth.
    #[arg(long, default_value_t = DEFAULT_BANDWIDTH)]
    pub bandwidth: f64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, value_enum, default_value = "epidemic")]
    pub routing: RoutingArg,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Event log path, one JSON object per line.
    #[arg(long)]
    pub events: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub nodes: usize,
    /// Contacts per second for each pair of nodes.
    #[arg(long)]
    pub rate: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 86_400.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = DEFAULT_CONTACT_DURATION)]
    pub duration: f64,
    #[arg(long, default_value_t = DEFAULT_BANDWIDTH)]
    pub bandwidth: f64,
    /// Trace CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a random workload of this many messages.
    #[arg(long, requires = "workload_out")]
    pub messages: Option<usize>,
    #[arg(long)]
    pub workload_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Routings to compare, first is the baseline.
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["epidemic", "direct"])]
    pub routing: Vec<RoutingArg>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load(inputs: &Inputs) -> Result<(Vec<ContactEvent>, Workload)> {
    let trace = read_trace_csv(BufReader::new(
        File::open(&inputs.trace).with_context(|| format!("opening {}", inputs.trace.display()))?,
    ))?;
    let workload = read_workload_csv(BufReader::new(
        File::open(&inputs.workload).with_context(|| format!("opening {}", inputs.workload.display()))?,
    ))?;
    Ok((trace, workload))
}

fn config(inputs: &Inputs, routing: RoutingArg) -> SimConfig {
    SimConfig::new(routing.into(), inputs.seed, inputs.horizon)
        .with_ttl(inputs.ttl)
        .with_bandwidth(inputs.bandwidth)
}

fn emit(path: Option<&Path>, stdout: &mut dyn Write, body: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?,
        None => stdout.write_all(body)?,
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command, writing any
/// stdout output to `stdout`.
pub fn execute<I, T>(args: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    match cli.command {
        Command::Run(a) => {
            let (trace, workload) = load(&a.inputs)?;
            let out = run(&trace, &workload, &config(&a.inputs, a.routing))?;
            let mut body = out.report.to_json();
            body.push('\n');
            emit(a.out.as_deref(), stdout, body.as_bytes())?;
            if let Some(p) = &a.events {
                let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
                for e in &out.events {
                    serde_json::to_writer(&mut w, e)?;
                    w.write_all(b"\n")?;
                }
                w.flush()?;
            }
        }
        Command::Gen(a) => {
            let params = TraceParams {
                duration: a.duration,
                bandwidth: a.bandwidth,
            };
            let trace = generate_trace_with(a.nodes, a.horizon, a.rate, a.seed, params)?;
            let mut buf = Vec::new();
            write_trace_csv(&mut buf, &trace)?;
            emit(a.out.as_deref(), stdout, &buf)?;
            if let (Some(n), Some(p)) = (a.messages, &a.workload_out) {
                let workload = generate_workload(&node_names(a.nodes), n, a.horizon, a.seed);
                let mut buf = Vec::new();
                write_workload_csv(&mut buf, &workload)?;
                std::fs::write(p, buf).with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Command::Compare(a) => {
            if a.routing.len() < 2 {
                bail!("compare needs at least two --routing values");
            }
            let (trace, workload) = load(&a.inputs)?;
            let configs: Vec<SimConfig> = a.routing.iter().map(|r| config(&a.inputs, *r)).collect();
            let cmp = compare(&trace, &workload, &configs)?;
            let body = match a.format {
                Format::Json => cmp.to_json() + "\n",
                Format::Table => cmp.to_table(),
            };
            emit(a.out.as_deref(), stdout, body.as_bytes())?;
        }
    }
    Ok(())
}
