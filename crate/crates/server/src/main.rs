use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::IpAddr;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use evocraft_core::experiments::bench::{bench_cubes, bench_machines};
use evocraft_core::experiments::mover::run_mover;
use evocraft_core::experiments::tower::run_tower;
use evocraft_core::experiments::{BackendSpec, ExperimentConfig, RunLog, Task};
use evocraft_core::{BackendError, LocalBackend, TickRate, WorldBackend};
use evocraft_server::service::{serve, ServeConfig};
use evocraft_server::{RemoteBackend, DEFAULT_PORT};

#[derive(Parser, Debug)]
#[command(name = "evocraft", version, about = "Headless voxel simulator for open-ended evolution experiments")]
struct Cli {
    /// Log filter, e.g. `info` or `evocraft_server=debug`.
    #[arg(long, global = true, default_value = "info")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve towers towards a gold block with the tree GA.
    Tower(RunArgs),
    /// Evolve moving machines with the ES over MLP genomes.
    Mover(RunArgs),
    /// Time filling and clearing cubes of growing size.
    BenchCubes(BenchCubesArgs),
    /// Find how many flying machines hold 20 ticks/s.
    BenchMachines(BenchMachinesArgs),
    /// Serve the world over gRPC.
    Serve(ServeArgs),
    /// Serve the interactive evolution HTTP API.
    Iec(IecArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON config; missing fields take the task defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    generations: Option<u64>,
    /// Run against a world server at host:port instead of in-process.
    #[arg(long)]
    remote: Option<String>,
    /// Run log destination (JSON lines); stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `generation<TAB>best` rows here.
    #[arg(long)]
    tsv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchCubesArgs {
    #[arg(long, default_value_t = 31)]
    max_n: u64,
    #[arg(long)]
    remote: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchMachinesArgs {
    #[arg(long, default_value_t = 4096)]
    max_count: usize,
    #[arg(long, default_value_t = 400)]
    ticks: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    /// Step as fast as possible instead of 20 ticks/s.
    #[arg(long)]
    unthrottled: bool,
    /// Let the world tick on its own between requests.
    #[arg(long)]
    free_run: bool,
    /// Reserved for stochastic block behaviour; currently ignored.
    #[arg(long)]
    world_seed: Option<u64>,
}

#[derive(Args, Debug)]
struct IecArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn backend_for(remote: Option<&str>, spec: &BackendSpec) -> Result<Box<dyn WorldBackend>> {
    let address = match (remote, spec) {
        (Some(a), _) => a.to_string(),
        (None, BackendSpec::Remote { address }) => address.clone(),
        (None, BackendSpec::InProcess) => return Ok(Box::new(LocalBackend::new())),
    };
    let mut b = RemoteBackend::connect(&address).with_context(|| format!("connecting to {address}"))?;
    // Evaluation speed is the client's business; servers without the control keep their pace.
    match b.set_tick_rate(TickRate::Unthrottled) {
        Ok(()) | Err(BackendError::Unsupported(_)) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(Box::new(b))
}

fn run_experiment(task: Task, args: RunArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(p) => ExperimentConfig::from_json_file(p).map_err(anyhow::Error::msg)?,
        None => ExperimentConfig::for_task(task, args.seed.unwrap_or(0)),
    };
    if config.task != task {
        bail!("config is for task {:?}, not {:?}", config.task, task);
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(g) = args.generations {
        config.generations = g;
    }
    let mut backend = backend_for(args.remote.as_deref(), &config.backend)?;
    let log: RunLog = match task {
        Task::Tower => run_tower(&config, backend.as_mut())?,
        Task::Mover => run_mover(&config, backend.as_mut())?,
        _ => unreachable!("only evolutionary tasks reach here"),
    };
    log.write_jsonl(output(args.out.as_ref())?)?;
    if let Some(p) = &args.tsv {
        std::fs::write(p, log.to_tsv()).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(last) = log.records.last() {
        eprintln!("seed {} finished {} generations, final best {:.4}", config.seed, log.records.len(), last.best);
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(out: Option<&PathBuf>, value: &T) -> Result<()> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_new(&cli.log_level).context("bad --log-level")?)
        .with_writer(io::stderr)
        .init();

    match cli.command {
        Command::Tower(a) => run_experiment(Task::Tower, a),
        Command::Mover(a) => run_experiment(Task::Mover, a),
        Command::BenchCubes(a) => {
            let mut backend = backend_for(a.remote.as_deref(), &BackendSpec::InProcess)?;
            let report = bench_cubes(backend.as_mut(), a.max_n)?;
            for r in &report.rows {
                eprintln!("n={:>3} fill {:>8.3} ms  clear {:>8.3} ms", r.n, r.fill_ms, r.clear_ms);
            }
            write_json(a.out.as_ref(), &report)
        }
        Command::BenchMachines(a) => {
            let report = bench_machines(a.max_count, a.ticks);
            for r in &report.rows {
                eprintln!("{:>6} machines {:>9.1} ticks/s", r.machines, r.ticks_per_sec);
            }
            eprintln!("largest count holding 20 ticks/s: {}", report.max_sustained);
            write_json(a.out.as_ref(), &report)
        }
        Command::Serve(a) => {
            if let Some(seed) = a.world_seed {
                tracing::info!(seed, "world seed accepted; the simulation is fully deterministic and does not use it");
            }
            let config = ServeConfig { host: a.host, port: a.port, unthrottled: a.unthrottled, free_run: a.free_run, world_seed: a.world_seed };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let handle = serve(&config).await?;
                eprintln!("listening on {}", handle.local_addr());
                handle.wait().await?;
                Ok(())
            })
        }
        Command::Iec(a) => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind((a.host, a.port))
                    .await
                    .with_context(|| format!("binding {}:{}", a.host, a.port))?;
                eprintln!("interactive evolution API on http://{}", listener.local_addr()?);
                evocraft_server::http::serve_http(listener).await?;
                Ok(())
            })
        }
    }
}
