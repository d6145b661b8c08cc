use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use csn::corpus::{self, EXAMPLES};
use csn::engine::{Config, DeliveryPolicy, EnergyConfig};
use csn::extensions::Extensions;
use csn::field::FieldSpec;
use csn::network::{Network, SensorId};
use csn::num::Amount;
use csn::scheduler::{self, parse_trace, replay, RunConfig, ScheduledEvent};
use csn::syntax::{parse_network_in, pretty};

#[derive(Parser)]
#[command(name = "csn", version, about = "Interpreter and simulator for sensor-network calculus programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a network with a seeded random scheduler.
    Run {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: u64,
        /// Fire an event on a sensor before a step, as STEP:SENSOR.
        #[arg(long = "event", value_parser = parse_event)]
        events: Vec<ScheduledEvent>,
        /// Probability per step of an event on a random sensor.
        #[arg(long, default_value_t = 0.0)]
        event_rate: f64,
    },
    /// Replay a golden trace and report differences.
    Replay {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
        /// Trace file; defaults to the bundled trace for corpus examples.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
    /// Explore every interleaving up to the given bounds.
    Explore {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
        #[arg(long, default_value_t = 60)]
        max_depth: usize,
        #[arg(long, default_value_t = 200_000)]
        max_states: usize,
        /// Require every terminal state to hold a log entry of this intrinsic.
        #[arg(long)]
        require_log: Option<String>,
    },
    /// Parse a network file and print it back.
    Parse { file: PathBuf },
    /// Run the checks of the bundled examples.
    Corpus {
        /// Only this example.
        name: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// List the examples and exit.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Delivery {
    All,
    Nondet,
}

#[derive(Args)]
struct Opts {
    /// Cost of an internal step.
    #[arg(long, value_parser = parse_amount)]
    cin: Option<Amount>,
    /// Cost of a broadcast release.
    #[arg(long, value_parser = parse_amount)]
    cout: Option<Amount>,
    #[arg(long, value_enum)]
    delivery: Option<Delivery>,
    /// Comma-separated extensions: state, events, nonce.
    #[arg(long)]
    ext: Option<String>,
    /// Field spec replacing the file's `@field`.
    #[arg(long)]
    field: Option<String>,
    /// Print the canonical term after every step.
    #[arg(long)]
    emit_terms: bool,
}

fn parse_amount(s: &str) -> Result<Amount, String> {
    s.parse::<Amount>().map_err(|e| e.to_string())
}

fn parse_event(s: &str) -> Result<ScheduledEvent, String> {
    let (step, sensor) = s.split_once(':').ok_or("expected STEP:SENSOR")?;
    Ok(ScheduledEvent {
        step: step.parse().map_err(|_| format!("bad step `{step}`"))?,
        sensor: SensorId::new(sensor),
    })
}

struct Loaded {
    net: Network,
    example: Option<&'static corpus::Example>,
}

/// Reads a network file. A missing path that names a bundled example
/// loads the bundled copy.
fn load(file: &Path, opts: Option<&Opts>) -> Result<Loaded> {
    let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let (source, example) = match std::fs::read_to_string(file) {
        Ok(text) => (text, corpus::find(stem)),
        Err(e) => match corpus::find(stem) {
            Some(ex) => (ex.source.to_string(), Some(ex)),
            None => return Err(e).with_context(|| format!("cannot read {}", file.display())),
        },
    };
    let mut net = parse_network_in(&source, file.parent()).map_err(|e| anyhow!("{}:{e}", file.display()))?;
    if let Some(spec) = opts.and_then(|o| o.field.as_deref()) {
        net.field = Arc::new(FieldSpec::parse(spec, None).context("--field")?);
    }
    Ok(Loaded { net, example })
}

fn config(opts: &Opts, example: Option<&corpus::Example>, default_delivery: DeliveryPolicy) -> Result<Config> {
    let base = EnergyConfig::default();
    let energy = EnergyConfig::new(opts.cin.unwrap_or(base.c_in), opts.cout.unwrap_or(base.c_out))?;
    let delivery = match opts.delivery {
        Some(Delivery::All) => DeliveryPolicy::AllInRange,
        Some(Delivery::Nondet) => DeliveryPolicy::Nondeterministic,
        None => default_delivery,
    };
    let extensions = match &opts.ext {
        Some(list) => Extensions::parse_list(list).map_err(|e| anyhow!(e))?,
        None => example.map(|e| e.extensions).unwrap_or_default(),
    };
    Ok(Config {
        energy,
        delivery,
        extensions,
    })
}

fn print_log(net: &Network) {
    if net.log.is_empty() {
        return;
    }
    println!("log");
    for e in &net.log {
        println!("  {}  {}  {}{}", e.step, e.sensor, e.intrinsic, pretty::values(&e.args));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether the command's predicate held.
fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Run {
            file,
            opts,
            seed,
            max_steps,
            events,
            event_rate,
        } => {
            let loaded = load(&file, Some(&opts))?;
            let delivery = loaded.example.map(|e| e.delivery).unwrap_or_default();
            let mut cfg = RunConfig::random(seed);
            cfg.config = config(&opts, loaded.example, delivery)?;
            if !events.is_empty() || event_rate > 0.0 {
                cfg.config.extensions.events = true;
            }
            cfg.max_steps = max_steps;
            cfg.events = events;
            cfg.event_rate = event_rate;
            cfg.emit_terms = opts.emit_terms;
            let trace = scheduler::run(&loaded.net, &cfg)?;
            print!("{}", trace.render());
            print_log(&trace.last);
            Ok(true)
        }
        Command::Replay { file, opts, golden } => {
            let loaded = load(&file, Some(&opts))?;
            let text = match (&golden, loaded.example.and_then(|e| e.golden)) {
                (Some(path), _) => {
                    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?
                }
                (None, Some(bundled)) => bundled.to_string(),
                (None, None) => bail!("no golden trace given (use --golden)"),
            };
            let golden = parse_trace(&text)?;
            let mut cfg = RunConfig::random(0);
            cfg.config = config(&opts, loaded.example, DeliveryPolicy::Nondeterministic)?;
            cfg.emit_terms = opts.emit_terms;
            let report = replay(&loaded.net, &golden, &cfg)?;
            print!("{}", report.trace.render());
            print_log(&report.trace.last);
            for d in &report.diffs {
                println!("diff: {d}");
            }
            println!("{}", if report.matches() { "replay matches" } else { "replay differs" });
            Ok(report.matches())
        }
        Command::Explore {
            file,
            opts,
            max_depth,
            max_states,
            require_log,
        } => {
            let loaded = load(&file, Some(&opts))?;
            let mut cfg = RunConfig::exhaustive(max_depth, max_states);
            cfg.config = config(&opts, loaded.example, DeliveryPolicy::Nondeterministic)?;
            let report = scheduler::explore(&loaded.net, &cfg)?;
            println!("states     {}", report.state_count());
            println!("terminals  {}", report.terminals.len());
            for outcome in scheduler::Outcome::ALL {
                let n = report.terminals.iter().filter(|(_, o)| *o == outcome).count();
                if n > 0 {
                    println!("  {outcome}  {n}");
                }
            }
            println!("complete   {}", report.complete());
            if report.collisions > 0 {
                println!("hash collisions  {}", report.collisions);
            }
            match require_log {
                Some(intrinsic) => {
                    let holds = report.all_terminals(|n| n.log.iter().any(|e| e.intrinsic == intrinsic));
                    println!("every terminal logs {intrinsic}: {holds}");
                    Ok(holds)
                }
                None => Ok(true),
            }
        }
        Command::Parse { file } => {
            let loaded = load(&file, None)?;
            let printed = pretty::network(&loaded.net);
            let again = parse_network_in(&printed, file.parent()).map_err(|e| anyhow!("reparse: {e}"))?;
            if again != loaded.net {
                bail!("printed network does not parse back to the same term");
            }
            print!("{printed}");
            Ok(true)
        }
        Command::Corpus { name, seed, list } => {
            let selected: Vec<&corpus::Example> = match &name {
                Some(n) => vec![corpus::find(n).ok_or_else(|| anyhow!("no bundled example `{n}`"))?],
                None => EXAMPLES.iter().collect(),
            };
            if list {
                for e in selected {
                    println!("{}", e.name);
                }
                return Ok(true);
            }
            let mut all = true;
            for e in selected {
                let r = e.check(seed)?;
                all &= r.passed;
                println!("{}  {}  {}", if r.passed { "PASS" } else { "FAIL" }, e.name, r.detail);
            }
            Ok(all)
        }
    }
}
