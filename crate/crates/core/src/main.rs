use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use locsim::config::{parse_run_config, parse_scheme, RunConfig, TraceSource};
use locsim::fuzzy::{
    classify_total, eval_membership, observation_spec, parse_fuzzy_spec, weekly_spec,
    ClassifyThresholds, FuzzySetSpec, LinguisticLabel,
};
use locsim::sim::{compare_schemes, run_simulation};
use locsim::topology::NetworkTopology;
use locsim::trace::{generate_commuter_trace, parse_trace, write_trace, TraceEvent};

#[derive(Parser)]
#[command(
    name = "locsim",
    about = "Simulates cellular location management and compares VLR caching schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme over a trace and write the metrics CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the scheme from the config file.
        #[arg(long)]
        scheme: Option<String>,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the output path from the config file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the full message log next to the metrics.
        #[arg(long)]
        verbose_log: bool,
    },
    /// Run both schemes over the same trace and write a comparison report.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        verbose_log: bool,
        /// Test hook: corrupt the intelligent-scheme counters so the
        /// dominance assertion trips.
        #[arg(long, hide = true)]
        test_corrupt_dominance: bool,
    },
    /// Evaluate one membership function at a visit count.
    FuzzyEval {
        /// Which universal set to use.
        #[arg(long, value_enum, default_value_t = SpecChoice::Observation)]
        spec: SpecChoice,
        /// Override file defining the three membership functions.
        #[arg(long)]
        spec_file: Option<PathBuf>,
        #[arg(long, value_enum)]
        label: LabelArg,
        #[arg(long)]
        visits: u32,
    },
    /// Generate a commuter trace from the config's generator parameters.
    TraceGen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a topology (and optionally a trace) and report problems.
    Validate {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SpecChoice {
    Observation,
    Weekly,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelArg {
    Low,
    Medium,
    High,
}

impl From<LabelArg> for LinguisticLabel {
    fn from(l: LabelArg) -> Self {
        match l {
            LabelArg::Low => LinguisticLabel::Low,
            LabelArg::Medium => LinguisticLabel::Medium,
            LabelArg::High => LinguisticLabel::High,
        }
    }
}

/// A failure with the exit code it maps to: 1 for runtime/domain errors,
/// 2 for configuration and usage errors.
struct Failure {
    code: u8,
    message: String,
}

fn runtime(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| runtime(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &PathBuf, content: &str) -> Result<(), Failure> {
    fs::write(path, content)
        .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn load_config(path: &PathBuf) -> Result<RunConfig, Failure> {
    let text = read_file(path)?;
    parse_run_config(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_topology(path: &str) -> Result<NetworkTopology, Failure> {
    let text = read_file(&PathBuf::from(path))?;
    NetworkTopology::parse(&text).map_err(|e| runtime(format!("{path}: {e}")))
}

fn load_trace(
    cfg: &RunConfig,
    topology: &NetworkTopology,
) -> Result<Vec<TraceEvent>, Failure> {
    match &cfg.source {
        TraceSource::File(path) => {
            let text = read_file(&PathBuf::from(path))?;
            parse_trace(&text).map_err(|e| runtime(format!("{path}: {e}")))
        }
        TraceSource::Generated(params) => generate_commuter_trace(params, topology)
            .map_err(|e| usage(format!("trace generator: {e}"))),
    }
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_simulate(
    config: PathBuf,
    scheme: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    verbose_log: bool,
) -> Result<(), Failure> {
    let mut cfg = load_config(&config)?;
    if let Some(s) = scheme {
        cfg.scheme = parse_scheme(&s).map_err(|e| usage(e.to_string()))?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
        if let TraceSource::Generated(params) = &mut cfg.source {
            params.seed = s;
        }
    }
    let out = out.or_else(|| cfg.out.clone().map(PathBuf::from));

    let topology = load_topology(&cfg.topology)?;
    let trace = load_trace(&cfg, &topology)?;
    let (metrics, log) = run_simulation(&topology, &trace, cfg.scheme, &cfg.sim)
        .map_err(|e| runtime(e.to_string()))?;
    emit(out.as_ref(), &metrics.to_csv())?;
    if verbose_log {
        match &out {
            Some(path) => {
                let log_path = path.with_extension("log");
                write_file(&log_path, &log.render())?;
            }
            None => print!("{}", log.render()),
        }
    }
    Ok(())
}

fn cmd_compare(
    config: PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
    verbose_log: bool,
    test_corrupt_dominance: bool,
) -> Result<(), Failure> {
    let mut cfg = load_config(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
        if let TraceSource::Generated(params) = &mut cfg.source {
            params.seed = s;
        }
    }
    let out = out.or_else(|| cfg.out.clone().map(PathBuf::from));

    let topology = load_topology(&cfg.topology)?;
    let trace = load_trace(&cfg, &topology)?;
    let mut cmp =
        compare_schemes(&topology, &trace, &cfg.sim).map_err(|e| runtime(e.to_string()))?;
    if test_corrupt_dominance {
        cmp.intelligent.total.hlr_profile_requests += 1_000_000;
        cmp.dominance_holds = false;
    }
    emit(out.as_ref(), &cmp.render())?;
    if verbose_log {
        let logs = format!(
            "=== baseline ===\n{}=== intelligent ===\n{}",
            cmp.baseline_log.render(),
            cmp.intelligent_log.render()
        );
        match &out {
            Some(path) => write_file(&path.with_extension("log"), &logs)?,
            None => print!("{logs}"),
        }
    }
    if !cmp.dominance_holds {
        return Err(runtime(
            "cost-dominance assertion failed: the intelligent scheme issued more HLR queries than the baseline",
        ));
    }
    if !cmp.routing_equivalent {
        return Err(runtime(
            "routing-equivalence assertion failed: the schemes delivered different calls",
        ));
    }
    Ok(())
}

fn cmd_fuzzy_eval(
    spec: SpecChoice,
    spec_file: Option<PathBuf>,
    label: LabelArg,
    visits: u32,
) -> Result<(), Failure> {
    let spec: FuzzySetSpec = match spec_file {
        Some(path) => {
            let text = read_file(&path)?;
            parse_fuzzy_spec(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => match spec {
            SpecChoice::Observation => observation_spec(),
            SpecChoice::Weekly => weekly_spec(),
        },
    };
    let label: LinguisticLabel = label.into();
    let degree = eval_membership(spec.function(label), visits)
        .map_err(|e| runtime(e.to_string()))?;
    let crisp = classify_total(visits, &ClassifyThresholds::default());
    println!("{degree:.6}");
    println!("{crisp}");
    Ok(())
}

fn cmd_trace_gen(
    config: PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut cfg = load_config(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
        if let TraceSource::Generated(params) = &mut cfg.source {
            params.seed = s;
        }
    }
    let TraceSource::Generated(params) = &cfg.source else {
        return Err(usage(
            "trace-gen needs generator parameters (gen_*) in the config, not a trace path",
        ));
    };
    let topology = load_topology(&cfg.topology)?;
    let trace = generate_commuter_trace(params, &topology)
        .map_err(|e| usage(format!("trace generator: {e}")))?;
    let out = out.or_else(|| cfg.out.clone().map(PathBuf::from));
    emit(out.as_ref(), &write_trace(&trace))
}

fn cmd_validate(topology: PathBuf, trace: Option<PathBuf>) -> Result<(), Failure> {
    let topo_text = read_file(&topology)?;
    let topo = NetworkTopology::parse(&topo_text)
        .map_err(|e| runtime(format!("{}: {e}", topology.display())))?;
    println!(
        "topology ok: {} cells, {} MSCs",
        topo.cell_count(),
        topo.msc_count()
    );
    if let Some(trace_path) = trace {
        let text = read_file(&trace_path)?;
        let events =
            parse_trace(&text).map_err(|e| runtime(format!("{}: {e}", trace_path.display())))?;
        for (idx, ev) in events.iter().enumerate() {
            if let Some(cell) = ev.kind.cell() {
                topo.locate(cell).map_err(|_| {
                    runtime(format!(
                        "{}: event {} references unknown cell {cell}",
                        trace_path.display(),
                        idx + 1
                    ))
                })?;
            }
        }
        println!("trace ok: {} events", events.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            scheme,
            seed,
            out,
            verbose_log,
        } => cmd_simulate(config, scheme, seed, out, verbose_log),
        Command::Compare {
            config,
            seed,
            out,
            verbose_log,
            test_corrupt_dominance,
        } => cmd_compare(config, seed, out, verbose_log, test_corrupt_dominance),
        Command::FuzzyEval {
            spec,
            spec_file,
            label,
            visits,
        } => cmd_fuzzy_eval(spec, spec_file, label, visits),
        Command::TraceGen { config, seed, out } => cmd_trace_gen(config, seed, out),
        Command::Validate { topology, trace } => cmd_validate(topology, trace),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
