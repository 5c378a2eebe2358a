//! `hexsse`: run SSE chains, field sweeps, lattice dumps and exact oracles.

mod output;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hexsse::oracle::{classical_enumerate, exact_thermal, ground_states_dp};
use hexsse::rng::stream;
use hexsse::sse::run_with;
use hexsse::{CouplingPattern, Lattice, MsNorm, RunConfigF64, RunResultF64, SpinGraphF64};
use rayon::prelude::*;

/// Exit status of a completed run whose result is flagged invalid.
const EXIT_FLAGGED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "hexsse",
    version,
    about = "SSE quantum Monte Carlo on the frustrated honeycomb lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one chain and append a row to results.csv.
    Run {
        #[command(flatten)]
        params: RunParams,
    },
    /// Run one chain per field value.
    Sweep {
        #[command(flatten)]
        params: RunParams,
        /// Comma-separated field values.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        g_list: Vec<f64>,
        /// Chains run concurrently.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Dump the lattice as JSON and optionally an SVG diagram.
    Lattice {
        #[arg(long)]
        lx: usize,
        #[arg(long)]
        ly: usize,
        #[arg(long, default_value = "default")]
        pattern: CouplingPattern,
        /// Allow any size commensurate with the pattern.
        #[arg(long)]
        relaxed: bool,
        /// JSON output file (stdout when absent).
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Exact references.
    Oracle {
        #[command(subcommand)]
        kind: OracleKind,
    },
}

#[derive(Args)]
struct RunParams {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-bin means to bins.csv.
    #[arg(long)]
    bins: bool,
    #[arg(long)]
    lx: Option<String>,
    #[arg(long)]
    ly: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    isteps: Option<String>,
    #[arg(long)]
    nbins: Option<String>,
    #[arg(long)]
    mstep: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    thin: Option<String>,
    #[arg(long)]
    msnorm: Option<String>,
    /// Generic override, repeatable: `--set key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum OracleKind {
    /// Thermal energy density by full diagonalisation.
    Ed {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        beta: f64,
        /// Field (defaults to the graph document's `g`).
        #[arg(long)]
        g: Option<f64>,
        #[arg(long, default_value = "per_sublattice")]
        msnorm: MsNorm,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Zero-field Boltzmann averages and ground manifold by enumeration.
    Classical {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value = "per_sublattice")]
        msnorm: MsNorm,
        #[arg(long, default_value_t = 1000)]
        max_listed: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Zero-field ground states of a honeycomb lattice.
    Ground {
        #[arg(long)]
        lx: usize,
        #[arg(long)]
        ly: usize,
        #[arg(long, default_value = "default")]
        pattern: CouplingPattern,
        #[arg(long)]
        relaxed: bool,
        #[arg(long, default_value = "per_sublattice")]
        msnorm: MsNorm,
        #[arg(long, default_value_t = 100_000)]
        max_listed: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write each uniform ground state to `uniform_<k>.txt` here.
        #[arg(long)]
        spins_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GraphSource {
    /// Toy graph document.
    #[arg(long, conflicts_with_all = ["lx", "ly"])]
    graph: Option<PathBuf>,
    #[arg(long, requires = "ly")]
    lx: Option<usize>,
    #[arg(long, requires = "lx")]
    ly: Option<usize>,
    #[arg(long, default_value = "default")]
    pattern: CouplingPattern,
}

impl RunParams {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let named = [
            ("lx", &self.lx),
            ("ly", &self.ly),
            ("beta", &self.beta),
            ("g", &self.g),
            ("isteps", &self.isteps),
            ("nbins", &self.nbins),
            ("mstep", &self.mstep),
            ("seed", &self.seed),
            ("init", &self.init),
            ("pattern", &self.pattern),
            ("thin", &self.thin),
            ("msnorm", &self.msnorm),
        ];
        let mut out: Vec<(String, String)> = named
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got `{item}`"))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        if let Some(dir) = &self.out {
            out.push(("out_dir".into(), dir.display().to_string()));
        }
        Ok(out)
    }

    fn config(&self, extra: &[(String, String)]) -> Result<RunConfigF64> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => String::new(),
        };
        let mut overrides = extra.to_vec();
        overrides.extend(self.overrides()?);
        Ok(RunConfigF64::parse(&text, &overrides)?)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(u8::from(err.use_stderr()));
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Run { params } => cmd_run(&params),
        Command::Sweep {
            params,
            g_list,
            parallel,
        } => cmd_sweep(&params, &g_list, parallel),
        Command::Lattice {
            lx,
            ly,
            pattern,
            relaxed,
            json,
            svg,
        } => {
            let lattice = build_lattice(lx, ly, pattern, relaxed)?;
            match json {
                Some(path) => write_file(&path, &lattice.dump_string())?,
                None => println!("{}", lattice.dump_string()),
            }
            if let Some(path) = svg {
                write_file(&path, &svg::render(&lattice))?;
            }
            Ok(0)
        }
        Command::Oracle { kind } => cmd_oracle(kind),
    }
}

fn build_lattice(lx: usize, ly: usize, pattern: CouplingPattern, relaxed: bool) -> Result<Lattice> {
    Ok(if relaxed {
        Lattice::with_cells(lx, ly, pattern)?
    } else {
        Lattice::build(lx, ly, pattern)?
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Runs point `index` of a sweep (stream `index` of the master seed) and
/// writes its samples file.
fn run_point(config: &RunConfigF64, index: u64) -> Result<RunResultF64> {
    let lattice = Lattice::build(config.lx, config.ly, config.pattern)?;
    let graph = Arc::new(SpinGraphF64::from_lattice(&lattice, config.g)?);
    let result = run_with(graph, config, stream(config.seed, index))?;
    output::write_samples(config, &result)?;
    if let Some(msg) = &result.diagnostic {
        eprintln!("warning: g = {}: {msg}", config.g);
    }
    Ok(result)
}

fn cmd_run(params: &RunParams) -> Result<u8> {
    let config = params.config(&[])?;
    fs::create_dir_all(&config.out_dir)
        .with_context(|| format!("creating {}", config.out_dir.display()))?;
    let result = run_point(&config, 0)?;
    output::append_results(&config.out_dir, &[(config.clone(), result.clone())])?;
    if params.bins {
        output::append_bins(&config.out_dir, &[(config.clone(), result.clone())])?;
    }
    Ok(if result.valid { 0 } else { EXIT_FLAGGED })
}

fn cmd_sweep(params: &RunParams, g_list: &[f64], parallel: usize) -> Result<u8> {
    if g_list.is_empty() {
        bail!("--g-list must name at least one field value");
    }
    let base = params.config(&[("g".into(), g_list[0].to_string())])?;
    let configs: Vec<RunConfigF64> = g_list
        .iter()
        .map(|&g| {
            let mut c = base.clone();
            c.g = g;
            c.validate().map(|_| c)
        })
        .collect::<Result<_, _>>()?;
    fs::create_dir_all(&base.out_dir)
        .with_context(|| format!("creating {}", base.out_dir.display()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .context("starting worker pool")?;
    let outcomes: Vec<Result<RunResultF64>> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(k, c)| run_point(c, k as u64))
            .collect()
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (config, outcome) in configs.into_iter().zip(outcomes) {
        match outcome {
            Ok(result) => rows.push((config, result)),
            Err(err) => failures.push(format!("g = {}: {err:#}", config.g)),
        }
    }
    rows.sort_by(|a, b| a.0.g.total_cmp(&b.0.g));
    output::write_results(&base.out_dir, &rows)?;
    if params.bins {
        output::write_bins(&base.out_dir, &rows)?;
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("error: {f}");
        }
        bail!("{} of {} points failed", failures.len(), g_list.len());
    }
    Ok(if rows.iter().all(|(_, r)| r.valid) {
        0
    } else {
        EXIT_FLAGGED
    })
}

fn emit(out: &Option<PathBuf>, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => write_file(path, &text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_oracle(kind: OracleKind) -> Result<u8> {
    match kind {
        OracleKind::Ed {
            graph,
            beta,
            g,
            msnorm,
            out,
        } => {
            let mut toy = SpinGraphF64::load(&graph)?;
            if let Some(g) = g {
                toy = toy.with_g(g)?;
            }
            emit(&out, &exact_thermal(&toy, beta, msnorm)?)?;
        }
        OracleKind::Classical {
            source,
            beta,
            msnorm,
            max_listed,
            out,
        } => {
            let graph = match (&source.graph, source.lx, source.ly) {
                (Some(path), _, _) => SpinGraphF64::load(path)?,
                (None, Some(lx), Some(ly)) => {
                    SpinGraphF64::from_lattice(&Lattice::with_cells(lx, ly, source.pattern)?, 0.0)?
                }
                _ => bail!("give either --graph or --lx/--ly"),
            };
            let (thermal, ground) = classical_enumerate(&graph, beta, msnorm, max_listed)?;
            emit(
                &out,
                &serde_json::json!({ "thermal": thermal, "ground": ground }),
            )?;
        }
        OracleKind::Ground {
            lx,
            ly,
            pattern,
            relaxed,
            msnorm,
            max_listed,
            out,
            spins_dir,
        } => {
            let lattice = build_lattice(lx, ly, pattern, relaxed)?;
            let report = ground_states_dp(&lattice, msnorm, max_listed)?;
            if let Some(dir) = spins_dir {
                for (k, cfg) in report.uniform_configs().enumerate() {
                    write_file(
                        &dir.join(format!("uniform_{k}.txt")),
                        &format!("{}\n", cfg.spins),
                    )?;
                }
            }
            emit(&out, &report)?;
        }
    }
    Ok(0)
}
