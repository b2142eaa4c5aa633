//! Command-line front end.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use jointsparse::admm::SolverConfig;
use jointsparse::matrix::write_matrix_text;
use jointsparse::{generate, Backend, InstanceSpec};
use serde::de::DeserializeOwned;

use crate::error::{BenchError, Result};
use crate::experiment::{run_experiment, solver_seed, ExperimentSpec, RunOptions};
use crate::presets::{describe, preset, PresetOptions, PRESET_NAMES};
use crate::report::{emit_report, format_table, ReportFormat};
use crate::trace::{mean_trace, residual_trace, write_trace_csv};

#[derive(Debug, Parser)]
#[command(name = "jointsparse", version, about = "Joint-sparse recovery experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment from a JSON config or a preset name.
    Run(RunArgs),
    /// Print per-iteration residuals of the ℓ2,0 solver as CSV.
    Trace(TraceArgs),
    /// Write a generated instance to a directory.
    Generate(GenerateArgs),
    /// List the built-in experiment presets.
    Presets(PresetsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
    Both,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Both => ReportFormat::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Plain,
    Smw,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Plain => Backend::Plain,
            BackendArg::Smw => Backend::Smw,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Path to an experiment JSON file, or a preset name.
    pub target: String,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Base seed for the per-trial digests.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "results")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    #[arg(long, env = "JOINTSPARSE_THREADS")]
    pub threads: Option<usize>,
    /// Keep only this solver (label or kind); repeatable.
    #[arg(long = "solver")]
    pub solvers: Vec<String>,
    /// Use the original large sizes for table4 and fig5.
    #[arg(long)]
    pub full_scale: bool,
    /// Do not print the aggregate table.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 150)]
    pub m: usize,
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub j: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl InstanceArgs {
    fn spec(&self) -> InstanceSpec {
        InstanceSpec::new(self.n, self.m, self.k, self.j, self.seed)
    }
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Row budget; defaults to K + 2.
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, value_enum, default_value = "plain")]
    pub backend: BackendArg,
    /// Average over this many instances with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// JSON file holding {"n", "m", "k", "j", "seed"}; overrides the flags.
    pub spec: Option<PathBuf>,
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value = "instance")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct PresetsArgs {
    /// Print the full JSON config of one preset.
    #[arg(long)]
    pub show: Option<String>,
    #[arg(long)]
    pub full_scale: bool,
}

/// Parses a JSON file, reporting the path of the offending key on failure.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| BenchError::Parse {
        path: path.to_path_buf(),
        field: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

fn resolve_target(target: &str, opts: PresetOptions) -> Result<ExperimentSpec> {
    let path = Path::new(target);
    if path.is_file() {
        load_json(path)
    } else if PRESET_NAMES.contains(&target) || !target.ends_with(".json") {
        preset(target, opts)
    } else {
        Err(BenchError::io(path, io::Error::new(io::ErrorKind::NotFound, "no such file")))
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut spec = resolve_target(&args.target, PresetOptions { full_scale: args.full_scale })?;
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(s) = args.seed {
        spec.base_seed = s;
    }
    spec.retain_solvers(&args.solvers)?;
    let output = run_experiment(&spec, &RunOptions { threads: args.threads })?;
    let written = emit_report(&spec, &output, args.format.into(), &args.out_dir)?;
    if !args.quiet {
        print!("{}", format_table(&output.aggregates));
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_trace(args: TraceArgs) -> Result<()> {
    if args.repeats == 0 {
        return Err(BenchError::config("repeats", "must be at least 1"));
    }
    let base = args.instance.spec();
    let cfg = SolverConfig {
        rho: args.rho,
        max_iter: args.iterations,
        backend: args.backend.into(),
        ..SolverConfig::new(args.s.unwrap_or(base.k + 2))
    };
    let mut traces = Vec::with_capacity(args.repeats);
    for r in 0..args.repeats as u64 {
        let seed = base.seed.wrapping_add(r);
        let inst = generate(InstanceSpec { seed, ..base })?;
        traces.push(residual_trace(&inst, &SolverConfig { seed: solver_seed(seed), ..cfg.clone() })?);
    }
    let trace = mean_trace(&traces);
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
            write_trace_csv(io::BufWriter::new(file), &trace)
        }
        None => write_trace_csv(io::stdout().lock(), &trace),
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut fs::File) -> Result<()>) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    f(&mut file)?;
    file.flush().map_err(|e| BenchError::io(path, e))
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let spec: InstanceSpec = match &args.spec {
        Some(path) => load_json(path)?,
        None => args.instance.spec(),
    };
    let inst = generate(spec)?;
    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let header = serde_json::json!({
        "spec": inst.spec,
        "support": inst.support.indices(),
        "uniqueness_guaranteed": inst.uniqueness_guaranteed(),
    });
    let header_path = dir.join("header.json");
    let text = serde_json::to_string_pretty(&header).map_err(|source| BenchError::Json {
        path: header_path.clone(),
        source,
    })?;
    fs::write(&header_path, text + "\n").map_err(|e| BenchError::io(&header_path, e))?;
    for (name, x) in [("phi.txt", &inst.phi), ("s_true.txt", &inst.s_true), ("y.txt", &inst.y)] {
        write_file(&dir.join(name), |f| Ok(write_matrix_text(x, io::BufWriter::new(f))?))?;
    }
    eprintln!("wrote instance to {}", dir.display());
    Ok(())
}

fn cmd_presets(args: PresetsArgs) -> Result<()> {
    let opts = PresetOptions { full_scale: args.full_scale };
    match args.show {
        Some(name) => {
            let spec = preset(&name, opts)?;
            let text = serde_json::to_string_pretty(&spec).expect("specs serialize");
            println!("{text}");
        }
        None => {
            for name in PRESET_NAMES {
                println!("{name:<8} {}", describe(name).unwrap_or_default());
            }
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Presets(a) => cmd_presets(a),
    }
}
