use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Deserialize;

use fixpoint_core::em::{CovarianceMeanMode, EmConfig, InitMethod};
use fixpoint_core::framework::{run_framework, AlphaMode, FrameworkConfig, HMapMode, ScheduleMode};
use fixpoint_core::io::{
    generate_synthetic, load_csv, parse_component_spec, write_csv, write_fixed_points, write_labels, write_model,
    write_trace, SyntheticComponent, SyntheticSpec,
};
use fixpoint_core::verify::{run_suites, VerifyOptions};
use fixpoint_core::{Dataset, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "fixpoint",
    version,
    about = "Gaussian-mixture clustering with certified fixed-point centers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a labelled dataset from a Gaussian mixture.
    Synth(SynthArgs),
    /// Run the clustering loop and write model, trace and fixed points.
    Fit(FitArgs),
    /// Run the invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// One-dimensional components as `weight:mean:sigma[,…]`.
    #[arg(long, conflicts_with = "spec_file")]
    components: Option<String>,
    /// JSON file `{"components": [{"weight", "mean", "sigma"}, …]}` for any
    /// dimension.
    #[arg(long)]
    spec_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Number of observations to draw.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset CSV to write.
    #[arg(short, long)]
    output: PathBuf,
    /// Label file; defaults to the output path with a `.labels.csv` suffix.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Additive,
    Geometric,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlphaModeArg {
    Density,
    Normalized,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HMapModeArg {
    PaperLiteral,
    Anchored,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CovMeanArg {
    Previous,
    Updated,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitArg {
    RandomPoints,
    SpreadQuantiles,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Input CSV. Without it the data is synthesised from the source flags.
    #[arg(short, long, conflicts_with_all = ["components", "spec_file"])]
    input: Option<PathBuf>,
    #[command(flatten)]
    source: SourceArgs,
    /// Number of observations to draw.
    #[arg(long, required_unless_present = "input")]
    n: Option<usize>,
    /// Output directory for model.json, trace.jsonl and fixed_points.jsonl.
    #[arg(short, long)]
    output: PathBuf,
    /// Initial number of components.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    g0: u64,
    #[arg(long, default_value_t = 0.1)]
    delta_alpha: f64,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Geometric)]
    schedule: ScheduleArg,
    /// Schedule cap in normalized mode.
    #[arg(long, default_value_t = 0.999)]
    cap: f64,
    #[arg(long, value_enum, default_value_t = AlphaModeArg::Normalized)]
    alpha_mode: AlphaModeArg,
    #[arg(long, value_enum, default_value_t = HMapModeArg::Anchored)]
    hmap_mode: HMapModeArg,
    #[arg(long, value_enum, default_value_t = CovMeanArg::Updated)]
    cov_mean: CovMeanArg,
    #[arg(long, value_enum, default_value_t = InitArg::SpreadQuantiles)]
    init: InitArg,
    /// Absolute box-length tolerance; defaults to 1e-6 of each data range.
    #[arg(long)]
    tol_diam: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    banach_tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Seeds both synthesis and initialisation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Framework runs feeding the map suites.
    #[arg(long, default_value_t = 4)]
    runs: usize,
    /// Add a K = 1 map to the Lipschitz suite as a negative control.
    #[arg(long)]
    inject_non_contraction: bool,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn input(err: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_INPUT,
            message: err.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

#[derive(Deserialize)]
struct SpecFile {
    components: Vec<SyntheticComponent>,
}

impl SourceArgs {
    fn spec(&self, n: usize, seed: u64) -> Result<SyntheticSpec, Failure> {
        let components = match (&self.components, &self.spec_file) {
            (Some(text), None) => parse_component_spec(text).map_err(|e| Failure::usage(e.to_string()))?,
            (None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<SpecFile>(&text)
                    .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?
                    .components
            }
            _ => return Err(Failure::usage("one of --components or --spec-file is required")),
        };
        let spec = SyntheticSpec { components, n, seed };
        spec.check().map_err(|e| Failure::usage(e.to_string()))?;
        Ok(spec)
    }
}

fn default_labels_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    output.with_file_name(format!("{stem}.labels.csv"))
}

fn cmd_synth(args: &SynthArgs) -> CmdResult {
    let spec = args.source.spec(args.n, args.seed)?;
    let (data, labels) = generate_synthetic(&spec).map_err(|e| Failure::usage(e.to_string()))?;
    let labels_path = args.labels.clone().unwrap_or_else(|| default_labels_path(&args.output));
    write_csv(&data, &args.output).map_err(Failure::input)?;
    write_labels(&labels, &labels_path).map_err(Failure::input)?;
    println!(
        "wrote {} (n={}, L={}, G={}, seed={}) and {}",
        args.output.display(),
        data.n(),
        data.dims(),
        spec.components.len(),
        spec.seed,
        labels_path.display()
    );
    Ok(0)
}

impl FitArgs {
    fn config(&self) -> Result<FrameworkConfig, Failure> {
        let config = FrameworkConfig {
            em: EmConfig {
                covariance_mean_mode: match self.cov_mean {
                    CovMeanArg::Previous => CovarianceMeanMode::Previous,
                    CovMeanArg::Updated => CovarianceMeanMode::Updated,
                },
                seed: self.seed,
                init_method: match self.init {
                    InitArg::RandomPoints => InitMethod::RandomPoints,
                    InitArg::SpreadQuantiles => InitMethod::SpreadQuantiles,
                },
                ..EmConfig::default()
            },
            schedule_mode: match self.schedule {
                ScheduleArg::Additive => ScheduleMode::Additive,
                ScheduleArg::Geometric => ScheduleMode::Geometric,
            },
            delta_alpha: self.delta_alpha,
            cap: self.cap,
            alpha_mode: match self.alpha_mode {
                AlphaModeArg::Density => AlphaMode::Density,
                AlphaModeArg::Normalized => AlphaMode::Normalized,
            },
            hmap_mode: match self.hmap_mode {
                HMapModeArg::PaperLiteral => HMapMode::PaperLiteral,
                HMapModeArg::Anchored => HMapMode::Anchored,
            },
            tol_diam: self.tol_diam,
            banach_tol: self.banach_tol,
            max_iter: self.max_iter,
            ..FrameworkConfig::default()
        };
        config.check().map_err(|e| Failure::usage(e.to_string()))?;
        Ok(config)
    }

    fn data(&self) -> Result<Dataset, Failure> {
        match &self.input {
            Some(path) => load_csv(path).map_err(Failure::input),
            None => {
                let n = self
                    .n
                    .ok_or_else(|| Failure::usage("--n is required with a synthetic source"))?;
                let spec = self.source.spec(n, self.seed)?;
                Ok(generate_synthetic(&spec).map_err(|e| Failure::usage(e.to_string()))?.0)
            }
        }
    }
}

fn cmd_fit(args: &FitArgs) -> CmdResult {
    let config = args.config()?;
    let data = args.data()?;
    let g0 = usize::try_from(args.g0).map_err(|_| Failure::usage("--g0 is too large"))?;
    fs::create_dir_all(&args.output).map_err(|e| Failure::input(format!("{}: {e}", args.output.display())))?;
    let trace_path = args.output.join("trace.jsonl");

    let run = match run_framework(&data, g0, &config) {
        Ok(run) => run,
        Err(Error::AllComponentsDropped { step, trace }) => {
            write_trace(&trace, &trace_path).map_err(Failure::input)?;
            return Err(Failure {
                code: EXIT_NOT_CONVERGED,
                message: format!(
                    "every component was dropped at step {step}; partial trace in {}",
                    trace_path.display()
                ),
            });
        }
        Err(e) => return Err(Failure::input(e)),
    };

    write_trace(&run.trace, &trace_path).map_err(Failure::input)?;
    write_model(&run.model, args.output.join("model.json")).map_err(Failure::input)?;
    write_fixed_points(&run.reports, args.output.join("fixed_points.jsonl")).map_err(Failure::input)?;

    let steps = run.trace.records.len() - 1;
    for r in &run.reports {
        let location: Vec<String> = r.location.iter().map(|x| format!("{x:.6}")).collect();
        println!(
            "component {}: fixed point [{}] certified={} step={}",
            r.component,
            location.join(", "),
            r.certified,
            r.iterations_to_converge
        );
    }
    info!("outputs written to {}", args.output.display());
    if run.converged {
        println!("converged after {steps} steps with {} components", run.model.g_count());
        Ok(0)
    } else {
        warn!("stopped at the iteration limit");
        println!("not converged after {steps} steps (max-iter {})", config.max_iter);
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let options = VerifyOptions {
        seed: args.seed,
        runs: args.runs,
        inject_non_contraction: args.inject_non_contraction,
    };
    let results = run_suites(&options).map_err(|e| Failure {
        code: EXIT_VERIFY,
        message: format!("verification runs failed: {e}"),
    })?;
    let mut ok = true;
    for r in &results {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        println!(
            "{status} {} ({} checks, {} failures)",
            r.name,
            r.checks,
            r.failures.len()
        );
        for f in r.failures.iter().take(5) {
            println!("    {f}");
        }
        ok &= r.passed();
    }
    Ok(if ok { 0 } else { EXIT_VERIFY })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FIXPOINT_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
