//! `horolab`: declarative experiment runner for the geodesic-flow
//! verification laboratory.
//!
//! Exit codes: 0 all checks pass, 1 some verification failed, 2 invalid
//! configuration, 3 numerical failure (partial report written).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use horolab::config::{ExperimentConfig, ExperimentKind};
use horolab::experiments::{self, RunOutcome};
use horolab::{output, suite};

#[derive(Parser)]
#[command(name = "horolab", version, about = "Numerical laboratory for geodesic-flow verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Output directory for reports and tables.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// What to emit.
    #[arg(long, value_enum, default_value = "both")]
    format: Format,
    /// Worker threads (falls back to HOROLAB_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for sampled experiments.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct OpArgs {
    /// Model definition document (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Parameter overrides as a JSON object.
    #[arg(long)]
    params: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

macro_rules! op_subcommands {
    ($(($variant:ident, $kind:ident)),* $(,)?) => {
        #[derive(Subcommand)]
        enum Command {
            /// Run an experiment described by a config document.
            Run {
                /// Experiment configuration (JSON).
                #[arg(long)]
                config: PathBuf,
                #[command(flatten)]
                common: CommonArgs,
            },
            /// Run a named verification suite.
            Suite {
                /// Suite identifier (`paper-verification`).
                id: String,
                /// Inject a designed negative control (`flat-rank-one`).
                #[arg(long)]
                inject: Option<String>,
                #[command(flatten)]
                common: CommonArgs,
            },
            $(
                $variant(OpArgs),
            )*
        }

        impl Command {
            fn op_kind(&self) -> Option<(ExperimentKind, &OpArgs)> {
                match self {
                    $(Command::$variant(args) => Some((ExperimentKind::$kind, args)),)*
                    _ => None,
                }
            }
        }
    };
}

op_subcommands![
    (SurfaceGeodesic, SurfaceGeodesic),
    (SurfaceDistance, SurfaceDistance),
    (BusemannValue, BusemannValue),
    (IntegrateJacobi, IntegrateJacobi),
    (ATensor, ATensor),
    (BoundaryTensorS, BoundaryTensorS),
    (BoundaryTensorU, BoundaryTensorU),
    (StableLimit, StableLimit),
    (RiccatiFlow, RiccatiFlow),
    (Wronskian, Wronskian),
    (VerifyCentralIdentities, VerifyCentralIdentities),
    (CheckTransformIdentity, CheckTransformIdentity),
    (AsymptoticForms, AsymptoticForms),
    (CheckAsymptoticHarmonicity, CheckAsymptoticHarmonicity),
    (CheckDetDFlowInvariance, CheckDetDFlowInvariance),
    (CheckHdDhIdentity, CheckHdDhIdentity),
    (CheckArBound, CheckArBound),
    (CheckDecayBounds, CheckDecayBounds),
    (BuildStableCurve, BuildStableCurve),
    (VerifyHopfFormula, VerifyHopfFormula),
    (SecondFundamentalLipschitz, SecondFundamentalLipschitz),
    (SphereVolume, SphereVolume),
    (BallVolume, BallVolume),
    (EstimateVolumeEntropy, EstimateVolumeEntropy),
    (CheckPurelyExponential, CheckPurelyExponential),
    (LowerBoundRatio, LowerBoundRatio),
    (HoroballSlabVolume, HoroballSlabVolume),
    (CheegerLimit, CheegerLimit),
    (BoundedAsymptoteCheck, BoundedAsymptoteCheck),
    (RankDetectionFromGrowth, RankDetectionFromGrowth),
    (AnosovExponent, AnosovExponent),
    (DivergenceBounds, DivergenceBounds),
    (ThinTriangleDelta, ThinTriangleDelta),
];

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    ExitCode::from(code)
}

fn init_threads(common: &CommonArgs) {
    let threads = common.threads.or_else(|| {
        std::env::var("HOROLAB_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        // a later init in the same process keeps the first pool; fine for a CLI
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Run { config, common } => {
            init_threads(common);
            let text = std::fs::read_to_string(config)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", config.display()))?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|e| anyhow::anyhow!("invalid config: {e}"))?;
            run_experiment(cfg, common)
        }
        Command::Suite { id, inject, common } => {
            init_threads(common);
            if id != "paper-verification" {
                anyhow::bail!("unknown suite `{id}` (available: paper-verification)");
            }
            run_suite_command(inject.as_deref(), common)
        }
        _ => {
            let (kind, args) = cli.command.op_kind().expect("op subcommand");
            init_threads(&args.common);
            let model_text = std::fs::read_to_string(&args.model)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", args.model.display()))?;
            let model = serde_json::from_str(&model_text)
                .map_err(|e| anyhow::anyhow!("invalid model: {e}"))?;
            let params = match &args.params {
                None => serde_json::Value::Object(Default::default()),
                Some(p) => serde_json::from_str(p)
                    .map_err(|e| anyhow::anyhow!("invalid --params: {e}"))?,
            };
            let cfg = ExperimentConfig {
                model,
                experiment: kind,
                params,
                seed: args.common.seed.unwrap_or(7),
                output: Default::default(),
            };
            run_experiment(cfg, &args.common)
        }
    }
}

fn run_experiment(mut cfg: ExperimentConfig, common: &CommonArgs) -> anyhow::Result<u8> {
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    std::fs::create_dir_all(&common.out)?;
    match experiments::run(&cfg) {
        RunOutcome::Done(report) => {
            emit(&report, &cfg, common)?;
            for r in &report.reports {
                println!("{}", r.summary_line());
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
        RunOutcome::Config(msg) => {
            eprintln!("configuration error: {msg}");
            Ok(2)
        }
        RunOutcome::Numerical { error, partial } => {
            emit(&partial, &cfg, common)?;
            eprintln!("numerical failure: {error}");
            Ok(3)
        }
    }
}

fn emit(report: &output::RunReport, cfg: &ExperimentConfig, common: &CommonArgs) -> anyhow::Result<()> {
    if matches!(common.format, Format::Json | Format::Both) {
        let name = cfg.output.json.clone().unwrap_or_else(|| "report.json".into());
        output::write_json(&common.out.join(name), report)?;
    }
    if matches!(common.format, Format::Csv | Format::Both) {
        let prefix = cfg
            .output
            .csv
            .clone()
            .map(|c| c.trim_end_matches(".csv").to_string() + "_")
            .unwrap_or_default();
        output::write_tables_csv(&common.out, &prefix, &report.tables)?;
    }
    Ok(())
}

fn run_suite_command(inject: Option<&str>, common: &CommonArgs) -> anyhow::Result<u8> {
    std::fs::create_dir_all(&common.out)?;
    let outcome = suite::run_suite(inject)?;
    for c in &outcome.criteria {
        println!("{}", c.summary_line());
    }
    write_suite_outputs(&outcome, &common.out, common.format)?;
    if outcome.had_numerical_error() {
        Ok(3)
    } else if outcome.all_passed() {
        Ok(0)
    } else {
        Ok(1)
    }
}

fn write_suite_outputs(outcome: &suite::SuiteOutcome, dir: &Path, format: Format) -> anyhow::Result<()> {
    if matches!(format, Format::Csv | Format::Both) {
        output::write_tables_csv(dir, "", &outcome.tables)?;
    }
    if matches!(format, Format::Json | Format::Both) {
        #[derive(serde::Serialize)]
        struct SuiteJson<'a> {
            suite: &'a str,
            tool_version: &'a str,
            criteria: Vec<CriterionJson<'a>>,
        }
        #[derive(serde::Serialize)]
        struct CriterionJson<'a> {
            index: usize,
            name: &'a str,
            passed: bool,
            numerical_error: &'a Option<String>,
            reports: &'a [horolab_core::report::VerificationReport],
        }
        let doc = SuiteJson {
            suite: "paper-verification",
            tool_version: env!("CARGO_PKG_VERSION"),
            criteria: outcome
                .criteria
                .iter()
                .map(|c| CriterionJson {
                    index: c.index,
                    name: c.name,
                    passed: c.passed(),
                    numerical_error: &c.numerical_error,
                    reports: &c.reports,
                })
                .collect(),
        };
        std::fs::write(dir.join("suite_report.json"), serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(())
}
