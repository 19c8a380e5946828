//! Command-line front end: estimation with bootstrap inference, the Monte
//! Carlo simulation harness, and covariate-balance tables. Every subcommand
//! is a pure function of its inputs and seed; outputs are byte-identical
//! across runs and thread counts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use amw::{
    balance_table, estimate_with_bootstrap, knn_match, load_csv, run_scenario, summaries_to_csv,
    replicates_to_csv, DgpConfig, EstimandKind, EstimatorKind, FitOptions, KPolicy, MatchDirection,
    ModelSpec, OutcomeFamily, Scenario, SimOptions,
};

#[derive(Parser)]
#[command(
    name = "amw",
    about = "Match-weighted causal-effect estimation, simulation, and diagnostics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed; falls back to the AMW_SEED environment variable, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a causal effect from a CSV file.
    Estimate(EstimateArgs),
    /// Run the Monte Carlo simulation study.
    Simulate(SimulateArgs),
    /// Covariate balance before and after matching.
    Balance(BalanceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Reg,
    Ipw,
    Aipw,
    Psm,
    #[value(name = "match-x")]
    MatchX,
    Amw,
    Amwf,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(v: EstimatorArg) -> Self {
        match v {
            EstimatorArg::Reg => EstimatorKind::Reg,
            EstimatorArg::Ipw => EstimatorKind::Ipw,
            EstimatorArg::Aipw => EstimatorKind::Aipw,
            EstimatorArg::Psm => EstimatorKind::Psm,
            EstimatorArg::MatchX => EstimatorKind::MatchX,
            EstimatorArg::Amw => EstimatorKind::Amw,
            EstimatorArg::Amwf => EstimatorKind::Amwf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimandArg {
    Ate,
    Att,
}

impl From<EstimandArg> for EstimandKind {
    fn from(v: EstimandArg) -> Self {
        match v {
            EstimandArg::Ate => EstimandKind::Ate,
            EstimandArg::Att => EstimandKind::Att,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Linear,
    Logistic,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    y_col: String,
    #[arg(long)]
    a_col: String,
    /// Covariates, comma separated; default column set for both models.
    #[arg(long, value_delimiter = ',')]
    x_cols: Vec<String>,
    /// Propensity-model columns when they differ from --x-cols.
    #[arg(long, value_delimiter = ',')]
    ps_cols: Option<Vec<String>>,
    /// Outcome-model columns when they differ from --x-cols.
    #[arg(long, value_delimiter = ',')]
    outcome_cols: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "linear")]
    outcome_family: FamilyArg,
    #[arg(long, value_enum)]
    estimator: EstimatorArg,
    #[arg(long, value_enum, default_value = "ate")]
    estimand: EstimandArg,
    /// Number of matches: an integer or "auto" for cross-validated
    /// selection (AMW only).
    #[arg(long, default_value = "auto")]
    k: String,
    /// Candidate grid for k = auto, comma separated.
    #[arg(long, value_delimiter = ',')]
    candidates: Option<Vec<usize>>,
    /// Bootstrap replicates for the standard error; 0 skips inference.
    #[arg(long, default_value_t = 100)]
    boot: usize,
    #[arg(long, default_value_t = 25)]
    cv_splits: usize,
    #[arg(long, default_value_t = 100)]
    cv_boot: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model misspecification scenario: 00, 01, 10, or 11.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value = "standard")]
    setting: String,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Estimators to evaluate, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "amw,ipw,aipw,psm,amwf")]
    estimators: Vec<String>,
    #[arg(long, default_value = "auto")]
    k: String,
    /// Bootstrap replicates per Monte Carlo replicate; 0 skips bootstrap
    /// columns.
    #[arg(long, default_value_t = 100)]
    boot: usize,
    #[arg(long, default_value_t = 25)]
    cv_splits: usize,
    #[arg(long, default_value_t = 100)]
    cv_boot: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also dump per-replicate estimates (box-plot data) to this CSV.
    #[arg(long)]
    dump_estimates: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct BalanceArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    y_col: String,
    #[arg(long)]
    a_col: String,
    #[arg(long, value_delimiter = ',')]
    x_cols: Vec<String>,
    /// Columns to diagnose; defaults to --x-cols.
    #[arg(long, value_delimiter = ',')]
    balance_cols: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "ate")]
    estimand: EstimandArg,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Effective configuration echoed into every report; serializing and
/// re-parsing it reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub input: String,
    pub y_col: String,
    pub a_col: String,
    pub ps_cols: Vec<String>,
    pub outcome_cols: Vec<String>,
    pub outcome_family: String,
    pub estimator: String,
    pub estimand: String,
    pub k: String,
    pub candidates: Option<Vec<usize>>,
    pub boot: usize,
    pub cv_splits: usize,
    pub cv_boot: usize,
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub scenario: String,
    pub setting: String,
    pub reps: usize,
    pub n: usize,
    pub estimators: Vec<String>,
    pub k: String,
    pub boot: usize,
    pub cv_splits: usize,
    pub cv_boot: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceConfig {
    pub input: String,
    pub y_col: String,
    pub a_col: String,
    pub x_cols: Vec<String>,
    pub balance_cols: Vec<String>,
    pub estimand: String,
    pub k: usize,
    pub seed: u64,
}

fn parse_k(raw: &str) -> Result<KPolicy, String> {
    if raw.eq_ignore_ascii_case("auto") {
        return Ok(KPolicy::Auto);
    }
    raw.parse::<usize>()
        .map(KPolicy::Fixed)
        .map_err(|_| format!("--k must be a positive integer or `auto`, got `{raw}`"))
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("AMW_SEED")
            .ok()
            .and_then(|v| v.parse::<u64>().ok())
    })
    .unwrap_or(0)
}

fn emit(output: Option<&PathBuf>, contents: &str) -> std::io::Result<()> {
    match output {
        Some(path) => std::fs::write(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn fail_usage(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn fail_domain(err: &amw::Error) -> ExitCode {
    let doc = serde_json::json!({
        "error": { "code": err.code(), "message": err.to_string() }
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            return fail_usage(&format!("could not configure thread pool: {e}"));
        }
    }
    let seed = resolve_seed(cli.seed);
    match cli.command {
        Command::Estimate(args) => cmd_estimate(args, seed),
        Command::Simulate(args) => cmd_simulate(args, seed),
        Command::Balance(args) => cmd_balance(args, seed),
    }
}

fn model_spec_from(
    x_cols: &[String],
    ps_cols: &Option<Vec<String>>,
    outcome_cols: &Option<Vec<String>>,
    family: FamilyArg,
) -> ModelSpec {
    let ps = ps_cols.clone().unwrap_or_else(|| x_cols.to_vec());
    let out = outcome_cols.clone().unwrap_or_else(|| x_cols.to_vec());
    ModelSpec {
        propensity_columns: ps,
        propensity_intercept: true,
        outcome_columns: out,
        outcome_intercept: true,
        outcome_family: match family {
            FamilyArg::Linear => OutcomeFamily::Linear,
            FamilyArg::Logistic => OutcomeFamily::Logistic,
        },
    }
}

fn cmd_estimate(args: EstimateArgs, seed: u64) -> ExitCode {
    let policy = match parse_k(&args.k) {
        Ok(p) => p,
        Err(msg) => return fail_usage(&msg),
    };
    if args.x_cols.is_empty() && (args.ps_cols.is_none() || args.outcome_cols.is_none()) {
        return fail_usage("provide --x-cols or both --ps-cols and --outcome-cols");
    }
    let spec = model_spec_from(
        &args.x_cols,
        &args.ps_cols,
        &args.outcome_cols,
        args.outcome_family,
    );
    let config = EstimateConfig {
        input: args.input.display().to_string(),
        y_col: args.y_col.clone(),
        a_col: args.a_col.clone(),
        ps_cols: spec.propensity_columns.clone(),
        outcome_cols: spec.outcome_columns.clone(),
        outcome_family: match args.outcome_family {
            FamilyArg::Linear => "linear".into(),
            FamilyArg::Logistic => "logistic".into(),
        },
        estimator: EstimatorKind::from(args.estimator).label().into(),
        estimand: EstimandKind::from(args.estimand).to_string(),
        k: args.k.clone(),
        candidates: args.candidates.clone(),
        boot: args.boot,
        cv_splits: args.cv_splits,
        cv_boot: args.cv_boot,
        alpha: args.alpha,
        seed,
    };
    // all model columns must be loaded
    let mut load_cols = spec.propensity_columns.clone();
    for c in &spec.outcome_columns {
        if !load_cols.contains(c) {
            load_cols.push(c.clone());
        }
    }
    let run = || -> amw::Result<serde_json::Value> {
        let d = load_csv(&args.input, &args.y_col, &args.a_col, &load_cols)?;
        let opts = amw::EstimateOptions {
            fit: FitOptions::default(),
            candidates: args.candidates.clone(),
            cv_splits: args.cv_splits,
            cv_boot: args.cv_boot,
            seed,
        };
        let report = estimate_with_bootstrap(
            &d,
            &spec,
            EstimatorKind::from(args.estimator),
            EstimandKind::from(args.estimand),
            policy,
            args.boot,
            args.alpha,
            &opts,
        )?;
        let boot = report.boot.as_ref();
        Ok(serde_json::json!({
            "config": config,
            "point": report.point,
            "se": boot.map(|b| b.se),
            "ci_lower": boot.map(|b| b.ci_lower),
            "ci_upper": boot.map(|b| b.ci_upper),
            "alpha": args.alpha,
            "b_requested": boot.map(|b| b.b_requested),
            "b_failed": boot.map(|b| b.b_failed),
            "k_candidates": report.k_candidates,
        }))
    };
    match run() {
        Ok(doc) => {
            let mut text =
                serde_json::to_string_pretty(&doc).expect("serializable report");
            text.push('\n');
            match emit(args.output.as_ref(), &text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail_domain(&amw::Error::Io(e)),
            }
        }
        Err(e) => fail_domain(&e),
    }
}

fn cmd_simulate(args: SimulateArgs, seed: u64) -> ExitCode {
    let policy = match parse_k(&args.k) {
        Ok(p) => p,
        Err(msg) => return fail_usage(&msg),
    };
    let scenario = match Scenario::from_code(&args.scenario) {
        Ok(s) => s,
        Err(e) => return fail_usage(&e.to_string()),
    };
    let mut cfg = match args.setting.as_str() {
        "standard" => DgpConfig::standard(0),
        "extreme" => DgpConfig::extreme(0),
        other => return fail_usage(&format!("unknown setting `{other}`")),
    };
    cfg.n = args.n;
    let estimators: Vec<EstimatorKind> = match args
        .estimators
        .iter()
        .map(|s| s.parse::<EstimatorKind>())
        .collect::<amw::Result<Vec<_>>>()
    {
        Ok(v) => v,
        Err(e) => return fail_usage(&e.to_string()),
    };
    let config = SimulateConfig {
        scenario: args.scenario.clone(),
        setting: args.setting.clone(),
        reps: args.reps,
        n: args.n,
        estimators: estimators.iter().map(|e| e.label().to_string()).collect(),
        k: args.k.clone(),
        boot: args.boot,
        cv_splits: args.cv_splits,
        cv_boot: args.cv_boot,
        seed,
    };
    let opts = SimOptions {
        boot_b: args.boot,
        k_policy: policy,
        candidates: None,
        cv_boot: args.cv_boot,
        cv_splits: args.cv_splits,
        fit: FitOptions::default(),
    };
    match run_scenario(&cfg, scenario, &estimators, args.reps, &opts, seed) {
        Ok(run) => {
            if let Some(path) = &args.dump_estimates {
                if let Err(e) = std::fs::write(path, replicates_to_csv(&run.replicates)) {
                    return fail_domain(&amw::Error::Io(e));
                }
            }
            let text = match args.format {
                FormatArg::Csv => summaries_to_csv(&run.summaries),
                FormatArg::Json => {
                    let doc = serde_json::json!({
                        "config": config,
                        "summaries": run.summaries,
                        "n_failed": run.n_failed,
                    });
                    let mut t = serde_json::to_string_pretty(&doc).expect("serializable");
                    t.push('\n');
                    t
                }
            };
            match emit(args.output.as_ref(), &text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail_domain(&amw::Error::Io(e)),
            }
        }
        Err(e) => fail_domain(&e),
    }
}

fn cmd_balance(args: BalanceArgs, seed: u64) -> ExitCode {
    if args.x_cols.is_empty() {
        return fail_usage("--x-cols must list at least one covariate");
    }
    let diag_cols = args
        .balance_cols
        .clone()
        .unwrap_or_else(|| args.x_cols.clone());
    let config = BalanceConfig {
        input: args.input.display().to_string(),
        y_col: args.y_col.clone(),
        a_col: args.a_col.clone(),
        x_cols: args.x_cols.clone(),
        balance_cols: diag_cols.clone(),
        estimand: EstimandKind::from(args.estimand).to_string(),
        k: args.k,
        seed,
    };
    let run = || -> amw::Result<(String, serde_json::Value)> {
        let mut load_cols = args.x_cols.clone();
        for c in &diag_cols {
            if !load_cols.contains(c) {
                load_cols.push(c.clone());
            }
        }
        let d = load_csv(&args.input, &args.y_col, &args.a_col, &load_cols)?;
        let spec = ModelSpec {
            propensity_columns: args.x_cols.clone(),
            propensity_intercept: true,
            outcome_columns: args.x_cols.clone(),
            outcome_intercept: true,
            outcome_family: OutcomeFamily::Linear,
        };
        let nuis = amw::fit_nuisance(&d, &spec, &FitOptions::default())?;
        let direction = match EstimandKind::from(args.estimand) {
            EstimandKind::Ate => MatchDirection::Both,
            EstimandKind::Att => MatchDirection::TreatedToControl,
        };
        let m = knn_match(&nuis.e_hat, d.a(), args.k, direction)?;
        let table = balance_table(&d, &diag_cols, &m, EstimandKind::from(args.estimand))?;
        let meta = serde_json::json!({
            "config": config,
            "estimand": table.estimand,
            "k_used": table.k_used,
            "weight_convention": table.weight_convention,
        });
        Ok((table.to_csv(), meta))
    };
    match run() {
        Ok((csv, meta)) => match &args.output {
            Some(path) => {
                if let Err(e) = std::fs::write(path, csv) {
                    return fail_domain(&amw::Error::Io(e));
                }
                println!(
                    "{}",
                    serde_json::to_string_pretty(&meta).expect("serializable")
                );
                ExitCode::SUCCESS
            }
            None => {
                print!("{csv}");
                ExitCode::SUCCESS
            }
        },
        Err(e) => fail_domain(&e),
    }
}
