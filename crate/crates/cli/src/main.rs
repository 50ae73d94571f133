mod data;
mod error;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use followup::procedure::{assemble_report, fit_levels};
use followup::sim::{run_grid_with_progress, write_csv, Case, HarnessConfig, Setting};
use followup::{bootstrap_distributions, estimate_level, partition, Stream, TestConfig};

use data::{load, Columns, Loaded};
use error::CliError;
use report::{
    write_estimate_csv, write_json, write_plot_data, BandwidthRule, EstimateParams,
    EstimateReportFile, EstimateRow, InputDigest, RunManifest, TestParams, TestReportFile,
};

const DEFAULT_SEED: u64 = 20_240_101;

#[derive(Parser)]
#[command(name = "followup", version, about = "Tests for sufficient follow-up in cure models with categorical covariates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the per-level tests and both combined procedures on a CSV file.
    Test(TestArgs),
    /// Run a Monte Carlo grid and write rejection rates as CSV.
    Simulate(SimulateArgs),
    /// Per-level descriptive estimates.
    Estimate(EstimateArgs),
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    time_col: String,
    #[arg(long)]
    event_col: String,
    #[arg(long, value_delimiter = ',')]
    covariate_cols: Vec<String>,
    /// Start of the monotone tail: one value for all levels or one per level
    /// in label order.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    ax: Vec<f64>,
}

impl InputArgs {
    fn load(&self) -> Result<Loaded, CliError> {
        load(
            &self.input,
            &Columns {
                time: &self.time_col,
                event: &self.event_col,
                covariates: &self.covariate_cols,
            },
        )
    }

    fn a_x(&self, d: usize) -> Result<Vec<f64>, CliError> {
        match self.ax.len() {
            1 => Ok(vec![self.ax[0]; d]),
            k if k == d => Ok(self.ax.clone()),
            k => Err(CliError::Config(format!("--ax takes 1 or {d} values, got {k}"))),
        }
    }

    fn digest(&self, loaded: &Loaded) -> InputDigest {
        InputDigest {
            path: self.input.display().to_string(),
            sha256: loaded.sha256.clone(),
            rows: loaded.rows,
        }
    }
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.025)]
    gamma: f64,
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1024)]
    grid_size: usize,
    #[arg(long)]
    workers: Option<usize>,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write product-limit and majorant curves to this CSV.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, required_unless_present = "cases")]
    setting: Option<u8>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long = "deltaG")]
    delta_g: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    tau_quantiles: Option<Vec<f64>>,
    /// Test only these level ids; combined decisions are then skipped.
    #[arg(long, value_delimiter = ',')]
    test_levels: Option<Vec<usize>>,
    /// JSON array of cases; replaces the single-case flags.
    #[arg(long, conflicts_with_all = ["setting", "rho", "p", "delta_g", "tau_quantiles", "test_levels"])]
    cases: Option<PathBuf>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    reps: usize,
    #[arg(long, default_value_t = 500)]
    bootstrap: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.025)]
    gamma: f64,
    #[arg(long, default_value_t = 1024)]
    grid_size: usize,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn workers(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool(n: usize) -> Result<rayon::ThreadPool, CliError> {
    if n == 0 {
        return Err(CliError::Config("--workers must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Config(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_test(args: TestArgs) -> Result<(), CliError> {
    let loaded = args.input.load()?;
    let d = loaded.dataset.levels().len();
    let mut config = TestConfig::new(args.tau);
    config.epsilon = args.epsilon;
    config.alpha = args.alpha;
    config.gamma = args.gamma;
    config.a_x = args.input.a_x(d)?;
    config.bootstrap.replicates = args.bootstrap;
    config.bootstrap.grid_size = args.grid_size;
    config.bootstrap.validate()?;

    let data = &loaded.dataset;
    let fits = fit_levels(data, &config)?;
    let draws = pool(workers(args.workers))?.install(|| {
        bootstrap_distributions(&fits, &config.bootstrap, config.epsilon, config.tau, Stream::root(args.seed))
    })?;
    let report = assemble_report(data, &fits, &draws, &config)?;

    let params = TestParams {
        time_col: args.input.time_col.clone(),
        event_col: args.input.event_col.clone(),
        covariate_cols: args.input.covariate_cols.clone(),
        epsilon: config.epsilon,
        tau: config.tau,
        alpha: config.alpha,
        gamma: config.gamma,
        bootstrap: config.bootstrap.replicates,
        grid_size: config.bootstrap.grid_size,
        seed: args.seed,
        a_x: config.a_x.clone(),
        bandwidth_rule: BandwidthRule::default(),
    };
    let file = TestReportFile {
        manifest: RunManifest::new("test", args.input.digest(&loaded), params),
        levels: report.levels,
        method1: report.method1,
        method2: report.method2,
    };
    if let Some(p) = &args.plot_data {
        let mut w = output(Some(p))?;
        write_plot_data(data, &fits, &mut w)?;
        w.flush()?;
    }
    let mut w = output(args.out.as_deref())?;
    write_json(&file, &mut w)?;
    w.flush()?;
    Ok(())
}

fn setting_from_flags(args: &SimulateArgs) -> Result<Setting, CliError> {
    let need = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| CliError::Config(format!("--{name} is required for setting {}", args.setting.unwrap_or(0))))
    };
    let pair = || -> Result<[f64; 2], CliError> {
        match args.p.as_deref() {
            Some([a, b]) => Ok([*a, *b]),
            Some(v) => Err(CliError::Config(format!("--p takes two values, got {}", v.len()))),
            None => Err(CliError::Config("--p is required for this setting".into())),
        }
    };
    Ok(match args.setting {
        Some(1) => Setting::Weibull { rho: need("rho", args.rho)? },
        Some(2) => Setting::ExpExp { rho: need("rho", args.rho)?, p: pair()? },
        Some(3) => Setting::TwoCovariates,
        Some(4) => Setting::ExpUnif {
            rho: need("rho", args.rho)?,
            p: pair()?,
            delta_g: need("deltaG", args.delta_g)?,
        },
        other => return Err(CliError::Config(format!("unknown setting {other:?}; expected 1 to 4"))),
    })
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let cases: Vec<Case> = match &args.cases {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
        }
        None => {
            let setting = setting_from_flags(&args)?;
            let q = args
                .tau_quantiles
                .clone()
                .ok_or_else(|| CliError::Config("--tau-quantiles is required".into()))?;
            let mut case = Case::new(setting, q);
            case.tested_levels = args.test_levels.clone();
            vec![case]
        }
    };
    let mut config = HarnessConfig::new(args.n, args.reps, args.bootstrap, args.seed);
    config.epsilon = args.epsilon;
    config.alpha = args.alpha;
    config.gamma = args.gamma;
    config.bootstrap.grid_size = args.grid_size;
    config.workers = workers(args.workers);

    let total = cases.len();
    let step = (args.reps / 10).max(1);
    let results = run_grid_with_progress(&cases, &config, |ci, done| {
        if done % step == 0 || done == args.reps {
            eprintln!("case {}/{total}: {done}/{} replications", ci + 1, args.reps);
        }
    })?;
    let mut w = output(args.out.as_deref())?;
    write_csv(&results, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let loaded = args.input.load()?;
    let data = &loaded.dataset;
    let a_x = args.input.a_x(data.levels().len())?;
    let n = data.len() as f64;
    let rows = partition(data)?
        .iter()
        .zip(data.levels())
        .map(|(sub, lvl)| {
            let e = estimate_level(sub, a_x[lvl.id])?;
            Ok(EstimateRow {
                level: lvl.id,
                label: lvl.label.clone(),
                n_x: e.n_x,
                rho_hat: e.n_x as f64 / n,
                y_max: e.y_max,
                y_max_uncensored: e.y_max_uncensored,
                censoring_rate: e.censoring_rate,
                cure_rate_hat: e.cure_rate_hat,
                smoothed_density_at_y_max: e.smoothed_density_at_y_max,
                b_x: e.bandwidths.b_x,
                b0_x: e.bandwidths.b0_x,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut w = output(args.out.as_deref())?;
    match args.format {
        Format::Csv => write_estimate_csv(&rows, &mut w)?,
        Format::Json => {
            let params = EstimateParams {
                time_col: args.input.time_col.clone(),
                event_col: args.input.event_col.clone(),
                covariate_cols: args.input.covariate_cols.clone(),
                a_x,
                bandwidth_rule: BandwidthRule::default(),
            };
            let file = EstimateReportFile {
                manifest: RunManifest::new("estimate", args.input.digest(&loaded), params),
                levels: rows,
            };
            write_json(&file, &mut w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
