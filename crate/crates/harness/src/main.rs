use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gafzeros::config::ExperimentConfig;
use gafzeros::error::{HarnessError, Result};
use gafzeros::output::{to_json_string, write_json};
use gafzeros::rho::{parse_point, run_rho};
use gafzeros::runner::run_extremes;
use gafzeros::verify::{run_suite, table, Session, SUITES};
use gafzeros_core::ensembles::{sample_section, SeedRecord};
use gafzeros_core::rootfind::{verify_zeroset, zeros};
use gafzeros_core::trial_stream;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "gafzeros", version, about = "Zeros of Gaussian analytic functions: sampling, near-pair extremes, correlation functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one section and print its zeros.
    Sample {
        #[command(flatten)]
        config: ConfigArgs,
        /// Trial index within the seed's stream family.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Run the near-pair experiment and write config.txt, trials.csv and summary.json.
    Extremes {
        #[command(flatten)]
        config: ConfigArgs,
        /// Exit with status 1 when any goodness-of-fit verdict fails.
        #[arg(long)]
        strict: bool,
    },
    /// Evaluate the k-point correlation function at the given points.
    Rho {
        #[command(flatten)]
        config: ConfigArgs,
        /// Point `re,im`; repeat once per point.
        #[arg(long = "point", required = true, allow_hyphen_values = true)]
        points: Vec<String>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run a named acceptance suite.
    Verify {
        /// One of: h-function, poisson-law-su2, poisson-law-torus, poisson-law-gef, kac-rice, isolation, infrastructure, all.
        suite: String,
        /// Override every Monte Carlo trial count.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["su2", "torus", "gef"])]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Rescaled threshold; repeatable.
    #[arg(long = "a")]
    thresholds: Vec<f64>,
    #[arg(long)]
    kmax: Option<usize>,
    /// whole, hemisphere, torus-half or disk-sector; repeatable.
    #[arg(long = "region")]
    regions: Vec<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    bins: Option<usize>,
    /// Run zero-set diagnostics on every trial.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))?;
                ExperimentConfig::from_text(&text)?
            }
            None => ExperimentConfig {
                workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
                ..Default::default()
            },
        };
        let mut set = |key: &str, value: Option<String>| value.map_or(Ok(()), |v| c.set(key, &v));
        set("model", self.model.clone())?;
        set("n", self.n.map(|v| v.to_string()))?;
        set("radius", self.radius.map(|v| v.to_string()))?;
        set("trials", self.trials.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("kmax", self.kmax.map(|v| v.to_string()))?;
        set("workers", self.workers.map(|v| v.to_string()))?;
        set("bins", self.bins.map(|v| v.to_string()))?;
        set("out_dir", self.out_dir.as_ref().map(|p| p.display().to_string()))?;
        if !self.thresholds.is_empty() {
            set("a", Some(self.thresholds.iter().map(f64::to_string).collect::<Vec<_>>().join(",")))?;
        }
        if !self.regions.is_empty() {
            set("region", Some(self.regions.join(",")))?;
        }
        if self.verify {
            c.verify = true;
        }
        Ok(c)
    }
}

#[derive(Serialize)]
struct ZeroRow {
    chart: &'static str,
    re: f64,
    im: f64,
    residual: f64,
}

#[derive(Serialize)]
struct SampleJson {
    model: &'static str,
    master_seed: u64,
    trial: u64,
    expected: usize,
    found: usize,
    pass: bool,
    worst_residual: f64,
    zeros: Vec<ZeroRow>,
}

fn sample(args: &ConfigArgs, trial: u64) -> Result<ExitCode> {
    let config = args.resolve()?;
    let spec = config.spec()?;
    let seed = SeedRecord { master_seed: config.master_seed, trial_index: trial };
    let section = sample_section(&spec, &mut trial_stream(seed.master_seed, trial)).with_seed(seed);
    let zs = zeros(&section).map_err(|source| HarnessError::Trial { seed, source })?;
    let diag = verify_zeroset(&section, &zs);
    let rows: Vec<ZeroRow> = zs
        .zeros
        .iter()
        .zip(&zs.residuals)
        .map(|(p, &r)| ZeroRow { chart: p.chart.as_str(), re: p.coord.re, im: p.coord.im, residual: r })
        .collect();
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush().map_err(|e| HarnessError::Io { path: "stdout".into(), source: e })?;
        }
        Format::Json => {
            let out = SampleJson {
                model: config.model.as_str(),
                master_seed: seed.master_seed,
                trial,
                expected: diag.expected,
                found: diag.found,
                pass: diag.pass,
                worst_residual: diag.worst_residual,
                zeros: rows,
            };
            print!("{}", to_json_string(&out));
        }
    }
    Ok(if diag.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn extremes(args: &ConfigArgs, strict: bool) -> Result<ExitCode> {
    let config = args.resolve()?;
    let out = run_extremes(&config)?;
    let summary = gafzeros::output::Summary::new(&out);
    write_json(std::io::stdout().lock(), &summary).map_err(|e| HarnessError::Io { path: "stdout".into(), source: e })?;
    Ok(if strict && !out.report.pass() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn rho(args: &ConfigArgs, points: &[String], k: Option<usize>) -> Result<ExitCode> {
    let config = args.resolve()?;
    let pts = points.iter().map(|p| parse_point(p)).collect::<Result<Vec<_>>>()?;
    let record = run_rho(&config.spec()?, &pts, k)?;
    print!("{}", to_json_string(&record));
    Ok(ExitCode::SUCCESS)
}

fn verify(suite: &str, trials: Option<u64>, workers: Option<usize>) -> Result<ExitCode> {
    let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let session = Session::new(trials, workers);
    let Some(checks) = run_suite(suite, &session) else {
        let names: Vec<&str> = SUITES.iter().map(|s| s.0).collect();
        return Err(HarnessError::Usage(format!("unknown suite `{suite}`; expected one of {}", names.join(", "))));
    };
    print!("{}", table(&checks));
    Ok(if checks.iter().all(|c| c.pass) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sample { config, trial } => sample(config, *trial),
        Command::Extremes { config, strict } => extremes(config, *strict),
        Command::Rho { config, points, k } => rho(config, points, *k),
        Command::Verify { suite, trials, workers } => verify(suite, *trials, *workers),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
