use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lrdu::asymptotics::{self, CumulantMethod, CumulantRequest, LimitLawConfig, LimitTable};
use lrdu::estimators::{self, EstimatorReport};
use lrdu::hermite::{self, Kernel, DEFAULT_RANK_TOL};
use lrdu::lrd_sim::{self, ContaminationScheme, ContaminationSpec, CovarianceModel, SamplePath};
use lrdu::montecarlo::{self, McConfig};
use lrdu::uprocess::{self, UProcessOptions};
use lrdu::{io, Error, Result};

/// Long-range dependent U-processes: simulation, estimation and limit laws.
#[derive(Parser, Debug)]
#[command(name = "lrdu", version)]
struct Cli {
    /// Maximum number of worker threads (default: all cores).
    #[arg(long, global = true, env = "LRDU_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate an exact Gaussian path, optionally with additive outliers.
    Simulate(SimulateArgs),
    /// Apply estimators to a path (or to every column of a batch CSV).
    Estimate(EstimateArgs),
    /// Evaluate the U-process of a path over a threshold grid.
    Uprocess(UprocessArgs),
    /// Limit-law constants, cumulants and samples.
    Limits(LimitsArgs),
    /// Run a Monte Carlo experiment described by a JSON config.
    Montecarlo(MontecarloArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModelKind {
    Fgn,
    Arfima,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Correlation model.
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Hurst exponent of fGn, in (1/2, 1).
    #[arg(long, required_if_eq("model", "fgn"))]
    hurst: Option<f64>,
    /// AR coefficient of ARFIMA(1,d,0).
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Fractional difference of ARFIMA(1,d,0), in (0, 1/2).
    #[arg(long, required_if_eq("model", "arfima"))]
    d: Option<f64>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<CovarianceModel> {
        match self.model {
            ModelKind::Fgn => CovarianceModel::fgn(self.hurst.expect("required by clap")),
            ModelKind::Arfima => CovarianceModel::arfima(self.phi, self.d.expect("required by clap")),
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SchemeArg {
    BernoulliHalf,
    Rademacher,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Path length.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Outlier magnitude; enables contamination together with --p.
    #[arg(long, requires = "p")]
    omega: Option<f64>,
    /// Outlier probability.
    #[arg(long, requires = "omega")]
    p: Option<f64>,
    #[arg(long, value_enum, default_value = "bernoulli-half")]
    scheme: SchemeArg,
    /// Seed of the outlier draws (defaults to --seed).
    #[arg(long)]
    contamination_seed: Option<u64>,
    /// Output CSV; a JSON sidecar is written next to it.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Comma-separated estimators: hl, shamos, mean, sd, wilcoxon.
    #[arg(long, default_value = "hl,shamos,mean,sd")]
    est: String,
    /// Single-path CSV.
    #[arg(short, long, conflicts_with = "batch", required_unless_present = "batch")]
    input: Option<PathBuf>,
    /// CSV with one column per path; output is a CSV with one row per path.
    #[arg(long)]
    batch: Option<PathBuf>,
    /// Attach limit laws using the model stored in the input sidecar.
    #[arg(long, conflicts_with = "batch")]
    limits: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct UprocessArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Kernel: average, sum or absdiff.
    #[arg(long, default_value = "absdiff")]
    kernel: String,
    /// Thresholds as `a,b,c` or `lo:hi:count`.
    #[arg(long)]
    grid: String,
    /// Also write W_n and R_n using the closed-form U(r) of a unit-variance Gaussian.
    #[arg(long)]
    decompose: bool,
    /// Print the generalized inverse of U_n at these levels.
    #[arg(long, value_delimiter = ',')]
    quantile: Vec<f64>,
    /// Write the Hermite coefficient report for the kernel over the grid.
    #[arg(long)]
    hermite: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    p_max: usize,
    /// Allow kernels without a fast path on more than 20000 points.
    #[arg(long)]
    allow_large: bool,
    /// Output CSV (columns r, u[, w, rres]) with a JSON sidecar.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MethodArg {
    Quadrature,
    Mc,
}

#[derive(Args, Debug)]
#[command(rename_all = "kebab-case")]
struct LimitsArgs {
    /// Decay exponent D in (0, 1).
    #[arg(long = "D")]
    d: f64,
    /// Cumulant order of a Z2 + b Z1^2.
    #[arg(long)]
    cumulant: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.0)]
    b: f64,
    #[arg(long, value_enum, default_value = "quadrature")]
    method: MethodArg,
    /// Monte Carlo integration points for --method mc.
    #[arg(long, default_value_t = 200_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of draws of a Z2 + b Z1^2 to write to --samples-out.
    #[arg(long, requires = "samples_out")]
    sample: Option<usize>,
    #[arg(long, default_value_t = 1 << 13)]
    n_approx: usize,
    #[arg(long)]
    samples_out: Option<PathBuf>,
    /// JSON table of constants.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MontecarloArgs {
    /// Experiment JSON.
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory.
    #[arg(short, long)]
    output: PathBuf,
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("grid value '{s}': {e}")));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [lo, hi, count] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let count: usize = count.trim().parse().map_err(|e| Error::Parse(format!("grid count: {e}")))?;
            if count < 2 || !(hi > lo) {
                return Err(Error::Domain(format!("grid '{spec}' needs lo < hi and count >= 2")));
            }
            Ok((0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect())
        }
        [_] => spec.split(',').map(num).collect(),
        _ => Err(Error::Parse(format!("grid '{spec}' is neither a list nor lo:hi:count"))),
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let model = args.model.resolve()?;
    let mut path = lrd_sim::simulate_gaussian(&model, args.n, args.seed)?;
    if let (Some(omega), Some(p)) = (args.omega, args.p) {
        let scheme = match args.scheme {
            SchemeArg::BernoulliHalf => ContaminationScheme::BernoulliHalf,
            SchemeArg::Rademacher => ContaminationScheme::Rademacher,
        };
        let spec = ContaminationSpec::new(omega, p, scheme)?;
        path = lrd_sim::contaminate(&path, &spec, args.contamination_seed.unwrap_or(args.seed))?;
    }
    path.write(&args.output)
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let kinds = estimators::parse_estimators(&args.est)?;
    if let Some(batch) = &args.batch {
        let (names, cols) = io::read_table_csv(batch)?;
        let paths: Vec<(String, Vec<f64>)> = names.iter().cloned().zip(cols).collect();
        let rows = estimators::estimate_batch(&paths, &kinds)?;
        let text = estimators::batch_csv(&names, &kinds, &rows)?;
        io::write_atomic(&args.output, text.as_bytes())?;
        let config = json!({ "batch": batch, "estimators": kinds, "paths": names });
        return io::write_json_atomic(&io::sidecar_path(&args.output), &config);
    }
    let input = args.input.as_ref().expect("required by clap");
    let (data, model) = if args.limits {
        let path = SamplePath::read(input)?;
        (path.values, Some(path.model))
    } else {
        (io::read_column_csv(input)?, None)
    };
    let reports = kinds
        .iter()
        .map(|k| {
            let r = k.estimate(&data)?;
            match &model {
                Some(m) => r.with_limit(m),
                None => Ok(r),
            }
        })
        .collect::<Result<Vec<EstimatorReport>>>()?;
    let out = json!({
        "config": { "input": input, "estimators": kinds, "limits": args.limits, "model": model },
        "reports": reports,
    });
    io::write_json_atomic(&args.output, &out)
}

fn u_process(args: &UprocessArgs) -> Result<()> {
    let data = io::read_column_csv(&args.input)?;
    let kernel = Kernel::from_name(&args.kernel)?;
    let grid = parse_grid(&args.grid)?;
    let opts = UProcessOptions { allow_large: args.allow_large };
    let mut curve = uprocess::u_process_with(&data, &kernel, &grid, &opts)?;
    if args.decompose {
        let k = kernel.clone();
        curve = curve.decompose(&data, &kernel, move |r| k.u_closed(r).unwrap_or(f64::NAN))?;
    }
    let quantiles = args
        .quantile
        .iter()
        .map(|&p| Ok((p, uprocess::u_quantile_with(&data, &kernel, p, &opts)?)))
        .collect::<Result<Vec<_>>>()?;
    let report = match &args.hermite {
        Some(_) => Some(hermite::hermite_rank(&kernel, &grid, args.p_max, DEFAULT_RANK_TOL)?),
        None => None,
    };
    for (p, r) in &quantiles {
        println!("quantile {p}: {}", io::fmt_f64(*r));
    }
    let extra = json!({
        "input": args.input,
        "grid_spec": args.grid,
        "quantiles": quantiles,
        "allow_large": args.allow_large,
    });
    curve.write(&args.output, Some(extra))?;
    if let (Some(path), Some(report)) = (&args.hermite, report) {
        io::write_json_atomic(path, &report)?;
    }
    Ok(())
}

fn limits(args: &LimitsArgs) -> Result<()> {
    let mut table = LimitTable::new(args.d)?;
    if let Some(p) = args.cumulant {
        let method = match args.method {
            MethodArg::Quadrature => CumulantMethod::SubsetQuadrature,
            MethodArg::Mc => CumulantMethod::McIntegration { samples: args.mc_samples, seed: args.seed },
        };
        let req = CumulantRequest { p, a: args.a, b: args.b, d: args.d, method };
        let v = asymptotics::limit_cumulant(&req)?;
        println!("kappa_{p} = {}", io::fmt_f64(v.value));
        if v.std_error > 0.0 {
            println!("std_error = {}", io::fmt_f64(v.std_error));
        }
        table.cumulants.push(asymptotics::CumulantEntry {
            p,
            a: args.a,
            b: args.b,
            value: v.value,
            std_error: v.std_error,
        });
    }
    let samples = match args.sample {
        Some(reps) => {
            let cfg = LimitLawConfig::new(args.a, args.b, args.d, args.n_approx, reps, args.seed);
            Some((cfg, asymptotics::sample_limit_law(&cfg)?))
        }
        None => None,
    };
    if args.cumulant.is_none() && args.output.is_none() {
        println!("{}", serde_json::to_string_pretty(&table)?);
    }
    if let Some(out) = &args.output {
        io::write_json_atomic(out, &table)?;
    }
    if let (Some(out), Some((cfg, draws))) = (&args.samples_out, samples) {
        asymptotics::write_samples_csv(out, &draws)?;
        io::write_json_atomic(&io::sidecar_path(out), &cfg)?;
    }
    Ok(())
}

fn monte_carlo(args: &MontecarloArgs) -> Result<()> {
    let config = McConfig::read(&args.config)?;
    let result = montecarlo::run_experiment(&config)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let rates = match config.grid_sizes {
        Some(_) => Some(montecarlo::run_rate_study(&config)?),
        None => None,
    };
    result.write_dir(&args.output)?;
    if let Some(rates) = rates {
        io::write_json_atomic(&args.output.join("rates.json"), &rates)?;
    }
    Ok(())
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(Error::Domain("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Numeric(e.to_string()))
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Uprocess(a) => u_process(a),
        Command::Limits(a) => limits(a),
        Command::Montecarlo(a) => monte_carlo(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lrdu: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
