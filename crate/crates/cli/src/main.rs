//! `sbp`: train kernel SVMs and run kernel-evaluation benchmarks.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 solver error.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sbp_core::baselines::{self, PegasosConfig, SdcaConfig};
use sbp_core::bench::{self, BenchPlan, FourierPlan};
use sbp_core::{
    evaluate, parse_libsvm, sbp, Dataset, Error, ErrorClass, KernelKind, KernelOracle,
    MonitorConfig, ParseOptions, SbpConfig,
};

#[derive(Parser)]
#[command(name = "sbp", version, about = "Kernel SVM training with the stochastic batch perceptron")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one solver on one dataset; writes model.txt and run.csv.
    Train(TrainArgs),
    /// Execute a benchmark plan file.
    Bench(BenchArgs),
    /// Derive the slack budget nu from a regularization parameter lambda.
    CalibrateNu(CalibrateArgs),
    /// Compare random Fourier features against the exact kernel.
    Fourier(FourierArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Sbp,
    Pegasos,
    Sdca,
    Perceptron,
}

#[derive(Args)]
struct DataArgs {
    /// Training data in LIBSVM format.
    data: PathBuf,
    /// Label mapped to +1 (one-vs-rest); all other labels become -1.
    #[arg(long)]
    positive_class: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "sbp")]
    solver: SolverArg,
    /// `linear` or `gaussian:SIGMA2`.
    #[arg(long, default_value = "gaussian:1")]
    kernel: KernelKind,
    /// Slack budget per example (sbp).
    #[arg(long)]
    nu: Option<f64>,
    /// Regularization parameter (pegasos, sdca).
    #[arg(long)]
    lambda: Option<f64>,
    /// Iterations (sbp, pegasos, sdca).
    #[arg(long, default_value_t = 1000)]
    iters: u64,
    /// Passes over the data (perceptron).
    #[arg(long, default_value_t = 1)]
    passes: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Learn an unregularized bias (sbp only).
    #[arg(long)]
    bias: bool,
    /// Held-out data for test error.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Record wall-clock time in the run CSV (makes it nondeterministic).
    #[arg(long)]
    wall_clock: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Plan file (`key = value` lines).
    plan: PathBuf,
    /// Output directory, overriding the plan's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    wall_clock: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "gaussian:1")]
    kernel: KernelKind,
    #[arg(long)]
    lambda: f64,
    /// Kernel-evaluation cap for the inner solve (default 50·n²).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FourierArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value = "gaussian:1")]
    kernel: KernelKind,
    /// Comma-separated numbers of direction pairs.
    #[arg(long, value_delimiter = ',', required = true)]
    k_list: Vec<usize>,
    #[arg(long)]
    lambda: f64,
    /// Pegasos iterations on the linearized data.
    #[arg(long, default_value_t = 1000)]
    iters: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run exact-kernel sbp with this nu for reference.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    sbp_iters: u64,
    /// Directory for fourier.csv; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(path: &Path, positive_class: &Option<String>) -> Result<Dataset, Error> {
    let f = fs::File::open(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    parse_libsvm(
        BufReader::new(f),
        &ParseOptions {
            positive_class: positive_class.clone(),
        },
    )
}

fn require<T>(v: Option<T>, flag: &str, solver: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::InvalidParameter(format!("--{flag} is required for solver {solver}")))
}

fn train(a: TrainArgs) -> Result<(), Error> {
    let data = load(&a.data.data, &a.data.positive_class)?;
    let test = a.test.as_deref().map(|p| load(p, &a.data.positive_class)).transpose()?;
    let oracle = KernelOracle::new(a.kernel.clone());
    let monitor = MonitorConfig {
        test: test.as_ref(),
        wall_clock: a.wall_clock,
        growth: None,
    };
    if a.bias && !matches!(a.solver, SolverArg::Sbp) {
        return Err(Error::InvalidParameter("--bias is only supported by sbp".into()));
    }
    let (model, record) = match a.solver {
        SolverArg::Sbp => {
            let mut cfg = SbpConfig::new(require(a.nu, "nu", "sbp")?, a.iters, a.seed);
            cfg.use_bias = a.bias;
            sbp::train(&data, &oracle, &cfg, monitor)?
        }
        SolverArg::Pegasos => {
            let cfg = PegasosConfig::new(require(a.lambda, "lambda", "pegasos")?, a.iters, a.seed);
            baselines::pegasos_train(&data, &oracle, &cfg, monitor)?
        }
        SolverArg::Sdca => {
            let cfg = SdcaConfig::new(require(a.lambda, "lambda", "sdca")?, a.iters, a.seed);
            baselines::sdca_train(&data, &oracle, &cfg, monitor)?
        }
        SolverArg::Perceptron => {
            let (p, rec) = baselines::perceptron_train(&data, &oracle, a.seed, a.passes, monitor)?;
            if p.beyond_theory {
                eprintln!("note: {} passes; only the first is covered by the online-to-batch analysis", p.passes);
            }
            (p.to_trained(&oracle, &data), rec)
        }
    };
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("model.txt"), model.to_text()?)?;
    fs::write(a.out.join("run.csv"), record.to_csv())?;
    print!(
        "n={} support={} kernel_evals={}",
        data.len(),
        model.support_size(),
        model.kernel_evals
    );
    if let Some(t) = &test {
        let l = evaluate(&model, &data, t, &oracle.fresh())?;
        print!(" test_zero_one={} test_hinge={}", l.zero_one, l.hinge);
    }
    println!();
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<(), Error> {
    let mut plan = BenchPlan::from_file(&a.plan)?;
    if let Some(out) = a.out {
        plan.out = out;
    }
    plan.wall_clock |= a.wall_clock;
    let report = bench::run_plan(&plan)?;
    if let Some(nu) = report.nu {
        println!("nu={nu}");
    }
    if let Some(c) = report.calibration {
        println!("calibration_duality_gap={}", c.duality_gap);
    }
    println!(
        "runs={} failed={} out={}",
        report.runs.len(),
        report.failures.len(),
        plan.out.display()
    );
    for (s, seed, msg) in &report.failures {
        eprintln!("run {} seed {} failed: {msg}", s.name(), seed);
    }
    Ok(())
}

fn calibrate(a: CalibrateArgs) -> Result<(), Error> {
    let data = load(&a.data.data, &a.data.positive_class)?;
    let n = data.len() as u64;
    let oracle = KernelOracle::new(a.kernel);
    let c = bench::calibrate_nu(&data, &oracle, a.lambda, a.budget.unwrap_or(50 * n * n), a.seed)?;
    println!(
        "nu={} norm={} hinge={} duality_gap={} kernel_evals={}",
        c.nu, c.norm, c.hinge, c.duality_gap, c.kernel_evals
    );
    Ok(())
}

fn fourier(a: FourierArgs) -> Result<(), Error> {
    let train = load(&a.data.data, &a.data.positive_class)?;
    let test = load(&a.test, &a.data.positive_class)?;
    let plan = FourierPlan {
        k_list: a.k_list,
        lambda: a.lambda,
        iterations: a.iters,
        seed: a.seed,
        kernel_sbp: a.nu.map(|nu| SbpConfig::new(nu, a.sbp_iters, a.seed)),
    };
    let csv = bench::fourier_csv(&bench::fourier_plan(&train, &test, &a.kernel, &plan)?);
    match a.out {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("fourier.csv"), csv)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Bench(a) => run_bench(a),
        Command::CalibrateNu(a) => calibrate(a),
        Command::Fourier(a) => fourier(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => 2,
                ErrorClass::Data => 3,
                ErrorClass::Solver => 4,
            })
        }
    }
}
