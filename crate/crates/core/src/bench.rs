//! Benchmark harness: ν calibration from λ, multi-seed plans measured against
//! kernel-evaluation budgets, and the Fourier-feature cost comparison.
//!
//! Plan files are flat `key = value` text; `#` starts a comment. See the
//! README for the full key list.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{self, PegasosConfig, SdcaConfig, SdcaState};
use crate::data::{self, Dataset, ParseOptions, SyntheticKind, SyntheticSpec};
use crate::error::{Error, Result};
use crate::kernels::{KernelKind, KernelOracle};
use crate::record::{MonitorConfig, RunRecord};
use crate::sbp::{self, SbpConfig};

// ------------------------------------------------------------ calibration

/// Result of deriving ν from λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub nu: f64,
    /// `‖ŵ‖` of the regularized solution found.
    pub norm: f64,
    /// `L̂(ŵ)`.
    pub hinge: f64,
    /// Primal minus dual objective at the end of the inner solve.
    pub duality_gap: f64,
    pub kernel_evals: u64,
}

/// Approximates the regularized optimum `ŵ` with SDCA (stopping when the
/// duality gap drops below `1e-9` or the next row would exceed `budget`),
/// then returns `ν = L̂(ŵ)/‖ŵ‖`.
pub fn calibrate_nu(
    data: &Dataset,
    oracle: &KernelOracle,
    lambda: f64,
    budget: u64,
    seed: u64,
) -> Result<Calibration> {
    let start = oracle.evals();
    let n = data.len() as u64;
    if budget < n {
        return Err(Error::param(format!(
            "calibration budget {budget} is below the {n} evaluations needed to start"
        )));
    }
    let mut state = SdcaState::new(data, oracle, lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut since_check = 0u64;
    while oracle.evals() - start + n <= budget {
        state.step_on(rng.random_range(0..data.len()), data, oracle)?;
        since_check += 1;
        if since_check >= n {
            since_check = 0;
            if state.duality_gap() <= 1e-9 {
                break;
            }
        }
    }
    let norm = state.norm();
    if norm <= 1e-12 {
        return Err(Error::Solver(
            "lambda too large for calibration: the regularized optimum is w = 0".into(),
        ));
    }
    let hinge = state.hinge();
    Ok(Calibration {
        nu: hinge / norm,
        norm,
        hinge,
        duality_gap: state.duality_gap(),
        kernel_evals: oracle.evals() - start,
    })
}

// ------------------------------------------------------------------ plans

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Solver {
    Sbp,
    Pegasos,
    Sdca,
    Perceptron,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Sbp => "sbp",
            Solver::Pegasos => "pegasos",
            Solver::Sdca => "sdca",
            Solver::Perceptron => "perceptron",
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sbp" => Ok(Solver::Sbp),
            "pegasos" => Ok(Solver::Pegasos),
            "sdca" => Ok(Solver::Sdca),
            "perceptron" => Ok(Solver::Perceptron),
            other => Err(Error::param(format!(
                "unknown solver '{other}' (expected sbp, pegasos, sdca or perceptron)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestSource {
    File(PathBuf),
    /// Hold out the last `N` examples.
    Holdout(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NuSetting {
    Fixed(f64),
    /// Derive from λ with [`calibrate_nu`] under the given budget.
    Calibrated { budget: Option<u64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub data: DataSource,
    pub test: TestSource,
    pub positive_class: Option<String>,
    pub kernel: KernelKind,
    pub solvers: Vec<Solver>,
    pub repeat: u32,
    pub seed: u64,
    pub lambda: Option<f64>,
    pub nu: Option<NuSetting>,
    pub iterations: BTreeMap<Solver, u64>,
    pub passes: u32,
    pub bias: bool,
    pub averaged: bool,
    pub wall_clock: bool,
    pub out: PathBuf,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::param(format!("bad value '{v}' for '{key}'")))
}

impl BenchPlan {
    /// Parses plan text. Relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::param(format!(
                    "plan line {}: expected 'key = value'",
                    no + 1
                )));
            };
            let key = k.trim().to_string();
            if kv.insert(key.clone(), (no + 1, v.trim().to_string())).is_some() {
                return Err(Error::param(format!("plan line {}: duplicate key '{key}'", no + 1)));
            }
        }
        let mut take = |k: &str| kv.remove(k).map(|(_, v)| v);
        let path = |p: String| {
            let p = PathBuf::from(p);
            if p.is_relative() {
                base.join(p)
            } else {
                p
            }
        };

        let data = match (take("data"), take("synthetic")) {
            (Some(_), Some(_)) => return Err(Error::param("plan sets both 'data' and 'synthetic'")),
            (None, None) => return Err(Error::param("plan needs 'data' or 'synthetic'")),
            (Some(p), None) => DataSource::File(path(p)),
            (None, Some(kind)) => {
                let n: usize = parse_value("n", &take("n").ok_or_else(|| Error::param("synthetic data needs 'n'"))?)?;
                let dimension = take("dimension").map_or(Ok(2), |v| parse_value("dimension", &v))?;
                let data_seed = take("data_seed").map_or(Ok(0), |v| parse_value("data_seed", &v))?;
                let kind = match kind.as_str() {
                    "two_gaussians" => SyntheticKind::TwoGaussians {
                        separation: take("separation").map_or(Ok(2.0), |v| parse_value("separation", &v))?,
                        noise_rate: take("noise_rate").map_or(Ok(0.0), |v| parse_value("noise_rate", &v))?,
                    },
                    "xor_ring" => SyntheticKind::XorRing,
                    "margin_separable" => SyntheticKind::MarginSeparable {
                        margin: take("margin").map_or(Ok(0.1), |v| parse_value("margin", &v))?,
                        radius: take("radius").map_or(Ok(1.0), |v| parse_value("radius", &v))?,
                    },
                    other => return Err(Error::param(format!("unknown synthetic kind '{other}'"))),
                };
                DataSource::Synthetic(SyntheticSpec {
                    kind,
                    n,
                    dimension,
                    seed: data_seed,
                })
            }
        };
        let test = match (take("test"), take("test_size")) {
            (Some(_), Some(_)) => return Err(Error::param("plan sets both 'test' and 'test_size'")),
            (None, None) => {
                return Err(Error::param("plan needs a test set: 'test' or 'test_size'"))
            }
            (Some(p), None) => TestSource::File(path(p)),
            (None, Some(v)) => TestSource::Holdout(parse_value("test_size", &v)?),
        };
        let kernel: KernelKind = take("kernel")
            .ok_or_else(|| Error::param("plan needs 'kernel'"))?
            .parse()?;
        let solvers = take("solvers")
            .ok_or_else(|| Error::param("plan needs 'solvers'"))?
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<Solver>>>()?;
        if solvers.is_empty() {
            return Err(Error::param("plan lists no solvers"));
        }
        let repeat: u32 = take("repeat").map_or(Ok(1), |v| parse_value("repeat", &v))?;
        if repeat == 0 {
            return Err(Error::param("repeat must be >= 1"));
        }
        let seed = take("seed").map_or(Ok(0), |v| parse_value("seed", &v))?;
        let lambda = take("lambda").map(|v| parse_value("lambda", &v)).transpose()?;
        let budget = take("calibration_budget")
            .map(|v| parse_value("calibration_budget", &v))
            .transpose()?;
        let nu = match take("nu") {
            Some(v) if v == "auto" => Some(NuSetting::Calibrated { budget }),
            Some(v) => Some(NuSetting::Fixed(parse_value("nu", &v)?)),
            None => None,
        };
        let default_iters = take("iterations").map(|v| parse_value::<u64>("iterations", &v)).transpose()?;
        let mut iterations = BTreeMap::new();
        for s in [Solver::Sbp, Solver::Pegasos, Solver::Sdca] {
            let own = take(&format!("{}.iterations", s.name()))
                .map(|v| parse_value::<u64>("iterations", &v))
                .transpose()?;
            if let Some(t) = own.or(default_iters) {
                iterations.insert(s, t);
            }
        }
        let passes = take("passes").map_or(Ok(1), |v| parse_value("passes", &v))?;
        let bias = take("bias").map_or(Ok(false), |v| parse_value("bias", &v))?;
        let averaged = take("averaged").map_or(Ok(false), |v| parse_value("averaged", &v))?;
        let wall_clock = take("wall_clock").map_or(Ok(false), |v| parse_value("wall_clock", &v))?;
        let out = path(take("out").unwrap_or_else(|| "bench-out".into()));
        let positive_class = take("positive_class");

        if let Some((key, (line, _))) = kv.into_iter().next() {
            return Err(Error::param(format!("plan line {line}: unknown key '{key}'")));
        }
        let plan = BenchPlan {
            data,
            test,
            positive_class,
            kernel,
            solvers,
            repeat,
            seed,
            lambda,
            nu,
            iterations,
            passes,
            bias,
            averaged,
            wall_clock,
            out,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn validate(&self) -> Result<()> {
        for s in &self.solvers {
            match s {
                Solver::Sbp => {
                    if self.nu.is_none() {
                        return Err(Error::param("solver sbp needs 'nu' (a number or 'auto')"));
                    }
                    if matches!(self.nu, Some(NuSetting::Calibrated { .. })) && self.lambda.is_none() {
                        return Err(Error::param("nu = auto needs 'lambda'"));
                    }
                }
                Solver::Pegasos | Solver::Sdca => {
                    if self.lambda.is_none() {
                        return Err(Error::param(format!("solver {} needs 'lambda'", s.name())));
                    }
                }
                Solver::Perceptron => {}
            }
            if *s != Solver::Perceptron && !self.iterations.contains_key(s) {
                return Err(Error::param(format!("solver {} needs 'iterations'", s.name())));
            }
        }
        Ok(())
    }

    /// Loads (train, test) as described by the plan.
    pub fn load(&self) -> Result<(Dataset, Dataset)> {
        let opts = ParseOptions {
            positive_class: self.positive_class.clone(),
        };
        let read = |p: &Path| -> Result<Dataset> {
            let f = fs::File::open(p).map_err(|e| {
                Error::Data(format!("cannot open {}: {e}", p.display()))
            })?;
            data::parse_libsvm(BufReader::new(f), &opts)
        };
        let (all, holdout) = match (&self.data, &self.test) {
            (DataSource::File(p), TestSource::Holdout(h)) => (read(p)?, Some(*h)),
            (DataSource::Synthetic(spec), TestSource::Holdout(h)) => {
                let spec = SyntheticSpec {
                    n: spec.n + h,
                    ..spec.clone()
                };
                (data::generate(&spec)?, Some(*h))
            }
            (DataSource::File(p), TestSource::File(_)) => (read(p)?, None),
            (DataSource::Synthetic(spec), TestSource::File(_)) => (data::generate(spec)?, None),
        };
        match (holdout, &self.test) {
            (Some(h), _) => {
                if h == 0 || h >= all.len() {
                    return Err(Error::Data(format!(
                        "test_size {h} leaves no training or no test examples out of {}",
                        all.len()
                    )));
                }
                Ok(all.split_at(all.len() - h))
            }
            (None, TestSource::File(p)) => Ok((all, read(p)?)),
            (None, TestSource::Holdout(_)) => unreachable!(),
        }
    }
}

/// One completed run of a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub solver: Solver,
    pub seed: u64,
    pub record: RunRecord,
}

/// Per-solver, per-budget summary of test error across repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub solver: String,
    pub budget: u64,
    pub runs: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

pub const AGGREGATE_CSV_HEADER: &str = "solver,budget,runs,median_test_zero_one,q1,q3,iqr";

#[derive(Debug, Clone, PartialEq)]
pub struct PlanReport {
    pub runs: Vec<RunOutcome>,
    /// `(solver, seed, message)` for runs that failed.
    pub failures: Vec<(Solver, u64, String)>,
    pub nu: Option<f64>,
    pub calibration: Option<Calibration>,
    pub aggregate: Vec<AggregateRow>,
}

/// Linear-interpolation quantile of sorted values.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median and quartiles of test error at budgets `n·2^k`, for each solver.
/// A run contributes at a budget once it has a sample within it.
pub fn aggregate(runs: &[(String, &RunRecord)], n: u64) -> Vec<AggregateRow> {
    let mut by_solver: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for (s, r) in runs {
        by_solver.entry(s.as_str()).or_default().push(r);
    }
    let max_cost = runs
        .iter()
        .filter_map(|(_, r)| r.samples.last().map(|s| s.train_kernel_evals))
        .max()
        .unwrap_or(0);
    let mut budgets = Vec::new();
    let mut b = n.max(1);
    loop {
        budgets.push(b);
        if b >= max_cost {
            break;
        }
        b = b.saturating_mul(2);
    }
    let mut rows = Vec::new();
    for (solver, records) in by_solver {
        for &budget in &budgets {
            let mut errs: Vec<f64> = records
                .iter()
                .filter_map(|r| r.test_error_at_budget(budget))
                .collect();
            if errs.is_empty() {
                continue;
            }
            errs.sort_by(f64::total_cmp);
            rows.push(AggregateRow {
                solver: solver.to_string(),
                budget,
                runs: errs.len(),
                median: quantile(&errs, 0.5),
                q1: quantile(&errs, 0.25),
                q3: quantile(&errs, 0.75),
            });
        }
    }
    rows
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::new();
    out.push_str(AGGREGATE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.solver,
            r.budget,
            r.runs,
            r.median,
            r.q1,
            r.q3,
            r.q3 - r.q1
        );
    }
    out
}

fn run_one(
    solver: Solver,
    seed: u64,
    plan: &BenchPlan,
    nu: Option<f64>,
    train: &Dataset,
    test: &Dataset,
) -> Result<RunRecord> {
    let oracle = KernelOracle::new(plan.kernel.clone());
    let monitor = MonitorConfig {
        test: Some(test),
        wall_clock: plan.wall_clock,
        growth: None,
    };
    let iters = |s: Solver| plan.iterations.get(&s).copied().unwrap_or(0);
    let lambda = plan.lambda.unwrap_or(0.0);
    let record = match solver {
        Solver::Sbp => {
            let mut cfg = SbpConfig::new(nu.unwrap_or(0.0), iters(solver), seed);
            cfg.use_bias = plan.bias;
            sbp::train(train, &oracle, &cfg, monitor)?.1
        }
        Solver::Pegasos => {
            let mut cfg = PegasosConfig::new(lambda, iters(solver), seed);
            cfg.averaged = plan.averaged;
            baselines::pegasos_train(train, &oracle, &cfg, monitor)?.1
        }
        Solver::Sdca => {
            baselines::sdca_train(train, &oracle, &SdcaConfig::new(lambda, iters(solver), seed), monitor)?.1
        }
        Solver::Perceptron => {
            baselines::perceptron_train(train, &oracle, seed, plan.passes, monitor)?.1
        }
    };
    Ok(record)
}

/// Runs every (solver, seed) pair on already-loaded data. Individual
/// failures are collected, not propagated.
pub fn execute_plan(plan: &BenchPlan, train: &Dataset, test: &Dataset) -> Result<PlanReport> {
    if test.is_empty() {
        return Err(Error::Data("bench plans need a nonempty test set".into()));
    }
    let calibration = match plan.nu {
        Some(NuSetting::Calibrated { budget }) if plan.solvers.contains(&Solver::Sbp) => {
            let n = train.len() as u64;
            let oracle = KernelOracle::new(plan.kernel.clone());
            Some(calibrate_nu(
                train,
                &oracle,
                plan.lambda.unwrap_or(0.0),
                budget.unwrap_or(50 * n * n),
                plan.seed,
            )?)
        }
        _ => None,
    };
    let nu = match plan.nu {
        Some(NuSetting::Fixed(v)) => Some(v),
        _ => calibration.map(|c| c.nu),
    };
    let mut tasks: Vec<(Solver, u64)> = Vec::new();
    for &s in &plan.solvers {
        for r in 0..plan.repeat as u64 {
            tasks.push((s, plan.seed + r));
        }
    }
    tasks.sort();
    tasks.dedup();
    let results: Vec<(Solver, u64, Result<RunRecord>)> = tasks
        .par_iter()
        .map(|&(s, seed)| (s, seed, run_one(s, seed, plan, nu, train, test)))
        .collect();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (solver, seed, r) in results {
        match r {
            Ok(mut record) => {
                record.metadata.dataset = describe_source(&plan.data);
                runs.push(RunOutcome {
                    solver,
                    seed,
                    record,
                })
            }
            Err(e) => failures.push((solver, seed, e.to_string())),
        }
    }
    let named: Vec<(String, &RunRecord)> = runs
        .iter()
        .map(|r| (r.solver.name().to_string(), &r.record))
        .collect();
    let aggregate = aggregate(&named, train.len() as u64);
    Ok(PlanReport {
        runs,
        failures,
        nu,
        calibration,
        aggregate,
    })
}

fn describe_source(d: &DataSource) -> String {
    match d {
        DataSource::File(p) => p.display().to_string(),
        DataSource::Synthetic(s) => format!("{:?}", s),
    }
}

pub fn run_csv_name(solver: Solver, seed: u64) -> String {
    format!("{}_seed{}.csv", solver.name(), seed)
}

/// Loads the data, executes the plan, and writes one CSV per run plus
/// `aggregate.csv` (and `errors.txt` when a run failed) into `plan.out`.
pub fn run_plan(plan: &BenchPlan) -> Result<PlanReport> {
    let (train, test) = plan.load()?;
    let report = execute_plan(plan, &train, &test)?;
    fs::create_dir_all(&plan.out)?;
    for r in &report.runs {
        fs::write(plan.out.join(run_csv_name(r.solver, r.seed)), r.record.to_csv())?;
    }
    fs::write(plan.out.join("aggregate.csv"), aggregate_csv(&report.aggregate))?;
    if !report.failures.is_empty() {
        let mut text = String::new();
        for (s, seed, msg) in &report.failures {
            let _ = writeln!(text, "{} seed {}: {}", s.name(), seed, msg);
        }
        fs::write(plan.out.join("errors.txt"), text)?;
    }
    Ok(report)
}

// ---------------------------------------------------------------- fourier

pub const FOURIER_CSV_HEADER: &str =
    "method,k,feature_inner_products,solver_inner_products,test_zero_one";

#[derive(Debug, Clone, PartialEq)]
pub struct FourierPlan {
    pub k_list: Vec<usize>,
    pub lambda: f64,
    /// Pegasos iterations on the linearized problem.
    pub iterations: u64,
    pub seed: u64,
    /// When set, an exact-kernel SBP run is reported alongside, one row per
    /// recorded sample.
    pub kernel_sbp: Option<SbpConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierRow {
    pub method: String,
    pub k: usize,
    pub feature_inner_products: u64,
    pub solver_inner_products: u64,
    pub test_zero_one: f64,
}

/// Trains linear Pegasos on `k`-pair Fourier features for each `k`, and
/// reports test error against the feature-map cost (`k·n` inner products).
/// One Gaussian kernel evaluation counts as one inner product.
pub fn fourier_plan(
    train: &Dataset,
    test: &Dataset,
    kernel: &KernelKind,
    plan: &FourierPlan,
) -> Result<Vec<FourierRow>> {
    let KernelKind::Gaussian { sigma2 } = *kernel else {
        return Err(Error::param("the Fourier comparison needs a Gaussian kernel"));
    };
    if plan.k_list.is_empty() {
        return Err(Error::param("k list is empty"));
    }
    train.require_nonempty()?;
    test.require_nonempty()?;
    let dimension = train.dimension().max(test.dimension()).max(1);
    let mut rows = Vec::new();
    for &k in &plan.k_list {
        let map = crate::fourier::FourierMap::new(plan.seed, k, dimension, sigma2)?;
        let lin_train = map.linearize(train)?;
        let feature_cost = map.inner_products();
        let lin_test = map.linearize(test)?;
        let oracle = KernelOracle::linear();
        let cfg = PegasosConfig::new(plan.lambda, plan.iterations, plan.seed);
        let (model, _) = baselines::pegasos_train(&lin_train, &oracle, &cfg, MonitorConfig::default())?;
        // Collapse to an explicit weight vector so testing costs no kernel calls.
        let mut w = vec![0.0; 2 * k];
        for (j, a) in model.support() {
            let x = lin_train.get(j);
            for (&i, &v) in x.indices().iter().zip(x.values()) {
                w[i as usize] += a * x.y() * v;
            }
        }
        let margins: Vec<f64> = lin_test
            .examples()
            .iter()
            .map(|x| {
                x.y() * x
                    .indices()
                    .iter()
                    .zip(x.values())
                    .map(|(&i, &v)| w[i as usize] * v)
                    .sum::<f64>()
            })
            .collect();
        rows.push(FourierRow {
            method: "fourier_pegasos".into(),
            k,
            feature_inner_products: feature_cost,
            solver_inner_products: model.kernel_evals,
            test_zero_one: data::losses_from_margins(&margins).zero_one,
        });
    }
    if let Some(cfg) = &plan.kernel_sbp {
        let oracle = KernelOracle::new(kernel.clone());
        let monitor = MonitorConfig {
            test: Some(test),
            ..Default::default()
        };
        let (_, record) = sbp::train(train, &oracle, cfg, monitor)?;
        for s in &record.samples {
            rows.push(FourierRow {
                method: "kernel_sbp".into(),
                k: 0,
                feature_inner_products: 0,
                solver_inner_products: s.train_kernel_evals,
                test_zero_one: s.test_zero_one,
            });
        }
    }
    Ok(rows)
}

pub fn fourier_csv(rows: &[FourierRow]) -> String {
    let mut out = String::new();
    out.push_str(FOURIER_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.method, r.k, r.feature_inner_products, r.solver_inner_products, r.test_zero_one
        );
    }
    out
}
