//! The stochastic batch perceptron.
//!
//! Projected stochastic supergradient ascent on the slack-constrained
//! objective `f(w)` over the unit ball. The predictor is kept as
//! `w = Σ α_i y_i Φ(x_i)` together with the responses `c_i = y_i⟨w, Φ(x_i)⟩`
//! and the tracked squared norm `r² = ‖w‖²`. Each iteration:
//!
//! 1. finds the water level of the responses under volume `nν`;
//! 2. samples an index uniformly from the covered set;
//! 3. raises that coefficient by `η_t = η₀/√t`, updates `r²` using the old
//!    response, and refreshes every response from one kernel row;
//! 4. rescales `α` and `c` back onto the unit ball when `r > 1`.
//!
//! The returned model is the average iterate divided by its own objective
//! value, so it is directly comparable with regularized solutions.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::KernelOracle;
use crate::model::TrainedModel;
use crate::record::{mean_hinge, Monitor, MonitorConfig, RunMetadata, RunRecord, RNG_IDENTITY};
use crate::waterfill::{self, PivotRule};

#[derive(Debug, Clone, PartialEq)]
pub struct SbpConfig {
    /// Slack budget per example; the total volume is `n·ν`.
    pub nu: f64,
    pub iterations: u64,
    pub seed: u64,
    pub use_bias: bool,
    pub eta0_override: Option<f64>,
    /// `r²` is recomputed exactly from `Σ α_i c_i` this often.
    pub norm_recompute_period: u64,
    pub pivot: PivotRule,
}

impl SbpConfig {
    pub fn new(nu: f64, iterations: u64, seed: u64) -> Self {
        SbpConfig {
            nu,
            iterations,
            seed,
            use_bias: false,
            eta0_override: None,
            norm_recompute_period: 1000,
            pivot: PivotRule::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::param(format!("nu must be >= 0, got {}", self.nu)));
        }
        if self.iterations == 0 {
            return Err(Error::param("iterations must be >= 1"));
        }
        if let Some(e) = self.eta0_override {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::param(format!("eta0 must be > 0, got {e}")));
            }
        }
        if self.norm_recompute_period == 0 {
            return Err(Error::param("norm_recompute_period must be >= 1"));
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!(
            "nu={} iterations={} bias={} eta0={} norm_recompute_period={} pivot={:?}",
            self.nu,
            self.iterations,
            self.use_bias,
            self.eta0_override
                .map_or_else(|| "auto".to_string(), |e| e.to_string()),
            self.norm_recompute_period,
            self.pivot
        )
    }
}

/// Optimizer state after `t` iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SbpState {
    pub alpha: Vec<f64>,
    pub responses: Vec<f64>,
    pub norm_sq: f64,
    pub alpha_sum: Vec<f64>,
    pub response_sum: Vec<f64>,
    pub t: u64,
    /// Bias chosen by the last water-fill (0 without bias).
    pub bias: f64,
    pub eta0: f64,
    labels: Vec<f64>,
    row: Vec<f64>,
}

/// What a single iteration did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub index: usize,
    pub eta: f64,
    pub gamma: f64,
    pub projected: bool,
}

/// Initializes the state; computing `η₀ = 1/√(max_i K(x_i,x_i))` costs `n`
/// evaluations unless `eta0_override` is set.
pub fn init(data: &Dataset, oracle: &KernelOracle, config: &SbpConfig) -> Result<SbpState> {
    config.validate()?;
    data.require_nonempty()?;
    if config.use_bias && !data.has_both_classes() {
        return Err(Error::Data(
            "training with a bias needs both classes present".into(),
        ));
    }
    let eta0 = match config.eta0_override {
        Some(e) => e,
        None => {
            let mut max_self = 0.0f64;
            for x in data.examples() {
                max_self = max_self.max(oracle.eval(x, x)?);
            }
            if max_self <= 0.0 {
                return Err(Error::Solver(
                    "all self-kernel values are zero; step size undefined".into(),
                ));
            }
            1.0 / max_self.sqrt()
        }
    };
    let n = data.len();
    Ok(SbpState {
        alpha: vec![0.0; n],
        responses: vec![0.0; n],
        norm_sq: 0.0,
        alpha_sum: vec![0.0; n],
        response_sum: vec![0.0; n],
        t: 0,
        bias: 0.0,
        eta0,
        labels: data.labels(),
        row: vec![0.0; n],
    })
}

impl SbpState {
    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// `‖w‖² = Σ α_i c_i`, computed from the responses without kernel calls.
    pub fn exact_norm_sq(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.responses)
            .map(|(a, c)| a * c)
            .sum()
    }

    /// Runs one iteration.
    pub fn step<R: Rng>(
        &mut self,
        data: &Dataset,
        oracle: &KernelOracle,
        config: &SbpConfig,
        rng: &mut R,
    ) -> Result<StepInfo> {
        let n = self.alpha.len();
        let volume = n as f64 * config.nu;
        self.t += 1;
        let eta = self.eta0 / (self.t as f64).sqrt();

        let (index, gamma) = if config.use_bias {
            self.sample_with_bias(volume, rng)?
        } else {
            let level = waterfill::find_gamma_with(&self.responses, volume, config.pivot)?;
            let support =
                waterfill::support_set(&self.responses, &level, waterfill::level_tolerance(level.gamma));
            (support[rng.random_range(0..support.len())], level.gamma)
        };

        let xi = data.get(index);
        oracle.row_into(data.examples(), xi, &mut self.row)?;
        let yi = self.labels[index];
        let c_old = self.responses[index];

        self.alpha[index] += eta;
        self.norm_sq += 2.0 * eta * c_old + eta * eta * self.row[index];
        for ((c, &y), &k) in self.responses.iter_mut().zip(&self.labels).zip(&self.row) {
            *c += eta * yi * y * k;
        }

        let mut projected = self.project();
        if self.t.is_multiple_of(config.norm_recompute_period) {
            self.norm_sq = self.exact_norm_sq().max(0.0);
            projected |= self.project();
        }

        for (s, a) in self.alpha_sum.iter_mut().zip(&self.alpha) {
            *s += a;
        }
        for (s, c) in self.response_sum.iter_mut().zip(&self.responses) {
            *s += c;
        }
        Ok(StepInfo {
            index,
            eta,
            gamma,
            projected,
        })
    }

    fn project(&mut self) -> bool {
        if self.norm_sq <= 1.0 {
            return false;
        }
        let inv = 1.0 / self.norm_sq.sqrt();
        self.alpha.iter_mut().for_each(|a| *a *= inv);
        self.responses.iter_mut().for_each(|c| *c *= inv);
        self.norm_sq = 1.0;
        true
    }

    fn sample_with_bias<R: Rng>(&mut self, volume: f64, rng: &mut R) -> Result<(usize, f64)> {
        let wb = waterfill::find_gamma_and_bias(&self.responses, &self.labels, volume)?;
        self.bias = wb.bias;
        let tol = waterfill::level_tolerance(wb.gamma);
        let class = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let items = self
            .responses
            .iter()
            .zip(&self.labels)
            .enumerate()
            .filter(move |(_, (_, &y))| y == class)
            .map(move |(i, (&c, &y))| (i, c + y * wb.bias));
        let support = waterfill::support_of(items, wb.gamma, tol);
        debug_assert!(!support.is_empty());
        Ok((support[rng.random_range(0..support.len())], wb.gamma))
    }

    /// Averages `(ᾱ, c̄)` of the iterates so far.
    pub fn averages(&self) -> (Vec<f64>, Vec<f64>) {
        let t = self.t.max(1) as f64;
        (
            self.alpha_sum.iter().map(|s| s / t).collect(),
            self.response_sum.iter().map(|s| s / t).collect(),
        )
    }

    /// Level (and bias) of the average iterate. The averaged responses are
    /// the responses of `w̄` by linearity, so this costs no kernel calls.
    pub fn averaged_level(&self, config: &SbpConfig) -> Result<(f64, f64)> {
        let (_, cbar) = self.averages();
        let volume = cbar.len() as f64 * config.nu;
        if config.use_bias {
            let wb = waterfill::find_gamma_and_bias(&cbar, &self.labels, volume)?;
            Ok((wb.gamma, wb.bias))
        } else {
            Ok((waterfill::find_gamma_with(&cbar, volume, config.pivot)?.gamma, 0.0))
        }
    }

    /// The averaged predictor divided by its objective value `γ`. Fails when
    /// `γ ≤ 0`.
    pub fn rescaled_model(&self, data: &Dataset, oracle: &KernelOracle, config: &SbpConfig) -> Result<(TrainedModel, f64)> {
        let (gamma, bias) = self.averaged_level(config)?;
        if gamma <= 0.0 {
            return Err(Error::Solver(format!(
                "no positive margin achieved (gamma = {gamma}); solution not rescalable"
            )));
        }
        let (abar, _) = self.averages();
        let mut m = TrainedModel::zero(oracle.kind().clone(), data);
        m.alpha = abar.iter().map(|a| a / gamma).collect();
        m.use_bias = config.use_bias;
        m.bias = bias / gamma;
        m.kernel_evals = oracle.evals();
        Ok((m, gamma))
    }

    /// Current averaged predictor for progress reporting, rescaled when its
    /// level is positive, with its training hinge loss.
    fn progress_model(&self, data: &Dataset, oracle: &KernelOracle, config: &SbpConfig) -> Result<(TrainedModel, f64)> {
        let (gamma, bias) = self.averaged_level(config)?;
        let (abar, cbar) = self.averages();
        let s = if gamma > 0.0 { 1.0 / gamma } else { 1.0 };
        let mut m = TrainedModel::zero(oracle.kind().clone(), data);
        m.alpha = abar.iter().map(|a| a * s).collect();
        m.use_bias = config.use_bias;
        m.bias = bias * s;
        let hinge = mean_hinge(
            cbar.iter()
                .zip(&self.labels)
                .map(|(c, y)| (c + y * bias) * s),
        );
        Ok((m, hinge))
    }
}

/// Trains for `config.iterations` steps and returns the rescaled average
/// iterate. Training costs exactly `n·T` evaluations plus `n` for `η₀`.
pub fn train(
    data: &Dataset,
    oracle: &KernelOracle,
    config: &SbpConfig,
    monitor: MonitorConfig<'_>,
) -> Result<(TrainedModel, RunRecord)> {
    let start_evals = oracle.evals();
    let mut state = init(data, oracle, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let meta = RunMetadata {
        solver: "sbp".into(),
        config: config.describe(),
        seed: config.seed,
        dataset: String::new(),
        rng: RNG_IDENTITY.into(),
    };
    let mut mon = Monitor::new(monitor, data, oracle, meta);
    for t in 1..=config.iterations {
        state.step(data, oracle, config, &mut rng)?;
        if mon.due(t, config.iterations) {
            let (m, hinge) = state.progress_model(data, oracle, config)?;
            mon.observe(
                t,
                oracle.evals() - start_evals,
                &m,
                Some(hinge),
                t == config.iterations,
            )?;
        }
    }
    let (mut model, _) = state.rescaled_model(data, oracle, config)?;
    model.kernel_evals = oracle.evals() - start_evals;
    Ok((model, mon.finish()))
}

/// Outcome of checking the rescaling guarantee against a reference `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaleReport {
    pub norm: f64,
    pub hinge: f64,
    pub norm_bound: f64,
    pub loss_bound: f64,
    pub norm_ok: bool,
    pub loss_ok: bool,
}

/// Checks `‖w‖ ≤ ‖u‖/(1 − ε̄‖u‖)` and `L̂(w) ≤ L̂(u)/(1 − ε̄‖u‖)` for a
/// rescaled model `w`, given the reference norm and loss and the
/// suboptimality `ε̄` of the unscaled solution. Costs `support × n`
/// evaluations.
pub fn rescale_check(
    model: &TrainedModel,
    data: &Dataset,
    oracle: &KernelOracle,
    reference_norm: f64,
    reference_loss: f64,
    eps_bar: f64,
) -> Result<RescaleReport> {
    let n = data.len();
    if model.n() != n {
        return Err(Error::Data("model and dataset sizes differ".into()));
    }
    let labels = data.labels();
    let mut scores = vec![0.0; n];
    let mut row = vec![0.0; n];
    let mut norm_sq = 0.0;
    for (j, a) in model.support() {
        oracle.row_into(data.examples(), data.get(j), &mut row)?;
        let w = a * labels[j];
        for (s, k) in scores.iter_mut().zip(&row) {
            *s += w * k;
        }
    }
    for (j, a) in model.support() {
        norm_sq += a * labels[j] * scores[j];
    }
    let norm = norm_sq.max(0.0).sqrt();
    let hinge = mean_hinge(
        scores
            .iter()
            .zip(&labels)
            .map(|(s, y)| y * (s + model.bias)),
    );
    let shrink = 1.0 - eps_bar * reference_norm;
    let factor = if shrink > 0.0 { 1.0 / shrink } else { f64::INFINITY };
    let norm_bound = factor * reference_norm;
    let loss_bound = factor * reference_loss;
    let slack = 1e-9;
    Ok(RescaleReport {
        norm,
        hinge,
        norm_bound,
        loss_bound,
        norm_ok: norm <= norm_bound * (1.0 + slack) + slack,
        loss_ok: hinge <= loss_bound * (1.0 + slack) + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate, SyntheticKind, SyntheticSpec};
    use crate::kernels::{GramMatrix, Label, SparseExample};

    fn line(points: &[(f64, Label)]) -> Dataset {
        Dataset::new(
            points
                .iter()
                .map(|&(x, l)| SparseExample::dense(&[x], l).unwrap())
                .collect(),
        )
    }

    #[test]
    fn eta0_from_max_self_kernel() {
        let d = line(&[(1.0, Label::Positive), (-2.0, Label::Negative)]);
        let k = KernelOracle::linear();
        let s = init(&d, &k, &SbpConfig::new(0.0, 1, 0)).unwrap();
        assert_eq!(s.eta0, 0.5);
        assert_eq!(k.evals(), 2);

        let g = KernelOracle::gaussian(1.0).unwrap();
        assert_eq!(init(&d, &g, &SbpConfig::new(0.0, 1, 0)).unwrap().eta0, 1.0);

        let mut cfg = SbpConfig::new(0.0, 1, 0);
        cfg.eta0_override = Some(0.1);
        let k2 = KernelOracle::linear();
        assert_eq!(init(&d, &k2, &cfg).unwrap().eta0, 0.1);
        assert_eq!(k2.evals(), 0);
    }

    #[test]
    fn init_errors() {
        let k = KernelOracle::linear();
        assert!(matches!(
            init(&Dataset::default(), &k, &SbpConfig::new(0.0, 1, 0)),
            Err(Error::EmptyInput)
        ));
        let one_class = line(&[(1.0, Label::Positive), (2.0, Label::Positive)]);
        let mut cfg = SbpConfig::new(0.1, 1, 0);
        cfg.use_bias = true;
        assert!(init(&one_class, &k, &cfg).is_err());
        assert!(init(&one_class, &k, &SbpConfig::new(-1.0, 1, 0)).is_err());
        assert!(init(&one_class, &k, &SbpConfig::new(0.0, 0, 0)).is_err());
    }

    #[test]
    fn single_step_trace() {
        let d = line(&[(1.0, Label::Positive)]);
        let k = KernelOracle::linear();
        let cfg = SbpConfig::new(0.0, 1, 0);
        let mut s = init(&d, &k, &cfg).unwrap();
        let info = s.step(&d, &k, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(info.index, 0);
        assert_eq!(info.gamma, 0.0);
        assert!(!info.projected);
        assert_eq!(s.alpha, vec![1.0]);
        assert_eq!(s.responses, vec![1.0]);
        assert_eq!(s.norm_sq, 1.0);
    }

    #[test]
    fn norm_update_uses_previous_response() {
        // Two steps on the same point: r² = 1 after step one, then with
        // η₂ = 1/√2, r² = 1 + 2η₂·1 + η₂² = (1 + η₂)², which projects.
        let d = line(&[(1.0, Label::Positive)]);
        let k = KernelOracle::linear();
        let cfg = SbpConfig::new(0.0, 2, 0);
        let mut s = init(&d, &k, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        s.step(&d, &k, &cfg, &mut rng).unwrap();
        s.norm_sq = s.exact_norm_sq();
        let info = s.step(&d, &k, &cfg, &mut rng).unwrap();
        assert!(info.projected);
        assert!((s.norm_sq - 1.0).abs() < 1e-15);
        assert!((s.alpha[0] - 1.0).abs() < 1e-15);
        assert!((s.exact_norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn separable_pair_reaches_margin() {
        let d = line(&[(1.0, Label::Positive), (-1.0, Label::Negative)]);
        let k = KernelOracle::linear();
        let cfg = SbpConfig::new(0.0, 100, 3);
        let mut s = init(&d, &k, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..100 {
            s.step(&d, &k, &cfg, &mut rng).unwrap();
        }
        let (gamma, _) = s.averaged_level(&cfg).unwrap();
        assert!(gamma >= 0.9, "gamma = {gamma}");
    }

    #[test]
    fn single_iteration_touches_one_coefficient() {
        let d = line(&[(1.0, Label::Positive), (-1.0, Label::Negative), (2.0, Label::Positive)]);
        let k = KernelOracle::linear();
        let (m, _) = train(&d, &k, &SbpConfig::new(0.0, 1, 0), MonitorConfig::default()).unwrap();
        assert!(m.support_size() <= 1);
    }

    #[test]
    fn cost_is_n_per_iteration() {
        let d = generate(&SyntheticSpec {
            kind: SyntheticKind::TwoGaussians {
                separation: 2.0,
                noise_rate: 0.1,
            },
            n: 40,
            dimension: 2,
            seed: 1,
        })
        .unwrap();
        let k = KernelOracle::gaussian(1.0).unwrap();
        let cfg = SbpConfig::new(0.05, 30, 2);
        let mut s = init(&d, &k, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut last = k.evals();
        for _ in 0..30 {
            s.step(&d, &k, &cfg, &mut rng).unwrap();
            assert_eq!(k.evals() - last, 40);
            last = k.evals();
        }
        let k2 = KernelOracle::gaussian(1.0).unwrap();
        let (m, rec) = train(&d, &k2, &cfg, MonitorConfig::default()).unwrap();
        assert_eq!(m.kernel_evals, 40 * 30 + 40);
        assert_eq!(k2.evals(), m.kernel_evals);
        assert_eq!(rec.samples.last().unwrap().train_kernel_evals, m.kernel_evals);
    }

    #[test]
    fn zero_margin_is_rejected() {
        // Identical inputs with opposite labels: no positive margin exists.
        let d = line(&[(1.0, Label::Positive), (1.0, Label::Negative)]);
        let k = KernelOracle::linear();
        let err = train(&d, &k, &SbpConfig::new(0.0, 20, 0), MonitorConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Solver(_)));
    }

    #[test]
    fn bias_sampling_balances_classes() {
        let d = line(&[
            (3.0, Label::Positive),
            (4.0, Label::Positive),
            (5.0, Label::Positive),
            (1.0, Label::Negative),
        ]);
        let k = KernelOracle::linear();
        let mut cfg = SbpConfig::new(0.0, 400, 11);
        cfg.use_bias = true;
        let mut s = init(&d, &k, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pos = 0;
        for _ in 0..400 {
            let info = s.step(&d, &k, &cfg, &mut rng).unwrap();
            if d.get(info.index).y() > 0.0 {
                pos += 1;
            }
        }
        assert!((150..=250).contains(&pos), "positive draws: {pos}");
    }

    #[test]
    fn gram_mode_matches_explicit_features() {
        let pts = [(0.5, Label::Positive), (-1.5, Label::Negative), (2.0, Label::Positive)];
        let d = line(&pts);
        let n = pts.len();
        let mut entries = Vec::new();
        for a in &pts {
            for b in &pts {
                entries.push(a.0 * b.0);
            }
        }
        let gram = KernelOracle::gram(GramMatrix::new(n, entries).unwrap());
        let handles = Dataset::new(
            pts.iter()
                .enumerate()
                .map(|(i, &(_, l))| SparseExample::gram_ref(i, l))
                .collect(),
        );
        let cfg = SbpConfig::new(0.1, 50, 5);
        let (a, _) = train(&d, &KernelOracle::linear(), &cfg, MonitorConfig::default()).unwrap();
        let (b, _) = train(&handles, &gram, &cfg, MonitorConfig::default()).unwrap();
        assert_eq!(a.alpha, b.alpha);
        assert_eq!(a.kernel_evals, b.kernel_evals);
    }

    #[test]
    fn rescale_check_at_exact_optimum() {
        // The pair ±1 on a line: u = 1 has margin 1, norm 1, zero loss.
        let d = line(&[(1.0, Label::Positive), (-1.0, Label::Negative)]);
        let k = KernelOracle::linear();
        let mut m = TrainedModel::zero(KernelKind::Linear, &d);
        m.alpha = vec![0.5, 0.5];
        let r = rescale_check(&m, &d, &k, 1.0, 0.0, 0.0).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-15);
        assert_eq!(r.hinge, 0.0);
        assert!(r.norm_ok && r.loss_ok);
        assert_eq!(k.evals(), 4);
    }

    use crate::kernels::KernelKind;
}
