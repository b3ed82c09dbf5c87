//! Comparison solvers: kernelized Pegasos, stochastic dual coordinate
//! ascent, and the online Perceptron. All of them express their predictor as
//! `w = Σ α_i y_i Φ(x_i)` and pay for kernel rows through the same counter.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::KernelOracle;
use crate::model::TrainedModel;
use crate::record::{mean_hinge, Monitor, MonitorConfig, RunMetadata, RunRecord, RNG_IDENTITY};

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("lambda must be > 0, got {lambda}")))
    }
}

fn meta(solver: &str, config: String, seed: u64) -> RunMetadata {
    RunMetadata {
        solver: solver.into(),
        config,
        seed,
        dataset: String::new(),
        rng: RNG_IDENTITY.into(),
    }
}

/// Regularized primal `λ/2‖w‖² + L̂(w)` from coefficients and responses.
pub fn primal_value(lambda: f64, alpha: &[f64], responses: &[f64]) -> f64 {
    let norm_sq: f64 = alpha.iter().zip(responses).map(|(a, c)| a * c).sum();
    0.5 * lambda * norm_sq + mean_hinge(responses.iter().copied())
}

// ---------------------------------------------------------------- Pegasos

#[derive(Debug, Clone, PartialEq)]
pub struct PegasosConfig {
    pub lambda: f64,
    pub iterations: u64,
    pub seed: u64,
    /// Return the average iterate instead of the last one.
    pub averaged: bool,
}

impl PegasosConfig {
    pub fn new(lambda: f64, iterations: u64, seed: u64) -> Self {
        PegasosConfig {
            lambda,
            iterations,
            seed,
            averaged: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if self.iterations == 0 {
            return Err(Error::param("iterations must be >= 1"));
        }
        Ok(())
    }
}

/// Step size `1/(λt)`.
pub fn step_size(lambda: f64, t: u64) -> f64 {
    1.0 / (lambda * t as f64)
}

/// Pegasos without projection. The shrink `w ← (1 − 1/t)w` is kept as a
/// scalar `scale` on both coefficients and responses, so only steps that
/// violate the margin pay for a kernel row.
#[derive(Debug, Clone)]
pub struct PegasosState {
    coef: Vec<f64>,
    resp: Vec<f64>,
    scale: f64,
    labels: Vec<f64>,
    row: Vec<f64>,
    alpha_sum: Vec<f64>,
    response_sum: Vec<f64>,
    pub t: u64,
}

impl PegasosState {
    pub fn new(data: &Dataset) -> Result<Self> {
        data.require_nonempty()?;
        let n = data.len();
        Ok(PegasosState {
            coef: vec![0.0; n],
            resp: vec![0.0; n],
            scale: 1.0,
            labels: data.labels(),
            row: vec![0.0; n],
            alpha_sum: vec![0.0; n],
            response_sum: vec![0.0; n],
            t: 0,
        })
    }

    /// Step on example `i`; returns whether it violated the margin.
    pub fn step_on(
        &mut self,
        i: usize,
        data: &Dataset,
        oracle: &KernelOracle,
        lambda: f64,
        track_average: bool,
    ) -> Result<bool> {
        self.t += 1;
        let violated = self.scale * self.resp[i] < 1.0;
        let shrink = 1.0 - 1.0 / self.t as f64;
        if shrink == 0.0 {
            self.coef.iter_mut().for_each(|a| *a = 0.0);
            self.resp.iter_mut().for_each(|c| *c = 0.0);
            self.scale = 1.0;
        } else {
            self.scale *= shrink;
        }
        if violated {
            let add = step_size(lambda, self.t) / self.scale;
            oracle.row_into(data.examples(), data.get(i), &mut self.row)?;
            self.coef[i] += add;
            let yi = self.labels[i];
            for ((c, &y), &k) in self.resp.iter_mut().zip(&self.labels).zip(&self.row) {
                *c += add * yi * y * k;
            }
        }
        if track_average {
            let s = self.scale;
            for (acc, a) in self.alpha_sum.iter_mut().zip(&self.coef) {
                *acc += s * a;
            }
            for (acc, c) in self.response_sum.iter_mut().zip(&self.resp) {
                *acc += s * c;
            }
        }
        Ok(violated)
    }

    pub fn alpha(&self) -> Vec<f64> {
        self.coef.iter().map(|a| a * self.scale).collect()
    }

    pub fn responses(&self) -> Vec<f64> {
        self.resp.iter().map(|c| c * self.scale).collect()
    }

    /// Coefficients and responses of the average iterate.
    pub fn averages(&self) -> (Vec<f64>, Vec<f64>) {
        let t = self.t.max(1) as f64;
        (
            self.alpha_sum.iter().map(|s| s / t).collect(),
            self.response_sum.iter().map(|s| s / t).collect(),
        )
    }

    fn current(&self, averaged: bool) -> (Vec<f64>, Vec<f64>) {
        if averaged {
            self.averages()
        } else {
            (self.alpha(), self.responses())
        }
    }
}

pub fn pegasos_train(
    data: &Dataset,
    oracle: &KernelOracle,
    config: &PegasosConfig,
    monitor: MonitorConfig<'_>,
) -> Result<(TrainedModel, RunRecord)> {
    config.validate()?;
    let start = oracle.evals();
    let mut state = PegasosState::new(data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let desc = format!(
        "lambda={} iterations={} averaged={}",
        config.lambda, config.iterations, config.averaged
    );
    let mut mon = Monitor::new(monitor, data, oracle, meta("pegasos", desc, config.seed));
    let n = data.len();
    for t in 1..=config.iterations {
        let i = rng.random_range(0..n);
        state.step_on(i, data, oracle, config.lambda, config.averaged)?;
        if mon.due(t, config.iterations) {
            let (alpha, resp) = state.current(config.averaged);
            let mut m = TrainedModel::zero(oracle.kind().clone(), data);
            m.alpha = alpha;
            let hinge = mean_hinge(resp.into_iter());
            mon.observe(t, oracle.evals() - start, &m, Some(hinge), t == config.iterations)?;
        }
    }
    let mut model = TrainedModel::zero(oracle.kind().clone(), data);
    model.alpha = state.current(config.averaged).0;
    model.kernel_evals = oracle.evals() - start;
    Ok((model, mon.finish()))
}

// ------------------------------------------------------------------- SDCA

#[derive(Debug, Clone, PartialEq)]
pub struct SdcaConfig {
    pub lambda: f64,
    pub iterations: u64,
    pub seed: u64,
}

impl SdcaConfig {
    pub fn new(lambda: f64, iterations: u64, seed: u64) -> Self {
        SdcaConfig {
            lambda,
            iterations,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if self.iterations == 0 {
            return Err(Error::param("iterations must be >= 1"));
        }
        Ok(())
    }
}

/// Maximizer of `δ(1 − c_i) − ½δ²K_ii` over `α_i + δ ∈ [0, upper]`.
pub fn sdca_delta(alpha_i: f64, c_i: f64, k_ii: f64, upper: f64) -> f64 {
    if k_ii <= 0.0 {
        return 0.0;
    }
    ((1.0 - c_i) / k_ii).clamp(-alpha_i, upper - alpha_i)
}

/// Dual coordinate ascent on `max λ(Σα − ½αᵀQα)` over `[0, 1/(λn)]ⁿ`.
#[derive(Debug, Clone)]
pub struct SdcaState {
    pub alpha: Vec<f64>,
    pub responses: Vec<f64>,
    pub lambda: f64,
    pub upper: f64,
    diag: Vec<f64>,
    labels: Vec<f64>,
    row: Vec<f64>,
}

impl SdcaState {
    /// Caches the kernel diagonal (`n` evaluations).
    pub fn new(data: &Dataset, oracle: &KernelOracle, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        data.require_nonempty()?;
        let n = data.len();
        let diag = data
            .examples()
            .iter()
            .map(|x| oracle.eval(x, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(SdcaState {
            alpha: vec![0.0; n],
            responses: vec![0.0; n],
            lambda,
            upper: 1.0 / (lambda * n as f64),
            diag,
            labels: data.labels(),
            row: vec![0.0; n],
        })
    }

    /// Exact maximization along coordinate `i`; a kernel row is computed
    /// only when the coefficient moves. Returns the applied `δ`.
    pub fn step_on(&mut self, i: usize, data: &Dataset, oracle: &KernelOracle) -> Result<f64> {
        let delta = sdca_delta(self.alpha[i], self.responses[i], self.diag[i], self.upper);
        if delta == 0.0 {
            return Ok(0.0);
        }
        oracle.row_into(data.examples(), data.get(i), &mut self.row)?;
        self.alpha[i] = (self.alpha[i] + delta).clamp(0.0, self.upper);
        let yi = self.labels[i];
        for ((c, &y), &k) in self.responses.iter_mut().zip(&self.labels).zip(&self.row) {
            *c += delta * yi * y * k;
        }
        Ok(delta)
    }

    pub fn dual_value(&self) -> f64 {
        let sum: f64 = self.alpha.iter().sum();
        let quad: f64 = self
            .alpha
            .iter()
            .zip(&self.responses)
            .map(|(a, c)| a * c)
            .sum();
        self.lambda * (sum - 0.5 * quad)
    }

    pub fn primal_value(&self) -> f64 {
        primal_value(self.lambda, &self.alpha, &self.responses)
    }

    pub fn duality_gap(&self) -> f64 {
        self.primal_value() - self.dual_value()
    }

    pub fn norm(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.responses)
            .map(|(a, c)| a * c)
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    pub fn hinge(&self) -> f64 {
        mean_hinge(self.responses.iter().copied())
    }

    pub fn to_model(&self, oracle: &KernelOracle, data: &Dataset) -> TrainedModel {
        let mut m = TrainedModel::zero(oracle.kind().clone(), data);
        m.alpha = self.alpha.clone();
        m
    }
}

pub fn sdca_train(
    data: &Dataset,
    oracle: &KernelOracle,
    config: &SdcaConfig,
    monitor: MonitorConfig<'_>,
) -> Result<(TrainedModel, RunRecord)> {
    config.validate()?;
    let start = oracle.evals();
    let mut state = SdcaState::new(data, oracle, config.lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let desc = format!("lambda={} iterations={}", config.lambda, config.iterations);
    let mut mon = Monitor::new(monitor, data, oracle, meta("sdca", desc, config.seed));
    let n = data.len();
    for t in 1..=config.iterations {
        let i = rng.random_range(0..n);
        state.step_on(i, data, oracle)?;
        if mon.due(t, config.iterations) {
            let m = state.to_model(oracle, data);
            mon.observe(t, oracle.evals() - start, &m, Some(state.hinge()), t == config.iterations)?;
        }
    }
    let mut model = state.to_model(oracle, data);
    model.kernel_evals = oracle.evals() - start;
    Ok((model, mon.finish()))
}

// ------------------------------------------------------------- Perceptron

/// Mistake-driven kernel Perceptron; `counts[i]` is how often example `i`
/// was added to `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronModel {
    pub counts: Vec<u32>,
    pub mistakes: u64,
    pub passes: u32,
    /// More than one pass was made, which the online-to-batch analysis does
    /// not cover.
    pub beyond_theory: bool,
    pub kernel_evals: u64,
}

impl PerceptronModel {
    pub fn support_size(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn to_trained(&self, oracle: &KernelOracle, data: &Dataset) -> TrainedModel {
        let mut m = TrainedModel::zero(oracle.kind().clone(), data);
        m.alpha = self.counts.iter().map(|&c| c as f64).collect();
        m.kernel_evals = self.kernel_evals;
        m
    }
}

pub fn perceptron_train(
    data: &Dataset,
    oracle: &KernelOracle,
    seed: u64,
    passes: u32,
    monitor: MonitorConfig<'_>,
) -> Result<(PerceptronModel, RunRecord)> {
    if passes == 0 {
        return Err(Error::param("passes must be >= 1"));
    }
    data.require_nonempty()?;
    let start = oracle.evals();
    let n = data.len();
    let labels = data.labels();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mon = Monitor::new(
        monitor,
        data,
        oracle,
        meta("perceptron", format!("passes={passes}"), seed),
    );
    let mut counts = vec![0u32; n];
    let mut support: Vec<usize> = Vec::new();
    let mut mistakes = 0u64;
    let total = n as u64 * passes as u64;
    let mut t = 0u64;
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..passes {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let xi = data.get(i);
            let mut score = 0.0;
            for &j in &support {
                score += counts[j] as f64 * labels[j] * oracle.raw(data.get(j), xi)?;
            }
            oracle.charge(support.len() as u64);
            if labels[i] * score <= 0.0 {
                if counts[i] == 0 {
                    support.push(i);
                }
                counts[i] += 1;
                mistakes += 1;
            }
            if mon.due(t, total) {
                let mut m = TrainedModel::zero(oracle.kind().clone(), data);
                m.alpha = counts.iter().map(|&c| c as f64).collect();
                mon.observe(t, oracle.evals() - start, &m, None, t == total)?;
            }
        }
    }
    Ok((
        PerceptronModel {
            counts,
            mistakes,
            passes,
            beyond_theory: passes > 1,
            kernel_evals: oracle.evals() - start,
        },
        mon.finish(),
    ))
}
