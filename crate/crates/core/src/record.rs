//! Learning-progress records and their CSV form.

use std::fmt::Write as _;
use std::time::Instant;

use crate::data::{self, Dataset};
use crate::error::Result;
use crate::kernels::KernelOracle;
use crate::model::TrainedModel;

/// Identity of the generator driving all sampling in training runs.
pub const RNG_IDENTITY: &str = "ChaCha8Rng::seed_from_u64";

/// Column header of a run CSV.
pub const RUN_CSV_HEADER: &str =
    "iteration,train_kernel_evals,eval_kernel_evals,empirical_hinge,test_zero_one,wall_clock_ns";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMetadata {
    pub solver: String,
    /// Free-form `key=value` description of the solver configuration.
    pub config: String,
    pub seed: u64,
    pub dataset: String,
    pub rng: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub iteration: u64,
    /// Training-counter value when the sample was taken.
    pub train_kernel_evals: u64,
    /// Cumulative evaluations spent on measurement (test error, and training
    /// hinge where it is not free).
    pub eval_kernel_evals: u64,
    pub empirical_hinge: f64,
    /// `NaN` when no test set was supplied.
    pub test_zero_one: f64,
    /// Zero unless wall-clock recording was requested.
    pub wall_clock_ns: u64,
}

/// Time series of a single training run, sorted by iteration with strictly
/// increasing training cost.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunRecord {
    pub metadata: RunMetadata,
    pub samples: Vec<Sample>,
}

impl RunRecord {
    pub fn new(metadata: RunMetadata) -> Self {
        RunRecord {
            metadata,
            samples: Vec::new(),
        }
    }

    /// Appends a sample unless it adds no training cost over the previous
    /// one; with `replace_tied`, such a sample overwrites its predecessor.
    pub fn push(&mut self, s: Sample, replace_tied: bool) {
        match self.samples.last_mut() {
            Some(last) if s.train_kernel_evals <= last.train_kernel_evals => {
                if replace_tied && s.iteration > last.iteration {
                    *last = s;
                }
            }
            _ => self.samples.push(s),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.samples.len() + 1));
        out.push_str(RUN_CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.iteration,
                s.train_kernel_evals,
                s.eval_kernel_evals,
                s.empirical_hinge,
                s.test_zero_one,
                s.wall_clock_ns
            );
        }
        out
    }

    /// Test error of the last sample taken within `budget` training
    /// evaluations.
    pub fn test_error_at_budget(&self, budget: u64) -> Option<f64> {
        self.samples
            .iter()
            .take_while(|s| s.train_kernel_evals <= budget)
            .last()
            .map(|s| s.test_zero_one)
    }
}

/// What a training run measures while it runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct MonitorConfig<'a> {
    pub test: Option<&'a Dataset>,
    pub wall_clock: bool,
    /// Growth factor of the geometric sampling schedule (default 2).
    pub growth: Option<f64>,
}

/// Takes samples at geometrically spaced iterations plus the final one.
/// Measurement uses its own kernel counter.
pub struct Monitor<'a> {
    cfg: MonitorConfig<'a>,
    train: &'a Dataset,
    eval_oracle: KernelOracle,
    next_due: f64,
    start: Instant,
    record: RunRecord,
}

impl<'a> Monitor<'a> {
    pub fn new(
        cfg: MonitorConfig<'a>,
        train: &'a Dataset,
        oracle: &KernelOracle,
        metadata: RunMetadata,
    ) -> Self {
        Monitor {
            cfg,
            train,
            eval_oracle: oracle.fresh(),
            next_due: 1.0,
            start: Instant::now(),
            record: RunRecord::new(metadata),
        }
    }

    /// Whether iteration `t` of `total` should be sampled.
    pub fn due(&mut self, t: u64, total: u64) -> bool {
        if t == total {
            return true;
        }
        if (t as f64) >= self.next_due {
            let g = self.cfg.growth.unwrap_or(2.0).max(1.0 + 1e-9);
            while self.next_due <= t as f64 {
                self.next_due = (self.next_due * g).max(self.next_due + 1.0);
            }
            return true;
        }
        false
    }

    /// Records the current model. `hinge` is the training hinge loss when the
    /// caller has it for free; otherwise it is measured on the eval counter.
    pub fn observe(
        &mut self,
        t: u64,
        train_evals: u64,
        model: &TrainedModel,
        hinge: Option<f64>,
        is_final: bool,
    ) -> Result<()> {
        let hinge = match hinge {
            Some(h) => h,
            None => data::evaluate(model, self.train, self.train, &self.eval_oracle)?.hinge,
        };
        let test_zero_one = match self.cfg.test {
            Some(test) if !test.is_empty() => {
                data::evaluate(model, self.train, test, &self.eval_oracle)?.zero_one
            }
            _ => f64::NAN,
        };
        let wall_clock_ns = if self.cfg.wall_clock {
            self.start.elapsed().as_nanos() as u64
        } else {
            0
        };
        self.record.push(
            Sample {
                iteration: t,
                train_kernel_evals: train_evals,
                eval_kernel_evals: self.eval_oracle.evals(),
                empirical_hinge: hinge,
                test_zero_one,
                wall_clock_ns,
            },
            is_final,
        );
        Ok(())
    }

    pub fn finish(self) -> RunRecord {
        self.record
    }
}

/// Mean hinge loss of signed margins.
pub(crate) fn mean_hinge(margins: impl Iterator<Item = f64>) -> f64 {
    let h: Vec<f64> = margins.map(data::hinge).collect();
    if h.is_empty() {
        0.0
    } else {
        data::pairwise_sum(&h) / h.len() as f64
    }
}
